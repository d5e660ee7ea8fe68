#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sps/solver.hpp"

namespace sps {

/// eps = lambda^{(p-2)/(4(3-p))}. Rejects lambda <= 0.
double eps_of_lambda(double lambda, double p);
/// Inverse of eps_of_lambda. Rejects eps <= 0.
double lambda_of_eps(double eps, double p);

/// v(r) = lambda^{1/(2(3-p))} u(lambda^{(p-2)/(4(3-p))} r), resampled on u's grid.
RadialFunction rescale_u_to_v(const RadialFunction& u, double lambda, double p);
/// u(r) = lambda^{-1/(2(3-p))} v(lambda^{-(p-2)/(4(3-p))} r).
RadialFunction rescale_v_to_u(const RadialFunction& v, double lambda, double p);

struct LimitProjection {
  double t = 1.0;       ///< fiber maximizer of the eps = 0 energy
  double energy = 0.0;  ///< limit energy of t^2 v(t r)
};

/// Dilation of a solution with eps > 0 onto the zero-mass manifold.
LimitProjection project_to_limit_manifold(const Solution& v);

struct EDistance {
  double value = 0.0;                ///< sqrt(A + sqrt(C)) of v - w
  double gradient = 0.0;             ///< ||grad(v - w)||_2
  double potential_gradient = 0.0;   ///< ||grad(phi_v - phi_w)||_2 over all of R^3
};

/// Coulomb-Sobolev distance of two profiles on a common grid. The potential
/// gradient includes the exterior of the grid, where phi_v - phi_w is the field
/// of a point charge.
EDistance e_distance(const RadialFunction& v, const RadialFunction& w);

/// Least-squares slope of -log u over r in [0.5, 0.8] r_max. When u drops below
/// the floating-point floor inside that window the fit moves to [0.3, 0.5] r_max
/// once; throws std::domain_error("tail below floating-point floor") if that
/// window is also unusable.
double decay_rate(const RadialFunction& u);

struct SweepRow {
  double eps = 0.0;
  std::optional<double> lambda;
  double m_eps = 0.0;
  double gap = 0.0;
  double eps_times_B = 0.0;
  double t_proj = 1.0;
  double e_dist = 0.0;
  double decay_rate = 0.0;  ///< NaN when the tail is unusable
  double energy_at_projection = 0.0;
  double min_m_functional = 0.0;
  int iters = 0;
  bool converged = true;
};

struct SweepChecks {
  bool gap_positive = true;
  bool gap_nonincreasing = true;
  bool eps_b_nonincreasing = true;
  bool t_proj_in_unit_interval = true;
  bool t_proj_nonincreasing = true;  ///< of |t_proj - 1|
  bool e_dist_nonincreasing = true;
  bool sandwich = true;
  bool all_converged = true;

  bool all() const;
};

struct SweepReport {
  double p = 4.0;
  std::vector<SweepRow> rows;  ///< descending eps, ending with eps = 0
  double m_inf = 0.0;
  double e_norm_inf = 0.0;
  double slope = 0.0;  ///< log(gap) vs log(eps) over the three smallest positive eps
  double eta = 0.0;    ///< smallest M(u) over all manifold iterates of all solves
  bool partial = false;
  std::vector<std::string> failures;
  SweepChecks checks;
  std::optional<Solution> reference;  ///< the eps = 0 solution
};

struct SweepOptions {
  bool continuation = true;
  /// Worker threads for the eps > 0 rows; ignored with continuation.
  int jobs = 1;
  /// Relative slack of the monotonicity checks.
  double slack = 0.05;
};

/// Solves eps = 0 first, then every positive eps from the smallest upward,
/// each starting from the previous profile, and fills the diagnostics.
SweepReport sweep(double p, std::span<const double> eps_list, const SolverConfig& config,
                  const SweepOptions& options = {});

/// Recomputes slope and checks from the rows, e.g. after loading a report.
void evaluate_sweep(SweepReport& report, double slack = 0.05);

struct LocalLimitRow {
  double lambda = 0.0;
  double m = 0.0;
  double coulomb = 0.0;  ///< lambda * C / 4, the Coulomb share of the energy
  double distance = 0.0;  ///< relative sup distance to the lambda = 0 profile
};

struct LocalLimitReport {
  double p = 4.0;
  double m_local = 0.0;
  std::vector<LocalLimitRow> rows;  ///< in the order of lambda_list
  bool distance_decreasing = true;
  bool energy_above_local = true;
};

/// Solves -Lap u + u + lambda phi_u u = u^{p-1} for each lambda (decreasing,
/// at most 1) and compares with the local ground state of -Lap u + u = u^{p-1}.
LocalLimitReport local_limit_study(double p, std::span<const double> lambda_list, const SolverConfig& config);

}  // namespace sps
