#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sps/functionals.hpp"
#include "sps/radial.hpp"

namespace sps {

struct GridSpec {
  int n = 8001;
  double r_max = 60.0;
  double stretch = 6.0;

  GridPtr build() const { return make_grid(n, r_max, stretch); }
};

/// a * exp(-(r / width)^2)
struct GaussianInit {
  double amplitude = 1.0;
  double width = 1.0;
};

/// Start from a given profile (loaded from disk or a previous solution);
/// resampled when its grid differs from the solver grid.
struct ProfileInit {
  RadialFunction profile;
};

using InitialGuess = std::variant<GaussianInit, ProfileInit>;

struct DescentOptions {
  double initial_step = 0.5;
  double growth = 1.5;
  double max_step = 2.0;
  double backtrack = 0.5;
  double min_step = 1e-12;
  double armijo = 1e-4;
  /// Preconditioner shift sigma; the operator is -Lap + max(eps, sigma).
  double shift = 1.0;
};

struct SolverConfig {
  GridSpec grid;
  double tol_residual = 1e-8;
  int max_iters = 5000;
  InitialGuess init = GaussianInit{};
  DescentOptions descent;

  void validate() const;
};

/// Relative residuals: identities are divided by A + B + C + D, the ODE
/// residual by max |u|^{p-1}.
struct Residuals {
  double nehari = 0.0;
  double pohozaev = 0.0;
  double manifold = 0.0;
  double ode_sup = 0.0;
};

struct Solution {
  ProblemParams params;
  RadialFunction u;
  RadialFunction phi;
  EnergyBreakdown bd;
  double m = 0.0;
  Residuals residuals;
  int iters = 0;
  bool converged = false;
  /// Smallest M(u) = A + C seen over the accepted manifold iterates.
  double min_m_functional = 0.0;
  /// Energy of every accepted iterate, starting with the projected initial guess.
  std::vector<double> energy_history;
};

/// Breakdown with the Coulomb part multiplied by the coupling, which is what
/// the scalar functionals need for the problem at hand.
EnergyBreakdown effective_breakdown(const EnergyBreakdown& bd, const ProblemParams& params);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// max_iters reached (or the line search stalled) before the tolerances were
/// met. Carries the best iterate.
class NotConverged : public SolverError {
 public:
  NotConverged(const std::string& what, Solution best) : SolverError(what), best_(std::move(best)) {}
  const Solution& best() const { return best_; }

 private:
  Solution best_;
};

/// Positive radial ground state by preconditioned gradient descent on the
/// Pohozaev manifold.
///
/// Each iterate u is kept on the manifold by a dilation u -> t^2 u(t r): the
/// scalar fiber_project of the discrete breakdown gives t, which is then
/// refined so that the resampled profile maximizes the discrete energy along
/// the fiber. The descent direction is the energy gradient preconditioned by
/// -Lap + max(eps, sigma), solved as a tridiagonal system, with a backtracking
/// line search on the projected energy. Stops when the relative sup-norm
/// residual of the discrete equation falls below tol_residual and the discrete
/// Nehari residual below tol_residual / 10 (or below tol_residual once it has
/// stopped improving at the rounding floor). The residuals stored in the
/// Solution are those of the public breakdown, which also carry the O(h^4)
/// discretization error.
///
/// Throws NotConverged (with the best iterate), or SolverError when the
/// profile collapses to zero.
Solution ground_state(const ProblemParams& params, const SolverConfig& config);

struct ScfOptions {
  double initial_damping = 0.5;
  double min_damping = 1.0 / 64.0;
  int max_iters = 400;
};

/// Independent cross-check for eps > 0: freeze phi, shoot the radial ODE
/// -u'' - (2/r)u' + (eps + phi)u = u^{p-1} on u(0) by bisection, recompute phi,
/// and mix potentials until successive profiles agree to tol_residual in the
/// relative sup norm. Throws SolverError("SCF stagnation") when the damping
/// floor is reached.
Solution scf_cross_check(const ProblemParams& params, const SolverConfig& config,
                         const ScfOptions& options = {});

struct VerifyReport {
  Residuals residuals;
  EnergyBreakdown bd;
  bool empty = false;
  bool passed = false;
  double tol = 0.0;
};

/// Recomputes the breakdown and potential from the stored profile and checks
/// the Nehari, Pohozaev and manifold identities and the discrete equation.
VerifyReport verify(const Solution& sol, double tol = 1e-6);

/// Relative sup-norm distance max|a - b| / max|b|.
double sup_distance(const RadialFunction& a, const RadialFunction& b);

/// Outcome of running both solvers on the same problem.
struct CrossCheck {
  Solution chosen;  ///< lower-energy candidate
  bool descent_chosen = true;
  double profile_distance = 0.0;
  double energy_gap = 0.0;  ///< |m_descent - m_scf| / |m_descent|
  bool agreed = false;
};

/// Runs ground_state and scf_cross_check and reports the lower-energy profile.
CrossCheck cross_checked_ground_state(const ProblemParams& params, const SolverConfig& config,
                                      double agreement_tol = 1e-3);

}  // namespace sps
