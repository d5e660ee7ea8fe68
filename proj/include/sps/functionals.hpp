#pragma once

#include <optional>

#include "sps/radial.hpp"

namespace sps {

/// The four integrals every energy of the problem is built from.
struct EnergyBreakdown {
  double A = 0.0;  ///< ||grad u||_2^2
  double B = 0.0;  ///< ||u||_2^2
  double C = 0.0;  ///< int (I_2 * |u|^2) |u|^2
  double D = 0.0;  ///< ||u||_p^p
  double p = 4.0;

  double scale() const { return A + B + C + D; }
};

/// Throws std::invalid_argument unless 3 < p < 6.
void require_exponent(double p);
/// Non-negative parts and an admissible exponent.
void require_valid(const EnergyBreakdown& bd);

/// Exponent of lambda in the rescaled mass coefficient, (p-2) / (4(3-p)).
double mass_exponent(double p);

/// Parameters of -Lap v + eps v + coupling (I_2 * v^2) v = v^{p-1}.
///
/// eps = 0 is the zero-mass limit equation. `coupling` is 1 everywhere except
/// the small-lambda study, which solves the unscaled equation with eps = 1 and
/// the Coulomb coefficient set to lambda.
struct ProblemParams {
  double p = 4.0;
  double eps = 1.0;
  std::optional<double> lambda;
  double coupling = 1.0;

  static ProblemParams from_eps(double p, double eps);
  /// eps = lambda^{(p-2)/(4(3-p))}.
  static ProblemParams from_lambda(double p, double lambda);

  void validate() const;
};

/// A, B, C, D of a decaying profile.
EnergyBreakdown breakdown(const RadialFunction& u, double p);

/// A/2 + eps B/2 + C/4 - D/p.
double energy(const EnergyBreakdown& bd, double eps);
/// (3/2)A + (eps/2)B + (3/4)C - ((2p-3)/p)D; zero on the Pohozaev manifold.
double pohozaev_manifold(const EnergyBreakdown& bd, double eps);
/// A + eps B + C - D.
double nehari(const EnergyBreakdown& bd, double eps);
/// A/2 + (3 eps/2)B + (5/4)C - (3/p)D; zero on weak solutions.
double pohozaev_identity(const EnergyBreakdown& bd, double eps);

/// Breakdown of u_t(x) = t^2 u(t x): (t^3 A, t B, t^3 C, t^{2p-3} D).
EnergyBreakdown dilate(const EnergyBreakdown& bd, double t);
/// Energy along the fiber, f(t) = energy(dilate(bd, t), eps).
double fiber_energy(const EnergyBreakdown& bd, double eps, double t);
/// The unique t > 0 maximizing the fiber energy, i.e. the positive root of
/// g(t) = (3/2)(A + C/2) t^2 + eps B/2 - ((2p-3)/p) D t^{2p-4}.
///
/// Brackets by doubling/halving, bisects to 1e-6 and finishes with Newton
/// until |g| <= 1e-12 times the sum of the magnitudes of its terms.
double fiber_project(const EnergyBreakdown& bd, double eps);

/// Energy restricted to the Pohozaev manifold:
/// ((p-3)/(2p-3)) A + ((p-2)/(2p-3)) eps B + ((p-3)/(2(2p-3))) C.
/// Throws std::domain_error when |pohozaev_manifold| > tol * scale.
double manifold_energy(const EnergyBreakdown& bd, double eps, double tol = 1e-8);

/// M(u) = A + C.
double m_functional(const EnergyBreakdown& bd);
/// ||u||_E = sqrt(A + sqrt(C)).
double e_norm(const EnergyBreakdown& bd);
/// D / M^{(2p-3)/3}; dilation invariant and bounded on the whole space.
double interpolation_ratio(const EnergyBreakdown& bd);

}  // namespace sps
