#include "sps/functionals.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

#include "sps/coulomb.hpp"

namespace sps {

void require_exponent(double p) {
  if (!(p > 3.0 && p < 6.0)) {
    throw std::invalid_argument(fmt::format("p outside (3,6): p = {}", p));
  }
}

void require_valid(const EnergyBreakdown& bd) {
  require_exponent(bd.p);
  if (!(bd.A >= 0.0 && bd.B >= 0.0 && bd.C >= 0.0 && bd.D >= 0.0)) {
    throw std::invalid_argument(
        fmt::format("breakdown parts must be non-negative: ({}, {}, {}, {})", bd.A, bd.B, bd.C, bd.D));
  }
}

double mass_exponent(double p) {
  require_exponent(p);
  return (p - 2.0) / (4.0 * (3.0 - p));
}

ProblemParams ProblemParams::from_eps(double p, double eps) {
  ProblemParams params{p, eps, std::nullopt, 1.0};
  params.validate();
  return params;
}

ProblemParams ProblemParams::from_lambda(double p, double lambda) {
  require_exponent(p);
  if (!(lambda > 0.0)) throw std::invalid_argument(fmt::format("lambda must be positive, got {}", lambda));
  ProblemParams params{p, std::pow(lambda, mass_exponent(p)), lambda, 1.0};
  params.validate();
  return params;
}

void ProblemParams::validate() const {
  require_exponent(p);
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument(fmt::format("eps must be >= 0, got {}", eps));
  }
  if (!(coupling >= 0.0)) throw std::invalid_argument("Coulomb coupling must be >= 0");
  if (lambda) {
    if (!(*lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    const double expected = std::pow(*lambda, mass_exponent(p));
    if (std::abs(expected - eps) > 1e-12 * std::max(1.0, std::abs(expected))) {
      throw std::invalid_argument(
          fmt::format("eps = {} does not match lambda = {} (expected {})", eps, *lambda, expected));
    }
  }
}

EnergyBreakdown breakdown(const RadialFunction& u, double p) {
  require_exponent(p);
  require_decaying(u, "breakdown");
  const RadialFunction du = derivative(u, Parity::regular);
  EnergyBreakdown bd;
  bd.A = integrate(product(du, du));
  bd.B = lp_power(u, 2.0);
  bd.C = coulomb_energy(u);
  bd.D = lp_power(u, p);
  bd.p = p;
  return bd;
}

double energy(const EnergyBreakdown& bd, double eps) {
  return bd.A / 2.0 + eps * bd.B / 2.0 + bd.C / 4.0 - bd.D / bd.p;
}

double pohozaev_manifold(const EnergyBreakdown& bd, double eps) {
  return 1.5 * bd.A + 0.5 * eps * bd.B + 0.75 * bd.C - (2.0 * bd.p - 3.0) / bd.p * bd.D;
}

double nehari(const EnergyBreakdown& bd, double eps) { return bd.A + eps * bd.B + bd.C - bd.D; }

double pohozaev_identity(const EnergyBreakdown& bd, double eps) {
  return 0.5 * bd.A + 1.5 * eps * bd.B + 1.25 * bd.C - 3.0 / bd.p * bd.D;
}

EnergyBreakdown dilate(const EnergyBreakdown& bd, double t) {
  const double t3 = t * t * t;
  return EnergyBreakdown{t3 * bd.A, t * bd.B, t3 * bd.C, std::pow(t, 2.0 * bd.p - 3.0) * bd.D, bd.p};
}

double fiber_energy(const EnergyBreakdown& bd, double eps, double t) {
  if (!(t > 0.0)) throw std::invalid_argument(fmt::format("fiber parameter must be positive, got {}", t));
  return energy(dilate(bd, t), eps);
}

double fiber_project(const EnergyBreakdown& bd, double eps) {
  require_valid(bd);
  if (!(bd.D > 0.0)) throw std::invalid_argument("fiber map has no maximizer for u=0 (D = 0)");
  const double quad = 1.5 * (bd.A + 0.5 * bd.C);
  const double constant = 0.5 * eps * bd.B;
  const double lead = (2.0 * bd.p - 3.0) / bd.p * bd.D;
  const double power = 2.0 * bd.p - 4.0;
  if (!(quad > 0.0 || constant > 0.0)) {
    throw std::invalid_argument("fiber map is decreasing for every t; no maximizer");
  }
  auto g = [&](double t) { return quad * t * t + constant - lead * std::pow(t, power); };
  auto dg = [&](double t) { return 2.0 * quad * t - power * lead * std::pow(t, power - 1.0); };
  auto magnitude = [&](double t) { return quad * t * t + constant + lead * std::pow(t, power); };

  double lo = 1.0, hi = 1.0;
  while (g(lo) <= 0.0) lo *= 0.5;
  while (g(hi) >= 0.0) hi *= 2.0;
  while (hi - lo > 1e-6 * lo) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double value = g(t);
    if (std::abs(value) <= 1e-12 * magnitude(t)) break;
    (value > 0.0 ? lo : hi) = t;
    double next = t - value / dg(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

double manifold_energy(const EnergyBreakdown& bd, double eps, double tol) {
  require_valid(bd);
  const double residual = pohozaev_manifold(bd, eps);
  if (std::abs(residual) > tol * bd.scale()) {
    throw std::domain_error(fmt::format(
        "breakdown is off the Pohozaev manifold: P = {:.3e} (scale {:.3e})", residual, bd.scale()));
  }
  const double p = bd.p;
  const double den = 2.0 * p - 3.0;
  return (p - 3.0) / den * bd.A + (p - 2.0) / den * eps * bd.B + (p - 3.0) / (2.0 * den) * bd.C;
}

double m_functional(const EnergyBreakdown& bd) { return bd.A + bd.C; }

double e_norm(const EnergyBreakdown& bd) { return std::sqrt(bd.A + std::sqrt(bd.C)); }

double interpolation_ratio(const EnergyBreakdown& bd) {
  return bd.D / std::pow(m_functional(bd), (2.0 * bd.p - 3.0) / 3.0);
}

}  // namespace sps
