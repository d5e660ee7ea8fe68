#include "sps/coulomb.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sps {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Newton-Cotes integral of f over reference nodes [0, m].
double newton_cotes_prefix(std::span<const double> f, int m, double h) {
  if (m <= 0) return 0.0;
  if (m == 1) return 0.5 * h * (f[0] + f[1]);
  const int simpson_end = m % 2 == 0 ? m : m - 3;
  double s = 0.0;
  for (int k = 0; k < simpson_end; k += 2) {
    s += h / 3.0 * (f[idx(k)] + 4.0 * f[idx(k + 1)] + f[idx(k + 2)]);
  }
  if (simpson_end != m) {
    const int k = simpson_end;
    s += 3.0 * h / 8.0 * (f[idx(k)] + 3.0 * f[idx(k + 1)] + 3.0 * f[idx(k + 2)] + f[idx(k + 3)]);
  }
  return s;
}

}  // namespace

std::vector<double> potential_of_density(const RadialGrid& grid, std::span<const double> rho) {
  const int n = grid.size();
  if (rho.size() != idx(n)) throw std::invalid_argument("density size does not match grid");
  const double h = grid.spacing();

  std::vector<double> inner(idx(n), 0.0), outer(idx(n), 0.0);
  auto f = [&](int j) { return rho[idx(j)] * grid.node(j) * grid.node(j) * grid.jacobian(j); };
  auto g = [&](int j) { return rho[idx(j)] * grid.node(j) * grid.jacobian(j); };
  for (int i = 1; i < n; ++i) inner[idx(i)] = inner[idx(i - 1)] + 0.5 * h * (f(i - 1) + f(i));
  for (int i = n - 2; i >= 0; --i) outer[idx(i)] = outer[idx(i + 1)] + 0.5 * h * (g(i) + g(i + 1));

  std::vector<double> phi(idx(n));
  const double c = h * h / 12.0;
  // At r = 0 only the outer sum exists and its endpoint error has the opposite sign.
  phi[0] = outer[0] + c * rho[0] * grid.jacobian(0) * grid.jacobian(0);
  for (int i = 1; i < n; ++i) {
    const double jac = grid.jacobian(i);
    phi[idx(i)] = inner[idx(i)] / grid.node(i) + outer[idx(i)] - c * rho[idx(i)] * jac * jac;
  }
  return phi;
}

CoulombPair newtonian_potential(const RadialFunction& u) {
  require_decaying(u, "newtonian_potential");
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u[i] * u[i];
  RadialFunction phi(u.grid_ptr(), potential_of_density(u.grid(), rho));
  const double charge = lp_power(u, 2.0);
  return CoulombPair{u, std::move(phi), charge};
}

double coulomb_energy(const CoulombPair& pair) {
  return integrate(product(pair.phi, product(pair.u, pair.u)));
}

double coulomb_energy(const RadialFunction& u) { return coulomb_energy(newtonian_potential(u)); }

double brute_force_coulomb(const RadialFunction& u) {
  const RadialGrid& grid = u.grid();
  const int n = grid.size();
  if (n > 512) {
    throw std::invalid_argument(
        fmt::format("brute_force_coulomb: n = {} > 512; oracle is for desk-scale cross-checks", n));
  }
  require_decaying(u, "brute_force_coulomb");
  const double h = grid.spacing();

  std::vector<double> inner_integrand(idx(n)), outer_integrand(idx(n));
  for (int j = 0; j < n; ++j) {
    const double rho = u[idx(j)] * u[idx(j)];
    const double r = grid.node(j);
    inner_integrand[idx(j)] = rho * r * r * grid.jacobian(j);
  }
  for (int i = 0; i < n; ++i) {
    const double rho = u[idx(i)] * u[idx(i)];
    const double enclosed = newton_cotes_prefix(inner_integrand, i, h);
    outer_integrand[idx(i)] = rho * grid.node(i) * grid.jacobian(i) * enclosed;
  }
  return 8.0 * std::numbers::pi * newton_cotes_prefix(outer_integrand, n - 1, h);
}

}  // namespace sps
