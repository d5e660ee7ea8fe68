#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sps/coulomb.hpp"

using namespace sps;
using std::numbers::pi;

namespace {

// Unit-ball indicator with the jump on a node; the node carries the mean of
// the two one-sided values so the trapezoid sums stay second order.
std::vector<double> ball_density(const RadialGrid& g) {
  std::vector<double> rho(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const double r = g.node(i);
    rho[static_cast<std::size_t>(i)] = std::abs(r - 1.0) < 1e-12 ? 0.5 : (r < 1.0 ? 1.0 : 0.0);
  }
  return rho;
}

}  // namespace

TEST_SUITE("coulomb") {

TEST_CASE("unit ball potential") {
  const GridPtr g = make_grid(4001, 2.0);
  REQUIRE(g->node(2000) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> phi = potential_of_density(*g, ball_density(*g));
  CHECK(phi[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(phi[2000] == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  for (int i = 0; i < 2000; i += 97) {
    const double r = g->node(i);
    CHECK(phi[static_cast<std::size_t>(i)] == doctest::Approx(0.5 - r * r / 6).epsilon(1e-5));
  }
  // outside the ball phi is the field of the total charge Q = 4 pi / 3
  const double q = 4 * pi / 3;
  for (int i = 2000; i < g->size(); i += 250) {
    const double r = g->node(i);
    CHECK(phi[static_cast<std::size_t>(i)] == doctest::Approx(q / (4 * pi * r)).epsilon(1e-5));
  }
}

TEST_CASE("unit ball Coulomb energy") {
  // the ball fills the grid, so the profile need not decay inside it
  const GridPtr g = make_grid(2001, 1.0);
  const std::vector<double> rho(2001, 1.0);
  const RadialFunction phi(g, potential_of_density(*g, rho));
  CHECK(phi[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(phi[2000] == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  const auto one = RadialFunction::sample(g, [](double) { return 1.0; });
  CHECK(integrate(product(phi, one)) == doctest::Approx(8 * pi / 15).epsilon(1e-5));
}

TEST_CASE("zero profile") {
  const GridPtr g = make_grid(64, 10.0);
  const RadialFunction zero(g);
  CHECK(newtonian_potential(zero).phi.max_abs() == 0.0);
  CHECK(coulomb_energy(zero) == 0.0);
  CHECK(brute_force_coulomb(zero) == 0.0);
}

TEST_CASE("tail carries the total charge") {
  const GridPtr g = make_grid(2001, 40.0, 4.0);
  const auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r); });
  const CoulombPair pair = newtonian_potential(u);
  CHECK(pair.total_charge == doctest::Approx(pi).epsilon(1e-8));
  CHECK(pair.phi[2000] * 4 * pi * 40.0 == doctest::Approx(pair.total_charge).epsilon(1e-8));
}

TEST_CASE("fourth order on a smooth density") {
  // rho = exp(-r^2), both radial integrals in closed form
  auto exact = [](double r) {
    const double inner = std::sqrt(pi) / 4 * std::erf(r) - r * std::exp(-r * r) / 2;
    const double outer = std::exp(-r * r) / 2;
    return r > 0 ? inner / r + outer : 0.5;
  };
  double err[2];
  int k = 0;
  for (int n : {201, 401}) {
    const GridPtr g = make_grid(n, 8.0);
    const auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r * r / 2); });
    const CoulombPair pair = newtonian_potential(u);
    double e = 0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::abs(pair.phi[static_cast<std::size_t>(i)] - exact(g->node(i))));
    err[k++] = e;
  }
  CHECK(err[1] < 1e-6);
  CHECK(err[0] / err[1] > 12.0);
}

TEST_CASE("brute force agrees with the potential route") {
  const GridPtr g = make_grid(512, 40.0);
  const RadialFunction profiles[] = {
      RadialFunction::sample(g, [](double r) { return std::exp(-r); }),
      RadialFunction::sample(g, [](double r) { return std::exp(-r * r / 3); }),
      RadialFunction::sample(g, [](double r) { return (1 + r) * std::exp(-r / 2); }),
  };
  for (const auto& u : profiles) CHECK(coulomb_energy(u) == doctest::Approx(brute_force_coulomb(u)).epsilon(1e-4));
  CHECK_THROWS_AS(brute_force_coulomb(RadialFunction(make_grid(513, 1.0))), std::invalid_argument);
}

TEST_CASE("brute force on the unit ball") {
  const GridPtr g = make_grid(257, 2.0);
  std::vector<double> u = ball_density(*g);
  for (double& x : u) x = std::sqrt(x);
  CHECK(brute_force_coulomb(RadialFunction(g, u)) == doctest::Approx(8 * pi / 15).epsilon(1e-3));
}

}
