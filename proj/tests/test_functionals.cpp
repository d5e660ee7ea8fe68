#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sps/coulomb.hpp"
#include "sps/functionals.hpp"

using namespace sps;
using std::numbers::pi;

namespace {

const EnergyBreakdown kQuartic{1.0, 1.0, 2.0, 2.4, 4.0};

EnergyBreakdown random_breakdown(std::mt19937& rng) {
  std::uniform_real_distribution<double> part(0.0, 10.0);
  std::uniform_real_distribution<double> expo(3.01, 5.99);
  return EnergyBreakdown{part(rng), part(rng), part(rng), part(rng), expo(rng)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("functionals") {

TEST_CASE("scalar functionals on the quartic example") {
  CHECK(energy(kQuartic, 0) == doctest::Approx(0.4));
  CHECK(energy(kQuartic, 1) == doctest::Approx(0.9));
  CHECK(pohozaev_manifold(kQuartic, 0) == doctest::Approx(0.0));
  CHECK(pohozaev_manifold(kQuartic, 1) == doctest::Approx(0.5));
  CHECK(nehari(kQuartic, 0) == doctest::Approx(0.6));
  CHECK(nehari(EnergyBreakdown{1, 0.4, 2, 3.4, 4}, 1) == doctest::Approx(0.0));
  CHECK(pohozaev_identity(kQuartic, 0) == doctest::Approx(1.2));
  CHECK(fiber_energy(kQuartic, 0, 2.0) == doctest::Approx(-11.2));
  CHECK(fiber_energy(kQuartic, 0.7, 1.0) == doctest::Approx(energy(kQuartic, 0.7)));
  CHECK(std::abs(fiber_energy(kQuartic, 1, 1e-9)) < 1e-8);
  CHECK(manifold_energy(kQuartic, 0) == doctest::Approx(0.4));

  const EnergyBreakdown zero{0, 0, 0, 0, 4};
  CHECK(energy(zero, 1) == 0.0);
  CHECK(pohozaev_manifold(zero, 1) == 0.0);
  CHECK(nehari(zero, 1) == 0.0);
  CHECK(pohozaev_identity(zero, 1) == 0.0);
  CHECK(m_functional(zero) == 0.0);
  CHECK(e_norm(zero) == 0.0);
}

TEST_CASE("manifold energy drops B at eps = 0 and rejects points off the manifold") {
  EnergyBreakdown bd = kQuartic;
  bd.B = 123.0;
  CHECK(manifold_energy(bd, 0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(manifold_energy(kQuartic, 1), std::domain_error);
}

TEST_CASE("M and the E norm") {
  const EnergyBreakdown a{0.25, 0, 0.04, 0, 4};
  CHECK(m_functional(a) == doctest::Approx(0.29));
  CHECK(e_norm(a) == doctest::Approx(std::sqrt(0.45)));
  const double n2 = e_norm(a) * e_norm(a);
  CHECK(0.5 * n2 * n2 <= m_functional(a));
  CHECK(m_functional(a) <= n2);
  const EnergyBreakdown b{1, 0, 4, 0, 4};
  CHECK(m_functional(b) == doctest::Approx(5.0));
  CHECK(e_norm(b) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("manifold functional is twice Nehari minus the Pohozaev identity") {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> eps_dist(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const EnergyBreakdown bd = random_breakdown(rng);
    const double eps = eps_dist(rng);
    const double lhs = pohozaev_manifold(bd, eps);
    const double rhs = 2 * nehari(bd, eps) - pohozaev_identity(bd, eps);
    REQUIRE(std::abs(lhs - rhs) <= 1e-12 * bd.scale());
  }
}

TEST_CASE("breakdown of exp(-r)") {
  const GridPtr g = make_grid(8001, 40.0, 4.0);
  const auto u = RadialFunction::sample(g, [](double r) { return std::exp(-r); });
  const EnergyBreakdown bd = breakdown(u, 4);
  CHECK(bd.A == doctest::Approx(pi).epsilon(1e-6));
  CHECK(bd.B == doctest::Approx(pi).epsilon(1e-8));
  CHECK(bd.D == doctest::Approx(pi / 8).epsilon(1e-8));
  // C in closed form: int (I_2 * e^{-2|x|}) e^{-2|x|} = 5 pi / 32
  CHECK(bd.C == doctest::Approx(5 * pi / 32).epsilon(1e-6));
  CHECK(breakdown(RadialFunction(g), 4).scale() == 0.0);
  CHECK_THROWS_AS(breakdown(u, 2.5), std::invalid_argument);
}

TEST_CASE("dilation scaling laws") {
  const GridPtr g = make_grid(8001, 40.0, 6.0);
  auto profile = [](double r) { return (1 + r) * std::exp(-r * r / 2); };
  for (double p : {3.5, 4.0, 5.0}) {
    const EnergyBreakdown base = breakdown(RadialFunction::sample(g, profile), p);
    for (double t : {0.5, 2.0}) {
      const EnergyBreakdown bt =
          breakdown(RadialFunction::sample(g, [&](double r) { return t * t * profile(t * r); }), p);
      const EnergyBreakdown expected = dilate(base, t);
      CAPTURE(p);
      CAPTURE(t);
      CHECK(rel(bt.A, expected.A) < 1e-6);
      CHECK(rel(bt.B, expected.B) < 1e-6);
      CHECK(rel(bt.C, expected.C) < 1e-6);
      CHECK(rel(bt.D, expected.D) < 1e-6);
      CHECK(rel(expected.A, std::pow(t, 3) * base.A) < 1e-14);
      CHECK(rel(expected.D, std::pow(t, 2 * p - 3) * base.D) < 1e-14);
      CHECK(rel(interpolation_ratio(bt), interpolation_ratio(base)) < 1e-6);
    }
  }
}

TEST_CASE("fiber projection") {
  // eps = 0 closed form t^{2p-6} = 3p(2A + C) / (4(2p-3)D)
  std::mt19937 rng(7);
  for (int k = 0; k < 100; ++k) {
    const EnergyBreakdown bd = random_breakdown(rng);
    if (!(bd.D > 0.0)) continue;
    const double p = bd.p;
    const double closed = std::pow(3 * p * (2 * bd.A + bd.C) / (4 * (2 * p - 3) * bd.D), 1 / (2 * p - 6));
    REQUIRE(rel(fiber_project(bd, 0), closed) < 1e-10);
  }
  CHECK(fiber_project(kQuartic, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fiber_project(EnergyBreakdown{1, 1, 2, 1.2, 4}, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const double t = fiber_project(kQuartic, 1);
  CHECK(std::abs(t - 1.070280) < 1e-6);
  CHECK(t == doctest::Approx(std::sqrt((1 + std::sqrt(5.0 / 3.0)) / 2)).epsilon(1e-12));

  std::mt19937 rng2(11);
  std::uniform_real_distribution<double> eps_dist(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const EnergyBreakdown bd = random_breakdown(rng2);
    const double eps = eps_dist(rng2);
    const EnergyBreakdown moved = dilate(bd, fiber_project(bd, eps));
    REQUIRE(std::abs(pohozaev_manifold(moved, eps)) <= 1e-10 * moved.scale());
  }
  CHECK_THROWS_AS(fiber_project(EnergyBreakdown{1, 1, 1, 0, 4}, 1), std::invalid_argument);
}

TEST_CASE("parameters") {
  CHECK_THROWS_WITH_AS(require_exponent(7), doctest::Contains("p outside (3,6)"), std::invalid_argument);
  CHECK_THROWS_AS(require_exponent(3), std::invalid_argument);
  CHECK(mass_exponent(4) == doctest::Approx(-0.5));
  CHECK(ProblemParams::from_lambda(4, 4).eps == doctest::Approx(0.5));
  CHECK_THROWS_AS(ProblemParams::from_eps(4, -1).validate(), std::invalid_argument);
}

}
