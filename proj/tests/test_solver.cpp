#include <doctest.h>

#include <cmath>

#include "sps/asymptotics.hpp"
#include "sps/solver.hpp"

using namespace sps;

namespace {

const Solution& quartic_ground_state() {
  static const Solution sol = ground_state(ProblemParams::from_eps(4, 1), SolverConfig{});
  return sol;
}

Solution scaled(const Solution& sol, double factor) {
  Solution out = sol;
  out.u = sol.u * factor;
  return out;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("ground state p = 4, eps = 1") {
  const Solution& sol = quartic_ground_state();
  CHECK(sol.converged);
  CHECK(sol.residuals.nehari < 1e-6);
  CHECK(sol.residuals.pohozaev < 1e-6);
  CHECK(sol.residuals.manifold < 1e-6);
  CHECK(sol.residuals.ode_sup < 1e-6);
  CHECK(sol.m == doctest::Approx(energy(sol.bd, 1.0)));
  CHECK(sol.m > 0.0);
  for (std::size_t i = 0; i + 1 < sol.u.size(); ++i) {
    REQUIRE(sol.u[i] > 0.0);
    REQUIRE(sol.u[i + 1] < sol.u[i]);
  }
  CHECK(sol.u.is_decaying());
  CHECK(sol.energy_history.size() == static_cast<std::size_t>(sol.iters) + 1);
  for (std::size_t k = 1; k < sol.energy_history.size(); ++k) {
    REQUIRE(sol.energy_history[k] <= sol.energy_history[k - 1] * (1 + 1e-12));
  }
  CHECK(sol.min_m_functional > 0.0);
}

TEST_CASE("shooting cross-check agrees with the descent") {
  const Solution& sol = quartic_ground_state();
  const Solution scf = scf_cross_check(sol.params, SolverConfig{});
  CHECK(sup_distance(scf.u, sol.u) < 1e-3);
  CHECK(scf.m == doctest::Approx(sol.m).epsilon(1e-3));
  CHECK_THROWS_WITH_AS(scf_cross_check(ProblemParams::from_eps(4, 0), SolverConfig{}),
                       doctest::Contains("shooting requires eps>0"), std::invalid_argument);
}

TEST_CASE("verify") {
  const Solution& sol = quartic_ground_state();
  const VerifyReport ok = verify(sol);
  CHECK(ok.passed);
  CHECK_FALSE(ok.empty);

  const VerifyReport off = verify(scaled(sol, 1.1));
  CHECK_FALSE(off.passed);
  CHECK(off.residuals.nehari > 1e-2);
  CHECK(off.residuals.nehari < 1.0);

  const VerifyReport empty = verify(scaled(sol, 0.0));
  CHECK(empty.empty);
  CHECK_FALSE(empty.passed);
}

TEST_CASE("restart from a converged profile") {
  const Solution& sol = quartic_ground_state();
  SolverConfig cfg;
  cfg.init = ProfileInit{sol.u};
  const Solution again = ground_state(sol.params, cfg);
  CHECK(again.iters <= 2);
  CHECK(sup_distance(again.u, sol.u) < 1e-6);
}

TEST_CASE("zero-mass limit") {
  const Solution sol = ground_state(ProblemParams::from_eps(4, 0), SolverConfig{});
  CHECK(sol.converged);
  CHECK(sol.residuals.pohozaev < 1e-6);
  CHECK(decay_rate(sol.u) > 0.0);
}

TEST_CASE("energy converges under grid refinement") {
  const ProblemParams params = ProblemParams::from_eps(4, 1);
  double m[3];
  int k = 0;
  for (int n : {1001, 2001, 4001}) {
    SolverConfig cfg;
    cfg.grid.n = n;
    m[k++] = ground_state(params, cfg).m;
  }
  const double d1 = std::abs(m[0] - m[1]);
  const double d2 = std::abs(m[1] - m[2]);
  CAPTURE(d1);
  CAPTURE(d2);
  // halving h shrinks the change at least as fast as h^2
  CHECK(d2 <= d1 / 3.5);
  CHECK(std::abs(m[2] - quartic_ground_state().m) < 1e-6 * m[2]);
}

TEST_CASE("errors") {
  CHECK_THROWS_WITH_AS(ground_state(ProblemParams::from_eps(7, 1), SolverConfig{}),
                       doctest::Contains("p outside (3,6)"), std::invalid_argument);
  SolverConfig cfg;
  cfg.max_iters = 2;
  try {
    ground_state(ProblemParams::from_eps(4, 1), cfg);
    FAIL("expected NotConverged");
  } catch (const NotConverged& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(e.best().iters == 2);
    CHECK(e.best().m > 0.0);
  }
  cfg = SolverConfig{};
  cfg.tol_residual = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.descent.backtrack = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}
