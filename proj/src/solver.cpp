#include "sps/solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "discrete_problem.hpp"
#include "sps/coulomb.hpp"

namespace sps {

namespace {

using detail::DiscreteParts;
using detail::DiscreteProblem;
using detail::Evaluation;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

RadialFunction onto_grid(const RadialFunction& profile, const GridPtr& grid) {
  if (profile.grid() == *grid) return RadialFunction(grid, {profile.values().begin(), profile.values().end()});
  const MonotoneCubic interp(profile);
  return RadialFunction::sample(grid, [&](double r) { return interp(r); });
}

RadialFunction initial_profile(const SolverConfig& config, const GridPtr& grid) {
  if (const auto* g = std::get_if<GaussianInit>(&config.init)) {
    return RadialFunction::sample(grid, [&](double r) {
      const double s = r / g->width;
      return g->amplitude * std::exp(-s * s);
    });
  }
  return onto_grid(std::get<ProfileInit>(config.init).profile, grid);
}

// Dilation u -> t^2 u(t r) of a fixed profile, expressed on w = r u, with the
// t-derivative needed to locate the fiber maximum of the discrete energy.
class FiberProjector {
 public:
  FiberProjector(const DiscreteProblem& problem, const ProblemParams& params)
      : problem_(problem), params_(params) {}

  std::vector<double> project(std::span<const double> w) const {
    const DiscreteParts d = problem_.parts(w);
    if (!(d.D > 0.0) || !std::isfinite(d.D)) throw SolverError("collapse to zero: D vanished");
    const EnergyBreakdown bd{d.A, d.B, params_.coupling * d.C, d.D, params_.p};
    const double t0 = fiber_project(bd, params_.eps);

    const MonotoneCubic interp(problem_.to_u(w));
    const RadialGrid& grid = problem_.grid();
    const int n = grid.size();
    std::vector<double> wt(idx(n)), dwt(idx(n));
    auto dilated = [&](double t) {
      for (int i = 1; i + 1 < n; ++i) {
        const double r = grid.node(i);
        const auto [value, slope] = interp.eval(t * r);
        wt[idx(i)] = r * t * t * value;
        dwt[idx(i)] = r * (2.0 * t * value + t * t * r * slope);
      }
      wt.front() = wt.back() = 0.0;
      dwt.front() = dwt.back() = 0.0;
    };
    auto slope = [&](double t) {
      dilated(t);
      const Evaluation ev = problem_.evaluate(wt);
      return problem_.pair(ev.grad, dwt);
    };

    // Bracket the sign change of d/dt E_h(w_t) around t0, then Illinois.
    double a = t0, fa = slope(a);
    if (fa == 0.0) {
      dilated(a);
      return wt;
    }
    const double direction = fa > 0.0 ? 1.0 : -1.0;
    double step = 1e-4 * t0;
    double b = a, fb = fa;
    for (int k = 0; k < 80 && (fb > 0.0) == (fa > 0.0); ++k) {
      a = b;
      fa = fb;
      b = std::max(a + direction * step, 0.5 * a);
      fb = slope(b);
      step *= 2.0;
    }
    if ((fb > 0.0) == (fa > 0.0)) throw SolverError("fiber maximum of the discrete energy not bracketed");
    for (int k = 0; k < 100; ++k) {
      const double c = b - fb * (b - a) / (fb - fa);
      const double fc = slope(c);
      if (fc == 0.0 || std::abs(c - b) <= 1e-14 * c) {
        b = c;
        break;
      }
      if ((fc > 0.0) != (fb > 0.0)) {
        a = b;
        fa = fb;
      } else {
        fa *= 0.5;
      }
      b = c;
      fb = fc;
    }
    dilated(b);
    return wt;
  }

 private:
  const DiscreteProblem& problem_;
  const ProblemParams& params_;
};

double relative_nehari(const DiscreteParts& d, const ProblemParams& params) {
  const double scale = d.A + d.B + d.C + d.D;
  return std::abs(d.A + params.eps * d.B + params.coupling * d.C - d.D) / scale;
}

Residuals public_residuals(const EnergyBreakdown& raw, const ProblemParams& params) {
  const EnergyBreakdown bd = effective_breakdown(raw, params);
  const double scale = raw.scale();
  Residuals out;
  out.nehari = std::abs(nehari(bd, params.eps)) / scale;
  out.pohozaev = std::abs(pohozaev_identity(bd, params.eps)) / scale;
  out.manifold = std::abs(pohozaev_manifold(bd, params.eps)) / scale;
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  make_grid(grid.n, grid.r_max, grid.stretch);
  if (!(tol_residual > 0.0)) throw std::invalid_argument("tol_residual must be > 0");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (const auto* g = std::get_if<GaussianInit>(&init)) {
    if (!(g->amplitude > 0.0) || !(g->width > 0.0)) {
      throw std::invalid_argument("gaussian init needs positive amplitude and width");
    }
  }
  const DescentOptions& d = descent;
  if (!(d.initial_step > 0.0) || !(d.min_step > 0.0) || !(d.max_step >= d.initial_step)) {
    throw std::invalid_argument("descent steps must be positive with max_step >= initial_step");
  }
  if (!(d.backtrack > 0.0 && d.backtrack < 1.0)) throw std::invalid_argument("backtrack must lie in (0,1)");
  if (!(d.growth >= 1.0)) throw std::invalid_argument("step growth must be >= 1");
  if (!(d.armijo > 0.0 && d.armijo < 0.5)) throw std::invalid_argument("armijo constant must lie in (0,1/2)");
  if (!(d.shift > 0.0)) throw std::invalid_argument("preconditioner shift must be > 0");
}

EnergyBreakdown effective_breakdown(const EnergyBreakdown& bd, const ProblemParams& params) {
  EnergyBreakdown out = bd;
  out.C *= params.coupling;
  return out;
}

namespace detail {

// Fills the public fields of a Solution from a profile on its grid.
Solution finish_solution(const ProblemParams& params, RadialFunction u) {
  Solution sol{params, u, RadialFunction(u.grid_ptr()), EnergyBreakdown{}, 0.0, {}, 0, false, 0.0, {}};
  CoulombPair pair = newtonian_potential(u);
  sol.phi = std::move(pair.phi);
  sol.bd = breakdown(u, params.p);
  sol.m = energy(effective_breakdown(sol.bd, params), params.eps);
  sol.residuals = public_residuals(sol.bd, params);
  const DiscreteProblem problem(u.grid_ptr(), params);
  const std::vector<double> w = problem.to_w(u);
  sol.residuals.ode_sup = problem.relative_sup_residual(w, problem.evaluate(w).grad);
  sol.min_m_functional = m_functional(sol.bd);
  return sol;
}

}  // namespace detail

Solution ground_state(const ProblemParams& params, const SolverConfig& config) {
  params.validate();
  config.validate();
  const GridPtr grid = config.grid.build();
  const DiscreteProblem problem(grid, params);
  const FiberProjector projector(problem, params);
  const DescentOptions& opt = config.descent;
  const double shift = std::max(params.eps, opt.shift);

  std::vector<double> w = problem.to_w(initial_profile(config, grid));
  for (double& x : w) x = std::max(x, 0.0);
  w = projector.project(w);
  Evaluation ev = problem.evaluate(w);

  std::vector<double> history{ev.energy};
  double min_m = ev.parts.A + ev.parts.C;
  double step = opt.initial_step;
  double residual = problem.relative_sup_residual(w, ev.grad);
  int iters = 0;
  bool converged = false;
  std::string failure;
  // Nehari is pushed to 0.1 tol while it keeps improving; once it sits at the
  // rounding floor for `patience` iterations, tol is enough.
  constexpr int patience = 20;
  double best_nehari = std::numeric_limits<double>::infinity();
  int stalled = 0;

  while (true) {
    const double nehari = relative_nehari(ev.parts, params);
    if (nehari < 0.5 * best_nehari) {
      best_nehari = nehari;
      stalled = 0;
    } else {
      ++stalled;
    }
    if (residual <= config.tol_residual &&
        (nehari <= 0.1 * config.tol_residual || (nehari <= config.tol_residual && stalled >= patience))) {
      converged = true;
      break;
    }
    if (iters >= config.max_iters) {
      failure = fmt::format("not converged: max_iters = {} reached (residual {:.3e})", config.max_iters, residual);
      break;
    }
    const std::vector<double> dir = problem.precondition(ev.grad, shift);
    const double slope = problem.pair(ev.grad, dir);

    bool accepted = false;
    std::vector<double> trial(w.size());
    Evaluation next;
    double next_residual = 0.0;
    while (step >= opt.min_step) {
      for (std::size_t i = 0; i < w.size(); ++i) trial[i] = std::max(w[i] - step * dir[i], 0.0);
      trial.front() = trial.back() = 0.0;
      std::vector<double> candidate = projector.project(trial);
      next = problem.evaluate(candidate);
      next_residual = problem.relative_sup_residual(candidate, next.grad);
      const bool sufficient = next.energy <= ev.energy - opt.armijo * step * slope;
      // Once the energy is flat to rounding, the residual decides.
      const bool flat = std::abs(next.energy - ev.energy) <= 1e-12 * std::abs(ev.energy) &&
                        next_residual < residual;
      if (sufficient || flat) {
        w = std::move(candidate);
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      failure = fmt::format("not converged: line search stalled (residual {:.3e})", residual);
      break;
    }
    ev = std::move(next);
    residual = next_residual;
    history.push_back(ev.energy);
    min_m = std::min(min_m, ev.parts.A + ev.parts.C);
    step = std::min(step * opt.growth, opt.max_step);
    ++iters;
  }

  Solution sol = detail::finish_solution(params, problem.to_u(w));
  sol.residuals.ode_sup = residual;
  sol.iters = iters;
  sol.converged = converged;
  sol.min_m_functional = min_m;
  sol.energy_history = std::move(history);
  if (!converged) throw NotConverged(failure, std::move(sol));
  return sol;
}

VerifyReport verify(const Solution& sol, double tol) {
  VerifyReport report;
  report.tol = tol;
  const double inf = std::numeric_limits<double>::infinity();
  if (!(sol.u.max_abs() > 0.0)) {
    report.empty = true;
    report.residuals = Residuals{inf, inf, inf, inf};
    return report;
  }
  report.bd = breakdown(sol.u, sol.params.p);
  report.residuals = public_residuals(report.bd, sol.params);
  const detail::DiscreteProblem problem(sol.u.grid_ptr(), sol.params);
  const std::vector<double> w = problem.to_w(sol.u);
  report.residuals.ode_sup = problem.relative_sup_residual(w, problem.evaluate(w).grad);
  const Residuals& r = report.residuals;
  report.passed = r.nehari <= tol && r.pohozaev <= tol && r.manifold <= tol && r.ode_sup <= tol;
  return report;
}

double sup_distance(const RadialFunction& a, const RadialFunction& b) {
  const RadialFunction diff = a - b;
  const double ref = b.max_abs();
  if (!(ref > 0.0)) throw std::invalid_argument("sup_distance: reference profile is zero");
  return diff.max_abs() / ref;
}

CrossCheck cross_checked_ground_state(const ProblemParams& params, const SolverConfig& config,
                                      double agreement_tol) {
  Solution descent = [&] {
    try {
      return ground_state(params, config);
    } catch (const NotConverged& e) {
      return e.best();
    }
  }();
  Solution scf = scf_cross_check(params, config);
  const double distance = sup_distance(scf.u, descent.u);
  const double gap = std::abs(descent.m - scf.m) / std::abs(descent.m);
  const bool descent_chosen = descent.m <= scf.m;
  CrossCheck out{descent_chosen ? std::move(descent) : std::move(scf), descent_chosen, distance, gap,
                 distance <= agreement_tol && gap <= agreement_tol};
  return out;
}

}  // namespace sps
