#include "sps/asymptotics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "sps/coulomb.hpp"

namespace sps {

namespace {

double amplitude_exponent(double p) { return 1.0 / (2.0 * (3.0 - p)); }

double density_integral(const RadialFunction& f) {
  return integrate(product(f, f));
}

std::vector<double> squared(const RadialFunction& u) {
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u[i] * u[i];
  return rho;
}

// Least-squares slope of -log u on r in [lo, hi]; nullopt when a sample has
// underflowed (not a positive normal double) or fewer than three nodes fall inside.
std::optional<double> tail_slope(const RadialFunction& u, double lo, double hi) {
  const double floor = DBL_MIN;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (int i = 0; i < u.grid().size(); ++i) {
    const double r = u.grid().node(i);
    if (r < lo || r > hi) continue;
    const double value = u[static_cast<std::size_t>(i)];
    if (!(value >= floor)) return std::nullopt;
    const double y = -std::log(value);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    ++count;
  }
  if (count < 3) return std::nullopt;
  const double den = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / den;
}

bool nonincreasing(double prev, double next, double slack) {
  return next <= prev * (1.0 + slack) + 1e-300;
}

SweepRow make_row(const Solution& sol, const Solution& reference) {
  SweepRow row;
  row.eps = sol.params.eps;
  if (row.eps > 0.0) row.lambda = lambda_of_eps(row.eps, sol.params.p);
  row.m_eps = sol.m;
  row.gap = sol.m - reference.m;
  row.eps_times_B = sol.params.eps * sol.bd.B;
  if (row.eps > 0.0) {
    const LimitProjection proj = project_to_limit_manifold(sol);
    row.t_proj = proj.t;
    row.energy_at_projection = proj.energy;
  } else {
    row.t_proj = 1.0;
    row.energy_at_projection = sol.m;
  }
  row.e_dist = e_distance(sol.u, reference.u).value;
  try {
    row.decay_rate = decay_rate(sol.u);
  } catch (const std::domain_error&) {
    row.decay_rate = std::numeric_limits<double>::quiet_NaN();
  }
  row.min_m_functional = sol.min_m_functional;
  row.iters = sol.iters;
  row.converged = sol.converged;
  return row;
}

Solution solve_or_best(const ProblemParams& params, const SolverConfig& config, std::string* failure) {
  try {
    return ground_state(params, config);
  } catch (const NotConverged& e) {
    *failure = fmt::format("eps = {}: {}", params.eps, e.what());
    return e.best();
  }
}

}  // namespace

double eps_of_lambda(double lambda, double p) {
  if (!(lambda > 0.0)) throw std::invalid_argument(fmt::format("lambda must be positive, got {}", lambda));
  return std::pow(lambda, mass_exponent(p));
}

double lambda_of_eps(double eps, double p) {
  if (!(eps > 0.0)) throw std::invalid_argument(fmt::format("eps must be positive, got {}", eps));
  return std::pow(eps, 1.0 / mass_exponent(p));
}

RadialFunction rescale_u_to_v(const RadialFunction& u, double lambda, double p) {
  const double eps = eps_of_lambda(lambda, p);
  return resample_scaled(u, std::pow(lambda, amplitude_exponent(p)), eps);
}

RadialFunction rescale_v_to_u(const RadialFunction& v, double lambda, double p) {
  const double eps = eps_of_lambda(lambda, p);
  return resample_scaled(v, std::pow(lambda, -amplitude_exponent(p)), 1.0 / eps);
}

LimitProjection project_to_limit_manifold(const Solution& v) {
  if (!(v.params.eps > 0.0)) throw std::invalid_argument("project_to_limit_manifold needs eps > 0");
  const EnergyBreakdown bd = effective_breakdown(v.bd, v.params);
  LimitProjection out;
  out.t = fiber_project(bd, 0.0);
  out.energy = manifold_energy(dilate(bd, out.t), 0.0);
  return out;
}

EDistance e_distance(const RadialFunction& v, const RadialFunction& w) {
  const RadialFunction d = v - w;
  const RadialGrid& grid = d.grid();
  EDistance out;
  const RadialFunction dd = derivative(d, Parity::regular);
  const double a = density_integral(dd);
  const RadialFunction phi_d(d.grid_ptr(), potential_of_density(grid, squared(d)));
  const double c = integrate(product(phi_d, product(d, d)));
  out.value = std::sqrt(a + std::sqrt(std::max(c, 0.0)));
  out.gradient = std::sqrt(a);

  const std::vector<double> pv = potential_of_density(grid, squared(v));
  const std::vector<double> pw = potential_of_density(grid, squared(w));
  std::vector<double> diff(pv.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pv[i] - pw[i];
  const RadialFunction dpsi = derivative(RadialFunction(d.grid_ptr(), std::move(diff)), Parity::regular);
  const double charge = density_integral(v) - density_integral(w);
  const double exterior = charge * charge / (4.0 * std::numbers::pi * grid.r_max());
  out.potential_gradient = std::sqrt(density_integral(dpsi) + exterior);
  return out;
}

double decay_rate(const RadialFunction& u) {
  const double r_max = u.grid().r_max();
  if (auto rate = tail_slope(u, 0.5 * r_max, 0.8 * r_max)) return *rate;
  if (auto rate = tail_slope(u, 0.3 * r_max, 0.5 * r_max)) return *rate;
  throw std::domain_error("tail below floating-point floor");
}

bool SweepChecks::all() const {
  return gap_positive && gap_nonincreasing && eps_b_nonincreasing && t_proj_in_unit_interval &&
         t_proj_nonincreasing && e_dist_nonincreasing && sandwich && all_converged;
}

void evaluate_sweep(SweepReport& report, double slack) {
  SweepChecks c;
  const auto& rows = report.rows;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const SweepRow& row = rows[k];
    c.all_converged = c.all_converged && row.converged;
    if (row.eps > 0.0) {
      c.gap_positive = c.gap_positive && row.gap > 0.0;
      c.t_proj_in_unit_interval = c.t_proj_in_unit_interval && row.t_proj > 0.0 && row.t_proj < 1.0;
      c.sandwich = c.sandwich && report.m_inf <= row.energy_at_projection && row.energy_at_projection < row.m_eps;
    }
    if (k == 0) continue;
    const SweepRow& prev = rows[k - 1];
    c.gap_nonincreasing = c.gap_nonincreasing && nonincreasing(prev.gap, row.gap, slack);
    c.eps_b_nonincreasing = c.eps_b_nonincreasing && nonincreasing(prev.eps_times_B, row.eps_times_B, slack);
    c.t_proj_nonincreasing =
        c.t_proj_nonincreasing && nonincreasing(std::abs(prev.t_proj - 1.0), std::abs(row.t_proj - 1.0), slack);
    c.e_dist_nonincreasing = c.e_dist_nonincreasing && nonincreasing(prev.e_dist, row.e_dist, slack);
  }
  report.checks = c;

  std::vector<const SweepRow*> positive;
  for (const SweepRow& row : rows) {
    if (row.eps > 0.0) positive.push_back(&row);
  }
  report.slope = std::numeric_limits<double>::quiet_NaN();
  if (positive.size() >= 2) {
    const std::size_t take = std::min<std::size_t>(3, positive.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = positive.size() - take; k < positive.size(); ++k) {
      const double x = std::log(positive[k]->eps);
      const double y = std::log(positive[k]->gap);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(take);
    report.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
}

SweepReport sweep(double p, std::span<const double> eps_list, const SolverConfig& config,
                  const SweepOptions& options) {
  require_exponent(p);
  config.validate();
  if (eps_list.empty() || eps_list.back() != 0.0) {
    throw std::invalid_argument("eps_list must be strictly decreasing and end at 0");
  }
  for (std::size_t k = 0; k + 1 < eps_list.size(); ++k) {
    if (!(eps_list[k] > eps_list[k + 1])) {
      throw std::invalid_argument("eps_list must be strictly decreasing and end at 0");
    }
  }
  if (options.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  SweepReport report;
  report.p = p;
  std::string failure;
  Solution reference = solve_or_best(ProblemParams::from_eps(p, 0.0), config, &failure);
  if (!failure.empty()) report.failures.push_back(failure);
  report.m_inf = reference.m;
  report.e_norm_inf = e_norm(reference.bd);

  const std::size_t count = eps_list.size() - 1;
  std::vector<std::optional<Solution>> solved(count);
  std::vector<std::string> errors(count);
  auto solve_one = [&](std::size_t k, const SolverConfig& cfg) {
    try {
      solved[k] = solve_or_best(ProblemParams::from_eps(p, eps_list[k]), cfg, &errors[k]);
    } catch (const std::exception& e) {
      errors[k] = fmt::format("eps = {}: {}", eps_list[k], e.what());
    }
  };

  if (options.continuation) {
    const Solution* previous = &reference;
    for (std::size_t k = count; k-- > 0;) {
      SolverConfig cfg = config;
      cfg.init = ProfileInit{previous->u};
      solve_one(k, cfg);
      if (solved[k]) previous = &*solved[k];
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < count; k = next++) solve_one(k, config);
    };
    const int threads = std::min<int>(options.jobs, static_cast<int>(count));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  report.eta = reference.min_m_functional;
  for (std::size_t k = 0; k < count; ++k) {
    if (!errors[k].empty()) report.failures.push_back(errors[k]);
    if (!solved[k]) {
      report.partial = true;
      continue;
    }
    report.rows.push_back(make_row(*solved[k], reference));
    report.eta = std::min(report.eta, solved[k]->min_m_functional);
  }
  report.rows.push_back(make_row(reference, reference));
  report.reference = std::move(reference);
  evaluate_sweep(report, options.slack);
  return report;
}

LocalLimitReport local_limit_study(double p, std::span<const double> lambda_list, const SolverConfig& config) {
  require_exponent(p);
  for (std::size_t k = 0; k < lambda_list.size(); ++k) {
    if (!(lambda_list[k] > 0.0 && lambda_list[k] <= 1.0)) {
      throw std::invalid_argument("lambda_list entries must lie in (0, 1]");
    }
    if (k > 0 && !(lambda_list[k] < lambda_list[k - 1])) {
      throw std::invalid_argument("lambda_list must be strictly decreasing");
    }
  }
  ProblemParams local{p, 1.0, std::nullopt, 0.0};
  const Solution base = ground_state(local, config);
  LocalLimitReport report;
  report.p = p;
  report.m_local = base.m;
  for (double lambda : lambda_list) {
    SolverConfig cfg = config;
    cfg.init = ProfileInit{base.u};
    const Solution sol = ground_state(ProblemParams{p, 1.0, std::nullopt, lambda}, cfg);
    LocalLimitRow row{lambda, sol.m, lambda * sol.bd.C / 4.0, sup_distance(sol.u, base.u)};
    if (!report.rows.empty()) {
      report.distance_decreasing = report.distance_decreasing && row.distance < report.rows.back().distance;
    }
    report.energy_above_local = report.energy_above_local && row.m > base.m;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace sps
