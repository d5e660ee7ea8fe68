// Self-consistent field iteration with a shooting solver for the frozen-potential
// radial ODE. Shares only the public potential and functionals with the descent
// solver.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "discrete_problem.hpp"
#include "sps/coulomb.hpp"
#include "sps/solver.hpp"

namespace sps {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

enum class Outcome { over, under };

struct Shot {
  Outcome outcome = Outcome::under;
  int valid = 0;  // nodes [0, valid) hold the trajectory
  std::vector<double> u;
};

class Shooter {
 public:
  Shooter(const RadialGrid& grid, const ProblemParams& params, std::span<const double> phi)
      : grid_(grid), params_(params), phi_(phi.begin(), phi.end()) {
    const int n = grid.size();
    const double h = grid.spacing();
    // Cubic Lagrange in the reference coordinate at x_{i+1/2}.
    phi_mid_.resize(idx(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
      const int base = std::clamp(i - 1, 0, n - 4);
      const double s = (i + 0.5) - base;
      double value = 0.0;
      for (int k = 0; k < 4; ++k) {
        double weight = 1.0;
        for (int j = 0; j < 4; ++j) {
          if (j != k) weight *= (s - j) / (k - j);
        }
        value += weight * phi_[idx(base + k)];
      }
      phi_mid_[idx(i)] = value;
    }
    r_mid_.resize(idx(n - 1));
    jac_mid_.resize(idx(n - 1));
    for (int i = 0; i + 1 < n; ++i) {
      r_mid_[idx(i)] = grid.radius_at((i + 0.5) * h);
      jac_mid_[idx(i)] = grid.jacobian_at((i + 0.5) * h);
    }
  }

  Shot operator()(double a) const {
    const int n = grid_.size();
    const double h = grid_.spacing();
    const double p = params_.p;
    Shot shot;
    shot.u.assign(idx(n), 0.0);
    shot.u[0] = a;

    // Series start u = a + c r^2 + d r^4 + O(r^6).
    const double r1 = grid_.node(1);
    const double mass = params_.eps + params_.coupling * phi_[0];
    const double curvature = params_.coupling * (phi_[1] - phi_[0]) / (r1 * r1);
    const double c = a * (mass - std::pow(a, p - 2.0)) / 6.0;
    const double d = (mass * c + curvature * a - (p - 1.0) * std::pow(a, p - 2.0) * c) / 20.0;
    double u = a + c * r1 * r1 + d * r1 * r1 * r1 * r1;
    double v = 2.0 * c * r1 + 4.0 * d * r1 * r1 * r1;
    shot.u[1] = u;

    auto rhs = [&](double r, double jac, double phi, double uu, double vv, double& du, double& dv) {
      du = jac * vv;
      dv = jac * (-2.0 * vv / r + (params_.eps + params_.coupling * phi) * uu -
                  std::pow(std::abs(uu), p - 2.0) * uu);
    };

    for (int i = 1; i + 1 < n; ++i) {
      const double r0 = grid_.node(i), j0 = grid_.jacobian(i), f0 = phi_[idx(i)];
      const double rm = r_mid_[idx(i)], jm = jac_mid_[idx(i)], fm = phi_mid_[idx(i)];
      const double r2 = grid_.node(i + 1), j2 = grid_.jacobian(i + 1), f2 = phi_[idx(i + 1)];
      double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
      rhs(r0, j0, f0, u, v, k1u, k1v);
      rhs(rm, jm, fm, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
      rhs(rm, jm, fm, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
      rhs(r2, j2, f2, u + h * k3u, v + h * k3v, k4u, k4v);
      u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      if (!std::isfinite(u) || u < 0.0) {
        shot.outcome = Outcome::over;
        shot.valid = i + 1;
        return shot;
      }
      shot.u[idx(i + 1)] = u;
      if (v > 0.0) {
        shot.outcome = Outcome::under;
        shot.valid = i + 2;
        return shot;
      }
    }
    // Reached r_max still positive and decreasing.
    shot.outcome = Outcome::under;
    shot.valid = n;
    return shot;
  }

 private:
  const RadialGrid& grid_;
  const ProblemParams& params_;
  std::vector<double> phi_;
  std::vector<double> phi_mid_;
  std::vector<double> r_mid_;
  std::vector<double> jac_mid_;
};

// Bisection on u(0) between an undershoot and an overshoot, then the shared
// part of the two limiting trajectories joined to a linear tail that vanishes
// at r_max.
std::vector<double> shoot_profile(const RadialGrid& grid, const ProblemParams& params,
                                  std::span<const double> phi, double guess) {
  const Shooter shooter(grid, params, phi);
  double lo = 0.0, hi = 0.0;
  Shot lo_shot, hi_shot;
  double a = guess > 0.0 ? guess : 1.0;
  Shot first = shooter(a);
  if (first.outcome == Outcome::under) {
    lo = a;
    lo_shot = std::move(first);
    hi = a;
    for (int k = 0;; ++k) {
      if (k > 200) throw SolverError("shooting: no overshoot found");
      hi *= 1.5;
      Shot s = shooter(hi);
      if (s.outcome == Outcome::over) {
        hi_shot = std::move(s);
        break;
      }
      lo = hi;
      lo_shot = std::move(s);
    }
  } else {
    hi = a;
    hi_shot = std::move(first);
    lo = a;
    for (int k = 0;; ++k) {
      if (k > 200) throw SolverError("shooting: no undershoot found");
      lo /= 1.5;
      Shot s = shooter(lo);
      if (s.outcome == Outcome::under) {
        lo_shot = std::move(s);
        break;
      }
      hi = lo;
      hi_shot = std::move(s);
    }
  }
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Shot s = shooter(mid);
    if (s.outcome == Outcome::under) {
      lo = mid;
      lo_shot = std::move(s);
    } else {
      hi = mid;
      hi_shot = std::move(s);
    }
  }

  const int n = grid.size();
  const int shared = std::min(lo_shot.valid, hi_shot.valid);
  int cut = 1;
  while (cut < shared) {
    const double a_lo = lo_shot.u[idx(cut)], a_hi = hi_shot.u[idx(cut)];
    const double mean = 0.5 * (a_lo + a_hi);
    if (!(mean > 0.0) || std::abs(a_lo - a_hi) > 1e-4 * mean) break;
    ++cut;
  }
  const int anchor = std::min(cut - 1, n - 3);
  std::vector<double> u(idx(n), 0.0);
  for (int i = 0; i <= anchor; ++i) u[idx(i)] = 0.5 * (lo_shot.u[idx(i)] + hi_shot.u[idx(i)]);

  // Tail: -(a w')' + J (eps + phi) w = 0 for w = r u, w(anchor) given, w(r_max) = 0.
  // The nonlinear term is below rounding there.
  const double h = grid.spacing();
  const int first_unknown = anchor + 1;
  const int m = n - 1 - first_unknown;
  if (m > 0) {
    auto mid_weight = [&](int i) { return 1.0 / grid.jacobian_at((i + 0.5) * h); };
    std::vector<double> cp(idx(m)), dp(idx(m));
    double prev_c = 0.0, prev_d = 0.0;
    for (int k = 0; k < m; ++k) {
      const int i = first_unknown + k;
      const double left = mid_weight(i - 1) / (h * h);
      const double right = mid_weight(i) / (h * h);
      const double diag =
          left + right + grid.jacobian(i) * (params.eps + params.coupling * phi[idx(i)]);
      double rhs = 0.0;
      double lower = -left;
      if (k == 0) {
        rhs = left * grid.node(anchor) * u[idx(anchor)];
        lower = 0.0;
      }
      const double denom = diag - lower * prev_c;
      cp[idx(k)] = -right / denom;
      dp[idx(k)] = (rhs - lower * prev_d) / denom;
      prev_c = cp[idx(k)];
      prev_d = dp[idx(k)];
    }
    double next = 0.0;
    for (int k = m - 1; k >= 0; --k) {
      const double w = dp[idx(k)] - cp[idx(k)] * next;
      const int i = first_unknown + k;
      u[idx(i)] = w / grid.node(i);
      next = w;
    }
  }
  u[idx(n - 1)] = 0.0;
  return u;
}

double relative_sup(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  return ref > 0.0 ? diff / ref : std::numeric_limits<double>::infinity();
}

}  // namespace

Solution scf_cross_check(const ProblemParams& params, const SolverConfig& config, const ScfOptions& options) {
  params.validate();
  config.validate();
  if (!(params.eps > 0.0)) throw std::invalid_argument("shooting requires eps>0");
  const GridPtr grid = config.grid.build();

  RadialFunction u0 = [&] {
    if (const auto* g = std::get_if<GaussianInit>(&config.init)) {
      return RadialFunction::sample(grid, [&](double r) {
        const double s = r / g->width;
        return g->amplitude * std::exp(-s * s);
      });
    }
    const RadialFunction& prof = std::get<ProfileInit>(config.init).profile;
    const MonotoneCubic interp(prof);
    return RadialFunction::sample(grid, [&](double r) { return interp(r); });
  }();
  std::vector<double> u(u0.values().begin(), u0.values().end());
  auto density = [](std::span<const double> v) {
    std::vector<double> rho(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) rho[i] = v[i] * v[i];
    return rho;
  };
  std::vector<double> phi = potential_of_density(*grid, density(u));

  double damping = options.initial_damping;
  double previous = std::numeric_limits<double>::infinity();
  int iters = 0;
  bool converged = false;
  while (iters < options.max_iters) {
    u = shoot_profile(*grid, params, phi, u[0]);
    ++iters;
    const std::vector<double> induced = potential_of_density(*grid, density(u));
    const double mismatch = relative_sup(phi, induced);
    if (mismatch <= config.tol_residual) {
      converged = true;
      break;
    }
    if (mismatch > previous) {
      damping *= 0.5;
      if (damping < options.min_damping) {
        throw SolverError(fmt::format("SCF stagnation: damping below {} with potential mismatch {:.3e}",
                                      options.min_damping, mismatch));
      }
    }
    previous = mismatch;
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += damping * (induced[i] - phi[i]);
  }
  if (!converged) {
    throw SolverError(fmt::format("SCF stagnation: {} iterations without convergence", iters));
  }
  Solution sol = detail::finish_solution(params, RadialFunction(grid, std::move(u)));
  sol.iters = iters;
  sol.converged = true;
  return sol;
}

}  // namespace sps
