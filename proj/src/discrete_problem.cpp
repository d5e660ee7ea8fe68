#include "discrete_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sps/coulomb.hpp"

namespace sps::detail {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Staggered fourth-order difference at x_{m+1/2} from w_{m-1}..w_{m+2}.
constexpr double kStencil[4] = {1.0 / 24.0, -27.0 / 24.0, 27.0 / 24.0, -1.0 / 24.0};

}  // namespace

DiscreteProblem::DiscreteProblem(GridPtr grid, const ProblemParams& params)
    : grid_(std::move(grid)), params_(params), h_(grid_->spacing()) {
  params_.validate();
  const int n = grid_->size();
  mid_weight_.resize(idx(n - 1));
  for (int m = 0; m + 1 < n; ++m) {
    mid_weight_[idx(m)] = 1.0 / grid_->jacobian_at((m + 0.5) * h_);
  }
}

std::vector<double> DiscreteProblem::to_w(const RadialFunction& u) const {
  std::vector<double> w(u.size());
  for (int i = 0; i < size(); ++i) w[idx(i)] = grid_->node(i) * u[idx(i)];
  w.front() = 0.0;
  w.back() = 0.0;
  return w;
}

RadialFunction DiscreteProblem::to_u(std::span<const double> w) const {
  const int n = size();
  std::vector<double> u(idx(n));
  for (int i = 1; i < n; ++i) u[idx(i)] = w[idx(i)] / grid_->node(i);
  // u is even in the reference coordinate.
  u[0] = (4.0 * u[1] - u[2]) / 3.0;
  return RadialFunction(grid_, std::move(u));
}

std::vector<double> DiscreteProblem::stiffness(std::span<const double> w, double* quadratic) const {
  const int n = size();
  // Odd extension through both ends: w_{-1} = -w_1, w_n = -w_{n-2}.
  auto at = [&](int j, double& sign) -> int {
    sign = 1.0;
    if (j < 0) {
      sign = -1.0;
      return -j;
    }
    if (j > n - 1) {
      sign = -1.0;
      return 2 * (n - 1) - j;
    }
    return j;
  };
  std::vector<double> out(idx(n), 0.0);
  double sum = 0.0;
  for (int m = 0; m + 1 < n; ++m) {
    double raw = 0.0;
    int where[4];
    double signs[4];
    for (int k = 0; k < 4; ++k) {
      where[k] = at(m - 1 + k, signs[k]);
      raw += kStencil[k] * signs[k] * w[idx(where[k])];
    }
    const double flux = mid_weight_[idx(m)] * raw;
    sum += flux * raw;
    for (int k = 0; k < 4; ++k) out[idx(where[k])] += kStencil[k] * signs[k] * flux;
  }
  out.front() = 0.0;
  out.back() = 0.0;
  if (quadratic) *quadratic = sum;
  return out;
}

std::vector<double> DiscreteProblem::potential(std::span<const double> w) const {
  const RadialFunction u = to_u(w);
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = u[i] * u[i];
  return potential_of_density(*grid_, rho);
}

DiscreteParts DiscreteProblem::parts(std::span<const double> w) const {
  const int n = size();
  const double p = params_.p;
  double quadratic = 0.0;
  stiffness(w, &quadratic);
  const std::vector<double> phi = potential(w);
  DiscreteParts out;
  for (int i = 1; i + 1 < n; ++i) {
    const double jac = grid_->jacobian(i);
    const double r = grid_->node(i);
    const double wi = w[idx(i)];
    out.B += jac * wi * wi;
    out.C += jac * phi[idx(i)] * wi * wi;
    out.D += jac * r * r * std::pow(std::abs(wi / r), p);
  }
  const double weight = 4.0 * std::numbers::pi * h_;
  out.A = weight * quadratic / (h_ * h_);
  out.B *= weight;
  out.C *= weight;
  out.D *= weight;
  return out;
}

double DiscreteProblem::energy(const DiscreteParts& d) const {
  return d.A / 2.0 + params_.eps * d.B / 2.0 + params_.coupling * d.C / 4.0 - d.D / params_.p;
}

Evaluation DiscreteProblem::evaluate(std::span<const double> w) const {
  const int n = size();
  const double p = params_.p;
  Evaluation ev;
  double quadratic = 0.0;
  ev.grad = stiffness(w, &quadratic);
  ev.phi = potential(w);
  const double inv_h2 = 1.0 / (h_ * h_);
  for (int i = 1; i + 1 < n; ++i) {
    const double jac = grid_->jacobian(i);
    const double r = grid_->node(i);
    const double wi = w[idx(i)];
    const double u = wi / r;
    const double up = std::pow(std::abs(u), p - 2.0);
    ev.parts.B += jac * wi * wi;
    ev.parts.C += jac * ev.phi[idx(i)] * wi * wi;
    ev.parts.D += jac * r * r * up * u * u;
    ev.grad[idx(i)] = ev.grad[idx(i)] * inv_h2 +
                      jac * ((params_.eps + params_.coupling * ev.phi[idx(i)]) * wi - r * up * u);
  }
  const double weight = 4.0 * std::numbers::pi * h_;
  ev.parts.A = weight * quadratic * inv_h2;
  ev.parts.B *= weight;
  ev.parts.C *= weight;
  ev.parts.D *= weight;
  ev.energy = energy(ev.parts);
  return ev;
}

double DiscreteProblem::relative_sup_residual(std::span<const double> w,
                                              std::span<const double> grad) const {
  const int n = size();
  const RadialFunction u = to_u(w);
  const double peak = std::pow(u.max_abs(), params_.p - 1.0);
  if (!(peak > 0.0)) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int i = 1; i + 1 < n; ++i) {
    worst = std::max(worst, std::abs(grad[idx(i)]) / (grid_->jacobian(i) * grid_->node(i)));
  }
  return worst / peak;
}

std::vector<double> DiscreteProblem::precondition(std::span<const double> g, double shift) const {
  const int n = size();
  const int m = n - 2;
  const double inv_h2 = 1.0 / (h_ * h_);
  // Thomas algorithm on the interior unknowns 1..n-2.
  std::vector<double> c(idx(m)), d(idx(m));
  double prev_c = 0.0, prev_d = 0.0;
  for (int k = 0; k < m; ++k) {
    const int i = k + 1;
    const double left = mid_weight_[idx(i - 1)] * inv_h2;
    const double right = mid_weight_[idx(i)] * inv_h2;
    const double diag = left + right + shift * grid_->jacobian(i);
    const double lower = k > 0 ? -left : 0.0;
    const double denom = diag - lower * prev_c;
    c[idx(k)] = k + 1 < m ? -right / denom : 0.0;
    d[idx(k)] = (g[idx(i)] - lower * prev_d) / denom;
    prev_c = c[idx(k)];
    prev_d = d[idx(k)];
  }
  std::vector<double> out(idx(n), 0.0);
  for (int k = m - 1; k >= 0; --k) {
    const double next = k + 1 < m ? out[idx(k + 2)] : 0.0;
    out[idx(k + 1)] = d[idx(k)] - c[idx(k)] * next;
  }
  return out;
}

double DiscreteProblem::pair(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return 4.0 * std::numbers::pi * h_ * s;
}

}  // namespace sps::detail
