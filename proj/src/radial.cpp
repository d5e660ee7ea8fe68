#include "sps/radial.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace sps {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

}  // namespace

RadialGrid::RadialGrid(int n, double r_max, double stretch)
    : r_max_(r_max), stretch_(stretch) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw std::invalid_argument(fmt::format("non-positive domain: r_max = {}", r_max));
  }
  if (n < min_nodes) {
    throw std::invalid_argument(fmt::format("grid needs at least {} nodes, got {}", min_nodes, n));
  }
  if (!(stretch >= 1.0) || !std::isfinite(stretch)) {
    throw std::invalid_argument(fmt::format("stretch must be >= 1, got {}", stretch));
  }
  grading_ = stretch == 1.0 ? 0.0 : std::acosh(stretch);
  h_ = 1.0 / (n - 1);
  nodes_.resize(idx(n));
  jacobian_.resize(idx(n));
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / (n - 1);
    nodes_[idx(i)] = uniform() ? r_max * i / (n - 1) : radius_at(x);
    jacobian_[idx(i)] = jacobian_at(x);
  }
  nodes_.front() = 0.0;
  nodes_.back() = r_max;
}

double RadialGrid::radius_at(double x) const {
  if (uniform()) return r_max_ * x;
  return r_max_ * std::sinh(grading_ * x) / std::sinh(grading_);
}

double RadialGrid::jacobian_at(double x) const {
  if (uniform()) return r_max_;
  return r_max_ * grading_ * std::cosh(grading_ * x) / std::sinh(grading_);
}

double RadialGrid::reference_at(double r) const {
  if (uniform()) return r / r_max_;
  return std::asinh(r * std::sinh(grading_) / r_max_) / grading_;
}

GridPtr make_grid(int n, double r_max, double stretch) {
  return std::make_shared<const RadialGrid>(n, r_max, stretch);
}

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("radial function without a grid");
  if (values_.size() != idx(grid_->size())) {
    throw std::invalid_argument(
        fmt::format("profile has {} values for a {}-node grid", values_.size(), grid_->size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument(fmt::format("non-finite profile value at node {}", i));
    }
  }
}

RadialFunction::RadialFunction(GridPtr grid)
    : RadialFunction(grid, std::vector<double>(idx(grid ? grid->size() : 0), 0.0)) {}

double RadialFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool RadialFunction::is_decaying(double rel) const {
  return std::abs(values_.back()) <= rel * max_abs();
}

void RadialFunction::check_same_grid(const RadialFunction& o) const {
  if (grid_ != o.grid_ && !(*grid_ == *o.grid_)) {
    throw std::invalid_argument("radial functions live on different grids");
  }
}

RadialFunction& RadialFunction::operator+=(const RadialFunction& o) {
  check_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

RadialFunction& RadialFunction::operator-=(const RadialFunction& o) {
  check_same_grid(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

RadialFunction& RadialFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

RadialFunction product(const RadialFunction& a, const RadialFunction& b) {
  if (a.grid_ptr() != b.grid_ptr() && !(a.grid() == b.grid())) {
    throw std::invalid_argument("radial functions live on different grids");
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return RadialFunction(a.grid_ptr(), std::move(v));
}

void require_decaying(const RadialFunction& f, const char* what) {
  if (!f.is_decaying()) {
    throw std::invalid_argument(fmt::format(
        "{}: profile does not decay (|u(r_max)| = {:.3g}, max|u| = {:.3g})", what,
        std::abs(f.values().back()), f.max_abs()));
  }
}

double integrate(const RadialFunction& f) {
  const RadialGrid& g = f.grid();
  const int n = g.size();
  const double h = g.spacing();
  auto term = [&](int i) { return f[idx(i)] * g.node(i) * g.node(i) * g.jacobian(i); };

  const int panels = n - 1;
  const int simpson_end = panels % 2 == 0 ? panels : panels - 3;
  double s = 0.0;
  for (int k = 0; k < simpson_end; k += 2) {
    s += h / 3.0 * (term(k) + 4.0 * term(k + 1) + term(k + 2));
  }
  if (simpson_end != panels) {
    const int k = simpson_end;
    s += 3.0 * h / 8.0 * (term(k) + 3.0 * term(k + 1) + 3.0 * term(k + 2) + term(k + 3));
  }
  return four_pi * s;
}

double lp_power(const RadialFunction& u, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument(fmt::format("lp_power needs q >= 1, got {}", q));
  return integrate(u.map([q](double v) { return std::pow(std::abs(v), q); }));
}

RadialFunction derivative(const RadialFunction& u, Parity parity) {
  const RadialGrid& g = u.grid();
  const int n = g.size();
  const double c = 1.0 / (12.0 * g.spacing());
  auto at = [&](int i) { return u[idx(i)]; };
  std::vector<double> d(idx(n));

  for (int i = 2; i <= n - 3; ++i) {
    d[idx(i)] = c * (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2));
  }
  if (parity == Parity::regular) {
    d[0] = 0.0;
    d[1] = c * (at(1) - 8.0 * at(0) + 8.0 * at(2) - at(3));
  } else {
    d[0] = c * (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4));
    d[1] = c * (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4));
  }
  const int m = n - 1;
  d[idx(m)] = c * (25.0 * at(m) - 48.0 * at(m - 1) + 36.0 * at(m - 2) - 16.0 * at(m - 3) +
                   3.0 * at(m - 4));
  d[idx(m - 1)] = c * (3.0 * at(m) + 10.0 * at(m - 1) - 18.0 * at(m - 2) + 6.0 * at(m - 3) -
                       at(m - 4));

  for (int i = 0; i < n; ++i) d[idx(i)] /= g.jacobian(i);
  return RadialFunction(u.grid_ptr(), std::move(d));
}

MonotoneCubic::MonotoneCubic(const RadialFunction& u, Parity parity)
    : grid_(u.grid_ptr()), values_(u.values().begin(), u.values().end()) {
  const RadialFunction du = derivative(u, parity);
  slopes_.assign(du.values().begin(), du.values().end());
  const RadialGrid& g = *grid_;
  const int n = g.size();
  std::vector<double> secant(idx(n - 1));
  for (int k = 0; k + 1 < n; ++k) {
    secant[idx(k)] = (values_[idx(k + 1)] - values_[idx(k)]) / (g.node(k + 1) - g.node(k));
  }
  auto limit = [](double m, double left, double right) {
    // Hyman filter: only touches slopes between secants of one sign.
    if (left * right <= 0.0) return m;
    if (m * left <= 0.0) return 0.0;
    const double cap = 3.0 * std::min(std::abs(left), std::abs(right));
    return std::copysign(std::min(std::abs(m), cap), m);
  };
  for (int i = 1; i + 1 < n; ++i) {
    slopes_[idx(i)] = limit(slopes_[idx(i)], secant[idx(i - 1)], secant[idx(i)]);
  }
  if (parity == Parity::regular) {
    slopes_[0] = 0.0;
  } else {
    slopes_[0] = limit(slopes_[0], secant[0], secant[0]);
  }
  slopes_[idx(n - 1)] = limit(slopes_[idx(n - 1)], secant[idx(n - 2)], secant[idx(n - 2)]);
}

int MonotoneCubic::locate(double r) const {
  const RadialGrid& g = *grid_;
  const int n = g.size();
  int k = static_cast<int>(std::floor(g.reference_at(r) / g.spacing()));
  k = std::clamp(k, 0, n - 2);
  while (k > 0 && g.node(k) > r) --k;
  while (k < n - 2 && g.node(k + 1) < r) ++k;
  return k;
}

std::pair<double, double> MonotoneCubic::eval(double r) const {
  const RadialGrid& g = *grid_;
  if (r > g.r_max() || r < 0.0) return {0.0, 0.0};
  const int k = locate(r);
  const double r0 = g.node(k);
  const double len = g.node(k + 1) - r0;
  const double s = (r - r0) / len;
  const double y0 = values_[idx(k)], y1 = values_[idx(k + 1)];
  const double m0 = slopes_[idx(k)] * len, m1 = slopes_[idx(k + 1)] * len;
  const double s2 = s * s, s3 = s2 * s;
  const double value = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
                       (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
  const double slope = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 +
                        (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1) /
                       len;
  return {value, slope};
}

double MonotoneCubic::operator()(double r) const { return eval(r).first; }

RadialFunction resample_scaled(const RadialFunction& u, double scale, double stretch_r) {
  if (!(stretch_r > 0.0)) throw std::invalid_argument("resample_scaled needs a positive radial factor");
  const MonotoneCubic interp(u, Parity::regular);
  const RadialGrid& g = u.grid();
  std::vector<double> v(u.size());
  for (int i = 0; i < g.size(); ++i) {
    v[idx(i)] = scale * (stretch_r == 1.0 ? u[idx(i)] : interp(stretch_r * g.node(i)));
  }
  return RadialFunction(u.grid_ptr(), std::move(v));
}

void write_csv(std::ostream& os, const RadialFunction& f) {
  os << "r,value\n";
  const RadialGrid& g = f.grid();
  for (int i = 0; i < g.size(); ++i) {
    os << fmt::format("{:.17g},{:.17g}\n", g.node(i), f[idx(i)]);
  }
}

namespace {

double parse_number(const std::string& text, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError(fmt::format("line {}: '{}' is not a number", line, text));
  }
  if (used != text.size()) throw ParseError(fmt::format("line {}: '{}' is not a number", line, text));
  return v;
}

double infer_stretch(const std::vector<double>& r) {
  const int n = static_cast<int>(r.size());
  const double r_max = r.back();
  bool uniform = true;
  for (int i = 0; i < n && uniform; ++i) {
    uniform = std::abs(r[idx(i)] - r_max * i / (n - 1)) <= 1e-12 * r_max;
  }
  if (uniform) return 1.0;
  // r_1 / r_max = sinh(a h) / sinh(a) decreases in a.
  const double target = r[1] / r_max;
  const double h = 1.0 / (n - 1);
  double lo = 1e-12, hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::sinh(mid * h) / std::sinh(mid) > target ? lo : hi) = mid;
  }
  // Stretch factors are short decimals in practice; snap so that the grid
  // compares equal to the one that wrote the file.
  return std::stod(fmt::format("{:.10g}", std::cosh(0.5 * (lo + hi))));
}

}  // namespace

RadialFunction read_csv(std::istream& is) {
  std::string line;
  int line_no = 1;
  if (!std::getline(is, line)) throw ParseError("line 1: empty profile file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "r,value") throw ParseError(fmt::format("line 1: expected header 'r,value', got '{}'", line));

  std::vector<double> r, v;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(fmt::format("line {}: expected two columns", line_no));
    r.push_back(parse_number(line.substr(0, comma), line_no));
    v.push_back(parse_number(line.substr(comma + 1), line_no));
  }
  if (r.size() < static_cast<std::size_t>(RadialGrid::min_nodes)) {
    throw ParseError(fmt::format("line {}: profile has only {} rows", line_no, r.size()));
  }
  const int n = static_cast<int>(r.size());
  const double stretch = infer_stretch(r);
  GridPtr grid;
  try {
    grid = make_grid(n, r.back(), stretch);
  } catch (const std::invalid_argument& e) {
    throw ParseError(fmt::format("line {}: {}", line_no, e.what()));
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(grid->node(i) - r[idx(i)]) > 1e-9 * r.back()) {
      throw ParseError(fmt::format("line {}: node r = {} does not match a supported grid", i + 2, r[idx(i)]));
    }
  }
  return RadialFunction(grid, std::move(v));
}

}  // namespace sps
