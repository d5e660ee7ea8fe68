#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace sps {

/// One-dimensional mesh on [0, r_max] for radially symmetric fields in R^3.
///
/// Nodes are the image of a uniform reference mesh x_i = i/(n-1) under
/// r(x) = r_max * sinh(a x) / sinh(a), a = acosh(stretch). stretch = 1 is the
/// uniform mesh; larger values grade the spacing geometrically outward, with
/// stretch equal to the ratio of outer to inner spacing. The map is odd in x,
/// so profiles that are even in r stay even in the reference coordinate.
class RadialGrid {
 public:
  static constexpr int min_nodes = 16;

  RadialGrid(int n, double r_max, double stretch = 1.0);

  int size() const { return static_cast<int>(nodes_.size()); }
  double r_max() const { return r_max_; }
  double stretch() const { return stretch_; }
  /// Spacing of the uniform reference mesh on [0, 1].
  double spacing() const { return h_; }

  std::span<const double> nodes() const { return nodes_; }
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  /// dr/dx at the nodes.
  std::span<const double> jacobian() const { return jacobian_; }
  double jacobian(int i) const { return jacobian_[static_cast<std::size_t>(i)]; }

  double radius_at(double x) const;
  double jacobian_at(double x) const;
  /// Inverse map r -> x.
  double reference_at(double r) const;

  bool uniform() const { return grading_ == 0.0; }

  friend bool operator==(const RadialGrid& a, const RadialGrid& b) {
    return a.size() == b.size() && a.r_max_ == b.r_max_ && a.stretch_ == b.stretch_;
  }

 private:
  double r_max_;
  double stretch_;
  double grading_;  // a = acosh(stretch)
  double h_;
  std::vector<double> nodes_;
  std::vector<double> jacobian_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Throws std::invalid_argument for n < 16, r_max <= 0 or stretch < 1.
GridPtr make_grid(int n, double r_max, double stretch = 1.0);

/// Samples of a radial profile on a grid. Values are always finite.
class RadialFunction {
 public:
  RadialFunction(GridPtr grid, std::vector<double> values);
  /// Zero profile.
  explicit RadialFunction(GridPtr grid);

  template <class F>
  static RadialFunction sample(GridPtr grid, F&& f) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()));
    for (int i = 0; i < grid->size(); ++i) v[static_cast<std::size_t>(i)] = f(grid->node(i));
    return RadialFunction(std::move(grid), std::move(v));
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_abs() const;
  /// |u(r_max)| <= rel * max|u|; the truncation sanity check for profiles
  /// that are meant to vanish at infinity.
  bool is_decaying(double rel = 1e-6) const;

  template <class F>
  RadialFunction map(F&& f) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(values_[i]);
    return RadialFunction(grid_, std::move(v));
  }

  RadialFunction& operator+=(const RadialFunction& o);
  RadialFunction& operator-=(const RadialFunction& o);
  RadialFunction& operator*=(double s);

  friend RadialFunction operator+(RadialFunction a, const RadialFunction& b) { return a += b; }
  friend RadialFunction operator-(RadialFunction a, const RadialFunction& b) { return a -= b; }
  friend RadialFunction operator*(RadialFunction a, double s) { return a *= s; }
  friend RadialFunction operator*(double s, RadialFunction a) { return a *= s; }

 private:
  void check_same_grid(const RadialFunction& o) const;

  GridPtr grid_;
  std::vector<double> values_;
};

/// Pointwise product on a shared grid.
RadialFunction product(const RadialFunction& a, const RadialFunction& b);

/// Throws std::invalid_argument unless f.is_decaying().
void require_decaying(const RadialFunction& f, const char* what);

/// Integral over R^3 of a radial function: 4*pi * int_0^{r_max} f(r) r^2 dr.
/// Composite Simpson in the reference coordinate (3/8 rule on the last three
/// panels when the panel count is odd).
double integrate(const RadialFunction& f);

/// int_{R^3} |u|^q. Throws for q < 1.
double lp_power(const RadialFunction& u, double q);

enum class Parity {
  general,  ///< one-sided stencils at r = 0
  regular,  ///< even extension through r = 0, so u'(0) = 0
};

/// du/dr by fourth-order finite differences in the reference coordinate.
RadialFunction derivative(const RadialFunction& u, Parity parity = Parity::general);

/// Piecewise cubic Hermite interpolant of a radial profile, with slopes from
/// `derivative` limited so that monotone data stays monotone. Zero beyond
/// r_max.
class MonotoneCubic {
 public:
  MonotoneCubic(const RadialFunction& u, Parity parity = Parity::regular);

  double operator()(double r) const;
  /// Value and d/dr at r.
  std::pair<double, double> eval(double r) const;

 private:
  int locate(double r) const;

  GridPtr grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// g(r) = scale * u(stretch_r * r), resampled onto u's grid (zero extension).
RadialFunction resample_scaled(const RadialFunction& u, double scale, double stretch_r);

/// Profile CSV: header "r,value", one row per node, 17 significant digits.
void write_csv(std::ostream& os, const RadialFunction& f);
/// Rebuilds the grid (n, r_max, stretch) from the node column.
RadialFunction read_csv(std::istream& is);

/// Malformed input file; `what()` names the first offending location.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sps
