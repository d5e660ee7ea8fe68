#pragma once

// Discrete energy shared by the descent solver and verify(). Works with
// w = r u, which vanishes at both ends of the grid.

#include <span>
#include <vector>

#include "sps/functionals.hpp"
#include "sps/radial.hpp"
#include "sps/solver.hpp"

namespace sps::detail {

struct DiscreteParts {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
};

struct Evaluation {
  DiscreteParts parts;
  double energy = 0.0;
  /// dE/dw divided by 4 pi h; zero at the two boundary nodes.
  std::vector<double> grad;
  std::vector<double> phi;
};

class DiscreteProblem {
 public:
  DiscreteProblem(GridPtr grid, const ProblemParams& params);

  const RadialGrid& grid() const { return *grid_; }
  int size() const { return grid_->size(); }

  std::vector<double> to_w(const RadialFunction& u) const;
  RadialFunction to_u(std::span<const double> w) const;

  std::vector<double> potential(std::span<const double> w) const;
  DiscreteParts parts(std::span<const double> w) const;
  double energy(const DiscreteParts& parts) const;
  Evaluation evaluate(std::span<const double> w) const;

  /// Residual of the discrete equation in u form at interior nodes,
  /// max_i |grad_i / (J_i r_i)| / max_i |u_i|^{p-1}.
  double relative_sup_residual(std::span<const double> w, std::span<const double> grad) const;

  /// Solves (T + shift J) d = g with T the second-order stiffness matrix.
  std::vector<double> precondition(std::span<const double> g, double shift) const;

  /// Euclidean pairing matching the energy: 4 pi h sum a_i b_i.
  double pair(std::span<const double> a, std::span<const double> b) const;

 private:
  std::vector<double> stiffness(std::span<const double> w, double* quadratic) const;

  GridPtr grid_;
  ProblemParams params_;
  double h_;
  std::vector<double> mid_weight_;  // 1 / J at x_{m+1/2}
};

/// Solution for a profile: potential, public breakdown, energy and residuals.
Solution finish_solution(const ProblemParams& params, RadialFunction u);

}  // namespace sps::detail
