#pragma once

#include <span>
#include <vector>

#include "sps/radial.hpp"

namespace sps {

/// A profile together with its Newtonian potential phi = I_2 * |u|^2,
/// I_2(x) = 1 / (4 pi |x|).
struct CoulombPair {
  RadialFunction u;
  RadialFunction phi;
  double total_charge;  ///< int_{R^3} |u|^2
};

/// phi(r) = (1/r) int_0^r rho s^2 ds + int_r^inf rho s ds for a radial density
/// rho sampled on `grid`.
///
/// Both pieces are running trapezoid sums in the reference coordinate. The
/// leading error of the two sums comes from the kink of the kernel
/// 1/max(r, s) at s = r and equals h^2 rho J^2 / 12; it is subtracted
/// pointwise, which leaves the discrete kernel symmetric and the result
/// fourth-order for densities that are even in r. Nothing is added for mass
/// beyond r_max.
std::vector<double> potential_of_density(const RadialGrid& grid, std::span<const double> rho);

CoulombPair newtonian_potential(const RadialFunction& u);

/// C = int (I_2 * |u|^2) |u|^2.
double coulomb_energy(const RadialFunction& u);
double coulomb_energy(const CoulombPair& pair);

/// Independent O(n^2) evaluation of C for cross-checks: the symmetric double
/// integral reduced to 8 pi int rho(r) r F(r) dr with F(r) = int_0^r rho s^2 ds
/// recomputed by a fresh Newton-Cotes rule for every r. Rejects n > 512.
double brute_force_coulomb(const RadialFunction& u);

}  // namespace sps
