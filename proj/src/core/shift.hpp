#pragma once

#include "core/grid.hpp"
#include "core/types.hpp"

namespace topt {

// Six-point Lagrange weights at fractional offset theta in [0, 1), for stencil
// offsets {-2, -1, 0, 1, 2, 3}: interpolant values plus first and second
// derivatives with respect to theta. Exact for polynomials up to degree five.
struct LagrangeWeights {
  double value[6];
  double d1[6];
  double d2[6];
};

LagrangeWeights lagrange_weights(double theta);

// Periodic shift operator at interpolation order five. derivative selects
// what the rows evaluate: 0 gives q(x - z), 1 gives d/dz of that, which is
// -q'(x - z), and 2 gives the second z-derivative q''(x - z).
SpMatrix build_shift_operator(const SpatialGrid& grid, double z, int derivative = 0);

// Matrix-free equivalent of build_shift_operator(grid, z, derivative) * a.
Matrix apply_shift(const SpatialGrid& grid, const Matrix& a, double z, int derivative = 0);

// Matrix-free equivalent of build_shift_operator(grid, z, derivative)^T * a.
// The interpolated shift is close to but not exactly unitary, so adjoint
// consistency needs the true transpose rather than the reverse shift.
Matrix apply_shift_transpose(const SpatialGrid& grid, const Matrix& a, double z,
                             int derivative = 0);

// Shift track of a snapshot family relative to its first column, from
// circular cross-correlation with sub-grid parabolic peak refinement. The
// track is unwrapped to be continuous across the periodic boundary, with
// entry 0 pinned to zero. Near-constant columns have no correlation peak and
// raise a degenerate-data error.
Vector estimate_shifts(const SpatialGrid& grid, const Matrix& snapshots);

} // namespace topt
