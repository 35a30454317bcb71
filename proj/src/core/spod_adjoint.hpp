#pragma once

#include "core/spod.hpp"

namespace topt {

// Adjoint trajectory of the shifted reduced model: multipliers of the
// coefficient equations plus the multiplier of the shift equation.
struct SpodAdjoint {
  Matrix coeffs;        // r x n
  Vector shift_adjoint; // n, zero when the shift is frozen
};

// Reduce-then-optimize adjoint of the shifted reduced dynamics, marched
// backward from a zero terminal state with the same mass matrix and
// tabulated blocks as the forward solve.
SpodAdjoint solve_spod_adjoint(const SpodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                               const SpodTrajectory& traj, const Matrix& u,
                               const SpodOptions& opt = {});

// Control gradient density mu u + B^T V p_a + p_z B^T (W a) per time node.
Matrix spod_gradient(const SpodRom& rom, const FomSystem& sys, const SpodTrajectory& traj,
                     const SpodAdjoint& adj, const Matrix& u);

} // namespace topt
