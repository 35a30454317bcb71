#pragma once

#include "core/grid.hpp"
#include "core/types.hpp"

namespace topt {

// Semi-discrete periodic advection system q' = A q + B u with output weights
// C = diag(c) and quadratic tracking target q_d:
//   J(u) = 1/2 sum_j w_j ( |C (q_j - q_d_j)|^2 + mu |u_j|^2 )
// with w the trapezoidal time weights.
struct FomSystem {
  SpMatrix A;   // m x m advection operator, circulant
  SpMatrix At;  // A transposed, materialized once for the adjoint sweeps
  Matrix B;     // m x n_c control-to-state injection, Gaussian columns
  Vector c;     // m output weights (diagonal of C)
  Vector q0;    // initial state
  Matrix q_d;   // m x n tracking target, one column per time node
  double mu = 0.0;
  double velocity = 0.0;

  int state_dim() const { return static_cast<int>(B.rows()); }
  int control_dim() const { return static_cast<int>(B.cols()); }
};

// Sixth-order central difference of -velocity * d/dx on the periodic grid.
// Stencil (-1/60, 3/20, -3/4, 0, 3/4, -3/20, 1/60)/dx, wrapped at the ends.
SpMatrix build_advection_operator(const SpatialGrid& grid, double velocity);

// Column k (1-based) is the Gaussian exp(-4 (x - length*(k+1)/n_c)^2)
// sampled at the grid nodes, without periodic wrapping.
Matrix build_control_operator(const SpatialGrid& grid, int n_controls);

// Diagonal of C: sqrt(dx) scaled trapezoidal weights, halved at the first and
// last node, so |C y|^2 approximates the spatial L2 norm of y.
Vector build_output_weights(const SpatialGrid& grid);

// Classic RK4 over the time grid. Off-node stage values of the forcing are
// linearly interpolated between the two bracketing sample nodes.
// Returns the m x n snapshot matrix; column 1 is q0.
Matrix solve_state(const FomSystem& sys, const TimeGrid& tg, const Matrix& u);

// Backward RK4 for -p' = A^T p + C^T C (q - q_d), p(t_n) = 0, with the
// residual linearly interpolated at half steps. Returns m x n, column j is
// p(t_j); the last column is zero.
Matrix solve_adjoint(const FomSystem& sys, const TimeGrid& tg, const Matrix& state);

double cost(const FomSystem& sys, const TimeGrid& tg, const Matrix& state, const Matrix& u);

// First-order optimality residual mu*u + B^T p, one column per time node.
// This is the gradient density with respect to the time quadrature; the
// partial derivative of the discrete cost in entry (k, j) carries an extra
// factor w_j.
Matrix control_gradient(const FomSystem& sys, const Matrix& u, const Matrix& adjoint);

} // namespace topt
