#pragma once

#include "core/types.hpp"

namespace topt {

// Uniform periodic spatial grid with nodes x_i = i*dx for i = 1..m, so the
// last node sits at x = length and there is no duplicate node at 0.
struct SpatialGrid {
  int m = 0;
  double length = 0.0;
  double dx = 0.0;

  static SpatialGrid uniform(int m, double length);
  double node(int i) const { return (i + 1) * dx; } // i is 0-based storage index
};

// Uniform time grid with n sample nodes t_j = (j-1)*dt; the bookkeeping final
// time satisfies n*dt = t_f, so trajectories span [0, (n-1)*dt].
struct TimeGrid {
  int n = 0;
  double dt = 0.0;
  double t_f = 0.0;

  static TimeGrid from_steps(int n, double dt);
  // dt = cfl*dx/wave_speed, the stability-scaled step for the advection system.
  static TimeGrid from_cfl(const SpatialGrid& grid, double cfl, double wave_speed, int n);
  double node(int j) const { return j * dt; } // j is 0-based storage index
};

// Trapezoidal quadrature weights over the n time nodes: dt/2 at the ends,
// dt inside.
Vector time_quadrature_weights(const TimeGrid& tg);

} // namespace topt
