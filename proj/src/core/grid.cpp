#include "core/grid.hpp"

namespace topt {

SpatialGrid SpatialGrid::uniform(int m, double length) {
  if (m < 8)
    throw Error::invalid("spatial grid needs at least 8 nodes, got " + std::to_string(m));
  if (!(length > 0.0))
    throw Error::invalid("spatial grid length must be positive");
  SpatialGrid g;
  g.m = m;
  g.length = length;
  g.dx = length / m;
  return g;
}

TimeGrid TimeGrid::from_steps(int n, double dt) {
  if (n < 2)
    throw Error::invalid("time grid needs at least 2 nodes, got " + std::to_string(n));
  if (!(dt > 0.0))
    throw Error::invalid("time step must be positive");
  TimeGrid tg;
  tg.n = n;
  tg.dt = dt;
  tg.t_f = n * dt;
  return tg;
}

TimeGrid TimeGrid::from_cfl(const SpatialGrid& grid, double cfl, double wave_speed, int n) {
  if (!(cfl > 0.0))
    throw Error::invalid("cfl number must be positive");
  if (!(wave_speed > 0.0))
    throw Error::invalid("wave speed must be positive");
  return from_steps(n, cfl * grid.dx / wave_speed);
}

Vector time_quadrature_weights(const TimeGrid& tg) {
  Vector w = Vector::Constant(tg.n, tg.dt);
  w(0) *= 0.5;
  w(tg.n - 1) *= 0.5;
  return w;
}

} // namespace topt
