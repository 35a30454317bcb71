#pragma once

// Oracle helpers shared by the unit and acceptance tests. Everything here is
// implementation-independent on purpose: finite differences, analytic
// solutions, and random smooth data generators used to cross-check the
// library numerics.

#include "core/fom.hpp"
#include "core/grid.hpp"
#include "core/types.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace tt {

using topt::Matrix;
using topt::Vector;

// Fresh scratch directory for artifact round-trip tests, unique per label and
// process so parallel test runs cannot collide.
inline std::string scratch_dir(const std::string& label) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("topt_test_" + label + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

// Central finite difference of a scalar functional along a direction.
inline double fd_directional(const std::function<double(const Matrix&)>& f,
                             const Matrix& u, const Matrix& du, double eps) {
  return (f(u + eps * du) - f(u - eps * du)) / (2.0 * eps);
}

// Periodic minimal-image displacement in a domain of the given length.
inline double wrap_displacement(double d, double length) {
  d = std::fmod(d, length);
  if (d > 0.5 * length)
    d -= length;
  if (d < -0.5 * length)
    d += length;
  return d;
}

// Gaussian bump evaluated periodically: exp(-wrap(x - center)^2 / width2).
inline Vector periodic_gaussian(const topt::SpatialGrid& g, double center, double width2) {
  Vector v(g.m);
  for (int i = 0; i < g.m; ++i) {
    const double d = wrap_displacement(g.node(i) - center, g.length);
    v(i) = std::exp(-d * d / width2);
  }
  return v;
}

// Band-limited random profile: a few low Fourier modes, so spatial and
// temporal discretization errors stay small on coarse test grids.
inline Vector random_smooth_profile(std::mt19937_64& rng, const topt::SpatialGrid& g,
                                    int max_wavenumber = 3) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  Vector v = Vector::Zero(g.m);
  for (int k = 1; k <= max_wavenumber; ++k) {
    const double a = nd(rng) / k;
    const double phase = ph(rng);
    for (int i = 0; i < g.m; ++i)
      v(i) += a * std::sin(2.0 * std::numbers::pi * k * g.node(i) / g.length + phase);
  }
  return v;
}

// Rows vary smoothly in time: per-row low-order trigonometric polynomials.
inline Matrix random_smooth_rows(std::mt19937_64& rng, int rows, const topt::TimeGrid& tg,
                                 int max_wavenumber = 2) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  Matrix out = Matrix::Zero(rows, tg.n);
  const double span = tg.t_f;
  for (int r = 0; r < rows; ++r) {
    const double offset = nd(rng);
    for (int k = 0; k <= max_wavenumber; ++k) {
      const double a = nd(rng) / (k + 1);
      const double phase = ph(rng);
      for (int j = 0; j < tg.n; ++j)
        out(r, j) += (k == 0 ? offset
                             : a * std::sin(2.0 * std::numbers::pi * k * tg.node(j) / span + phase));
    }
  }
  return out;
}

// Space-time smooth field: low spatial modes with smoothly varying amplitudes.
inline Matrix random_smooth_field(std::mt19937_64& rng, const topt::SpatialGrid& g,
                                  const topt::TimeGrid& tg) {
  Matrix out = Matrix::Zero(g.m, tg.n);
  for (int term = 0; term < 3; ++term) {
    const Vector profile = random_smooth_profile(rng, g);
    const Matrix amp = random_smooth_rows(rng, 1, tg);
    out += profile * amp;
  }
  return out;
}

// Small randomized instance of the full-order control problem, sized for
// finite-difference gradient verification.
struct RandomFomInstance {
  topt::SpatialGrid grid;
  topt::TimeGrid tg;
  topt::FomSystem sys;
  Matrix u;
};

inline RandomFomInstance make_random_fom_instance(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> m_dist(8, 32), n_dist(6, 16), nc_dist(1, 4);
  std::uniform_real_distribution<double> v_dist(0.3, 1.0), mu_dist(3e-4, 3e-3);

  RandomFomInstance inst;
  inst.grid = topt::SpatialGrid::uniform(m_dist(rng), 1.0);
  const double velocity = v_dist(rng);
  // Keep the time step well inside the stability region and small enough that
  // the continuous-adjoint gradient matches discrete finite differences. The
  // penalty range keeps the adjoint term B^T p of the same magnitude as mu*u,
  // so the check exercises both gradient contributions.
  const double dt = 0.02 * inst.grid.dx / velocity;
  inst.tg = topt::TimeGrid::from_steps(n_dist(rng), dt);
  inst.sys.A = topt::build_advection_operator(inst.grid, velocity);
  inst.sys.At = inst.sys.A.transpose();
  inst.sys.B = topt::build_control_operator(inst.grid, nc_dist(rng));
  inst.sys.c = topt::build_output_weights(inst.grid);
  inst.sys.q0 = random_smooth_profile(rng, inst.grid);
  inst.sys.q_d = 3.0 * random_smooth_field(rng, inst.grid, inst.tg);
  inst.sys.mu = mu_dist(rng);
  inst.sys.velocity = velocity;
  inst.u = random_smooth_rows(rng, inst.sys.control_dim(), inst.tg);
  // Make the tracking residual vanish at the first and last time nodes. The
  // trapezoid endpoint weights pair with the continuous adjoint at only
  // O(dt^2) one-sided accuracy, which would otherwise dominate the mismatch.
  const Matrix base = topt::solve_state(inst.sys, inst.tg, inst.u);
  inst.sys.q_d.col(0) = base.col(0);
  inst.sys.q_d.col(inst.tg.n - 1) = base.col(inst.tg.n - 1);
  return inst;
}

// Advection problem whose solution genuinely travels, so the shift equation
// and its coupling terms are all active. The control forcing and tracking
// target are nonzero to reach every term of the adjoint.
struct TravelingInstance {
  topt::SpatialGrid grid;
  topt::TimeGrid tg;
  topt::FomSystem sys;
  Matrix u;
  Vector shifts; // transport track used to build the frame basis
};

inline TravelingInstance make_traveling_instance(uint64_t seed, int m = 32, int n = 89) {
  std::mt19937_64 rng(seed);
  TravelingInstance inst;
  inst.grid = topt::SpatialGrid::uniform(m, 1.0);
  const double velocity = 0.75;
  // Travel of a few grid cells over the horizon. The step is far below the
  // RK4 stability bound: the continuous adjoint matches discrete finite
  // differences only to O(dt^2), and the shift coupling carries a much
  // larger constant than the linear full-order problem.
  inst.tg = topt::TimeGrid::from_steps(n, 0.04375 * inst.grid.dx / velocity);
  inst.sys.A = topt::build_advection_operator(inst.grid, velocity);
  inst.sys.At = inst.sys.A.transpose();
  inst.sys.B = topt::build_control_operator(inst.grid, 3);
  inst.sys.c = topt::build_output_weights(inst.grid);
  inst.sys.q0 = periodic_gaussian(inst.grid, 0.3, 0.02) +
                0.1 * random_smooth_profile(rng, inst.grid);
  inst.sys.q_d = 3.0 * random_smooth_field(rng, inst.grid, inst.tg);
  inst.sys.mu = 1e-3;
  inst.sys.velocity = velocity;
  inst.u = 0.5 * random_smooth_rows(rng, 3, inst.tg);
  inst.shifts = Vector(inst.tg.n);
  for (int j = 0; j < inst.tg.n; ++j)
    inst.shifts(j) = velocity * inst.tg.node(j);
  return inst;
}

// Finite-difference probe directions for gradient checks: the normalized
// gradient itself and a gradient-biased random mixture. Random directions can
// land nearly orthogonal to the gradient, which degenerates the relative
// error. Endpoint time columns are zeroed to match the masked residual above.
inline std::vector<Matrix> gradient_probe_directions(const Matrix& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix noise(g.rows(), g.cols());
  for (int j = 0; j < noise.cols(); ++j)
    for (int i = 0; i < noise.rows(); ++i)
      noise(i, j) = nd(rng);
  std::vector<Matrix> dirs;
  dirs.push_back(g / g.norm());
  dirs.push_back(g / g.norm() + 0.5 * noise / noise.norm());
  for (Matrix& d : dirs) {
    d.col(0).setZero();
    d.col(d.cols() - 1).setZero();
    d /= d.norm();
  }
  return dirs;
}

} // namespace tt
