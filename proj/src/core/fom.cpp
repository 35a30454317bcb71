#include "core/fom.hpp"

#include "core/march.hpp"

#include <cmath>
#include <vector>

namespace topt {

namespace {

void check_dims(const FomSystem& sys, const TimeGrid& tg, const Matrix& u) {
  if (sys.q0.size() != sys.A.rows())
    throw Error::invalid("initial state length does not match the operator");
  if (u.rows() != sys.B.cols())
    throw Error::invalid("control has " + std::to_string(u.rows()) +
                         " channels, system has " + std::to_string(sys.B.cols()));
  if (u.cols() != tg.n)
    throw Error::invalid("control has " + std::to_string(u.cols()) +
                         " samples, time grid has " + std::to_string(tg.n));
}

} // namespace

SpMatrix build_advection_operator(const SpatialGrid& grid, double velocity) {
  // Derivative weights at offsets -3..3 for the sixth-order central stencil.
  const double w[7] = {-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0,
                       3.0 / 4.0,   -3.0 / 20.0, 1.0 / 60.0};
  const int m = grid.m;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(m) * 6);
  for (int i = 0; i < m; ++i) {
    for (int o = -3; o <= 3; ++o) {
      if (o == 0)
        continue;
      const int j = ((i + o) % m + m) % m;
      trips.emplace_back(i, j, -velocity * w[o + 3] / grid.dx);
    }
  }
  SpMatrix a(m, m);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

Matrix build_control_operator(const SpatialGrid& grid, int n_controls) {
  if (n_controls < 1)
    throw Error::invalid("need at least one control channel");
  Matrix b(grid.m, n_controls);
  for (int k = 0; k < n_controls; ++k) {
    // 1-based channel index k+1 places the center at length*(k+2)/n_c.
    const double center = grid.length * (k + 2) / n_controls;
    for (int i = 0; i < grid.m; ++i) {
      const double d = grid.node(i) - center;
      b(i, k) = std::exp(-4.0 * d * d);
    }
  }
  return b;
}

Vector build_output_weights(const SpatialGrid& grid) {
  const double s = std::sqrt(grid.dx);
  Vector c = Vector::Constant(grid.m, s);
  c(0) = s / std::sqrt(2.0);
  c(grid.m - 1) = s / std::sqrt(2.0);
  return c;
}

Matrix solve_state(const FomSystem& sys, const TimeGrid& tg, const Matrix& u) {
  check_dims(sys, tg, u);
  const Matrix f = sys.B * u; // forcing at the sample nodes
  return rk4_forward(sys.A, f, tg.dt, sys.q0, "state");
}

Matrix solve_adjoint(const FomSystem& sys, const TimeGrid& tg, const Matrix& state) {
  if (state.rows() != sys.A.rows() || state.cols() != tg.n)
    throw Error::invalid("state snapshot dimensions do not match system and time grid");
  if (sys.q_d.rows() != state.rows() || sys.q_d.cols() != state.cols())
    throw Error::invalid("tracking target dimensions do not match the state");
  const Vector c2 = sys.c.array().square();
  // Residual source C^T C (q - q_d) at every sample node.
  Matrix src = state - sys.q_d;
  src.array().colwise() *= c2.array();
  return rk4_backward(sys.At, src, tg.dt, "adjoint");
}

double cost(const FomSystem& sys, const TimeGrid& tg, const Matrix& state, const Matrix& u) {
  if (state.cols() != tg.n || u.cols() != tg.n)
    throw Error::invalid("cost needs state and control sampled on the time grid");
  const Vector w = time_quadrature_weights(tg);
  double acc = 0.0;
  for (int j = 0; j < tg.n; ++j) {
    const double track = (sys.c.array() * (state.col(j) - sys.q_d.col(j)).array()).matrix().squaredNorm();
    const double penalty = sys.mu * u.col(j).squaredNorm();
    acc += w(j) * (track + penalty);
  }
  return 0.5 * acc;
}

Matrix control_gradient(const FomSystem& sys, const Matrix& u, const Matrix& adjoint) {
  if (adjoint.rows() != sys.B.rows() || adjoint.cols() != u.cols())
    throw Error::invalid("adjoint dimensions do not match control and system");
  return sys.mu * u + sys.B.transpose() * adjoint;
}

} // namespace topt
