#include "core/spod_adjoint.hpp"

#include "core/shift.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace topt {

namespace {

// One time slice of everything the adjoint right-hand side depends on.
struct StagePoint {
  Vector a;
  Vector da;
  double z;
  double dz;
  Vector u;
  Vector src_a;
  double src_z;
};

// The backward equations come from stationarity of the Lagrangian of the
// shifted Galerkin system. With y = [p_a; p_z] they read, in reversed time,
//   Mass(a, z) dy/dsigma = E y + s,
// where Mass is the forward mass matrix and the blocks of E collect both the
// Jacobian of the forward right-hand side and the transport terms from
// d/dt of the state-dependent mass. Writing X' for the z-derivative of a
// tabulated block X,
//   E11 = A1^T + dz (M1' - N^T)
//   E12 = (N - N^T) da + dz (N' - 2 M2) a + (A2^T + A2) a + W^T B u
//   E21 = [(N - M1') da + A1' a + (V^T B)' u]^T
//   E22 = a^T (2 M2 - N'^T) da + a^T A2' a + a^T (W^T B)' u
// The derivatives are differenced from the tabulation itself rather than
// taken from the continuous identities (M1' = N + N^T and so on), so the
// adjoint is exact for the interpolated dynamics the forward solve actually
// integrates. At a frozen shift only the first block row survives with
// E = A1^T.
Vector adjoint_rate(const SpodRom& rom, const StagePoint& st, const Vector& y,
                    const SpodOptions& opt) {
  const SpodBlocks b = interpolate_cache(rom.cache, st.z);
  const int r = static_cast<int>(st.a.size());

  if (opt.freeze_shift) {
    const Vector rhs = b.a1.transpose() * y + st.src_a;
    Eigen::LDLT<Matrix> ldlt(b.m1);
    const Vector d = ldlt.vectorD().cwiseAbs();
    if (!(d.minCoeff() > 0.0) || d.maxCoeff() / d.minCoeff() > opt.condition_limit)
      throw Error::degenerate("frozen-shift adjoint: mass matrix is numerically singular");
    return ldlt.solve(rhs);
  }

  const SpodBlocks sl = cache_slopes(rom.cache, st.z);
  const Vector wbu = b.wb * st.u;
  const Matrix e11 = b.a1.transpose() + st.dz * (sl.m1 - b.n.transpose());
  const Vector e12 = (b.n - b.n.transpose()) * st.da + st.dz * ((sl.n * st.a) - 2.0 * (b.m2 * st.a)) +
                     (b.a2.transpose() + b.a2) * st.a + wbu;
  const Vector e21 = (b.n - sl.m1) * st.da + sl.a1 * st.a + sl.vb * st.u;
  const double e22 = st.a.dot(2.0 * (b.m2 * st.da) - sl.n.transpose() * st.da) +
                     st.a.dot(sl.a2 * st.a) + st.a.dot(sl.wb * st.u);

  Vector rhs(r + 1);
  rhs.head(r) = e11 * y.head(r) + e12 * y(r) + st.src_a;
  rhs(r) = e21.dot(y.head(r)) + e22 * y(r) + st.src_z;

  const Vector na = b.n * st.a;
  Matrix mass(r + 1, r + 1);
  mass.topLeftCorner(r, r) = b.m1;
  mass.block(0, r, r, 1) = na;
  mass.block(r, 0, 1, r) = na.transpose();
  mass(r, r) = st.a.dot(b.m2 * st.a);

  Eigen::LDLT<Matrix> ldlt(mass);
  const Vector d = ldlt.vectorD().cwiseAbs();
  if (!(d.minCoeff() > 0.0) || d.maxCoeff() / d.minCoeff() > opt.condition_limit)
    throw Error::degenerate("shifted adjoint: mass matrix is numerically singular");
  return ldlt.solve(rhs);
}

StagePoint blend(const StagePoint& lo, const StagePoint& hi, double th) {
  StagePoint st;
  st.a = (1.0 - th) * lo.a + th * hi.a;
  st.da = (1.0 - th) * lo.da + th * hi.da;
  st.z = (1.0 - th) * lo.z + th * hi.z;
  st.dz = (1.0 - th) * lo.dz + th * hi.dz;
  st.u = (1.0 - th) * lo.u + th * hi.u;
  st.src_a = (1.0 - th) * lo.src_a + th * hi.src_a;
  st.src_z = (1.0 - th) * lo.src_z + th * hi.src_z;
  return st;
}

} // namespace

SpodAdjoint solve_spod_adjoint(const SpodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                               const SpodTrajectory& traj, const Matrix& u,
                               const SpodOptions& opt) {
  const int r = static_cast<int>(rom.basis.cols());
  const int n = tg.n;
  if (traj.coeffs.rows() != r || traj.coeffs.cols() != n)
    throw Error::invalid("trajectory dimensions do not match the reduced model");
  if (u.cols() != n)
    throw Error::invalid("control dimensions do not match the time grid");

  // Tracking residual projections at the nodes, through the exact shift
  // transpose so they are the true derivatives of the reconstruction cost.
  const Vector c2 = sys.c.array().square();
  Matrix src_a(r, n);
  Vector src_z(n);
  std::vector<StagePoint> nodes(n);
  for (int j = 0; j < n; ++j) {
    StagePoint& st = nodes[j];
    st.a = traj.coeffs.col(j);
    st.da = traj.coeff_rates.col(j);
    st.z = traj.shifts(j);
    st.dz = traj.shift_rates(j);
    st.u = u.col(j);
    const Vector ua = rom.basis * st.a;
    const Vector recon = apply_shift(rom.grid, ua, st.z).col(0);
    const Vector res = c2.array() * (recon - sys.q_d.col(j)).array();
    st.src_a = rom.basis.transpose() * apply_shift_transpose(rom.grid, res, st.z).col(0);
    st.src_z = apply_shift(rom.grid, ua, st.z, 1).col(0).dot(res);
    src_a.col(j) = st.src_a;
    src_z(j) = st.src_z;
  }

  const int dim = opt.freeze_shift ? r : r + 1;
  SpodAdjoint adj;
  adj.coeffs = Matrix::Zero(r, n);
  adj.shift_adjoint = Vector::Zero(n);

  Vector y = Vector::Zero(dim);
  const double dt = tg.dt;
  for (int j = n - 1; j > 0; --j) {
    const StagePoint mid = blend(nodes[j - 1], nodes[j], 0.5);
    const Vector k1 = adjoint_rate(rom, nodes[j], y, opt);
    const Vector k2 = adjoint_rate(rom, mid, y + (0.5 * dt) * k1, opt);
    const Vector k3 = adjoint_rate(rom, mid, y + (0.5 * dt) * k2, opt);
    const Vector k4 = adjoint_rate(rom, nodes[j - 1], y + dt * k3, opt);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite())
      throw Error::diverged("shifted adjoint diverged at step " + std::to_string(j));
    adj.coeffs.col(j - 1) = y.head(r);
    if (!opt.freeze_shift)
      adj.shift_adjoint(j - 1) = y(r);
  }
  return adj;
}

Matrix spod_gradient(const SpodRom& rom, const FomSystem& sys, const SpodTrajectory& traj,
                     const SpodAdjoint& adj, const Matrix& u) {
  const int n = static_cast<int>(u.cols());
  if (adj.coeffs.cols() != n || traj.coeffs.cols() != n)
    throw Error::invalid("gradient needs control, trajectory, and adjoint on one time grid");
  // The control enters through the tabulated input blocks, so the gradient
  // contracts against the same interpolants the dynamics used.
  Matrix g = sys.mu * u;
  for (int j = 0; j < n; ++j) {
    const SpodBlocks b = interpolate_cache(rom.cache, traj.shifts(j));
    g.col(j) += b.vb.transpose() * adj.coeffs.col(j);
    if (adj.shift_adjoint(j) != 0.0)
      g.col(j) += adj.shift_adjoint(j) * (b.wb.transpose() * traj.coeffs.col(j));
  }
  return g;
}

} // namespace topt
