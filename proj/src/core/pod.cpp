#include "core/pod.hpp"

#include "core/march.hpp"
#include "core/svd.hpp"

#include <string>

namespace topt {

PodBasis compute_pod_basis(const Matrix& snapshots, int n_modes) {
  const int k = static_cast<int>(std::min(snapshots.rows(), snapshots.cols()));
  if (n_modes < 1 || n_modes > k)
    throw Error::invalid("mode count " + std::to_string(n_modes) + " outside [1, " +
                         std::to_string(k) + "]");
  Svd f = thin_svd(snapshots);
  PodBasis basis;
  basis.modes = f.u.leftCols(n_modes);
  basis.singular_values = std::move(f.s);
  return basis;
}

PodBasis compute_combined_basis(const Matrix& state_snapshots,
                                const Matrix& adjoint_snapshots, int n_modes) {
  if (state_snapshots.rows() != adjoint_snapshots.rows())
    throw Error::invalid("state and adjoint snapshots live on different grids");
  Matrix stacked(state_snapshots.rows(), state_snapshots.cols() + adjoint_snapshots.cols());
  const double sn = state_snapshots.norm();
  const double an = adjoint_snapshots.norm();
  if (sn <= 0.0)
    throw Error::invalid("state snapshot block is identically zero");
  stacked.leftCols(state_snapshots.cols()) = state_snapshots / sn;
  // A zero adjoint block (state already on target) adds nothing to the span
  // and has no norm to scale by; keep it as is.
  stacked.rightCols(adjoint_snapshots.cols()) =
      an > 0.0 ? Matrix(adjoint_snapshots / an) : adjoint_snapshots;
  return compute_pod_basis(stacked, n_modes);
}

int select_mode_count(const Vector& singular_values, double eps) {
  if (singular_values.size() == 0)
    throw Error::invalid("empty singular spectrum");
  if (!(singular_values(0) > 0.0))
    throw Error::invalid("all-zero singular spectrum has no leading mode to scale by");
  int r = 0;
  for (int i = 0; i < singular_values.size(); ++i)
    if (singular_values(i) > eps * singular_values(0))
      ++r;
  return std::max(r, 1);
}

namespace {

void check_basis(const FomSystem& sys, const Matrix& basis) {
  if (basis.rows() != sys.A.rows() || basis.cols() < 1)
    throw Error::invalid("basis shape does not match the system state dimension");
}

// Projected tracking residual basis^T C^T C (basis coeffs - q_d) per node.
Matrix projected_residual(const Matrix& basis, const FomSystem& sys, const Matrix& coeffs) {
  const Vector c2 = sys.c.array().square();
  Matrix res = basis * coeffs - sys.q_d;
  res.array().colwise() *= c2.array();
  return basis.transpose() * res;
}

} // namespace

PodRom build_pod_rom(const FomSystem& sys, const Matrix& basis) {
  check_basis(sys, basis);
  PodRom rom;
  rom.basis = basis;
  rom.a_red = basis.transpose() * (sys.A * basis);
  rom.b_red = basis.transpose() * sys.B;
  return rom;
}

Matrix solve_pod_state(const PodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                       const Matrix& u) {
  if (u.rows() != rom.b_red.cols() || u.cols() != tg.n)
    throw Error::invalid("control dimensions do not match the reduced system");
  const Matrix f = rom.b_red * u;
  const Vector a0 = rom.basis.transpose() * sys.q0;
  return rk4_forward(rom.a_red, f, tg.dt, a0, "reduced state");
}

double pod_cost(const PodRom& rom, const FomSystem& sys, const TimeGrid& tg, const Matrix& coeffs,
                const Matrix& u) {
  return cost(sys, tg, rom.basis * coeffs, u);
}

Matrix solve_pod_adjoint(const PodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                         const Matrix& coeffs) {
  if (coeffs.rows() != rom.basis.cols() || coeffs.cols() != tg.n)
    throw Error::invalid("coefficient dimensions do not match the reduced system");
  const Matrix src = projected_residual(rom.basis, sys, coeffs);
  return rk4_backward(rom.a_red.transpose(), src, tg.dt, "reduced adjoint");
}

Matrix pod_gradient(const PodRom& rom, const FomSystem& sys, const Matrix& u,
                    const Matrix& adjoint_coeffs) {
  if (adjoint_coeffs.rows() != rom.b_red.rows() || adjoint_coeffs.cols() != u.cols())
    throw Error::invalid("adjoint coefficients do not match the reduced system");
  return sys.mu * u + rom.b_red.transpose() * adjoint_coeffs;
}

PodAdjointRom build_pod_adjoint_rom(const FomSystem& sys, const Matrix& basis) {
  check_basis(sys, basis);
  PodAdjointRom arom;
  arom.basis = basis;
  arom.at_red = basis.transpose() * (sys.At * basis);
  arom.bt_red = basis.transpose() * sys.B;
  return arom;
}

Matrix solve_pod_adjoint_on_basis(const PodAdjointRom& arom, const FomSystem& sys,
                                  const TimeGrid& tg, const Matrix& state) {
  if (state.rows() != arom.basis.rows() || state.cols() != tg.n)
    throw Error::invalid("state dimensions do not match the adjoint basis");
  const Vector c2 = sys.c.array().square();
  Matrix res = state - sys.q_d;
  res.array().colwise() *= c2.array();
  const Matrix src = arom.basis.transpose() * res;
  return rk4_backward(arom.at_red, src, tg.dt, "projected adjoint");
}

Matrix pod_adjoint_gradient(const PodAdjointRom& arom, const FomSystem& sys, const Matrix& u,
                            const Matrix& adjoint_coeffs) {
  if (adjoint_coeffs.rows() != arom.bt_red.rows() || adjoint_coeffs.cols() != u.cols())
    throw Error::invalid("adjoint coefficients do not match the reduced system");
  return sys.mu * u + arom.bt_red.transpose() * adjoint_coeffs;
}

} // namespace topt
