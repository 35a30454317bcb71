#include "doctest.h"

#include "core/fom.hpp"
#include "core/pod.hpp"
#include "core/shift.hpp"
#include "core/spod.hpp"
#include "core/spod_adjoint.hpp"
#include "helpers.hpp"

#include <cmath>
#include <random>

using namespace topt;

namespace {

using tt::make_traveling_instance;
using tt::TravelingInstance;

SpodRom make_rom(const TravelingInstance& inst, int r, int n_samples) {
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);
  const PodBasis basis = compute_spod_basis(inst.grid, snapshots, inst.shifts, r);
  return build_spod_rom(inst.grid, inst.sys, basis.modes, n_samples);
}

} // namespace

TEST_CASE("co-moving basis concentrates the energy of a traveling pulse") {
  const auto inst = make_traveling_instance(301);
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);

  const PodBasis framed = compute_spod_basis(inst.grid, snapshots, inst.shifts, 2);
  const PodBasis lab = compute_pod_basis(snapshots, 2);
  const double framed_ratio = framed.singular_values(1) / framed.singular_values(0);
  const double lab_ratio = lab.singular_values(1) / lab.singular_values(0);
  // De-shifting aligns the pulse, so the frame spectrum collapses toward
  // rank one while the lab spectrum stays spread by the transport.
  CHECK(framed_ratio < 0.25 * lab_ratio);

  CHECK_THROWS_AS(compute_spod_basis(inst.grid, snapshots, inst.shifts.head(3), 2), Error);
}

TEST_CASE("tabulated blocks reproduce fresh assembly at the sample shifts") {
  const auto inst = make_traveling_instance(302);
  const auto rom = make_rom(inst, 3, 8);
  const double dz = rom.cache.sample_dz;

  for (int s : {0, 3, 7}) {
    const SpodBlocks fresh = assemble_spod_blocks(inst.grid, inst.sys, rom.basis, s * dz);
    const SpodBlocks lerp = interpolate_cache(rom.cache, s * dz);
    CHECK((lerp.m1 - fresh.m1).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((lerp.a1 - fresh.a1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((lerp.vb - fresh.vb).cwiseAbs().maxCoeff() <= 1e-13);
  }

  // One full period apart is the same table cell.
  const SpodBlocks at_z = interpolate_cache(rom.cache, 0.3 * dz);
  const SpodBlocks wrapped = interpolate_cache(rom.cache, inst.grid.length + 0.3 * dz);
  CHECK((at_z.n - wrapped.n).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((at_z.wb - wrapped.wb).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("table slopes track the derivative of the input blocks") {
  const auto inst = make_traveling_instance(303);
  // Finest legal tabulation, one sample per grid cell.
  const auto rom = make_rom(inst, 3, inst.grid.m);
  const double dz = rom.cache.sample_dz;

  // vb(z) = V^T B varies on the scale of the control Gaussians, so its table
  // slope must match the analytic derivative W^T B mid-cell. This pins the
  // orientation of the slopes against the shift-derivative convention; a sign
  // slip here would flip the adjoint transport terms.
  for (double z : {1.5 * dz, 10.5 * dz, 20.5 * dz}) {
    const SpodBlocks sl = cache_slopes(rom.cache, z);
    const Matrix wb = apply_shift(inst.grid, rom.basis, z, 1).transpose() * inst.sys.B;
    CHECK((sl.vb - wb).cwiseAbs().maxCoeff() <= 0.05 * wb.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("frozen shift at zero reduces to the projected model") {
  const auto inst = make_traveling_instance(304);
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);
  // Zero shift track: the frame equals the lab basis and T^0 is the identity.
  const PodBasis basis = compute_spod_basis(inst.grid, snapshots, Vector::Zero(inst.tg.n), 4);
  const auto rom = build_spod_rom(inst.grid, inst.sys, basis.modes, 16);
  const PodRom pod = build_pod_rom(inst.sys, basis.modes);

  SpodOptions opt;
  opt.freeze_shift = true;
  const SpodTrajectory traj = solve_spod_state(rom, inst.sys, inst.tg, inst.u, opt);
  const Matrix coeffs = solve_pod_state(pod, inst.sys, inst.tg, inst.u);
  CHECK((traj.coeffs - coeffs).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(traj.shifts.cwiseAbs().maxCoeff() == 0.0);

  const double js = spod_cost(rom, inst.sys, inst.tg, traj, inst.u);
  const double jp = pod_cost(pod, inst.sys, inst.tg, coeffs, inst.u);
  CHECK(js == doctest::Approx(jp).epsilon(1e-10));

  const SpodAdjoint adj = solve_spod_adjoint(rom, inst.sys, inst.tg, traj, inst.u, opt);
  const Matrix pod_adj = solve_pod_adjoint(pod, inst.sys, inst.tg, coeffs);
  const double adj_scale = 1.0 + pod_adj.cwiseAbs().maxCoeff();
  CHECK((adj.coeffs - pod_adj).cwiseAbs().maxCoeff() <= 1e-10 * adj_scale);
  CHECK(adj.shift_adjoint.cwiseAbs().maxCoeff() == 0.0);

  const Matrix gs = spod_gradient(rom, inst.sys, traj, adj, inst.u);
  const Matrix gp = pod_gradient(pod, inst.sys, inst.u, pod_adj);
  CHECK((gs - gp).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + gp.cwiseAbs().maxCoeff()));
}

TEST_CASE("adjoint gradient matches finite differences of the shifted reduced cost") {
  for (uint64_t seed : {305u, 306u, 307u}) {
    auto inst = make_traveling_instance(seed);
    auto rom = make_rom(inst, 4, inst.grid.m);

    // Pin the tracking residual at the endpoint nodes, as in the full-order
    // check: the trapezoid endpoints pair with the continuous adjoint at only
    // one-sided O(dt^2) accuracy.
    {
      const SpodTrajectory base = solve_spod_state(rom, inst.sys, inst.tg, inst.u);
      const Matrix recon = spod_reconstruct(rom, base);
      inst.sys.q_d.col(0) = recon.col(0);
      inst.sys.q_d.col(inst.tg.n - 1) = recon.col(inst.tg.n - 1);
    }
    const auto& sys = inst.sys;
    const auto& tg = inst.tg;
    auto J = [&](const Matrix& u) {
      return spod_cost(rom, sys, tg, solve_spod_state(rom, sys, tg, u), u);
    };

    const SpodTrajectory traj = solve_spod_state(rom, sys, tg, inst.u);
    const SpodAdjoint adj = solve_spod_adjoint(rom, sys, tg, traj, inst.u);
    const Matrix g = spod_gradient(rom, sys, traj, adj, inst.u);
    const Vector w = time_quadrature_weights(tg);

    // The reduced cost is not quadratic in the control (the mass matrix and
    // the tabulated blocks depend on the trajectory), so the step has to
    // balance truncation against roundoff.
    std::mt19937_64 rng(seed * 13 + 1);
    for (const Matrix& du : tt::gradient_probe_directions(g, rng)) {
      double pair = 0.0;
      for (int j = 0; j < tg.n; ++j)
        pair += w(j) * g.col(j).dot(du.col(j));
      const double fd = tt::fd_directional(J, inst.u, du, 3e-4);
      CHECK(std::abs(pair - fd) <= 1e-4 * std::max(std::abs(fd), 1e-12));
    }
  }
}

TEST_CASE("shifted model tracks a traveling pulse better than the projected model") {
  // Pure transport of a narrow pulse: two co-moving modes suffice, while two
  // lab-frame modes cannot represent the moving profile. The pulse has to
  // travel several times its own width before the lab spectrum spreads, so
  // this case runs a longer horizon than the gradient checks.
  auto inst = make_traveling_instance(308, 64, 36);
  inst.tg = TimeGrid::from_steps(36, 1.0 * inst.grid.dx / inst.sys.velocity);
  for (int j = 0; j < inst.tg.n; ++j)
    inst.shifts(j) = inst.sys.velocity * inst.tg.node(j);
  inst.sys.q0 = tt::periodic_gaussian(inst.grid, 0.3, 0.02);
  inst.sys.q_d = Matrix::Zero(inst.grid.m, inst.tg.n);
  inst.u = Matrix::Zero(3, inst.tg.n);
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);

  const int r = 2;
  const PodBasis framed = compute_spod_basis(inst.grid, snapshots, inst.shifts, r);
  const auto rom = build_spod_rom(inst.grid, inst.sys, framed.modes, inst.grid.m);
  const SpodTrajectory traj = solve_spod_state(rom, inst.sys, inst.tg, inst.u);
  const double spod_err = (spod_reconstruct(rom, traj) - snapshots).norm() / snapshots.norm();

  const PodBasis lab = compute_pod_basis(snapshots, r);
  const PodRom pod = build_pod_rom(inst.sys, lab.modes);
  const Matrix coeffs = solve_pod_state(pod, inst.sys, inst.tg, inst.u);
  const double pod_err = (pod.basis * coeffs - snapshots).norm() / snapshots.norm();

  CHECK(spod_err < 0.2 * pod_err);
  CHECK(spod_err < 0.05);
}

TEST_CASE("degenerate reduced mass is reported, not integrated through") {
  auto inst = make_traveling_instance(309);
  const auto rom = make_rom(inst, 3, inst.grid.m);
  // A zero initial state projects to zero coefficients, which annihilates the
  // shift row of the mass matrix.
  inst.sys.q0.setZero();
  CHECK_THROWS_AS(solve_spod_state(rom, inst.sys, inst.tg, inst.u), Error);

  try {
    solve_spod_state(rom, inst.sys, inst.tg, inst.u);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
  }
}

TEST_CASE("projection blocks are constant in the shift for a single frame") {
  const auto inst = make_traveling_instance(311);
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);
  const PodBasis basis = compute_spod_basis(inst.grid, snapshots, inst.shifts, 3);

  const GalerkinCache sampled =
      assemble_galerkin_cache(inst.grid, inst.sys, basis.modes, 16, false);
  const GalerkinCache frozen =
      assemble_galerkin_cache(inst.grid, inst.sys, basis.modes, 16, true);
  CHECK(frozen.constant_blocks);

  // Translation commutes with the frame, so the sampled projection blocks
  // never stray from their z = 0 values; only the input blocks move.
  for (size_t s = 0; s < sampled.samples.size(); ++s) {
    const SpodBlocks& a = sampled.samples[s];
    const SpodBlocks& b = frozen.samples[s];
    CHECK((a.m1 - b.m1).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((a.n - b.n).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((a.m2 - b.m2).cwiseAbs().maxCoeff() <= 1e-8 * b.m2.cwiseAbs().maxCoeff());
    CHECK((a.a1 - b.a1).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + b.a1.cwiseAbs().maxCoeff()));
    CHECK((a.a2 - b.a2).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + b.a2.cwiseAbs().maxCoeff()));
    CHECK((a.vb - b.vb).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((a.wb - b.wb).cwiseAbs().maxCoeff() <= 1e-14);
  }

  // With frozen projection blocks their table slopes vanish identically, so
  // the adjoint transport terms built from them drop out.
  const SpodBlocks sl = cache_slopes(frozen, 0.4 * frozen.sample_dz);
  CHECK(sl.m1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sl.n.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sl.a1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sl.vb.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("table slopes are the exact derivative of the interpolated table") {
  const auto inst = make_traveling_instance(312);
  const auto rom = make_rom(inst, 3, 16);
  const double dz = rom.cache.sample_dz;

  // The table is piecewise linear, so an in-cell central difference recovers
  // the slope to rounding, independent of the step.
  for (double z : {2.45 * dz, 7.3 * dz, 11.6 * dz}) {
    const double eps = 0.2 * dz;
    const SpodBlocks lo = interpolate_cache(rom.cache, z - eps);
    const SpodBlocks hi = interpolate_cache(rom.cache, z + eps);
    const SpodBlocks sl = cache_slopes(rom.cache, z);
    const Matrix fd_a1 = (hi.a1 - lo.a1) / (2.0 * eps);
    const Matrix fd_wb = (hi.wb - lo.wb) / (2.0 * eps);
    CHECK((sl.a1 - fd_a1).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + fd_a1.cwiseAbs().maxCoeff()));
    CHECK((sl.wb - fd_wb).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + fd_wb.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("rank-deficient frame basis fails cache assembly") {
  const auto inst = make_traveling_instance(313);
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);
  const PodBasis basis = compute_spod_basis(inst.grid, snapshots, inst.shifts, 3);
  Matrix degenerate = basis.modes;
  degenerate.col(2) = degenerate.col(0);

  try {
    assemble_galerkin_cache(inst.grid, inst.sys, degenerate, 8);
    FAIL("duplicate mode column must be rejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
  }
}

TEST_CASE("cache persists to a directory and rehydrates") {
  const auto inst = make_traveling_instance(314);
  const auto rom = make_rom(inst, 3, 8);
  const std::string dir = tt::scratch_dir("cache_roundtrip");

  save_galerkin_cache(dir, rom.cache, inst.grid);
  const GalerkinCache back = load_galerkin_cache(dir, inst.grid);
  REQUIRE(back.samples.size() == rom.cache.samples.size());
  CHECK(back.length == rom.cache.length);
  CHECK(back.sample_dz == rom.cache.sample_dz);
  CHECK(back.constant_blocks == rom.cache.constant_blocks);
  for (size_t s = 0; s < back.samples.size(); ++s) {
    CHECK((back.samples[s].m1 - rom.cache.samples[s].m1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.samples[s].a2 - rom.cache.samples[s].a2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.samples[s].wb - rom.cache.samples[s].wb).cwiseAbs().maxCoeff() == 0.0);
  }

  // A cache is tied to the grid it was assembled on.
  const SpatialGrid other = SpatialGrid::uniform(inst.grid.m * 2, inst.grid.length);
  CHECK_THROWS_AS(load_galerkin_cache(dir, other), Error);
  CHECK_THROWS_AS(load_galerkin_cache(dir + "_missing", inst.grid), Error);
}

TEST_CASE("shifted adjoint is linear in the tracking residual") {
  auto inst = make_traveling_instance(315);
  const auto rom = make_rom(inst, 3, inst.grid.m);
  const SpodTrajectory traj = solve_spod_state(rom, inst.sys, inst.tg, inst.u);
  const Matrix recon = spod_reconstruct(rom, traj);

  const SpodAdjoint adj = solve_spod_adjoint(rom, inst.sys, inst.tg, traj, inst.u);

  // Reflecting the target through the reconstruction doubles the residual;
  // the state is held fixed so the adjoint must double with it.
  FomSystem doubled = inst.sys;
  doubled.q_d = 2.0 * inst.sys.q_d - recon;
  const SpodAdjoint adj2 = solve_spod_adjoint(rom, doubled, inst.tg, traj, inst.u);
  const double scale = 1.0 + adj.coeffs.cwiseAbs().maxCoeff();
  CHECK((adj2.coeffs - 2.0 * adj.coeffs).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  CHECK((adj2.shift_adjoint - 2.0 * adj.shift_adjoint).cwiseAbs().maxCoeff() <=
        1e-10 * (1.0 + adj.shift_adjoint.cwiseAbs().maxCoeff()));

  // A target met exactly leaves nothing to propagate backward.
  FomSystem on_target = inst.sys;
  on_target.q_d = recon;
  const SpodAdjoint zero = solve_spod_adjoint(rom, on_target, inst.tg, traj, inst.u);
  CHECK(zero.coeffs.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(zero.shift_adjoint.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("cache construction rejects invalid sampling") {
  const auto inst = make_traveling_instance(310);
  const Matrix snapshots = solve_state(inst.sys, inst.tg, inst.u);
  const PodBasis basis = compute_spod_basis(inst.grid, snapshots, inst.shifts, 2);

  CHECK_THROWS_AS(build_spod_rom(inst.grid, inst.sys, basis.modes, 1), Error);
  CHECK_THROWS_AS(build_spod_rom(inst.grid, inst.sys, basis.modes, inst.grid.m + 1), Error);
  CHECK_THROWS_AS(build_spod_rom(inst.grid, inst.sys, Matrix::Zero(7, 2), 8), Error);

  const auto rom = build_spod_rom(inst.grid, inst.sys, basis.modes, 8);
  const Matrix bad_u = Matrix::Zero(3, inst.tg.n + 1);
  CHECK_THROWS_AS(solve_spod_state(rom, inst.sys, inst.tg, bad_u), Error);
}
