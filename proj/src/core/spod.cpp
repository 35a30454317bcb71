#include "core/spod.hpp"

#include "core/io.hpp"
#include "core/shift.hpp"
#include "core/svd.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <iterator>
#include <string>
#include <utility>

namespace topt {

Matrix deshift_snapshots(const SpatialGrid& grid, const Matrix& snapshots,
                         const Vector& shifts) {
  if (snapshots.rows() != grid.m)
    throw Error::invalid("snapshots must have one row per grid node");
  if (shifts.size() != snapshots.cols())
    throw Error::invalid("shift track length does not match the snapshot count");
  Matrix frame(snapshots.rows(), snapshots.cols());
  for (int j = 0; j < snapshots.cols(); ++j)
    frame.col(j) = apply_shift(grid, snapshots.col(j), -shifts(j));
  return frame;
}

PodBasis compute_spod_basis(const SpatialGrid& grid, const Matrix& snapshots,
                            const Vector& shifts, int n_modes) {
  return compute_pod_basis(deshift_snapshots(grid, snapshots, shifts), n_modes);
}

SpodBlocks assemble_spod_blocks(const SpatialGrid& grid, const FomSystem& sys,
                                const Matrix& basis, double z) {
  const Matrix v = apply_shift(grid, basis, z, 0);
  const Matrix w = apply_shift(grid, basis, z, 1);
  const Matrix av = sys.A * v;

  SpodBlocks b;
  b.m1 = v.transpose() * v;
  b.n = v.transpose() * w;
  b.m2 = w.transpose() * w;
  b.a1 = v.transpose() * av;
  b.a2 = w.transpose() * av;
  b.vb = v.transpose() * sys.B;
  b.wb = w.transpose() * sys.B;
  return b;
}

namespace {

void require_m1_positive_definite(const Matrix& m1, double z) {
  Eigen::LDLT<Matrix> ldlt(m1);
  const Vector d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(d.maxCoeff(), 1.0))
    throw Error::degenerate("galerkin cache: frame mass matrix M1 is not positive definite"
                            " at shift sample z = " + std::to_string(z) +
                            " (rank-deficient basis)");
}

} // namespace

GalerkinCache assemble_galerkin_cache(const SpatialGrid& grid, const FomSystem& sys,
                                      const Matrix& basis, int n_samples,
                                      bool constant_blocks) {
  if (basis.rows() != grid.m || basis.cols() < 1)
    throw Error::invalid("basis shape does not match the grid");
  if (n_samples < 2)
    throw Error::invalid("cache needs at least two shift samples");
  if (n_samples > grid.m)
    throw Error::invalid("cache sampling finer than the spatial grid aliases the blocks'"
                         " sub-cell variation");
  GalerkinCache cache;
  cache.length = grid.length;
  cache.sample_dz = grid.length / n_samples;
  cache.constant_blocks = constant_blocks;
  cache.samples.reserve(n_samples);
  const SpodBlocks at_zero = assemble_spod_blocks(grid, sys, basis, 0.0);
  require_m1_positive_definite(at_zero.m1, 0.0);
  for (int s = 0; s < n_samples; ++s) {
    const double z = s * cache.sample_dz;
    if (s == 0) {
      cache.samples.push_back(at_zero);
      continue;
    }
    if (constant_blocks) {
      SpodBlocks b = at_zero;
      const Matrix v = apply_shift(grid, basis, z, 0);
      const Matrix w = apply_shift(grid, basis, z, 1);
      b.vb = v.transpose() * sys.B;
      b.wb = w.transpose() * sys.B;
      cache.samples.push_back(std::move(b));
      continue;
    }
    cache.samples.push_back(assemble_spod_blocks(grid, sys, basis, z));
    require_m1_positive_definite(cache.samples.back().m1, z);
  }
  return cache;
}

namespace {

constexpr Matrix SpodBlocks::* kBlockMembers[] = {
    &SpodBlocks::m1, &SpodBlocks::n,  &SpodBlocks::m2, &SpodBlocks::a1,
    &SpodBlocks::a2, &SpodBlocks::vb, &SpodBlocks::wb};

struct CacheCell {
  const SpodBlocks* b0;
  const SpodBlocks* b1;
  double theta;
};

CacheCell locate_cell(const GalerkinCache& cache, double z) {
  const int ns = static_cast<int>(cache.samples.size());
  double s = z / cache.sample_dz;
  s -= std::floor(s / ns) * ns; // periodic position in sample units, [0, ns)
  int i0 = static_cast<int>(s);
  if (i0 >= ns)
    i0 = 0;
  return {&cache.samples[i0], &cache.samples[(i0 + 1) % ns], s - i0};
}

} // namespace

SpodBlocks interpolate_cache(const GalerkinCache& cache, double z) {
  const CacheCell c = locate_cell(cache, z);
  SpodBlocks out;
  for (auto f : kBlockMembers)
    out.*f = (1.0 - c.theta) * (*c.b0.*f) + c.theta * (*c.b1.*f);
  return out;
}

SpodBlocks cache_slopes(const GalerkinCache& cache, double z) {
  const CacheCell c = locate_cell(cache, z);
  SpodBlocks out;
  for (auto f : kBlockMembers)
    out.*f = (*c.b1.*f - *c.b0.*f) / cache.sample_dz;
  return out;
}

namespace {

constexpr const char* kBlockNames[] = {"m1", "n", "m2", "a1", "a2", "vb", "wb"};

uint64_t grid_fingerprint(const SpatialGrid& grid) {
  uint64_t h = 1469598103934665603ull;
  const auto mix = [&h](const void* p, size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const int64_t m = grid.m;
  mix(&m, sizeof m);
  mix(&grid.length, sizeof grid.length);
  return h;
}

} // namespace

void save_galerkin_cache(const std::string& dir, const GalerkinCache& cache,
                         const SpatialGrid& grid) {
  if (cache.samples.empty())
    throw Error::invalid("cannot save an empty galerkin cache");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw Error::io("cannot create cache directory " + dir + ": " + ec.message());
  const int ns = static_cast<int>(cache.samples.size());
  const auto rank = cache.samples[0].m1.rows();
  const auto inputs = cache.samples[0].vb.cols();
  write_key_values(dir + "/cache.meta",
                   {{"samples", std::to_string(ns)},
                    {"rank", std::to_string(rank)},
                    {"inputs", std::to_string(inputs)},
                    {"length", format_double(cache.length)},
                    {"constant_blocks", cache.constant_blocks ? "1" : "0"},
                    {"grid_hash", std::to_string(grid_fingerprint(grid))}});
  for (size_t k = 0; k < std::size(kBlockMembers); ++k) {
    const Matrix& first = cache.samples[0].*kBlockMembers[k];
    Matrix stacked(first.rows(), first.cols() * ns);
    for (int s = 0; s < ns; ++s)
      stacked.middleCols(s * first.cols(), first.cols()) = cache.samples[s].*kBlockMembers[k];
    write_matrix(dir + "/" + kBlockNames[k] + ".bin", stacked);
  }
}

GalerkinCache load_galerkin_cache(const std::string& dir, const SpatialGrid& grid) {
  const KeyValues meta = read_key_values(dir + "/cache.meta");
  const int ns = std::stoi(kv_get(meta, "samples", "0"));
  const int rank = std::stoi(kv_get(meta, "rank", "0"));
  const int inputs = std::stoi(kv_get(meta, "inputs", "0"));
  if (ns < 2 || rank < 1 || inputs < 1)
    throw Error::io(dir + "/cache.meta is missing sample, rank, or input counts");
  if (kv_get(meta, "grid_hash") != std::to_string(grid_fingerprint(grid)))
    throw Error::io("cache in " + dir + " was built for a different grid");
  GalerkinCache cache;
  cache.length = std::stod(kv_get(meta, "length", "0"));
  cache.sample_dz = cache.length / ns;
  cache.constant_blocks = kv_get(meta, "constant_blocks", "0") == "1";
  cache.samples.resize(ns);
  for (size_t k = 0; k < std::size(kBlockMembers); ++k) {
    const Matrix stacked = read_matrix(dir + "/" + kBlockNames[k] + ".bin");
    const int cols = std::strcmp(kBlockNames[k], "vb") == 0 ||
                             std::strcmp(kBlockNames[k], "wb") == 0
                         ? inputs
                         : rank;
    if (stacked.rows() != rank || stacked.cols() != static_cast<int64_t>(cols) * ns)
      throw Error::io(dir + "/" + kBlockNames[k] + ".bin has unexpected shape");
    for (int s = 0; s < ns; ++s)
      cache.samples[s].*kBlockMembers[k] = stacked.middleCols(s * cols, cols);
  }
  return cache;
}

SpodRom build_spod_rom(const SpatialGrid& grid, const FomSystem& sys, const Matrix& basis,
                       int n_samples, bool constant_blocks) {
  SpodRom rom;
  rom.grid = grid;
  rom.basis = basis;
  rom.cache = assemble_galerkin_cache(grid, sys, basis, n_samples, constant_blocks);
  return rom;
}

namespace {

// LDLT with the pivot-ratio condition guard shared by every mass solve.
Vector guarded_solve(const Matrix& mass, const Vector& rhs, double condition_limit,
                     const char* what) {
  Eigen::LDLT<Matrix> ldlt(mass);
  const Vector d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmin > 0.0) || dmax / dmin > condition_limit)
    throw Error::degenerate(std::string(what) + ": mass matrix is numerically singular"
                            " (pivot ratio above the condition limit)");
  return ldlt.solve(rhs);
}

struct SpodRate {
  Vector da;
  double dz;
};

SpodRate spod_rate(const SpodRom& rom, const Vector& a, double z, const Vector& ucol,
                   const SpodOptions& opt) {
  const SpodBlocks b = interpolate_cache(rom.cache, z);
  const int r = static_cast<int>(a.size());
  const Vector rhs_a = b.a1 * a + b.vb * ucol;
  if (opt.freeze_shift) {
    SpodRate rate;
    rate.da = guarded_solve(b.m1, rhs_a, opt.condition_limit, "frozen-shift state");
    rate.dz = 0.0;
    return rate;
  }
  const Vector na = b.n * a;
  Matrix mass(r + 1, r + 1);
  mass.topLeftCorner(r, r) = b.m1;
  mass.block(0, r, r, 1) = na;
  mass.block(r, 0, 1, r) = na.transpose();
  mass(r, r) = a.dot(b.m2 * a);

  Vector rhs(r + 1);
  rhs.head(r) = rhs_a;
  rhs(r) = a.dot(b.a2 * a) + a.dot(b.wb * ucol);

  const Vector dy = guarded_solve(mass, rhs, opt.condition_limit, "shifted state");
  SpodRate rate;
  rate.da = dy.head(r);
  rate.dz = dy(r);
  return rate;
}

} // namespace

SpodTrajectory solve_spod_state(const SpodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                                const Matrix& u, const SpodOptions& opt) {
  const int r = static_cast<int>(rom.basis.cols());
  if (u.rows() != sys.B.cols() || u.cols() != tg.n)
    throw Error::invalid("control dimensions do not match the system and time grid");

  SpodTrajectory traj;
  traj.coeffs.resize(r, tg.n);
  traj.shifts.resize(tg.n);
  traj.coeff_rates.resize(r, tg.n);
  traj.shift_rates.resize(tg.n);

  // Initial coefficients from the exactly assembled frame at z0, so the
  // reconstruction starts at the least-squares projection of q0.
  const Matrix v0 = apply_shift(rom.grid, rom.basis, opt.z0);
  const Matrix m1_0 = v0.transpose() * v0;
  Vector a = guarded_solve(m1_0, v0.transpose() * sys.q0, opt.condition_limit, "initial state");
  double z = opt.z0;
  traj.coeffs.col(0) = a;
  traj.shifts(0) = z;

  const double dt = tg.dt;
  Vector uh(u.rows());
  for (int j = 0; j + 1 < tg.n; ++j) {
    uh = 0.5 * (u.col(j) + u.col(j + 1));
    const SpodRate k1 = spod_rate(rom, a, z, u.col(j), opt);
    traj.coeff_rates.col(j) = k1.da;
    traj.shift_rates(j) = k1.dz;
    const SpodRate k2 = spod_rate(rom, a + (0.5 * dt) * k1.da, z + 0.5 * dt * k1.dz, uh, opt);
    const SpodRate k3 = spod_rate(rom, a + (0.5 * dt) * k2.da, z + 0.5 * dt * k2.dz, uh, opt);
    const SpodRate k4 = spod_rate(rom, a + dt * k3.da, z + dt * k3.dz, u.col(j + 1), opt);
    a += (dt / 6.0) * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
    z += (dt / 6.0) * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
    if (!a.allFinite() || !std::isfinite(z))
      throw Error::diverged("shifted reduced state diverged at step " + std::to_string(j + 1));
    traj.coeffs.col(j + 1) = a;
    traj.shifts(j + 1) = z;
  }
  const SpodRate klast = spod_rate(rom, a, z, u.col(tg.n - 1), opt);
  traj.coeff_rates.col(tg.n - 1) = klast.da;
  traj.shift_rates(tg.n - 1) = klast.dz;
  return traj;
}

Matrix spod_reconstruct(const SpodRom& rom, const SpodTrajectory& traj) {
  const int n = static_cast<int>(traj.coeffs.cols());
  Matrix recon(rom.grid.m, n);
  for (int j = 0; j < n; ++j)
    recon.col(j) =
        apply_shift(rom.grid, Matrix(rom.basis * traj.coeffs.col(j)), traj.shifts(j));
  return recon;
}

double spod_cost(const SpodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                 const SpodTrajectory& traj, const Matrix& u) {
  return cost(sys, tg, spod_reconstruct(rom, traj), u);
}

} // namespace topt
