#pragma once

#include "core/fom.hpp"
#include "core/grid.hpp"
#include "core/pod.hpp"
#include "core/types.hpp"

#include <vector>

namespace topt {

// Columns shifted back by the given track, one shift per snapshot.
Matrix deshift_snapshots(const SpatialGrid& grid, const Matrix& snapshots,
                         const Vector& shifts);

// Basis of the co-moving frame: columns of the snapshot matrix are shifted
// back by the given track before the spectrum is taken.
PodBasis compute_spod_basis(const SpatialGrid& grid, const Matrix& snapshots,
                            const Vector& shifts, int n_modes);

// Galerkin blocks of the shifted ansatz q = V(z) a with V = T^z U and
// W = dV/dz, sampled at one shift value:
//   m1 = V^T V    n  = V^T W    m2 = W^T W
//   a1 = V^T A V  a2 = W^T A V
//   vb = V^T B    wb = W^T B
struct SpodBlocks {
  Matrix m1, n, m2;
  Matrix a1, a2;
  Matrix vb, wb;
};

// Blocks tabulated on a uniform shift grid over one period, with entrywise
// periodic linear interpolation in between. The reduced dynamics and its
// adjoint are defined by the interpolated blocks, so the adjoint differences
// the table for the z-derivatives rather than using the continuous
// identities. The tabulation step must not be finer than the spatial grid:
// below that the blocks' sub-cell interpolation wiggles dominate the slopes.
struct GalerkinCache {
  double length = 0.0;
  double sample_dz = 0.0;
  bool constant_blocks = false;
  std::vector<SpodBlocks> samples;
};

// Exact blocks at one shift value, assembled from fresh operator applications.
SpodBlocks assemble_spod_blocks(const SpatialGrid& grid, const FomSystem& sys,
                                const Matrix& basis, double z);

// With constant_blocks the projection blocks m1, n, m2, a1, a2 are assembled
// once at z = 0 and reused for every sample; translation leaves them unchanged
// for a single frame, while vb and wb keep their z dependence because the
// input shapes are fixed in the lab frame. M1 must be positive definite at
// every sample; a rank-deficient frame basis fails assembly here instead of
// surfacing as a mystery singular mass matrix mid-solve.
GalerkinCache assemble_galerkin_cache(const SpatialGrid& grid, const FomSystem& sys,
                                      const Matrix& basis, int n_samples,
                                      bool constant_blocks = false);

// On-disk form: a directory with a key=value metadata file and one matrix
// file per block kind, samples stacked left to right. The grid is hashed into
// the metadata so a cache cannot be silently rehydrated against a different
// discretization.
void save_galerkin_cache(const std::string& dir, const GalerkinCache& cache,
                         const SpatialGrid& grid);
GalerkinCache load_galerkin_cache(const std::string& dir, const SpatialGrid& grid);

SpodBlocks interpolate_cache(const GalerkinCache& cache, double z);

// Entrywise z-derivative of the interpolated table at z, constant within
// each tabulation cell.
SpodBlocks cache_slopes(const GalerkinCache& cache, double z);

// Shifted reduced model: frame basis plus the tabulated Galerkin blocks.
struct SpodRom {
  SpatialGrid grid;
  Matrix basis;
  GalerkinCache cache;
};

SpodRom build_spod_rom(const SpatialGrid& grid, const FomSystem& sys, const Matrix& basis,
                       int n_samples, bool constant_blocks = false);

struct SpodOptions {
  double z0 = 0.0;
  bool freeze_shift = false;     // hold z fixed; the fallback when W a degenerates
  double condition_limit = 1e12; // mass-matrix pivot ratio treated as singular
};

// Forward trajectory with the node-time rates; the adjoint needs both.
struct SpodTrajectory {
  Matrix coeffs;      // r x n
  Vector shifts;      // n
  Matrix coeff_rates; // r x n, da/dt at the nodes
  Vector shift_rates; // n, dz/dt at the nodes
};

SpodTrajectory solve_spod_state(const SpodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                                const Matrix& u, const SpodOptions& opt = {});

// Full-space reconstruction V(z_j) a_j, from exact shift applications.
Matrix spod_reconstruct(const SpodRom& rom, const SpodTrajectory& traj);

double spod_cost(const SpodRom& rom, const FomSystem& sys, const TimeGrid& tg,
                 const SpodTrajectory& traj, const Matrix& u);

} // namespace topt
