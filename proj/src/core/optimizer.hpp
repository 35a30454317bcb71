#pragma once

#include "core/fom.hpp"
#include "core/grid.hpp"
#include "core/types.hpp"

#include <string>
#include <vector>

namespace topt {

// Which model prices the line-search trials. The descent direction is always
// the full-order adjoint gradient; the surrogate only decides the step size.
enum class Method {
  full,      // trial costs from full-order solves
  projected, // POD-Galerkin surrogate
  shifted    // shifted POD-Galerkin surrogate
};

struct OptimizerOptions {
  Method method = Method::full;
  int n_modes = 0;     // fixed basis size; 0 selects by the spectral cutoff
  double mode_eps = 1e-6;
  int max_iters = 100;
  double grad_tol = 1e-4; // stop when |g| drops below this times its start value
  double step0 = 1.0;
  double shrink = 0.5;    // backtracking factor, also the growth factor inverse
  double armijo_c = 1e-4;
  double step_min = 1e-12;
  double step_max = 1e3;
  int n_samples = 800;    // shift tabulation resolution, clamped to the grid
  int stall_window = 5;   // iterations of flat full-order cost before a
  double stall_rtol = 1e-3; // shift-track refresh (shifted surrogate only)
};

struct IterationRecord {
  int iter = 0;
  double j_fom = 0.0;       // full-order cost of the current iterate
  double j_surrogate = 0.0; // surrogate cost of the current iterate
  double j_trial = 0.0;     // surrogate cost of the accepted trial
  double grad_norm = 0.0;   // quadrature-weighted gradient norm
  double rel_grad = 0.0;
  double step = 0.0;        // accepted step, zero when no step was taken
  int modes = 0;
  bool shift_refresh = false;
  double wall_ms = 0.0;
};

enum class StopReason {
  gradient_tolerance,
  max_iterations,
  line_search_stalled
};

struct OptimizeResult {
  Matrix u;
  Matrix state;
  double j_fom = 0.0;
  StopReason stop = StopReason::max_iterations;
  std::vector<IterationRecord> history;
};

// Full-order adjoint descent with a two-way backtracking line search priced
// by the chosen surrogate. Reduced bases are rebuilt from the current state
// trajectory every iteration; the shifted surrogate keeps its shift track
// between refreshes. Trials whose reduced solve diverges or degenerates
// count as infinitely expensive and shrink the step.
OptimizeResult optimize(const SpatialGrid& grid, const FomSystem& sys, const TimeGrid& tg,
                        const Matrix& u0, const OptimizerOptions& opt);

// One row per iteration with the columns
//   iter,J_fom,J_surrogate,grad_norm,rel_grad,step,modes,shift_refresh,wall_ms
// Everything except wall_ms is deterministic for identical inputs.
void write_convergence_csv(const std::string& path,
                           const std::vector<IterationRecord>& history);

// Mean of the per-iteration basis sizes, the summary number reported by the
// tolerance studies.
double average_mode_count(const std::vector<IterationRecord>& history);

} // namespace topt
