#pragma once

#include "core/fom.hpp"
#include "core/grid.hpp"
#include "core/optimizer.hpp"
#include "core/types.hpp"

#include <string>
#include <vector>

namespace topt {

// One of the three canonical tracking problems: periodic advection on a
// 100 m strip over a 140 s horizon, 40 Gaussian actuators, CFL 4/3 against
// the unit characteristic speed. The examples differ in initial profile,
// transport velocity, and where the target path bends.
struct ExampleProblem {
  SpatialGrid grid;
  TimeGrid tg;
  FomSystem sys;        // q_d is already materialized from the target path
  Vector target_shifts; // displacement of q0 generating each q_d column
  double kink_time = 0.0;
};

// Shift path of the tracking target: slope `velocity` until kink_time, then
// slope `characteristic_speed` for the rest of the horizon. The target
// construction is isolated here so it can be swapped wholesale.
Vector target_shift_path(const TimeGrid& tg, double velocity,
                         double characteristic_speed, double kink_time);

// Scale 1 is the reference resolution (m = 3200 points, n = 3360 nodes);
// other scales shrink both proportionally at fixed CFL. Scales leaving
// fewer than 8 grid points are rejected.
ExampleProblem build_example(int example, double scale);

// "fom", "pod", "spod"; parse_method is the inverse.
const char* method_name(Method method);
Method parse_method(const std::string& name);

// Shared configuration of the mode sweep and the tolerance study.
struct ExperimentSpec {
  int example = 1;
  double scale = 1.0;
  std::vector<Method> methods;
  std::vector<int> mode_counts;   // mode-sweep points
  std::vector<double> tolerances; // tolerance-study points
  std::string out_dir;            // empty runs in memory only
  unsigned long seed = 0;         // recorded in artifacts; the pipeline itself
                                  // is deterministic
  OptimizerOptions base;          // method, n_modes and mode_eps are
                                  // overwritten per sweep point
};

// One optimize() call of a sweep, reduced to the reported columns. A point
// that throws is recorded with the error category as its status and a NaN
// cost instead of aborting the remaining points.
struct RunSummary {
  Method method = Method::full;
  int modes = 0;      // requested basis size; 0 under tolerance selection
  double eps = 0.0;   // tolerance-study cutoff
  double j_fom = 0.0; // final full-order cost of the returned control
  double avg_modes = 0.0;
  double wall_s = 0.0;
  std::string status; // "ok" or an error code name
};

// Cost-versus-basis-size sweep, methods outer and mode counts inner, in the
// order given. The full-order method takes no basis and contributes a single
// baseline row with modes 0. Unless out_dir is empty, writes
// <out_dir>/mode_sweep.csv with columns method,modes,j_fom,wall_s,status.
std::vector<RunSummary> run_mode_sweep(const ExampleProblem& ex,
                                       const ExperimentSpec& spec);

// Tolerance-selected counterpart over spec.tolerances; the full-order method
// again contributes one baseline row with eps 0. Unless out_dir is empty,
// writes <out_dir>/tolerance_study.csv with columns
// method,eps,j_fom,avg_modes,wall_s,status.
std::vector<RunSummary> run_tolerance_study(const ExampleProblem& ex,
                                            const ExperimentSpec& spec);

// Single optimization from a zero initial control. When out_dir is set,
// writes convergence.csv and the final control as control.bin there;
// dump_snapshots adds the final state trajectory (state.bin) and the target
// (target.bin), which are m x n and large at full scale.
OptimizeResult run_single(const ExampleProblem& ex, const OptimizerOptions& opt,
                          const std::string& out_dir, bool dump_snapshots);

} // namespace topt
