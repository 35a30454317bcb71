#include "transportopt.h"

#include "core/experiment.hpp"
#include "core/io.hpp"
#include "core/optimizer.hpp"
#include "core/types.hpp"

#include <exception>
#include <memory>
#include <string>
#include <vector>

using topt::Error;
using topt::ErrorCode;
using topt::Method;

struct topt_problem {
  topt::ExampleProblem ex;
};

struct topt_run {
  topt::OptimizeResult res;
};

namespace {

thread_local std::string g_last_error;

topt_status status_of(ErrorCode code) {
  switch (code) {
  case ErrorCode::invalid_argument: return TOPT_ERR_INVALID_ARGUMENT;
  case ErrorCode::io: return TOPT_ERR_IO;
  case ErrorCode::diverged: return TOPT_ERR_DIVERGED;
  case ErrorCode::degenerate: return TOPT_ERR_DEGENERATE;
  case ErrorCode::runtime: return TOPT_ERR_RUNTIME;
  }
  return TOPT_ERR_RUNTIME;
}

// Runs the body under the C boundary: exceptions become status codes and a
// thread-local message, success clears the message.
template <typename Fn>
topt_status guarded(Fn&& fn) {
  try {
    fn();
  } catch (const Error& err) {
    g_last_error = err.what();
    return status_of(err.code());
  } catch (const std::exception& ex) {
    g_last_error = ex.what();
    return TOPT_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown failure";
    return TOPT_ERR_RUNTIME;
  }
  g_last_error.clear();
  return TOPT_OK;
}

topt_status fail_invalid(const std::string& message) {
  g_last_error = message;
  return TOPT_ERR_INVALID_ARGUMENT;
}

Method method_of(topt_method method) {
  switch (method) {
  case TOPT_METHOD_FOM: return Method::full;
  case TOPT_METHOD_POD: return Method::projected;
  case TOPT_METHOD_SPOD: return Method::shifted;
  }
  throw Error::invalid("method code " + std::to_string(static_cast<int>(method)) +
                       " is not one of fom, pod, spod");
}

topt::OptimizerOptions options_of(const topt_options& o) {
  topt::OptimizerOptions opt;
  opt.method = method_of(o.method);
  opt.n_modes = o.n_modes;
  opt.mode_eps = o.mode_eps;
  opt.max_iters = o.max_iters;
  opt.grad_tol = o.grad_tol;
  opt.step0 = o.step0;
  opt.shrink = o.shrink;
  opt.armijo_c = o.armijo_c;
  opt.step_min = o.step_min;
  opt.step_max = o.step_max;
  opt.n_samples = o.n_samples;
  opt.stall_window = o.stall_window;
  opt.stall_rtol = o.stall_rtol;
  return opt;
}

std::vector<Method> methods_of(const topt_method* methods, int n_methods) {
  if (n_methods < 0) throw Error::invalid("negative method count");
  if (n_methods > 0 && !methods) throw Error::invalid("null method array");
  std::vector<Method> out;
  out.reserve(static_cast<size_t>(n_methods));
  for (int i = 0; i < n_methods; ++i)
    out.push_back(method_of(methods[i]));
  return out;
}

int count_failures(const std::vector<topt::RunSummary>& rows) {
  int failed = 0;
  for (const auto& row : rows)
    if (row.status != "ok") ++failed;
  return failed;
}

} // namespace

extern "C" {

const char* topt_version(void) { return "1.0.0"; }

const char* topt_last_error(void) { return g_last_error.c_str(); }

const char* topt_status_name(topt_status status) {
  switch (status) {
  case TOPT_OK: return "ok";
  case TOPT_ERR_INVALID_ARGUMENT: return "invalid_argument";
  case TOPT_ERR_IO: return "io";
  case TOPT_ERR_DIVERGED: return "diverged";
  case TOPT_ERR_DEGENERATE: return "degenerate";
  case TOPT_ERR_RUNTIME: return "runtime";
  }
  return "runtime";
}

topt_status topt_method_from_name(const char* name, topt_method* out) {
  if (!name || !out) return fail_invalid("null method name or output");
  return guarded([&] {
    switch (topt::parse_method(name)) {
    case Method::full: *out = TOPT_METHOD_FOM; break;
    case Method::projected: *out = TOPT_METHOD_POD; break;
    case Method::shifted: *out = TOPT_METHOD_SPOD; break;
    }
  });
}

const char* topt_method_name(topt_method method) {
  switch (method) {
  case TOPT_METHOD_FOM: return "fom";
  case TOPT_METHOD_POD: return "pod";
  case TOPT_METHOD_SPOD: return "spod";
  }
  return "fom";
}

topt_status topt_problem_create(int example, double scale, topt_problem** out) {
  if (!out) return fail_invalid("null problem output");
  *out = nullptr;
  return guarded([&] {
    auto problem = std::make_unique<topt_problem>();
    problem->ex = topt::build_example(example, scale);
    *out = problem.release();
  });
}

void topt_problem_destroy(topt_problem* problem) { delete problem; }

topt_status topt_problem_dims(const topt_problem* problem, int* m, int* n,
                              int* n_controls) {
  if (!problem) return fail_invalid("null problem");
  if (m) *m = problem->ex.grid.m;
  if (n) *n = problem->ex.tg.n;
  if (n_controls) *n_controls = problem->ex.sys.control_dim();
  g_last_error.clear();
  return TOPT_OK;
}

topt_status topt_problem_write_target(const topt_problem* problem,
                                      const char* path) {
  if (!problem || !path) return fail_invalid("null problem or path");
  return guarded([&] { topt::write_matrix(path, problem->ex.sys.q_d); });
}

void topt_options_init(topt_options* options) {
  if (!options) return;
  const topt::OptimizerOptions defaults;
  options->method = TOPT_METHOD_FOM;
  options->n_modes = defaults.n_modes;
  options->mode_eps = defaults.mode_eps;
  options->max_iters = defaults.max_iters;
  options->grad_tol = defaults.grad_tol;
  options->step0 = defaults.step0;
  options->shrink = defaults.shrink;
  options->armijo_c = defaults.armijo_c;
  options->step_min = defaults.step_min;
  options->step_max = defaults.step_max;
  options->n_samples = defaults.n_samples;
  options->stall_window = defaults.stall_window;
  options->stall_rtol = defaults.stall_rtol;
}

topt_status topt_optimize(const topt_problem* problem,
                          const topt_options* options, topt_run** out) {
  if (!problem || !options || !out) return fail_invalid("null problem, options, or output");
  *out = nullptr;
  return guarded([&] {
    auto run = std::make_unique<topt_run>();
    run->res = topt::run_single(problem->ex, options_of(*options), "", false);
    *out = run.release();
  });
}

void topt_run_destroy(topt_run* run) { delete run; }

double topt_run_cost(const topt_run* run) { return run ? run->res.j_fom : 0.0; }

topt_stop_reason topt_run_stop_reason(const topt_run* run) {
  if (!run) return TOPT_STOP_MAX_ITERATIONS;
  switch (run->res.stop) {
  case topt::StopReason::gradient_tolerance: return TOPT_STOP_GRADIENT_TOLERANCE;
  case topt::StopReason::max_iterations: return TOPT_STOP_MAX_ITERATIONS;
  case topt::StopReason::line_search_stalled: return TOPT_STOP_LINE_SEARCH_STALLED;
  }
  return TOPT_STOP_MAX_ITERATIONS;
}

int topt_run_iterations(const topt_run* run) {
  return run ? static_cast<int>(run->res.history.size()) : 0;
}

topt_status topt_run_record(const topt_run* run, int iter, double* j_fom,
                            double* grad_norm, int* modes) {
  if (!run) return fail_invalid("null run");
  if (iter < 0 || iter >= static_cast<int>(run->res.history.size()))
    return fail_invalid("iteration index out of range");
  const topt::IterationRecord& rec = run->res.history[static_cast<size_t>(iter)];
  if (j_fom) *j_fom = rec.j_fom;
  if (grad_norm) *grad_norm = rec.grad_norm;
  if (modes) *modes = rec.modes;
  g_last_error.clear();
  return TOPT_OK;
}

topt_status topt_run_write_convergence_csv(const topt_run* run, const char* path) {
  if (!run || !path) return fail_invalid("null run or path");
  return guarded([&] { topt::write_convergence_csv(path, run->res.history); });
}

topt_status topt_run_write_control(const topt_run* run, const char* path) {
  if (!run || !path) return fail_invalid("null run or path");
  return guarded([&] { topt::write_matrix(path, run->res.u); });
}

topt_status topt_run_write_state(const topt_run* run, const char* path) {
  if (!run || !path) return fail_invalid("null run or path");
  return guarded([&] { topt::write_matrix(path, run->res.state); });
}

topt_status topt_mode_sweep(const topt_problem* problem,
                            const topt_options* base,
                            const topt_method* methods, int n_methods,
                            const int* mode_counts, int n_counts,
                            const char* out_dir, int* n_failed) {
  if (!problem || !base || !out_dir) return fail_invalid("null problem, options, or out_dir");
  if (n_counts > 0 && !mode_counts) return fail_invalid("null mode count array");
  if (n_counts < 0) return fail_invalid("negative mode count array length");
  return guarded([&] {
    topt::ExperimentSpec spec;
    spec.base = options_of(*base);
    spec.methods = methods_of(methods, n_methods);
    if (n_counts > 0) spec.mode_counts.assign(mode_counts, mode_counts + n_counts);
    spec.out_dir = out_dir;
    const auto rows = topt::run_mode_sweep(problem->ex, spec);
    if (n_failed) *n_failed = count_failures(rows);
  });
}

topt_status topt_tolerance_study(const topt_problem* problem,
                                 const topt_options* base,
                                 const topt_method* methods, int n_methods,
                                 const double* tolerances, int n_tolerances,
                                 const char* out_dir, int* n_failed) {
  if (!problem || !base || !out_dir) return fail_invalid("null problem, options, or out_dir");
  if (n_tolerances > 0 && !tolerances) return fail_invalid("null tolerance array");
  if (n_tolerances < 0) return fail_invalid("negative tolerance array length");
  return guarded([&] {
    topt::ExperimentSpec spec;
    spec.base = options_of(*base);
    spec.methods = methods_of(methods, n_methods);
    if (n_tolerances > 0) spec.tolerances.assign(tolerances, tolerances + n_tolerances);
    spec.out_dir = out_dir;
    const auto rows = topt::run_tolerance_study(problem->ex, spec);
    if (n_failed) *n_failed = count_failures(rows);
  });
}

} // extern "C"
