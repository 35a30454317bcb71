#ifndef TRANSPORTOPT_H
#define TRANSPORTOPT_H

/* C interface to the transport optimal-control library: build one of the
 * canonical advection tracking problems, run the surrogate-priced descent,
 * and stream the results to files. Handles are opaque; every fallible call
 * returns a status code and leaves a message for topt_last_error(). */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum topt_status {
  TOPT_OK = 0,
  TOPT_ERR_INVALID_ARGUMENT = 1,
  TOPT_ERR_IO = 2,
  TOPT_ERR_DIVERGED = 3,
  TOPT_ERR_DEGENERATE = 4,
  TOPT_ERR_RUNTIME = 5
} topt_status;

/* Which model prices the line-search trials; the descent direction is always
 * the full-order adjoint gradient. */
typedef enum topt_method {
  TOPT_METHOD_FOM = 0,
  TOPT_METHOD_POD = 1,
  TOPT_METHOD_SPOD = 2
} topt_method;

typedef enum topt_stop_reason {
  TOPT_STOP_GRADIENT_TOLERANCE = 0,
  TOPT_STOP_MAX_ITERATIONS = 1,
  TOPT_STOP_LINE_SEARCH_STALLED = 2
} topt_stop_reason;

/* A discretized tracking problem with all operators materialized. */
typedef struct topt_problem topt_problem;

/* A finished optimization with its control, state, and iteration log. */
typedef struct topt_run topt_run;

const char* topt_version(void);

/* Message of the most recent failure on the calling thread; empty after a
 * success. The pointer stays valid until the next call on the same thread. */
const char* topt_last_error(void);

const char* topt_status_name(topt_status status);

/* Parses "fom", "pod", or "spod". */
topt_status topt_method_from_name(const char* name, topt_method* out);
const char* topt_method_name(topt_method method);

/* Examples 1..3; scale 1 is the reference resolution (3200 points, 3360 time
 * nodes), other scales shrink both proportionally at fixed CFL. */
topt_status topt_problem_create(int example, double scale, topt_problem** out);
void topt_problem_destroy(topt_problem* problem);

/* Grid sizes: state dimension, time nodes, control channels. Null outputs
 * are skipped. */
topt_status topt_problem_dims(const topt_problem* problem, int* m, int* n,
                              int* n_controls);

/* Writes the m x n tracking target in the binary matrix format. */
topt_status topt_problem_write_target(const topt_problem* problem,
                                      const char* path);

/* Mirrors the optimizer options; zero-initialize by topt_options_init. */
typedef struct topt_options {
  topt_method method;
  int n_modes;        /* fixed basis size; 0 selects by the spectral cutoff */
  double mode_eps;    /* relative singular-value cutoff */
  int max_iters;
  double grad_tol;    /* stop on this relative gradient-norm drop */
  double step0;
  double shrink;      /* backtracking factor, growth factor inverse */
  double armijo_c;    /* sufficient-decrease constant, in (0, 0.5) */
  double step_min;
  double step_max;
  int n_samples;      /* shift tabulation resolution */
  int stall_window;   /* flat-cost iterations before a shift refresh */
  double stall_rtol;
} topt_options;

/* Fills the library defaults; call it before overriding fields. */
void topt_options_init(topt_options* options);

/* Runs the descent from a zero initial control. The run must be released
 * with topt_run_destroy. */
topt_status topt_optimize(const topt_problem* problem,
                          const topt_options* options, topt_run** out);
void topt_run_destroy(topt_run* run);

/* Final full-order cost of the returned control. */
double topt_run_cost(const topt_run* run);
topt_stop_reason topt_run_stop_reason(const topt_run* run);
int topt_run_iterations(const topt_run* run);

/* One iteration of the log, index 0-based. Null outputs are skipped. */
topt_status topt_run_record(const topt_run* run, int iter, double* j_fom,
                            double* grad_norm, int* modes);

/* Artifact writers: the iteration log as CSV, the final control and state
 * trajectory in the binary matrix format. */
topt_status topt_run_write_convergence_csv(const topt_run* run, const char* path);
topt_status topt_run_write_control(const topt_run* run, const char* path);
topt_status topt_run_write_state(const topt_run* run, const char* path);

/* Cost-versus-basis-size sweep: methods outer, mode counts inner, writing
 * <out_dir>/mode_sweep.csv. Points that fail become status rows; their count
 * is reported through n_failed (nullable). The FOM method takes no basis and
 * contributes one baseline row. */
topt_status topt_mode_sweep(const topt_problem* problem,
                            const topt_options* base,
                            const topt_method* methods, int n_methods,
                            const int* mode_counts, int n_counts,
                            const char* out_dir, int* n_failed);

/* Tolerance-selected counterpart, writing <out_dir>/tolerance_study.csv. */
topt_status topt_tolerance_study(const topt_problem* problem,
                                 const topt_options* base,
                                 const topt_method* methods, int n_methods,
                                 const double* tolerances, int n_tolerances,
                                 const char* out_dir, int* n_failed);

#ifdef __cplusplus
}
#endif

#endif /* TRANSPORTOPT_H */
