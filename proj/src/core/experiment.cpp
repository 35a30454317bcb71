#include "core/experiment.hpp"

#include "core/io.hpp"
#include "core/shift.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace topt {

namespace {

constexpr double kStripLength = 100.0;
constexpr int kReferencePoints = 3200;
constexpr int kReferenceNodes = 3360;
constexpr double kCfl = 4.0 / 3.0;
constexpr double kCharacteristicSpeed = 1.0;
constexpr int kControls = 40;
constexpr double kControlPenalty = 1e-3;

double example_velocity(int example) {
  switch (example) {
  case 1: return 0.50 * kCharacteristicSpeed;
  case 2: return 0.55 * kCharacteristicSpeed;
  case 3: return 0.60 * kCharacteristicSpeed;
  }
  throw Error::invalid("example id must be 1, 2, or 3");
}

// Example 1 rides a wide bump, examples 2 and 3 a narrow one near the inlet.
Vector initial_profile(const SpatialGrid& grid, int example) {
  const double center = example == 1 ? grid.length / 12.0 : grid.length / 30.0;
  const double width = example == 1 ? 7.0 : 0.5;
  Vector q0(grid.m);
  for (int i = 0; i < grid.m; ++i) {
    const double d = grid.node(i) - center;
    q0(i) = std::exp(-d * d / width);
  }
  return q0;
}

double kink_fraction(int example) { return example == 3 ? 0.9 : 0.75; }

} // namespace

Vector target_shift_path(const TimeGrid& tg, double velocity,
                         double characteristic_speed, double kink_time) {
  Vector z(tg.n);
  for (int j = 0; j < tg.n; ++j) {
    const double t = tg.node(j);
    z(j) = velocity * std::min(t, kink_time) +
           characteristic_speed * std::max(0.0, t - kink_time);
  }
  return z;
}

ExampleProblem build_example(int example, double scale) {
  if (example < 1 || example > 3) throw Error::invalid("example id must be 1, 2, or 3");
  if (!(scale > 0.0)) throw Error::invalid("scale must be positive");
  const int m = static_cast<int>(std::lround(kReferencePoints * scale));
  const int n = static_cast<int>(std::lround(kReferenceNodes * scale));
  if (m < 8) throw Error::invalid("scale leaves fewer than 8 grid points");

  ExampleProblem ex;
  ex.grid = SpatialGrid::uniform(m, kStripLength);
  ex.tg = TimeGrid::from_cfl(ex.grid, kCfl, kCharacteristicSpeed, n);

  const double v = example_velocity(example);
  ex.sys.A = build_advection_operator(ex.grid, v);
  ex.sys.At = ex.sys.A.transpose();
  ex.sys.B = build_control_operator(ex.grid, kControls);
  ex.sys.c = build_output_weights(ex.grid);
  ex.sys.q0 = initial_profile(ex.grid, example);
  ex.sys.mu = kControlPenalty;
  ex.sys.velocity = v;

  ex.kink_time = kink_fraction(example) * ex.tg.t_f;
  ex.target_shifts = target_shift_path(ex.tg, v, kCharacteristicSpeed, ex.kink_time);
  ex.sys.q_d.resize(m, n);
  for (int j = 0; j < n; ++j)
    ex.sys.q_d.col(j) = apply_shift(ex.grid, ex.sys.q0, ex.target_shifts(j));
  return ex;
}

const char* method_name(Method method) {
  switch (method) {
  case Method::full: return "fom";
  case Method::projected: return "pod";
  case Method::shifted: return "spod";
  }
  return "fom";
}

Method parse_method(const std::string& name) {
  if (name == "fom") return Method::full;
  if (name == "pod") return Method::projected;
  if (name == "spod") return Method::shifted;
  throw Error::invalid("unknown method '" + name + "', expected fom, pod, or spod");
}

namespace {

// Runs one sweep point, converting any failure into a status row.
RunSummary execute_point(const ExampleProblem& ex, const OptimizerOptions& opt) {
  RunSummary row;
  row.method = opt.method;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Matrix u0 = Matrix::Zero(ex.sys.control_dim(), ex.tg.n);
    const OptimizeResult res = optimize(ex.grid, ex.sys, ex.tg, u0, opt);
    row.j_fom = res.j_fom;
    row.avg_modes = average_mode_count(res.history);
    row.status = "ok";
  } catch (const Error& err) {
    row.j_fom = std::numeric_limits<double>::quiet_NaN();
    row.avg_modes = std::numeric_limits<double>::quiet_NaN();
    row.status = error_code_name(err.code());
  } catch (const std::exception&) {
    row.j_fom = std::numeric_limits<double>::quiet_NaN();
    row.avg_modes = std::numeric_limits<double>::quiet_NaN();
    row.status = error_code_name(ErrorCode::runtime);
  }
  const auto stop = std::chrono::steady_clock::now();
  row.wall_s = std::chrono::duration<double>(stop - start).count();
  return row;
}

void write_summary_csv(const std::string& path,
                       const std::vector<std::string>& header,
                       const std::vector<RunSummary>& rows, bool tolerance_run) {
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const RunSummary& row : rows) {
    std::vector<std::string> line;
    line.push_back(method_name(row.method));
    line.push_back(tolerance_run ? format_double(row.eps) : std::to_string(row.modes));
    line.push_back(format_double(row.j_fom));
    if (tolerance_run) line.push_back(format_double(row.avg_modes));
    line.push_back(format_double(row.wall_s));
    line.push_back(row.status);
    cells.push_back(std::move(line));
  }
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  write_csv(path, header, cells);
}

} // namespace

std::vector<RunSummary> run_mode_sweep(const ExampleProblem& ex,
                                       const ExperimentSpec& spec) {
  std::vector<RunSummary> rows;
  for (Method method : spec.methods) {
    OptimizerOptions opt = spec.base;
    opt.method = method;
    if (method == Method::full) {
      rows.push_back(execute_point(ex, opt));
      continue;
    }
    for (int modes : spec.mode_counts) {
      opt.n_modes = modes;
      RunSummary row = execute_point(ex, opt);
      row.modes = modes;
      rows.push_back(std::move(row));
    }
  }
  if (!spec.out_dir.empty())
    write_summary_csv(spec.out_dir + "/mode_sweep.csv",
                      {"method", "modes", "j_fom", "wall_s", "status"}, rows,
                      false);
  return rows;
}

std::vector<RunSummary> run_tolerance_study(const ExampleProblem& ex,
                                            const ExperimentSpec& spec) {
  std::vector<RunSummary> rows;
  for (Method method : spec.methods) {
    OptimizerOptions opt = spec.base;
    opt.method = method;
    if (method == Method::full) {
      rows.push_back(execute_point(ex, opt));
      continue;
    }
    opt.n_modes = 0; // basis size tracks the spectral cutoff per iteration
    for (double eps : spec.tolerances) {
      opt.mode_eps = eps;
      RunSummary row = execute_point(ex, opt);
      row.eps = eps;
      rows.push_back(std::move(row));
    }
  }
  if (!spec.out_dir.empty())
    write_summary_csv(spec.out_dir + "/tolerance_study.csv",
                      {"method", "eps", "j_fom", "avg_modes", "wall_s", "status"},
                      rows, true);
  return rows;
}

OptimizeResult run_single(const ExampleProblem& ex, const OptimizerOptions& opt,
                          const std::string& out_dir, bool dump_snapshots) {
  const Matrix u0 = Matrix::Zero(ex.sys.control_dim(), ex.tg.n);
  OptimizeResult res = optimize(ex.grid, ex.sys, ex.tg, u0, opt);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_convergence_csv(out_dir + "/convergence.csv", res.history);
    write_matrix(out_dir + "/control.bin", res.u);
    if (dump_snapshots) {
      write_matrix(out_dir + "/state.bin", res.state);
      write_matrix(out_dir + "/target.bin", ex.sys.q_d);
    }
  }
  return res;
}

} // namespace topt
