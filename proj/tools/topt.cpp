#include "transportopt.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

const char* stop_reason_name(topt_stop_reason reason) {
  switch (reason) {
  case TOPT_STOP_GRADIENT_TOLERANCE: return "gradient tolerance";
  case TOPT_STOP_MAX_ITERATIONS: return "iteration cap";
  case TOPT_STOP_LINE_SEARCH_STALLED: return "line search stalled";
  }
  return "iteration cap";
}

int fail(const std::string& what) {
  std::fprintf(stderr, "topt: %s: %s\n", what.c_str(), topt_last_error());
  return 1;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i)
    out += (i ? "," : "") + std::to_string(values[i]);
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking control of periodic advection, with reduced-order "
               "surrogates pricing the line search"};
  app.set_config("--config", "",
                 "Flat key=value file mirroring the flags; flags win");

  int example = 1;
  double scale = 1.0;
  std::vector<std::string> method_names = {"fom"};
  std::vector<int> modes;
  std::vector<double> eps;
  std::string out;
  unsigned long seed = 0;
  int threads = 1;
  int max_iters = 10000;
  bool dump_snapshots = false;

  app.add_option("--example", example, "Example problem, 1 to 3")
      ->capture_default_str();
  app.add_option("--scale", scale, "Resolution scale; 1 is the reference grid")
      ->capture_default_str();
  app.add_option("--method", method_names,
                 "Trial-pricing methods: fom, pod, spod")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--modes", modes,
                 "Basis sizes; one value runs the optimizer once, several run "
                 "the mode sweep")
      ->delimiter(',');
  app.add_option("--eps", eps,
                 "Spectral cutoffs; any value switches to the tolerance study")
      ->delimiter(',');
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--seed", seed, "Recorded in run_meta.kv for provenance")
      ->capture_default_str();
  app.add_option("--threads", threads,
                 "Worker bound for basis assembly (sequential in this build)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--max-iters", max_iters, "Optimizer iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--dump-snapshots", dump_snapshots,
               "Also write the state and target trajectories (large)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!modes.empty() && !eps.empty()) {
    std::fprintf(stderr, "topt: --modes and --eps are mutually exclusive\n");
    return 1;
  }

  std::vector<topt_method> methods;
  for (const std::string& name : method_names) {
    topt_method method;
    if (topt_method_from_name(name.c_str(), &method) != TOPT_OK)
      return fail("--method " + name);
    methods.push_back(method);
  }

  topt_problem* problem = nullptr;
  if (topt_problem_create(example, scale, &problem) != TOPT_OK)
    return fail("building example " + std::to_string(example));

  topt_options options;
  topt_options_init(&options);
  options.max_iters = max_iters;

  std::error_code dir_error;
  std::filesystem::create_directories(out, dir_error);
  if (dir_error) {
    std::fprintf(stderr, "topt: cannot create %s: %s\n", out.c_str(),
                 dir_error.message().c_str());
    topt_problem_destroy(problem);
    return 1;
  }

  {
    std::ofstream meta(out + "/run_meta.kv");
    meta << "version=" << topt_version() << "\n"
         << "example=" << example << "\n"
         << "scale=" << scale << "\n";
    std::string names;
    for (size_t i = 0; i < method_names.size(); ++i)
      names += (i ? "," : "") + method_names[i];
    meta << "method=" << names << "\n"
         << "modes=" << join(modes) << "\n"
         << "eps=" << join(eps) << "\n"
         << "seed=" << seed << "\n"
         << "threads=" << threads << "\n"
         << "max-iters=" << max_iters << "\n"
         << "dump-snapshots=" << (dump_snapshots ? "1" : "0") << "\n";
  }

  int rc = 0;
  if (!eps.empty()) {
    int failed = 0;
    if (topt_tolerance_study(problem, &options, methods.data(),
                             static_cast<int>(methods.size()), eps.data(),
                             static_cast<int>(eps.size()), out.c_str(),
                             &failed) != TOPT_OK) {
      rc = fail("tolerance study");
    } else {
      std::printf("wrote %s/tolerance_study.csv (%d failed point%s)\n",
                  out.c_str(), failed, failed == 1 ? "" : "s");
      rc = failed > 0 ? 2 : 0;
    }
    if (rc != 1 && dump_snapshots &&
        topt_problem_write_target(problem, (out + "/target.bin").c_str()) != TOPT_OK)
      rc = fail("writing target");
  } else if (methods.size() > 1 || modes.size() > 1) {
    int failed = 0;
    if (topt_mode_sweep(problem, &options, methods.data(),
                        static_cast<int>(methods.size()), modes.data(),
                        static_cast<int>(modes.size()), out.c_str(),
                        &failed) != TOPT_OK) {
      rc = fail("mode sweep");
    } else {
      std::printf("wrote %s/mode_sweep.csv (%d failed point%s)\n", out.c_str(),
                  failed, failed == 1 ? "" : "s");
      rc = failed > 0 ? 2 : 0;
    }
    if (rc != 1 && dump_snapshots &&
        topt_problem_write_target(problem, (out + "/target.bin").c_str()) != TOPT_OK)
      rc = fail("writing target");
  } else {
    options.method = methods.front();
    options.n_modes = modes.empty() ? 0 : modes.front();
    topt_run* run = nullptr;
    if (topt_optimize(problem, &options, &run) != TOPT_OK) {
      rc = fail("optimize");
    } else {
      if (topt_run_write_convergence_csv(run, (out + "/convergence.csv").c_str()) != TOPT_OK ||
          topt_run_write_control(run, (out + "/control.bin").c_str()) != TOPT_OK)
        rc = fail("writing run artifacts");
      if (rc == 0 && dump_snapshots &&
          (topt_run_write_state(run, (out + "/state.bin").c_str()) != TOPT_OK ||
           topt_problem_write_target(problem, (out + "/target.bin").c_str()) != TOPT_OK))
        rc = fail("writing snapshots");
      if (rc == 0)
        std::printf("%s: J = %.6g after %d iterations (%s)\n",
                    topt_method_name(options.method), topt_run_cost(run),
                    topt_run_iterations(run),
                    stop_reason_name(topt_run_stop_reason(run)));
      topt_run_destroy(run);
    }
  }

  topt_problem_destroy(problem);
  return rc;
}
