#include "core/optimizer.hpp"

#include "core/io.hpp"
#include "core/pod.hpp"
#include "core/shift.hpp"
#include "core/spod.hpp"
#include "core/svd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace topt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quad_norm(const Matrix& g, const Vector& w) {
  double s = 0.0;
  for (int j = 0; j < g.cols(); ++j)
    s += w(j) * g.col(j).squaredNorm();
  return std::sqrt(s);
}

// Trial pricer built fresh each iteration from the current state snapshots.
struct Surrogate {
  std::function<double(const Matrix&)> price;
  int modes = 0;
};

int resolve_modes(const Vector& spectrum, const OptimizerOptions& opt) {
  const int k = static_cast<int>(spectrum.size());
  if (opt.n_modes > 0)
    return std::min(opt.n_modes, k);
  return select_mode_count(spectrum, opt.mode_eps);
}

Surrogate make_full_surrogate(const FomSystem& sys, const TimeGrid& tg) {
  Surrogate s;
  s.price = [&sys, &tg](const Matrix& u) { return cost(sys, tg, solve_state(sys, tg, u), u); };
  return s;
}

Surrogate make_projected_surrogate(const FomSystem& sys, const TimeGrid& tg,
                                   const Matrix& state, const OptimizerOptions& opt) {
  const Svd svd = thin_svd(state);
  Surrogate s;
  s.modes = resolve_modes(svd.s, opt);
  PodRom rom = build_pod_rom(sys, svd.u.leftCols(s.modes));
  s.price = [&sys, &tg, rom = std::move(rom)](const Matrix& u) {
    return pod_cost(rom, sys, tg, solve_pod_state(rom, sys, tg, u), u);
  };
  return s;
}

Surrogate make_shifted_surrogate(const SpatialGrid& grid, const FomSystem& sys,
                                 const TimeGrid& tg, const Matrix& state, const Vector& track,
                                 const OptimizerOptions& opt) {
  const Svd svd = thin_svd(deshift_snapshots(grid, state, track));
  Surrogate s;
  s.modes = resolve_modes(svd.s, opt);
  const int n_samples = std::clamp(opt.n_samples, 2, grid.m);
  SpodRom rom = build_spod_rom(grid, sys, svd.u.leftCols(s.modes), n_samples);
  SpodOptions sopt;
  sopt.z0 = track(0);
  s.price = [&sys, &tg, rom = std::move(rom), sopt](const Matrix& u) {
    return spod_cost(rom, sys, tg, solve_spod_state(rom, sys, tg, u, sopt), u);
  };
  return s;
}

// Reduced trials that blow up or lose rank are priced as infinitely bad, so
// the search backs off instead of aborting the run.
double safe_price(const Surrogate& s, const Matrix& u) {
  try {
    const double j = s.price(u);
    return std::isfinite(j) ? j : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

struct SearchResult {
  double step = 0.0;
  double trial = kInf;
  bool ok = false;
};

// Two-way backtracking: grow the warm-started step while the sufficient
// decrease condition keeps holding, otherwise shrink until it first holds.
SearchResult two_way_backtracking(const Surrogate& s, const Matrix& u, const Matrix& g,
                                  double ref, double slope, double warm,
                                  const OptimizerOptions& opt) {
  const auto holds = [&](double step, double j) {
    return std::isfinite(j) && j <= ref - opt.armijo_c * step * slope;
  };
  double step = std::clamp(warm, opt.step_min, opt.step_max);
  double j = safe_price(s, u - step * g);
  if (holds(step, j)) {
    while (step / opt.shrink <= opt.step_max) {
      const double grown = step / opt.shrink;
      const double jg = safe_price(s, u - grown * g);
      if (!holds(grown, jg))
        break;
      step = grown;
      j = jg;
    }
    return {step, j, true};
  }
  while (step * opt.shrink >= opt.step_min) {
    step *= opt.shrink;
    j = safe_price(s, u - step * g);
    if (holds(step, j))
      return {step, j, true};
  }
  return {step, j, false};
}

} // namespace

OptimizeResult optimize(const SpatialGrid& grid, const FomSystem& sys, const TimeGrid& tg,
                        const Matrix& u0, const OptimizerOptions& opt) {
  if (u0.rows() != sys.control_dim() || u0.cols() != tg.n)
    throw Error::invalid("initial control dimensions do not match the system and time grid");
  if (!(opt.shrink > 0.0 && opt.shrink < 1.0))
    throw Error::invalid("backtracking factor must lie in (0, 1)");
  if (!(opt.armijo_c > 0.0 && opt.armijo_c < 0.5))
    throw Error::invalid("sufficient-decrease constant must lie in (0, 0.5)");
  if (opt.max_iters < 1)
    throw Error::invalid("optimizer needs at least one iteration");
  if (opt.n_modes < 0)
    throw Error::invalid("mode count must be nonnegative; zero selects by cutoff");

  const Vector w = time_quadrature_weights(tg);
  OptimizeResult result;
  result.u = u0;
  result.stop = StopReason::max_iterations;

  double warm = opt.step0;
  double grad0 = -1.0;
  Vector track;
  std::vector<double> recent; // trailing full-order costs for the stall check

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iter = iter;

    const Matrix state = solve_state(sys, tg, result.u);
    rec.j_fom = cost(sys, tg, state, result.u);
    const Matrix adjoint = solve_adjoint(sys, tg, state);
    const Matrix g = control_gradient(sys, result.u, adjoint);
    rec.grad_norm = quad_norm(g, w);
    if (grad0 < 0.0)
      grad0 = rec.grad_norm;
    // An exactly zero first gradient still reports the defining ratio of one;
    // the stop test below fires on it immediately.
    rec.rel_grad = grad0 > 0.0 ? rec.grad_norm / grad0 : 1.0;

    const auto finish = [&](StopReason reason) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
      result.history.push_back(rec);
      result.stop = reason;
      result.state = state;
      result.j_fom = rec.j_fom;
    };

    if (rec.grad_norm <= opt.grad_tol * grad0) {
      rec.j_surrogate = rec.j_fom;
      rec.j_trial = rec.j_fom;
      finish(StopReason::gradient_tolerance);
      return result;
    }

    // Shift track upkeep: estimated once from the first trajectory, then
    // re-estimated when the full-order cost has been flat across the window.
    if (opt.method == Method::shifted) {
      if (track.size() == 0) {
        track = estimate_shifts(grid, state);
      } else if (static_cast<int>(recent.size()) > opt.stall_window) {
        const double before = recent.front();
        const double scale = std::max(std::abs(before), 1e-30);
        if ((before - rec.j_fom) / scale < opt.stall_rtol) {
          track = estimate_shifts(grid, state);
          rec.shift_refresh = true;
          recent.clear();
        }
      }
    }

    auto build = [&]() {
      switch (opt.method) {
      case Method::projected:
        return make_projected_surrogate(sys, tg, state, opt);
      case Method::shifted:
        return make_shifted_surrogate(grid, sys, tg, state, track, opt);
      default:
        return make_full_surrogate(sys, tg);
      }
    };
    Surrogate surrogate = build();
    rec.modes = surrogate.modes;
    rec.j_surrogate =
        opt.method == Method::full ? rec.j_fom : safe_price(surrogate, result.u);

    const double slope = rec.grad_norm * rec.grad_norm;
    SearchResult search =
        two_way_backtracking(surrogate, result.u, g, rec.j_surrogate, slope, warm, opt);
    if (!search.ok && opt.method == Method::shifted && !rec.shift_refresh) {
      // One recovery attempt: the track may have drifted away from the
      // transport actually present in the current trajectory.
      track = estimate_shifts(grid, state);
      rec.shift_refresh = true;
      surrogate = build();
      rec.modes = surrogate.modes;
      rec.j_surrogate = safe_price(surrogate, result.u);
      search = two_way_backtracking(surrogate, result.u, g, rec.j_surrogate, slope, warm, opt);
    }
    if (!search.ok) {
      rec.j_trial = rec.j_surrogate;
      finish(StopReason::line_search_stalled);
      return result;
    }

    rec.step = search.step;
    rec.j_trial = search.trial;
    warm = search.step;
    result.u -= search.step * g;

    recent.push_back(rec.j_fom);
    if (static_cast<int>(recent.size()) > opt.stall_window + 1)
      recent.erase(recent.begin());

    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);
  }

  result.state = solve_state(sys, tg, result.u);
  result.j_fom = cost(sys, tg, result.state, result.u);
  return result;
}

void write_convergence_csv(const std::string& path,
                           const std::vector<IterationRecord>& history) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(history.size());
  for (const IterationRecord& r : history)
    rows.push_back({std::to_string(r.iter), format_double(r.j_fom),
                    format_double(r.j_surrogate), format_double(r.grad_norm),
                    format_double(r.rel_grad), format_double(r.step), std::to_string(r.modes),
                    r.shift_refresh ? "1" : "0", format_double(r.wall_ms)});
  write_csv(path,
            {"iter", "J_fom", "J_surrogate", "grad_norm", "rel_grad", "step", "modes",
             "shift_refresh", "wall_ms"},
            rows);
}

double average_mode_count(const std::vector<IterationRecord>& history) {
  if (history.empty())
    throw Error::invalid("cannot average modes over an empty run");
  double sum = 0.0;
  for (const IterationRecord& r : history)
    sum += r.modes;
  return sum / static_cast<double>(history.size());
}

} // namespace topt
