#include "lanefit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

constexpr std::size_t kDim = LaneHypothesis::kDim;
using Vec = std::array<double, kDim>;

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

std::string describe(const LaneHypothesis& h) {
  std::ostringstream s;
  s << "(a0c=" << h.central_offset << ", a1=" << h.a1 << ", a2=" << h.a2
    << ", b=" << h.b << ")";
  return s.str();
}

// Objective in scaled coordinates with the box barrier folded in.
class ScaledProblem {
 public:
  ScaledProblem(const HypothesisObjective& objective, const LaneHypothesis& init,
                const OptimizerConfig& cfg,
                const std::optional<HypothesisBox>& box, const ActiveSet& active)
      : objective_(objective),
        base_(init.to_array()),
        steps_(cfg.initial_steps),
        box_(box),
        barrier_(cfg.barrier_weight) {
    for (std::size_t i = 0; i < kDim; ++i) {
      if (active.active[i]) index_.push_back(i);
    }
  }

  std::size_t dim() const { return index_.size(); }

  std::vector<double> to_scaled(const Vec& v) const {
    std::vector<double> s(dim());
    for (std::size_t k = 0; k < dim(); ++k) s[k] = v[index_[k]] / steps_[index_[k]];
    return s;
  }

  Vec to_values(const std::vector<double>& s) const {
    Vec v = base_;
    for (std::size_t k = 0; k < dim(); ++k) v[index_[k]] = s[k] * steps_[index_[k]];
    return v;
  }

  Vec clamp(const Vec& v) const {
    if (!box_) return v;
    Vec c = v;
    const auto lim = box_->limits();
    for (std::size_t i = 0; i < kDim; ++i) c[i] = std::clamp(v[i], -lim[i], lim[i]);
    return c;
  }

  double evaluate_values(const Vec& v) {
    const Vec c = clamp(v);
    double penalty = 0.0;
    for (std::size_t i = 0; i < kDim; ++i) {
      const double excess = (v[i] - c[i]) / steps_[i];
      penalty += excess * excess;
    }
    const auto hyp = LaneHypothesis::from_array(c);
    const double f = objective_(hyp);
    ++evaluations_;
    if (std::isnan(f)) {
      throw OptimizationError("objective returned NaN at " + describe(hyp));
    }
    return f + barrier_ * penalty;
  }

  double evaluate(const std::vector<double>& s) { return evaluate_values(to_values(s)); }

  long evaluations() const { return evaluations_; }

 private:
  const HypothesisObjective& objective_;
  Vec base_;
  Vec steps_;
  std::optional<HypothesisBox> box_;
  double barrier_;
  std::vector<std::size_t> index_;
  long evaluations_ = 0;
};

double uniform_pm1(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

void OptimizerConfig::validate() const {
  for (double s : initial_steps) {
    if (!(s > 0.0)) throw ConfigError("optimizer.initial_steps must be > 0");
  }
  if (!(cost_tolerance > 0.0) || !(diameter_tolerance > 0.0)) {
    throw ConfigError("optimizer tolerances must be > 0");
  }
  if (max_iterations <= 0) throw ConfigError("optimizer.max_iterations must be > 0");
  if (scan_points < 2) throw ConfigError("optimizer.scan_points must be >= 2");
  if (!(restart_jitter > 0.0)) throw ConfigError("optimizer.restart_jitter must be > 0");
  if (!(barrier_weight > 0.0)) throw ConfigError("optimizer.barrier_weight must be > 0");
  if (!(warm_start_step_scale > 0.0)) {
    throw ConfigError("optimizer.warm_start_step_scale must be > 0");
  }
  if (polish_restarts < 0) throw ConfigError("optimizer.polish_restarts must be >= 0");
  if (profile_points < 1) throw ConfigError("optimizer.profile_points must be >= 1");
  if (profile_decimation < 1) throw ConfigError("optimizer.profile_decimation must be >= 1");
  if (profile_max_iterations < 1) {
    throw ConfigError("optimizer.profile_max_iterations must be >= 1");
  }
}

OptResult nelder_mead(const HypothesisObjective& objective,
                      const LaneHypothesis& init, const OptimizerConfig& cfg,
                      const std::optional<HypothesisBox>& box,
                      const ActiveSet& active, double step_scale) {
  ScaledProblem problem(objective, init, cfg, box, active);
  const std::size_t n = problem.dim();
  OptResult result;

  if (n == 0) {
    const Vec v = problem.clamp(init.to_array());
    result.best = LaneHypothesis::from_array(v);
    result.best_cost = problem.evaluate_values(v);
    result.converged = true;
    result.evaluations = problem.evaluations();
    return result;
  }

  std::vector<std::vector<double>> x(n + 1, problem.to_scaled(init.to_array()));
  for (std::size_t k = 0; k < n; ++k) x[k + 1][k] += step_scale;
  std::vector<double> f(n + 1);
  for (std::size_t k = 0; k <= n; ++k) f[k] = problem.evaluate(x[k]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);

  auto combine = [&](std::vector<double>& out, double t,
                     const std::vector<double>& toward) {
    // out = centroid + t * (toward - centroid)
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = centroid[k] + t * (toward[k] - centroid[k]);
    }
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    {
      std::vector<std::vector<double>> xs(n + 1);
      std::vector<double> fs(n + 1);
      for (std::size_t k = 0; k <= n; ++k) {
        xs[k] = std::move(x[order[k]]);
        fs[k] = f[order[k]];
      }
      x = std::move(xs);
      f = std::move(fs);
    }

    double diameter = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        diameter = std::max(diameter, std::abs(x[k][j] - x[0][j]));
      }
    }
    if (f[n] - f[0] <= cfg.cost_tolerance && diameter <= cfg.diameter_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= cfg.max_iterations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += x[k][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    combine(xr, -kReflect, x[n]);
    const double fr = problem.evaluate(xr);
    bool shrink = false;
    if (fr < f[0]) {
      combine(xe, kExpand, xr);
      const double fe = problem.evaluate(xe);
      if (fe < fr) {
        x[n] = xe;
        f[n] = fe;
      } else {
        x[n] = xr;
        f[n] = fr;
      }
    } else if (fr < f[n - 1]) {
      x[n] = xr;
      f[n] = fr;
    } else if (fr < f[n]) {
      combine(xc, kContract, xr);
      const double fc = problem.evaluate(xc);
      if (fc <= fr) {
        x[n] = xc;
        f[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      combine(xc, kContract, x[n]);
      const double fc = problem.evaluate(xc);
      if (fc < f[n]) {
        x[n] = xc;
        f[n] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          x[k][j] = x[0][j] + kShrink * (x[k][j] - x[0][j]);
        }
        f[k] = problem.evaluate(x[k]);
      }
    }

    ++result.iterations;
    result.trajectory.push_back(*std::min_element(f.begin(), f.end()));
  }

  const Vec raw = problem.to_values(x[0]);
  const Vec clamped = problem.clamp(raw);
  result.best = LaneHypothesis::from_array(clamped);
  result.best_cost = clamped == raw ? f[0] : problem.evaluate_values(clamped);
  result.evaluations = problem.evaluations();
  return result;
}

namespace {

void append(OptResult& into, const OptResult& run) {
  into.iterations += run.iterations;
  into.evaluations += run.evaluations;
  into.converged = run.converged;
  double best_so_far = into.trajectory.empty() ? into.best_cost : into.trajectory.back();
  for (double c : run.trajectory) {
    best_so_far = std::min(best_so_far, c);
    into.trajectory.push_back(best_so_far);
  }
  if (run.best_cost < into.best_cost) {
    into.best = run.best;
    into.best_cost = run.best_cost;
  }
}

}  // namespace

OptResult minimize_hypothesis(const HypothesisObjective& objective,
                              const LaneHypothesis& init,
                              const OptimizerConfig& cfg,
                              const HypothesisBox& box, const ActiveSet& active,
                              double step_scale) {
  OptResult out = nelder_mead(objective, init, cfg, box, active, step_scale);
  if (!out.converged && cfg.restart) {
    std::mt19937_64 rng(cfg.restart_seed);
    Vec v = out.best.to_array();
    for (std::size_t i = 0; i < kDim; ++i) {
      const double jitter = cfg.restart_jitter * cfg.initial_steps[i] * uniform_pm1(rng);
      if (active.active[i]) v[i] += jitter;
    }
    append(out, nelder_mead(objective, LaneHypothesis::from_array(v), cfg, box, active,
                            step_scale));
  }
  for (int k = 0; k < cfg.polish_restarts; ++k) {
    const bool converged = out.converged;
    const double before = out.best_cost;
    append(out, nelder_mead(objective, out.best, cfg, box, active, step_scale));
    out.converged = out.converged || converged;
    if (!(out.best_cost < before)) break;
  }
  return out;
}

ProfileResult profile_slope(const FramePoints& frame, const LaneHypothesis& init,
                            const OptimizerConfig& cfg, const CostConfig& cost_cfg,
                            const HypothesisBox& box, const ActiveSet& active) {
  if (frame.empty()) throw InitializationError("cannot profile an empty frame");
  const auto step = static_cast<std::size_t>(cfg.profile_decimation);
  FramePoints sparse;
  sparse.camera_height = frame.camera_height;
  for (std::size_t i = 0; i < frame.road.size(); i += step) sparse.road.push_back(frame.road[i]);
  for (std::size_t i = 0; i < frame.lane.size(); i += step) sparse.lane.push_back(frame.lane[i]);

  CostEvaluator cost(sparse, cost_cfg);
  const HypothesisObjective objective = [&cost](const LaneHypothesis& h) { return cost(h); };
  OptimizerConfig inner = cfg;
  inner.max_iterations = cfg.profile_max_iterations;
  ActiveSet rest = active;
  rest.active[3] = false;

  std::vector<double> grid;
  if (!active.active[3] || cfg.profile_points == 1) {
    grid.push_back(active.active[3] ? 0.0 : init.b);
  } else {
    for (int k = 0; k < cfg.profile_points; ++k) {
      grid.push_back(-box.b + 2.0 * box.b * k / (cfg.profile_points - 1));
    }
  }

  ProfileResult out;
  bool first = true;
  for (double b : grid) {
    LaneHypothesis start = init;
    start.b = b;
    const OptResult r = nelder_mead(objective, start, inner, box, rest);
    out.iterations += r.iterations;
    out.evaluations += r.evaluations;
    if (first || r.best_cost < out.best_cost) {
      out.best = r.best;
      out.best_cost = r.best_cost;
      first = false;
    }
  }
  return out;
}

LaneHypothesis init_by_scan(const FramePoints& frame, const OptimizerConfig& cfg,
                            const CostConfig& cost_cfg, const HypothesisBox& box,
                            const ActiveSet& active) {
  if (frame.empty()) throw InitializationError("cannot initialise on an empty frame");
  CostEvaluator cost(frame, cost_cfg);
  const auto limits = box.limits();
  Vec best{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < kDim; ++i) {
    if (!active.active[i]) continue;
    double best_cost = cost_cfg.sentinel;
    double best_value = 0.0;
    bool found = false;
    for (int k = 0; k < cfg.scan_points; ++k) {
      Vec probe{0.0, 0.0, 0.0, 0.0};
      probe[i] = -limits[i] + 2.0 * limits[i] * k / (cfg.scan_points - 1);
      const double c = cost(LaneHypothesis::from_array(probe));
      if (c < best_cost) {
        best_cost = c;
        best_value = probe[i];
        found = true;
      }
    }
    if (!found) {
      throw InitializationError("every scan probe of variable " + std::to_string(i) +
                                " returned the sentinel cost");
    }
    best[i] = best_value;
  }
  return LaneHypothesis::from_array(best);
}

LaneHypothesis init_from_previous(const LaneSet& prev) {
  return {prev.central_offset, prev.shared.a1, prev.shared.a2, prev.slope.b};
}

}  // namespace lanefit
