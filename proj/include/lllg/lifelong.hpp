// Receding-horizon lifelong loop: update goals, warm-start guidance, plan a
// window, optionally refine it, execute its first step, repeat.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lllg/budget.hpp"
#include "lllg/grid_map.hpp"
#include "lllg/guidance.hpp"
#include "lllg/lacam.hpp"
#include "lllg/lns.hpp"
#include "lllg/mapf_core.hpp"
#include "lllg/pibt.hpp"

namespace lllg {

enum class Solver { kPibt, kLacam, kLllg };
enum class Refiner { kNone, kLacamStar, kLns };

// Uniform goals over every passable vertex, reproducible per seed.
class TaskGenerator {
 public:
  TaskGenerator(const GridMap& map, std::uint64_t seed)
      : rng_(seed), pick_(0, static_cast<Vertex>(map.num_vertices()) - 1) {
    if (map.num_vertices() == 0) throw std::invalid_argument("map has no passable cells");
  }

  // May return `current`; such a task completes at the next executed step
  // the agent is still there.
  Vertex sample(Vertex /*current*/) { return pick_(rng_); }

 private:
  Rng rng_;
  std::uniform_int_distribution<Vertex> pick_;
};

struct EpisodeConfig {
  const GridMap* map = nullptr;
  const DistanceOracle* oracle = nullptr;
  Configuration start;
  int total_steps = 500;
  Solver solver = Solver::kLllg;
  WarmStart scheme = WarmStart::kPi;
  Refiner refiner = Refiner::kNone;
  int w_phi = 20;
  int w_pi = 10;
  int m = 2;
  double alpha = 3.0;
  bool hindrance = true;
  int k_lns = 8;
  // Per-step budget; at least one should be set for refiners.
  std::optional<double> budget_seconds = 10.0;
  std::optional<std::uint64_t> budget_expansions;
  std::uint64_t task_seed = 0;
  std::uint64_t planner_seed = 0;
  bool record_trace = true;

  void validate() const {
    if (map == nullptr || oracle == nullptr) throw std::invalid_argument("episode needs a map");
    if (start.empty()) throw std::invalid_argument("episode needs at least one agent");
    if (!is_vertex_disjoint(*map, start)) {
      throw std::invalid_argument("initial configuration is not vertex-disjoint");
    }
    if (total_steps < 0) throw std::invalid_argument("steps must be non-negative");
    if (w_phi < 1 || w_pi < 1) throw std::invalid_argument("window sizes must be >= 1");
    if (m < 0) throw std::invalid_argument("m must be >= 0");
    if (alpha < 0) throw std::invalid_argument("alpha must be non-negative");
    if (refiner != Refiner::kNone && solver == Solver::kPibt) {
      throw std::invalid_argument("refiners need a windowed solver (lacam or lllg)");
    }
    if (refiner == Refiner::kLns && (k_lns < 1)) throw std::invalid_argument("k_lns must be >= 1");
    if (refiner != Refiner::kNone && !budget_seconds && !budget_expansions) {
      throw std::invalid_argument("refiners need a per-step budget");
    }
  }
};

struct EpisodeResult {
  EpisodeMetrics metrics;
  Plan trace;  // executed configurations, trace[0] = start
  std::uint64_t fallbacks = 0;
  std::uint64_t guidance_rows_built = 0;
  GoalSet final_goals;
};

class LifelongRunner {
 public:
  explicit LifelongRunner(EpisodeConfig cfg)
      : cfg_(std::move(cfg)),
        tasks_((cfg_.validate(), *cfg_.map), cfg_.task_seed),
        rng_(cfg_.planner_seed),
        pibt_(*cfg_.map, *cfg_.oracle) {
    const auto n = cfg_.start.size();
    q_ = cfg_.start;
    goals_.resize(n);
    for (std::size_t i = 0; i < n; ++i) goals_[i] = tasks_.sample(q_[i]);
    elapsed_.assign(n, 0);
    completed_.assign(n, 0);
    result_.metrics = EpisodeMetrics(cfg_.map->num_vertices());
    if (cfg_.record_trace) result_.trace.push_back(q_);
    if (cfg_.solver == Solver::kLllg) builder_.emplace(*cfg_.map, *cfg_.oracle, cfg_.alpha, cfg_.w_phi);
  }

  const Configuration& configuration() const { return q_; }
  const GoalSet& goals() const { return goals_; }
  // Root guidance and plan of the last step (empty before the first step).
  const GuidancePaths& last_guidance() const { return prev_phi_; }
  const Plan& last_plan() const { return prev_plan_; }
  const EpisodeResult& result() const { return result_; }

  // Goal update happens before planning; returns the executed configuration.
  const Configuration& step() {
    const auto n = q_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (completed_[i]) {
        goals_[i] = tasks_.sample(q_[i]);
        completed_[i] = 0;
      }
    }

    const auto started = Clock::now();
    Budget budget;
    budget.max_expansions = cfg_.budget_expansions;
    if (cfg_.budget_seconds) {
      budget.deadline = started + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(*cfg_.budget_seconds));
    }

    Plan plan = plan_step(budget);
    const double runtime = seconds_since(started);

    Configuration next;
    if (plan.size() >= 2) {
      next = plan[1];
    } else if (!plan.empty() && reached_goal_) {
      next = q_;
    } else {
      ++result_.fallbacks;
      const auto order = priority_order(elapsed_);
      auto fallback = pibt_.plan_step({&q_, &goals_, nullptr, cfg_.hindrance}, {}, order, rng_);
      if (!fallback) throw std::logic_error("fallback PIBT failed without constraints");
      next = std::move(*fallback);
      plan = {q_, next};
    }
    if (!is_valid_transition(*cfg_.map, q_, next)) {
      throw std::logic_error("planner produced an invalid transition at step " +
                             std::to_string(result_.metrics.executed_steps + 1));
    }

    accumulate_metrics(result_.metrics, q_, next, goals_, runtime);
    for (std::size_t i = 0; i < n; ++i) {
      if (next[i] == goals_[i]) {
        completed_[i] = 1;
        elapsed_[i] = 0;
      } else {
        ++elapsed_[i];
      }
    }
    prev_plan_ = std::move(plan);
    q_ = std::move(next);
    if (cfg_.record_trace) result_.trace.push_back(q_);
    return q_;
  }

  EpisodeResult run() {
    for (int t = 0; t < cfg_.total_steps; ++t) step();
    result_.final_goals = goals_;
    return result_;
  }

 private:
  Plan plan_step(const Budget& budget) {
    reached_goal_ = false;
    if (cfg_.solver == Solver::kPibt) {
      const auto order = priority_order(elapsed_);
      auto next = pibt_.plan_step({&q_, &goals_, nullptr, cfg_.hindrance}, {}, order, rng_);
      if (!next) return {q_};
      return {q_, std::move(*next)};
    }

    std::optional<GuidancePaths> root;
    if (cfg_.solver == Solver::kLllg) {
      const bool have_prev = !prev_plan_.empty();
      auto scheme = have_prev ? cfg_.scheme : WarmStart::kEmpty;
      if (scheme == WarmStart::kPhi && prev_phi_.empty()) scheme = WarmStart::kEmpty;
      root = warm_start(scheme, &prev_phi_, &prev_plan_, q_, cfg_.w_phi);
      const auto before = builder_->rows_built();
      if (cfg_.m > 0) {
        builder_->refine(*root, q_, goals_, cfg_.m);
      } else {
        builder_->refresh_exhausted(*root, q_, goals_);
      }
      result_.guidance_rows_built += builder_->rows_built() - before;
      prev_phi_ = *root;
    }

    WindowOptions options;
    options.w_pi = cfg_.w_pi;
    options.use_hindrance = cfg_.hindrance;
    options.alpha = cfg_.alpha;
    WindowSearch search(*cfg_.map, *cfg_.oracle, q_, goals_, elapsed_, std::move(root), options,
                        rng_, builder_ ? &*builder_ : nullptr);
    auto window = search.solve(budget);

    Budget rest = budget;
    if (cfg_.refiner == Refiner::kLacamStar && window.status != WindowStatus::kNoSuccessor) {
      window = search.improve(rest);
    }
    result_.guidance_rows_built += search.guidance_rows_built();

    if (cfg_.refiner == Refiner::kLns && window.plan.size() >= 2) {
      const int k = std::min<int>(cfg_.k_lns, static_cast<int>(q_.size()));
      window.plan = refine_lns(*cfg_.map, *cfg_.oracle, window.plan, goals_, k, rest, rng_);
    }
    reached_goal_ = window.reached_goal_config;
    return std::move(window.plan);
  }

  EpisodeConfig cfg_;
  TaskGenerator tasks_;
  Rng rng_;
  Pibt pibt_;
  std::optional<GuidanceBuilder> builder_;
  Configuration q_;
  GoalSet goals_;
  std::vector<int> elapsed_;
  std::vector<std::uint8_t> completed_;
  GuidancePaths prev_phi_;
  Plan prev_plan_;
  bool reached_goal_ = false;
  EpisodeResult result_;
};

inline EpisodeResult run_episode(const EpisodeConfig& cfg) {
  LifelongRunner runner(cfg);
  return runner.run();
}

}  // namespace lllg
