// Windowed LaCAM: configuration-space search truncated at depth w, with lazy
// successor generation by PIBT and optional per-node local guidance. The
// same search context continues as LaCAM* (branch and bound on g + h) when
// asked to improve its plan.
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lllg/budget.hpp"
#include "lllg/grid_map.hpp"
#include "lllg/guidance.hpp"
#include "lllg/mapf_core.hpp"
#include "lllg/pibt.hpp"

namespace lllg {

struct WindowOptions {
  int w_pi = 10;
  bool use_hindrance = true;
  // Guidance parameters; only used when a root guidance is supplied.
  double alpha = 3.0;
};

enum class WindowStatus {
  kReachedWindow,  // a depth-w node was found
  kReachedGoal,    // goal configuration reached before depth w
  kTruncated,      // budget ran out; plan leads to the deepest node
  kNoSuccessor,    // budget ran out before any successor was generated
};

struct WindowedResult {
  Plan plan;
  bool reached_goal_config = false;
  WindowStatus status = WindowStatus::kNoSuccessor;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t configs_generated = 0;
  // g + h of the terminal node; nullopt when no terminal node exists yet.
  std::optional<std::int64_t> cost;
};

// cost(Q-, Q) = sum_i [Q[i] != Q-[i] or Q-[i] != g_i]: every agent pays one
// per step unless it stays parked on its goal.
inline std::int64_t transition_cost(const Configuration& from, const Configuration& to,
                                    const GoalSet& goals) {
  std::int64_t c = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (to[i] != from[i] || from[i] != goals[i]) ++c;
  }
  return c;
}

// h(Q) = sum_i dist(Q[i], g_i).
inline std::int64_t configuration_heuristic(const DistanceOracle& oracle, const Configuration& q,
                                            const GoalSet& goals) {
  std::int64_t h = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto d = oracle.dist(q[i], goals[i]);
    h += d == kUnreachable ? static_cast<std::int64_t>(kUnreachableCost) : d;
  }
  return h;
}

// g + h of a complete windowed plan, the objective LaCAM* minimises.
inline std::int64_t windowed_plan_cost(const DistanceOracle& oracle, const Plan& plan,
                                       const GoalSet& goals) {
  std::int64_t g = 0;
  for (std::size_t t = 1; t < plan.size(); ++t) g += transition_cost(plan[t - 1], plan[t], goals);
  return g + configuration_heuristic(oracle, plan.back(), goals);
}

class WindowSearch {
 public:
  // root_elapsed: per-agent steps since last task completion (priorities).
  // root_guidance: when present, PIBT is guided and every node carries a
  // time-shifted, repaired copy of its parent's guidance.
  WindowSearch(const GridMap& map, const DistanceOracle& oracle, Configuration q0, GoalSet goals,
               std::vector<int> root_elapsed, std::optional<GuidancePaths> root_guidance,
               WindowOptions options, Rng& rng, GuidanceBuilder* shared_builder = nullptr)
      : map_(&map),
        oracle_(&oracle),
        goals_(std::move(goals)),
        options_(options),
        rng_(&rng),
        pibt_(map, oracle),
        by_depth_(static_cast<std::size_t>(std::max(options.w_pi, 1)) + 1) {
    if (options_.w_pi < 1) throw std::invalid_argument("w_pi must be >= 1");
    if (q0.size() != goals_.size() || root_elapsed.size() != q0.size()) {
      throw std::invalid_argument("window search: agent count mismatch");
    }
    if (root_guidance) {
      if (root_guidance->num_agents() != q0.size()) {
        throw std::invalid_argument("window search: guidance agent count mismatch");
      }
      if (shared_builder != nullptr && shared_builder->window() == root_guidance->window() &&
          shared_builder->alpha() == options_.alpha) {
        builder_ = shared_builder;
      } else {
        own_builder_.emplace(map, oracle, options_.alpha, root_guidance->window());
        builder_ = &*own_builder_;
      }
      rows_at_start_ = builder_->rows_built();
    }
    auto& root = nodes_.emplace_back();
    root.config = std::move(q0);
    root.depth = 0;
    root.elapsed = std::move(root_elapsed);
    root.order = priority_order(root.elapsed);
    root.guidance = std::move(root_guidance);
    root.g = 0;
    root.h = configuration_heuristic(*oracle_, root.config, goals_);
    root.low.emplace_back();
    by_depth_[0].emplace(root.config, &root);
    deepest_ = &root;
    if (is_terminal(root)) {
      best_ = &root;
    } else {
      open_.push_back(&root);
    }
  }

  WindowSearch(const WindowSearch&) = delete;
  WindowSearch& operator=(const WindowSearch&) = delete;

  // Guidance rows repaired inside this search.
  std::uint64_t guidance_rows_built() const {
    return builder_ != nullptr ? builder_->rows_built() - rows_at_start_ : 0;
  }
  // True once the open list ran dry during improvement: the best plan is
  // optimal for the window.
  bool exhausted() const { return exhausted_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Satisficing search: returns the first depth-w (or goal) node found.
  WindowedResult solve(const Budget& budget) {
    std::uint64_t used = 0;
    while (best_ == nullptr && !open_.empty()) {
      if (budget.exhausted(used)) break;
      Node* node = open_.back();
      if (node->low.empty()) {
        release(*node);
        open_.pop_back();
        continue;
      }
      ++used;
      ++expanded_;
      expand_once(*node, /*prune=*/false);
    }
    return result();
  }

  // LaCAM*: keeps searching the same window, pruning nodes with
  // f = g + h >= best cost, and returns the best plan found so far.
  WindowedResult improve(const Budget& budget) {
    std::uint64_t used = 0;
    while (!open_.empty()) {
      if (budget.exhausted(used)) break;
      Node* node = open_.back();
      if (best_ != nullptr && node->g + node->h >= cost_of(*best_)) {
        open_.pop_back();
        continue;
      }
      if (node->low.empty()) {
        release(*node);
        open_.pop_back();
        continue;
      }
      ++used;
      ++expanded_;
      expand_once(*node, /*prune=*/true);
    }
    if (open_.empty()) exhausted_ = true;
    return result();
  }

 private:
  struct Node {
    Configuration config;
    Node* parent = nullptr;
    int depth = 0;
    std::vector<int> elapsed;
    std::vector<AgentId> order;
    std::optional<GuidancePaths> guidance;
    std::deque<std::vector<PositiveConstraint>> low;  // lazy constraint tree
    std::vector<Node*> successors;
    std::int64_t g = 0;
    std::int64_t h = 0;
  };

  bool is_terminal(const Node& n) const { return n.depth == options_.w_pi || n.h == 0; }
  static std::int64_t cost_of(const Node& n) { return n.g + n.h; }

  Pibt::Context context(const Node& node) const {
    return {&node.config, &goals_, node.guidance ? &*node.guidance : nullptr,
            options_.use_hindrance};
  }

  void release(Node& node) {
    node.guidance.reset();
    node.low.clear();
    node.low.shrink_to_fit();
  }

  void expand_once(Node& node, bool prune) {
    auto constraints = std::move(node.low.front());
    node.low.pop_front();
    const auto ctx = context(node);
    if (constraints.size() < node.config.size()) {
      const auto agent = node.order[constraints.size()];
      std::array<Vertex, Pibt::kMaxCandidates> cand;
      const auto count = pibt_.rank_candidates(ctx, agent, *rng_, cand);
      for (std::size_t k = 0; k < count; ++k) {
        auto child = constraints;
        child.push_back({agent, cand[k]});
        node.low.push_back(std::move(child));
      }
    }
    auto next = pibt_.plan_step(ctx, constraints, node.order, *rng_);
    if (!next) return;
    ++generated_;

    const auto depth = node.depth + 1;
    auto& layer = by_depth_[static_cast<std::size_t>(depth)];
    if (auto it = layer.find(*next); it != layer.end()) {
      Node* existing = it->second;
      link(node, *existing);
      if (!is_terminal(*existing)) open_.push_back(existing);
      return;
    }

    auto& child = nodes_.emplace_back();
    child.config = std::move(*next);
    child.parent = &node;
    child.depth = depth;
    child.g = node.g + transition_cost(node.config, child.config, goals_);
    child.h = configuration_heuristic(*oracle_, child.config, goals_);
    layer.emplace(child.config, &child);
    node.successors.push_back(&child);
    if (depth > deepest_->depth) deepest_ = &child;

    if (is_terminal(child)) {
      if (best_ == nullptr || cost_of(child) < cost_of(*best_)) best_ = &child;
      return;
    }
    child.elapsed.resize(child.config.size());
    for (std::size_t i = 0; i < child.config.size(); ++i) {
      child.elapsed[i] = child.config[i] == goals_[i] ? 0 : node.elapsed[i] + 1;
    }
    child.order = priority_order(child.elapsed);
    if (node.guidance) {
      child.guidance = shift_guidance(*node.guidance);
      builder_->repair(*child.guidance, child.config, goals_);
    }
    child.low.emplace_back();
    // A pruned child stays in the layer; link() re-opens it if a cheaper
    // parent shows up later.
    if (prune && best_ != nullptr && cost_of(child) >= cost_of(*best_)) return;
    open_.push_back(&child);
  }

  // Records the edge from -> to and propagates any g improvement downward.
  void link(Node& from, Node& to) {
    if (std::find(from.successors.begin(), from.successors.end(), &to) == from.successors.end()) {
      from.successors.push_back(&to);
    }
    std::vector<std::pair<Node*, Node*>> stack{{&from, &to}};
    while (!stack.empty()) {
      auto [p, c] = stack.back();
      stack.pop_back();
      const auto g = p->g + transition_cost(p->config, c->config, goals_);
      if (g >= c->g) continue;
      c->g = g;
      c->parent = p;
      if (is_terminal(*c)) {
        if (best_ == nullptr || cost_of(*c) < cost_of(*best_)) best_ = c;
        continue;
      }
      if (!c->low.empty() || !c->successors.empty()) open_.push_back(c);
      for (auto* s : c->successors) stack.emplace_back(c, s);
    }
  }

  WindowedResult result() const {
    WindowedResult r;
    r.nodes_expanded = expanded_;
    r.configs_generated = generated_;
    const Node* tail = best_ != nullptr ? best_ : deepest_;
    for (auto* n = tail; n != nullptr; n = n->parent) r.plan.push_back(n->config);
    std::reverse(r.plan.begin(), r.plan.end());
    if (best_ != nullptr) {
      r.cost = cost_of(*best_);
      r.reached_goal_config = best_->h == 0;
      r.status = best_->depth == options_.w_pi ? WindowStatus::kReachedWindow
                                               : WindowStatus::kReachedGoal;
    } else {
      r.status = r.plan.size() > 1 ? WindowStatus::kTruncated : WindowStatus::kNoSuccessor;
    }
    return r;
  }

  const GridMap* map_;
  const DistanceOracle* oracle_;
  GoalSet goals_;
  WindowOptions options_;
  Rng* rng_;
  Pibt pibt_;
  std::optional<GuidanceBuilder> own_builder_;
  GuidanceBuilder* builder_ = nullptr;
  std::uint64_t rows_at_start_ = 0;
  std::deque<Node> nodes_;
  std::vector<std::unordered_map<Configuration, Node*, ConfigurationHash>> by_depth_;
  std::vector<Node*> open_;
  Node* best_ = nullptr;
  Node* deepest_ = nullptr;
  std::uint64_t expanded_ = 0;
  std::uint64_t generated_ = 0;
  bool exhausted_ = false;
};

inline WindowedResult plan_window(const GridMap& map, const DistanceOracle& oracle,
                                  const Configuration& q0, const GoalSet& goals,
                                  std::optional<GuidancePaths> root_guidance,
                                  const WindowOptions& options, const Budget& budget, Rng& rng,
                                  std::vector<int> root_elapsed = {}) {
  if (root_elapsed.empty()) root_elapsed.assign(q0.size(), 0);
  WindowSearch search(map, oracle, q0, goals, std::move(root_elapsed), std::move(root_guidance),
                      options, rng);
  return search.solve(budget);
}

}  // namespace lllg
