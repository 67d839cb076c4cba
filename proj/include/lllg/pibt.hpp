// PIBT: one-step configuration generator with priority inheritance and
// backtracking. Candidate moves are ranked by the lexicographic key
// <guidance mismatch, goal distance, hindrance, random tiebreak>.
#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "lllg/budget.hpp"
#include "lllg/grid_map.hpp"
#include "lllg/guidance_paths.hpp"
#include "lllg/mapf_core.hpp"

namespace lllg {

struct PreferenceKey {
  int guidance_mismatch = 0;
  Distance goal_distance = 0;
  int hindrance = 0;
  float epsilon = 0.0f;

  friend auto operator<=>(const PreferenceKey&, const PreferenceKey&) = default;
};

struct PositiveConstraint {
  AgentId agent;
  Vertex vertex;
  friend bool operator==(const PositiveConstraint&, const PositiveConstraint&) = default;
};

// Number of agents j != i standing next to u whose shortest-path progress
// runs through u, i.e. dist(u, g_j) < dist(Q[j], g_j).
inline int hindrance(const GridMap& map, const DistanceOracle& oracle, Vertex u, AgentId i,
                     const Configuration& q, const GoalSet& goals) {
  int count = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (static_cast<AgentId>(j) == i || !map.adjacent(u, q[j])) continue;
    const auto table = oracle.table(goals[j]);
    if (table[u] < table[q[j]]) ++count;
  }
  return count;
}

// Agents sorted by (elapsed steps since last completion, index), descending.
inline std::vector<AgentId> priority_order(std::span<const int> elapsed) {
  std::vector<AgentId> order(elapsed.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<AgentId>(i);
  std::sort(order.begin(), order.end(), [&](AgentId a, AgentId b) {
    return std::tie(elapsed[a], a) > std::tie(elapsed[b], b);
  });
  return order;
}

class Pibt {
 public:
  static constexpr std::size_t kMaxCandidates = 5;

  Pibt(const GridMap& map, const DistanceOracle& oracle)
      : map_(&map),
        oracle_(&oracle),
        occupied_now_(map.num_vertices(), -1),
        occupied_next_(map.num_vertices(), -1) {}

  struct Context {
    const Configuration* q = nullptr;
    const GoalSet* goals = nullptr;
    const GuidancePaths* guidance = nullptr;  // nullptr: no guidance term
    bool use_hindrance = false;
  };

  // Candidates of agent i (neighbors plus wait) in preference order. Writes
  // into `out` and returns the count. Draws one epsilon per candidate.
  std::size_t rank_candidates(const Context& ctx, AgentId i, Rng& rng,
                              std::array<Vertex, kMaxCandidates>& out) {
    const auto from = (*ctx.q)[i];
    const auto nbs = map_->unchecked_neighbors(from);
    std::array<std::pair<PreferenceKey, Vertex>, kMaxCandidates> ranked;
    std::size_t count = 0;
    const auto goal_table = oracle_->table((*ctx.goals)[i]);
    const bool guided = ctx.guidance != nullptr && !ctx.guidance->empty() &&
                        ctx.guidance->present(i);
    auto add = [&](Vertex u) {
      PreferenceKey key;
      if (guided) key.guidance_mismatch = ctx.guidance->at(i, 1) != u ? 1 : 0;
      key.goal_distance = goal_table[u];
      if (ctx.use_hindrance) key.hindrance = local_hindrance(ctx, u, i);
      key.epsilon = epsilon_(rng);
      ranked[count++] = {key, u};
    };
    for (auto u : nbs) add(u);
    add(from);
    std::sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < count; ++k) out[k] = ranked[k].second;
    return count;
  }

  // One collision-free step. Constrained agents are placed first, in the
  // given order; the rest follow `order` (highest priority first). Returns
  // nullopt when the constraints cannot be satisfied jointly.
  std::optional<Configuration> plan_step(const Context& ctx,
                                         std::span<const PositiveConstraint> constraints,
                                         std::span<const AgentId> order, Rng& rng) {
    const auto& q = *ctx.q;
    const auto n = q.size();
    if (ctx.goals->size() != n || order.size() != n) {
      throw std::invalid_argument("plan_step: length mismatch");
    }
    ctx_ = ctx;
    rng_ = &rng;
    next_.assign(n, kNoVertex);
    for (std::size_t i = 0; i < n; ++i) occupied_now_[q[i]] = static_cast<AgentId>(i);

    bool ok = true;
    for (const auto& c : constraints) {
      const auto a = c.agent;
      if (a < 0 || static_cast<std::size_t>(a) >= n || next_[a] != kNoVertex) {
        cleanup();
        throw std::invalid_argument("plan_step: inconsistent constraint set");
      }
      if (!map_->valid(c.vertex) || map_->move_slot(q[a], c.vertex) < 0 ||
          occupied_next_[c.vertex] != -1) {
        ok = false;
        break;
      }
      const auto k = occupied_now_[c.vertex];
      if (k != -1 && next_[k] == q[a]) {
        ok = false;
        break;
      }
      next_[a] = c.vertex;
      occupied_next_[c.vertex] = a;
    }
    if (ok) {
      for (auto i : order) {
        if (next_[i] == kNoVertex && !assign(i)) {
          ok = false;
          break;
        }
      }
    }
    std::optional<Configuration> result;
    if (ok) result = next_;
    cleanup();
    return result;
  }

 private:
  int local_hindrance(const Context& ctx, Vertex u, AgentId i) const {
    int count = 0;
    for (auto w : map_->unchecked_neighbors(u)) {
      const auto j = occupied_now_[w];
      if (j == -1 || j == i) continue;
      const auto table = oracle_->table((*ctx.goals)[j]);
      if (table[u] < table[w]) ++count;
    }
    return count;
  }

  bool assign(AgentId i) {
    const auto& q = *ctx_.q;
    std::array<Vertex, kMaxCandidates> cand;
    const auto count = rank_candidates(ctx_, i, *rng_, cand);
    for (std::size_t k = 0; k < count; ++k) {
      const auto u = cand[k];
      if (occupied_next_[u] != -1) continue;
      const auto other = occupied_now_[u];
      if (other != -1 && next_[other] == q[i]) continue;
      occupied_next_[u] = i;
      next_[i] = u;
      if (other == -1 || other == i) return true;
      if (next_[other] == kNoVertex && !assign(other)) continue;
      return true;
    }
    occupied_next_[q[i]] = i;
    next_[i] = q[i];
    return false;
  }

  void cleanup() {
    const auto& q = *ctx_.q;
    for (std::size_t i = 0; i < q.size(); ++i) {
      occupied_now_[q[i]] = -1;
      if (next_[i] != kNoVertex) occupied_next_[next_[i]] = -1;
    }
    // Stale reservations left by failed inheritance always sit on some
    // agent's current vertex.
    for (std::size_t i = 0; i < q.size(); ++i) occupied_next_[q[i]] = -1;
  }

  const GridMap* map_;
  const DistanceOracle* oracle_;
  std::vector<AgentId> occupied_now_;
  std::vector<AgentId> occupied_next_;
  Configuration next_;
  Context ctx_;
  Rng* rng_ = nullptr;
  std::uniform_real_distribution<float> epsilon_{0.0f, 1.0f};
};

// Convenience wrapper: builds the priority order from per-agent elapsed
// counters and runs a fresh PIBT workspace.
inline std::optional<Configuration> plan_step(const GridMap& map, const DistanceOracle& oracle,
                                              const Configuration& q, const GoalSet& goals,
                                              const GuidancePaths* guidance,
                                              std::span<const PositiveConstraint> constraints,
                                              std::span<const int> elapsed, Rng& rng,
                                              bool use_hindrance) {
  if (elapsed.size() != q.size()) throw std::invalid_argument("plan_step: length mismatch");
  Pibt pibt(map, oracle);
  const auto order = priority_order(elapsed);
  return pibt.plan_step({&q, &goals, guidance, use_hindrance}, constraints, order, rng);
}

}  // namespace lllg
