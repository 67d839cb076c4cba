// Local guidance: short collision-aware path fragments per agent, found by
// space-time A* under the lexicographic cost
//   <dist(pi[w], g), 0> + sum_t <1 + alpha * [chi_t > 0], chi_t>,
// where chi_t counts collisions of step t with the other stored rows.
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "lllg/grid_map.hpp"
#include "lllg/guidance_paths.hpp"
#include "lllg/mapf_core.hpp"

namespace lllg {

// Terminal-distance cost used for goals outside the start's component.
inline constexpr double kUnreachableCost = 1e9;

inline double distance_cost(Distance d) {
  return d == kUnreachable ? kUnreachableCost : static_cast<double>(d);
}

struct LexCost {
  double primary = 0.0;
  std::int64_t secondary = 0;

  friend auto operator<=>(const LexCost&, const LexCost&) = default;
  LexCost& operator+=(const LexCost& o) {
    primary += o.primary;
    secondary += o.secondary;
    return *this;
  }
  friend LexCost operator+(LexCost a, const LexCost& b) { return a += b; }
};

inline LexCost step_cost(int collisions, double alpha) {
  return {1.0 + (collisions > 0 ? alpha : 0.0), collisions};
}

// chi for agent i's step t (from -> to) against every other present row:
// vertex collisions at t+1 plus swap collisions on the edge.
inline int transition_collisions(const GuidancePaths& phi, AgentId i, int t, Vertex from,
                                 Vertex to) {
  int count = 0;
  for (std::size_t jj = 0; jj < phi.num_agents(); ++jj) {
    const auto j = static_cast<AgentId>(jj);
    if (j == i || !phi.present(j)) continue;
    const auto a = phi.at(j, t);
    const auto b = phi.at(j, t + 1);
    if (b == to) {
      ++count;
    } else if (from != to && a == to && b == from) {
      ++count;
    }
  }
  return count;
}

// LexCost of a full row for agent i evaluated against phi's other rows.
inline LexCost path_cost(const DistanceOracle& oracle, const GuidancePaths& phi, AgentId i,
                         std::span<const Vertex> path, Vertex goal, double alpha) {
  LexCost c{distance_cost(oracle.dist(path.back(), goal)), 0};
  for (std::size_t t = 0; t + 1 < path.size(); ++t) {
    c += step_cost(transition_collisions(phi, i, static_cast<int>(t), path[t], path[t + 1]),
                   alpha);
  }
  return c;
}

// Space-time occupancy counts of the present rows of a GuidancePaths.
class GuidanceTable {
 public:
  GuidanceTable(const GridMap& map, int window) : map_(&map) { reset_window(window); }

  int window() const { return window_; }

  void reset_window(int window) {
    window_ = window;
    const auto nv = map_->num_vertices();
    vertex_.assign(static_cast<std::size_t>(window + 1) * nv, 0);
    edge_.assign(static_cast<std::size_t>(window) * nv * 5, 0);
    touched_vertex_.clear();
    touched_edge_.clear();
  }

  void clear() {
    for (auto idx : touched_vertex_) vertex_[idx] = 0;
    for (auto idx : touched_edge_) edge_[idx] = 0;
    touched_vertex_.clear();
    touched_edge_.clear();
  }

  void build(const GuidancePaths& phi) {
    if (phi.window() != window_) reset_window(phi.window());
    clear();
    for (std::size_t i = 0; i < phi.num_agents(); ++i) add(phi, static_cast<AgentId>(i));
  }

  void add(const GuidancePaths& phi, AgentId i) { update(phi, i, +1); }
  void remove(const GuidancePaths& phi, AgentId i) { update(phi, i, -1); }

  // Collisions of a step (t: from -> to) with all rows in the table.
  int collisions(int t, Vertex from, Vertex to) const {
    const auto nv = map_->num_vertices();
    int c = vertex_[static_cast<std::size_t>(t + 1) * nv + to];
    if (from != to) {
      const auto slot = map_->move_slot(to, from);
      c += edge_[(static_cast<std::size_t>(t) * nv + to) * 5 + slot];
    }
    return c;
  }

 private:
  void update(const GuidancePaths& phi, AgentId i, int delta) {
    if (!phi.present(i)) return;
    const auto nv = map_->num_vertices();
    const auto row = phi.row(i);
    for (int t = 0; t <= window_; ++t) {
      const auto idx = static_cast<std::size_t>(t) * nv + row[t];
      vertex_[idx] += delta;
      if (delta > 0) touched_vertex_.push_back(idx);
    }
    for (int t = 0; t < window_; ++t) {
      const auto slot = map_->move_slot(row[t], row[t + 1]);
      if (slot < 0) throw std::logic_error("guidance row contains an illegal move");
      const auto idx = (static_cast<std::size_t>(t) * nv + row[t]) * 5 + slot;
      edge_[idx] += delta;
      if (delta > 0) touched_edge_.push_back(idx);
    }
  }

  const GridMap* map_;
  int window_ = 0;
  std::vector<std::int32_t> vertex_;  // [t][v]
  std::vector<std::int32_t> edge_;    // [t][from][slot]
  std::vector<std::size_t> touched_vertex_;
  std::vector<std::size_t> touched_edge_;
};

struct GuidancePath {
  std::vector<Vertex> path;
  LexCost cost;
};

// Exact space-time A* over (v, t), t in [0, window]. Heuristic
// h(v, t) = max(window - t, dist(v, g)) is consistent for the primary
// component; ties in f go to larger t, then smaller goal distance (otherwise
// equal-cost detours win whenever the window outlasts the distance), then
// smaller vertex id.
class GuidancePlanner {
 public:
  GuidancePlanner(const GridMap& map, const DistanceOracle& oracle)
      : map_(&map), oracle_(&oracle) {}

  std::size_t expansions() const { return expansions_; }

  GuidancePath best_path(Vertex start, Vertex goal, const GuidanceTable& table, double alpha,
                         int window) {
    if (window < 1) throw std::invalid_argument("guidance window must be >= 1");
    if (alpha < 0) throw std::invalid_argument("alpha must be non-negative");
    const auto nv = map_->num_vertices();
    const auto states = static_cast<std::size_t>(window + 1) * nv;
    if (stamp_.size() < states) {
      stamp_.assign(states, 0);
      g_.resize(states);
      parent_.resize(states);
      closed_.assign(states, 0);
      generation_ = 0;
    }
    if (++generation_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      std::fill(closed_.begin(), closed_.end(), 0);
      generation_ = 1;
    }
    const auto dist = oracle_->table(goal);
    auto h = [&](Vertex v, int t) {
      return std::max(static_cast<double>(window - t), distance_cost(dist[v]));
    };

    open_ = {};
    const auto root = static_cast<std::size_t>(start);
    stamp_[root] = generation_;
    g_[root] = {};
    parent_[root] = -1;
    open_.push({{h(start, 0), 0}, 0, dist[start], start});

    while (!open_.empty()) {
      const auto top = open_.top();
      open_.pop();
      const auto idx = static_cast<std::size_t>(top.t) * nv + top.v;
      if (closed_[idx] == generation_) continue;
      closed_[idx] = generation_;
      ++expansions_;
      if (top.t == window) return reconstruct(idx, window, nv, top.f);

      const auto expand = [&](Vertex u) {
        const auto nidx = static_cast<std::size_t>(top.t + 1) * nv + u;
        if (stamp_[nidx] == generation_ && closed_[nidx] == generation_) return;
        const auto ng = g_[idx] + step_cost(table.collisions(top.t, top.v, u), alpha);
        if (stamp_[nidx] == generation_ && !(ng < g_[nidx])) return;
        stamp_[nidx] = generation_;
        g_[nidx] = ng;
        parent_[nidx] = static_cast<std::int64_t>(idx);
        open_.push({ng + LexCost{h(u, top.t + 1), 0}, top.t + 1, dist[u], u});
      };
      for (auto u : map_->unchecked_neighbors(top.v)) expand(u);
      expand(top.v);
    }
    throw std::logic_error("guidance search exhausted without reaching the window end");
  }

 private:
  struct Entry {
    LexCost f;
    int t;
    Distance d;
    Vertex v;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return b.f < a.f;
      if (a.t != b.t) return a.t < b.t;
      if (a.d != b.d) return a.d > b.d;
      return a.v > b.v;
    }
  };

  GuidancePath reconstruct(std::size_t idx, int window, std::size_t nv, LexCost f) {
    GuidancePath out;
    out.path.resize(static_cast<std::size_t>(window) + 1);
    auto cur = static_cast<std::int64_t>(idx);
    for (int t = window; t >= 0; --t) {
      out.path[t] = static_cast<Vertex>(static_cast<std::size_t>(cur) % nv);
      cur = parent_[cur];
    }
    out.cost = f;
    return out;
  }

  const GridMap* map_;
  const DistanceOracle* oracle_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> closed_;
  std::vector<LexCost> g_;
  std::vector<std::int64_t> parent_;
  std::uint32_t generation_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Worse> open_;
  std::size_t expansions_ = 0;
};

// Reusable workspace for building and repairing guidance for one planning
// context (single-threaded).
class GuidanceBuilder {
 public:
  GuidanceBuilder(const GridMap& map, const DistanceOracle& oracle, double alpha, int window)
      : map_(&map), oracle_(&oracle), alpha_(alpha), window_(window),
        table_(map, window), planner_(map, oracle) {
    if (window < 1) throw std::invalid_argument("guidance window must be >= 1");
    if (alpha < 0) throw std::invalid_argument("alpha must be non-negative");
  }

  double alpha() const { return alpha_; }
  int window() const { return window_; }
  // Number of single-agent guidance searches run so far.
  std::uint64_t rows_built() const { return rows_built_; }

  // m rounds of sequential per-agent replanning, ascending agent index.
  void refine(GuidancePaths& phi, const Configuration& q, const GoalSet& goals, int rounds) {
    check(phi, q, goals);
    if (rounds <= 0) return;
    table_.build(phi);
    for (int r = 0; r < rounds; ++r) {
      for (std::size_t i = 0; i < q.size(); ++i) replan(phi, static_cast<AgentId>(i), q, goals);
    }
  }

  // Rebuilds rows that have run out: all-wait padding on a non-goal vertex.
  void refresh_exhausted(GuidancePaths& phi, const Configuration& q, const GoalSet& goals) {
    check(phi, q, goals);
    table_.build(phi);
    for (std::size_t ii = 0; ii < q.size(); ++ii) {
      const auto i = static_cast<AgentId>(ii);
      if (phi.is_all_wait(i) && phi.at(i, 0) != goals[i]) replan(phi, i, q, goals);
    }
  }

  // One repair pass after a time shift: rows that no longer start at the
  // agent's vertex, or have run out away from the goal, are replanned.
  void repair(GuidancePaths& phi, const Configuration& q, const GoalSet& goals) {
    check(phi, q, goals);
    repair_list_.clear();
    for (std::size_t ii = 0; ii < q.size(); ++ii) {
      const auto i = static_cast<AgentId>(ii);
      if (phi.at(i, 0) != q[i]) {
        phi.set_wait(i, q[i], false);
        repair_list_.push_back(i);
      } else if (phi.is_all_wait(i) && q[i] != goals[i]) {
        repair_list_.push_back(i);
      }
    }
    if (repair_list_.empty()) return;
    table_.build(phi);
    for (auto i : repair_list_) replan(phi, i, q, goals);
  }

  GuidancePath best_path(AgentId i, Vertex start, Vertex goal, const GuidancePaths& phi) {
    table_.build(phi);
    table_.remove(phi, i);
    ++rows_built_;
    return planner_.best_path(start, goal, table_, alpha_, window_);
  }

 private:
  void check(const GuidancePaths& phi, const Configuration& q, const GoalSet& goals) const {
    if (phi.num_agents() != q.size() || goals.size() != q.size()) {
      throw std::invalid_argument("guidance: agent count mismatch");
    }
    if (phi.window() != window_) throw std::invalid_argument("guidance: window mismatch");
  }

  void replan(GuidancePaths& phi, AgentId i, const Configuration& q, const GoalSet& goals) {
    table_.remove(phi, i);
    auto best = planner_.best_path(q[i], goals[i], table_, alpha_, window_);
    ++rows_built_;
    phi.set_row(i, best.path, true);
    table_.add(phi, i);
  }

  const GridMap* map_;
  const DistanceOracle* oracle_;
  double alpha_;
  int window_;
  GuidanceTable table_;
  GuidancePlanner planner_;
  std::vector<AgentId> repair_list_;
  std::uint64_t rows_built_ = 0;
};

// Minimum-LexCost guidance row for agent i against the other rows of phi.
inline GuidancePath best_guidance_path(const GridMap& map, const DistanceOracle& oracle,
                                       AgentId i, Vertex start, Vertex goal,
                                       const GuidancePaths& phi, double alpha, int window) {
  GuidanceTable table(map, window);
  if (!phi.empty()) {
    if (phi.window() != window) throw std::invalid_argument("guidance: window mismatch");
    for (std::size_t j = 0; j < phi.num_agents(); ++j) {
      if (static_cast<AgentId>(j) != i) table.add(phi, static_cast<AgentId>(j));
    }
  }
  GuidancePlanner planner(map, oracle);
  return planner.best_path(start, goal, table, alpha, window);
}

inline GuidancePaths refine_guidance(const GridMap& map, const DistanceOracle& oracle,
                                     const Configuration& q, const GoalSet& goals,
                                     GuidancePaths phi, double alpha, int window, int rounds) {
  GuidanceBuilder builder(map, oracle, alpha, window);
  builder.refine(phi, q, goals, rounds);
  return phi;
}

// Drops the first vertex of each row and repeats the last one.
inline GuidancePaths shift_guidance(GuidancePaths phi) {
  for (std::size_t ii = 0; ii < phi.num_agents(); ++ii) {
    auto row = phi.row(static_cast<AgentId>(ii));
    std::rotate(row.begin(), row.begin() + 1, row.end());
    row.back() = row[row.size() - 2];
  }
  return phi;
}

enum class WarmStart { kEmpty, kPhi, kPi };

// Initial guidance for the root of a timestep.
//   kEmpty: all-wait placeholders (absent).
//   kPhi:   previous root guidance shifted by one step.
//   kPi:    previous windowed plan without its executed first step, padded
//           with its terminal vertex.
// Rows that do not start at the agent's current vertex become placeholders.
inline GuidancePaths warm_start(WarmStart scheme, const GuidancePaths* prev_phi,
                                const Plan* prev_plan, const Configuration& q, int w_phi) {
  if (w_phi < 1) throw std::invalid_argument("guidance window must be >= 1");
  GuidancePaths phi;
  switch (scheme) {
    case WarmStart::kEmpty:
      return GuidancePaths::waiting_at(q, w_phi);
    case WarmStart::kPhi:
      if (prev_phi == nullptr || prev_phi->empty()) {
        throw std::invalid_argument("warm start PHI requires previous guidance");
      }
      if (prev_phi->num_agents() != q.size() || prev_phi->window() != w_phi) {
        throw std::invalid_argument("warm start PHI: previous guidance has wrong shape");
      }
      phi = shift_guidance(*prev_phi);
      break;
    case WarmStart::kPi: {
      if (prev_plan == nullptr || prev_plan->empty()) {
        throw std::invalid_argument("warm start PI requires a previous plan");
      }
      const auto& plan = *prev_plan;
      if (plan.front().size() != q.size()) {
        throw std::invalid_argument("warm start PI: previous plan has wrong agent count");
      }
      phi = GuidancePaths(q.size(), w_phi);
      const auto last_step = std::min<std::size_t>(plan.size() - 1, static_cast<std::size_t>(w_phi) + 1);
      for (std::size_t ii = 0; ii < q.size(); ++ii) {
        auto row = phi.row(static_cast<AgentId>(ii));
        std::size_t k = 0;
        for (std::size_t s = std::min<std::size_t>(1, last_step); s <= last_step; ++s) {
          row[k++] = plan[s][ii];
        }
        for (; k < row.size(); ++k) row[k] = row[k - 1];
        phi.set_present(static_cast<AgentId>(ii), true);
      }
      break;
    }
  }
  for (std::size_t ii = 0; ii < q.size(); ++ii) {
    const auto i = static_cast<AgentId>(ii);
    if (phi.at(i, 0) != q[i]) phi.set_wait(i, q[i], false);
  }
  return phi;
}

}  // namespace lllg
