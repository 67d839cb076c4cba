// Large neighborhood search over a windowed plan: destroy k agents' paths and
// replan them one by one against the rest, frozen in space-time.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "lllg/budget.hpp"
#include "lllg/grid_map.hpp"
#include "lllg/mapf_core.hpp"

namespace lllg {

using Path = std::vector<Vertex>;

// Per-step cost: 0 while parked on the goal, 1 otherwise.
inline std::int64_t path_step_cost(Vertex from, Vertex to, Vertex goal) {
  return (from == goal && to == goal) ? 0 : 1;
}

inline std::int64_t agent_path_cost(std::span<const Vertex> path, Vertex goal) {
  std::int64_t c = 0;
  for (std::size_t t = 0; t + 1 < path.size(); ++t) c += path_step_cost(path[t], path[t + 1], goal);
  return c;
}

inline std::vector<Path> plan_to_paths(const Plan& plan) {
  if (plan.empty()) return {};
  std::vector<Path> paths(plan.front().size(), Path(plan.size()));
  for (std::size_t t = 0; t < plan.size(); ++t) {
    for (std::size_t i = 0; i < paths.size(); ++i) paths[i][t] = plan[t][i];
  }
  return paths;
}

inline Plan paths_to_plan(const std::vector<Path>& paths) {
  if (paths.empty()) return {};
  Plan plan(paths.front().size(), Configuration(paths.size()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t t = 0; t < paths[i].size(); ++t) plan[t][i] = paths[i][t];
  }
  return plan;
}

inline std::int64_t plan_path_cost(const Plan& plan, const GoalSet& goals) {
  std::int64_t c = 0;
  for (std::size_t t = 1; t < plan.size(); ++t) {
    for (std::size_t i = 0; i < goals.size(); ++i) c += path_step_cost(plan[t - 1][i], plan[t][i], goals[i]);
  }
  return c;
}

// Vertex occupancy and directed edge traversals of frozen paths, steps 0..w.
class ReservationTable {
 public:
  ReservationTable(const GridMap& map, int window)
      : map_(&map),
        window_(window),
        vertex_(static_cast<std::size_t>(window + 1) * map.num_vertices(), 0),
        edge_(static_cast<std::size_t>(window) * map.num_vertices() * 5, 0) {
    if (window < 1) throw std::invalid_argument("reservation window must be >= 1");
  }

  int window() const { return window_; }

  void add(std::span<const Vertex> path) { update(path, +1); }
  void remove(std::span<const Vertex> path) { update(path, -1); }

  bool occupied(Vertex v, int t) const {
    return vertex_[static_cast<std::size_t>(t) * map_->num_vertices() + v] > 0;
  }

  // True when some frozen path moves to -> from during step t.
  bool swapped(Vertex from, Vertex to, int t) const {
    if (from == to) return false;
    const auto slot = map_->move_slot(to, from);
    return edge_[(static_cast<std::size_t>(t) * map_->num_vertices() + to) * 5 + slot] > 0;
  }

 private:
  void update(std::span<const Vertex> path, int delta) {
    if (path.size() != static_cast<std::size_t>(window_ + 1)) {
      throw std::invalid_argument("reservation path has wrong length");
    }
    const auto nv = map_->num_vertices();
    for (int t = 0; t <= window_; ++t) vertex_[static_cast<std::size_t>(t) * nv + path[t]] += delta;
    for (int t = 0; t < window_; ++t) {
      const auto slot = map_->move_slot(path[t], path[t + 1]);
      if (slot < 0) throw std::invalid_argument("reservation path contains an illegal move");
      edge_[(static_cast<std::size_t>(t) * nv + path[t]) * 5 + slot] += delta;
    }
  }

  const GridMap* map_;
  int window_;
  std::vector<std::int32_t> vertex_;
  std::vector<std::int32_t> edge_;
};

struct ReplanResult {
  Path path;
  std::int64_t cost = 0;
};

// Finite-horizon space-time A*: minimum-cost collision-free walk of length
// window+1 from start. h(v, t) = min(dist(v, g), window - t) is consistent
// under the parked-on-goal step cost. nullopt if no such walk exists.
inline std::optional<ReplanResult> replan_agent(const GridMap& map, const DistanceOracle& oracle,
                                                Vertex start, Vertex goal,
                                                const ReservationTable& table) {
  const int w = table.window();
  const auto nv = map.num_vertices();
  const auto dist = oracle.table(goal);
  auto h = [&](Vertex v, int t) -> std::int64_t {
    const auto rest = static_cast<std::int64_t>(w - t);
    return dist[v] == kUnreachable ? rest : std::min<std::int64_t>(dist[v], rest);
  };
  struct Entry {
    std::int64_t f;
    int t;
    Vertex v;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.t != b.t) return a.t < b.t;
    return a.v > b.v;
  };
  const auto states = static_cast<std::size_t>(w + 1) * nv;
  std::vector<std::int64_t> g(states, -1);
  std::vector<std::int64_t> parent(states, -1);
  std::vector<std::uint8_t> closed(states, 0);
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  g[static_cast<std::size_t>(start)] = 0;
  open.push({h(start, 0), 0, start});
  while (!open.empty()) {
    const auto top = open.top();
    open.pop();
    const auto idx = static_cast<std::size_t>(top.t) * nv + top.v;
    if (closed[idx]) continue;
    closed[idx] = 1;
    if (top.t == w) {
      ReplanResult r;
      r.cost = g[idx];
      r.path.resize(static_cast<std::size_t>(w) + 1);
      auto cur = static_cast<std::int64_t>(idx);
      for (int t = w; t >= 0; --t) {
        r.path[t] = static_cast<Vertex>(static_cast<std::size_t>(cur) % nv);
        cur = parent[cur];
      }
      return r;
    }
    auto expand = [&](Vertex u) {
      if (table.occupied(u, top.t + 1) || table.swapped(top.v, u, top.t)) return;
      const auto nidx = static_cast<std::size_t>(top.t + 1) * nv + u;
      if (closed[nidx]) return;
      const auto ng = g[idx] + path_step_cost(top.v, u, goal);
      if (g[nidx] != -1 && g[nidx] <= ng) return;
      g[nidx] = ng;
      parent[nidx] = static_cast<std::int64_t>(idx);
      open.push({ng + h(u, top.t + 1), top.t + 1, u});
    };
    for (auto u : map.unchecked_neighbors(top.v)) expand(u);
    expand(top.v);
  }
  return std::nullopt;
}

struct LnsStats {
  std::uint64_t iterations = 0;
  std::uint64_t accepted = 0;
};

// Budget expansions count LNS iterations. The returned plan is valid, keeps
// every non-improved agent's path bit-identical, and never costs more.
inline Plan refine_lns(const GridMap& map, const DistanceOracle& oracle, const Plan& plan,
                       const GoalSet& goals, int k, const Budget& budget, Rng& rng,
                       LnsStats* stats = nullptr) {
  if (plan.size() < 2 || plan.front().empty()) return plan;
  const auto n = plan.front().size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("LNS neighborhood size must be in [1, n]");
  }
  if (goals.size() != n) throw std::invalid_argument("LNS: goal count mismatch");
  if (!budget.deadline && !budget.max_expansions) {
    throw std::invalid_argument("LNS needs a deadline or an iteration cap");
  }
  const int w = static_cast<int>(plan.size()) - 1;
  auto paths = plan_to_paths(plan);
  ReservationTable table(map, w);
  for (const auto& p : paths) table.add(p);

  std::vector<AgentId> agents(n);
  std::iota(agents.begin(), agents.end(), 0);
  std::vector<AgentId> chosen;
  std::vector<Path> backup;
  std::uint64_t used = 0;
  while (!budget.exhausted(used)) {
    ++used;
    chosen.clear();
    std::sample(agents.begin(), agents.end(), std::back_inserter(chosen), k, rng);
    std::sort(chosen.begin(), chosen.end());

    std::int64_t old_cost = 0;
    backup.clear();
    for (auto i : chosen) {
      old_cost += agent_path_cost(paths[i], goals[i]);
      backup.push_back(paths[i]);
      table.remove(paths[i]);
    }
    std::int64_t new_cost = 0;
    std::size_t placed = 0;
    bool feasible = true;
    for (auto i : chosen) {
      auto r = replan_agent(map, oracle, paths[i].front(), goals[i], table);
      if (!r) {
        feasible = false;
        break;
      }
      paths[i] = std::move(r->path);
      table.add(paths[i]);
      new_cost += r->cost;
      ++placed;
    }
    if (feasible && new_cost < old_cost) {
      if (stats) ++stats->accepted;
      continue;
    }
    for (std::size_t x = 0; x < placed; ++x) table.remove(paths[chosen[x]]);
    for (std::size_t x = 0; x < chosen.size(); ++x) {
      paths[chosen[x]] = backup[x];
      table.add(paths[chosen[x]]);
    }
  }
  if (stats) stats->iterations += used;
  return paths_to_plan(paths);
}

}  // namespace lllg
