// Configurations, conflict checks, plans and episode metrics.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lllg/grid_map.hpp"

namespace lllg {

using AgentId = std::int32_t;

// Q in V^n: one vertex per agent.
using Configuration = std::vector<Vertex>;
// g^t: current goal per agent; goals may coincide across agents.
using GoalSet = std::vector<Vertex>;
// Sequence of configurations; index 0 is the current configuration.
using Plan = std::vector<Configuration>;

struct ConfigurationHash {
  std::size_t operator()(const Configuration& q) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ q.size();
    for (auto v : q) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

enum class ConflictKind { kIllegalMove, kVertex, kSwap };

struct Conflict {
  ConflictKind kind;
  AgentId first;
  AgentId second;  // -1 for kIllegalMove
  Vertex where;    // target vertex of `first`
  friend bool operator==(const Conflict&, const Conflict&) = default;
};

inline std::string to_string(const Conflict& c) {
  switch (c.kind) {
    case ConflictKind::kIllegalMove:
      return "illegal(" + std::to_string(c.first) + ")";
    case ConflictKind::kVertex:
      return "vertex(" + std::to_string(c.first) + "," + std::to_string(c.second) + ")";
    case ConflictKind::kSwap:
      return "swap(" + std::to_string(c.first) + "," + std::to_string(c.second) + ")";
  }
  return "?";
}

struct StepConflict {
  std::size_t step;  // index of the destination configuration
  Conflict conflict;
  friend bool operator==(const StepConflict&, const StepConflict&) = default;
};

namespace detail {

inline void require_same_length(const Configuration& from, const Configuration& to) {
  if (from.size() != to.size()) {
    throw std::invalid_argument("configuration length mismatch: " +
                                std::to_string(from.size()) + " vs " +
                                std::to_string(to.size()));
  }
}

}  // namespace detail

// Every conflict of the transition from -> to, ordered by kind then agent.
// Vertex conflicts are reported once per unordered agent pair.
inline std::vector<Conflict> validate_transition(const GridMap& map,
                                                 const Configuration& from,
                                                 const Configuration& to) {
  detail::require_same_length(from, to);
  std::vector<Conflict> out;
  const auto n = static_cast<AgentId>(from.size());
  for (AgentId i = 0; i < n; ++i) {
    if (!map.valid(from[i]) || !map.valid(to[i]) ||
        map.move_slot(from[i], to[i]) < 0) {
      out.push_back({ConflictKind::kIllegalMove, i, -1, to[i]});
    }
  }

  std::vector<AgentId> by_target(static_cast<std::size_t>(n));
  for (AgentId i = 0; i < n; ++i) by_target[i] = i;
  std::stable_sort(by_target.begin(), by_target.end(),
                   [&](AgentId a, AgentId b) { return to[a] < to[b]; });
  std::vector<Conflict> vertex;
  for (std::size_t a = 0; a < by_target.size();) {
    auto b = a;
    while (b < by_target.size() && to[by_target[b]] == to[by_target[a]]) ++b;
    for (auto x = a; x < b; ++x) {
      for (auto y = x + 1; y < b; ++y) {
        vertex.push_back({ConflictKind::kVertex, std::min(by_target[x], by_target[y]),
                          std::max(by_target[x], by_target[y]), to[by_target[x]]});
      }
    }
    a = b;
  }
  std::sort(vertex.begin(), vertex.end(), [](const Conflict& l, const Conflict& r) {
    return std::tie(l.first, l.second) < std::tie(r.first, r.second);
  });
  out.insert(out.end(), vertex.begin(), vertex.end());

  // Swap: i and j exchange vertices. Sort agents by source to find the agent
  // that sat on i's target.
  std::vector<AgentId> by_source(static_cast<std::size_t>(n));
  for (AgentId i = 0; i < n; ++i) by_source[i] = i;
  std::stable_sort(by_source.begin(), by_source.end(),
                   [&](AgentId a, AgentId b) { return from[a] < from[b]; });
  for (AgentId i = 0; i < n; ++i) {
    if (to[i] == from[i]) continue;
    auto it = std::lower_bound(by_source.begin(), by_source.end(), to[i],
                               [&](AgentId a, Vertex v) { return from[a] < v; });
    for (; it != by_source.end() && from[*it] == to[i]; ++it) {
      const auto j = *it;
      if (j > i && to[j] == from[i]) {
        out.push_back({ConflictKind::kSwap, i, j, to[i]});
      }
    }
  }
  return out;
}

// Boolean fast path; `scratch` must have at least map.num_vertices() entries
// initialised to -1 and is restored on return.
inline bool is_valid_transition(const GridMap& map, const Configuration& from,
                                const Configuration& to,
                                std::vector<AgentId>& scratch) {
  if (from.size() != to.size()) return false;
  const auto n = static_cast<AgentId>(from.size());
  bool ok = true;
  AgentId placed = 0;
  for (; placed < n && ok; ++placed) {
    const auto v = to[placed];
    if (!map.valid(v) || !map.valid(from[placed]) ||
        map.move_slot(from[placed], v) < 0 || scratch[v] != -1) {
      ok = false;
      break;
    }
    scratch[v] = placed;
  }
  if (ok) {
    for (AgentId i = 0; i < n; ++i) {
      if (to[i] == from[i]) continue;
      const auto j = scratch[from[i]];  // agent moving into i's old vertex
      if (j != -1 && from[j] == to[i]) {
        ok = false;
        break;
      }
    }
  }
  for (AgentId i = 0; i < placed && i < n; ++i) {
    if (map.valid(to[i]) && scratch[to[i]] == i) scratch[to[i]] = -1;
  }
  return ok;
}

inline bool is_valid_transition(const GridMap& map, const Configuration& from,
                                const Configuration& to) {
  std::vector<AgentId> scratch(map.num_vertices(), -1);
  return is_valid_transition(map, from, to, scratch);
}

inline std::vector<StepConflict> validate_plan(const GridMap& map, const Plan& plan) {
  std::vector<StepConflict> out;
  for (std::size_t t = 1; t < plan.size(); ++t) {
    for (const auto& c : validate_transition(map, plan[t - 1], plan[t])) {
      out.push_back({t, c});
    }
  }
  return out;
}

inline bool is_vertex_disjoint(const GridMap& map, const Configuration& q) {
  std::vector<bool> seen(map.num_vertices());
  for (auto v : q) {
    if (!map.valid(v) || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

struct TaskEvent {
  AgentId agent;
  std::uint64_t step;
  Vertex goal;
  friend bool operator==(const TaskEvent&, const TaskEvent&) = default;
};

struct EpisodeMetrics {
  std::uint64_t completed_tasks = 0;
  std::uint64_t executed_steps = 0;
  std::vector<double> per_step_runtime;
  std::vector<std::uint64_t> stop_counts;  // per vertex
  std::vector<TaskEvent> task_log;

  EpisodeMetrics() = default;
  explicit EpisodeMetrics(std::size_t num_vertices) : stop_counts(num_vertices, 0) {}

  double throughput() const {
    return executed_steps == 0
               ? 0.0
               : static_cast<double>(completed_tasks) / static_cast<double>(executed_steps);
  }

  double mean_runtime() const {
    if (per_step_runtime.empty()) return 0.0;
    double s = 0;
    for (auto r : per_step_runtime) s += r;
    return s / static_cast<double>(per_step_runtime.size());
  }

  double max_runtime() const {
    double m = 0;
    for (auto r : per_step_runtime) m = std::max(m, r);
    return m;
  }

  std::uint64_t total_stops() const {
    std::uint64_t s = 0;
    for (auto c : stop_counts) s += c;
    return s;
  }
};

// Records one executed transition. A task completes when the agent stands on
// its goal after the move; an agent "stops" whenever it does not move.
inline void accumulate_metrics(EpisodeMetrics& metrics, const Configuration& from,
                               const Configuration& to, const GoalSet& goals,
                               double runtime_seconds) {
  detail::require_same_length(from, to);
  if (goals.size() != to.size()) {
    throw std::invalid_argument("goal count does not match configuration");
  }
  ++metrics.executed_steps;
  metrics.per_step_runtime.push_back(runtime_seconds);
  for (std::size_t i = 0; i < to.size(); ++i) {
    if (to[i] == goals[i]) {
      ++metrics.completed_tasks;
      metrics.task_log.push_back(
          {static_cast<AgentId>(i), metrics.executed_steps, goals[i]});
    }
    if (to[i] == from[i]) {
      if (static_cast<std::size_t>(from[i]) >= metrics.stop_counts.size()) {
        metrics.stop_counts.resize(static_cast<std::size_t>(from[i]) + 1, 0);
      }
      ++metrics.stop_counts[from[i]];
    }
  }
}

}  // namespace lllg
