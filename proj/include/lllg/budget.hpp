#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>

namespace lllg {

using Clock = std::chrono::steady_clock;
using Rng = std::mt19937_64;

// A search budget: wall-clock deadline, expansion cap, or both. Whichever
// trips first ends the search. A default-constructed budget never expires.
struct Budget {
  std::optional<Clock::time_point> deadline;
  std::optional<std::uint64_t> max_expansions;

  static Budget expansions(std::uint64_t cap) { return {std::nullopt, cap}; }
  static Budget seconds(double s) {
    return {Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(s)),
            std::nullopt};
  }

  bool exhausted(std::uint64_t expansions_used) const {
    if (max_expansions && expansions_used >= *max_expansions) return true;
    return deadline && Clock::now() >= *deadline;
  }
};

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace lllg
