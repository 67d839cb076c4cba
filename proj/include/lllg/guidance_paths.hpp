#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lllg/mapf_core.hpp"

namespace lllg {

// Phi: one (window+1)-vertex path per agent. A row may be flagged absent,
// meaning it is a placeholder that other agents' collision counts ignore.
class GuidancePaths {
 public:
  GuidancePaths() = default;
  GuidancePaths(std::size_t num_agents, int window)
      : n_(num_agents),
        window_(window),
        data_(num_agents * static_cast<std::size_t>(window + 1), kNoVertex),
        present_(num_agents, 0) {
    if (window < 1) throw std::invalid_argument("guidance window must be >= 1");
  }

  // All-wait rows at q, every row absent.
  static GuidancePaths waiting_at(const Configuration& q, int window) {
    GuidancePaths phi(q.size(), window);
    for (std::size_t i = 0; i < q.size(); ++i) phi.set_wait(static_cast<AgentId>(i), q[i], false);
    return phi;
  }

  std::size_t num_agents() const { return n_; }
  int window() const { return window_; }
  bool empty() const { return n_ == 0; }

  std::span<const Vertex> row(AgentId i) const {
    return {data_.data() + offset(i), static_cast<std::size_t>(window_ + 1)};
  }
  std::span<Vertex> row(AgentId i) {
    return {data_.data() + offset(i), static_cast<std::size_t>(window_ + 1)};
  }
  Vertex at(AgentId i, int t) const { return data_[offset(i) + t]; }

  bool present(AgentId i) const { return present_[i] != 0; }
  void set_present(AgentId i, bool p) { present_[i] = p ? 1 : 0; }

  void set_row(AgentId i, std::span<const Vertex> path, bool present = true) {
    if (path.size() != static_cast<std::size_t>(window_ + 1)) {
      throw std::invalid_argument("guidance row has wrong length");
    }
    std::copy(path.begin(), path.end(), data_.begin() + offset(i));
    present_[i] = present ? 1 : 0;
  }

  void set_wait(AgentId i, Vertex v, bool present) {
    auto r = row(i);
    std::fill(r.begin(), r.end(), v);
    present_[i] = present ? 1 : 0;
  }

  bool is_all_wait(AgentId i) const {
    const auto r = row(i);
    for (auto v : r) {
      if (v != r[0]) return false;
    }
    return true;
  }

  friend bool operator==(const GuidancePaths&, const GuidancePaths&) = default;

 private:
  std::size_t offset(AgentId i) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(window_ + 1);
  }

  std::size_t n_ = 0;
  int window_ = 0;
  std::vector<Vertex> data_;
  std::vector<std::uint8_t> present_;
};

}  // namespace lllg
