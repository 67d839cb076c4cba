// 4-connected grid graphs parsed from MovingAI .map files, plus lazily built
// BFS distance tables.
#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lllg {

using Vertex = std::int32_t;
inline constexpr Vertex kNoVertex = -1;

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMap {
 public:
  GridMap() = default;

  // MovingAI grammar: "type <t>", "height H", "width W", "map", then H rows of
  // W characters. '.' and 'G' are passable; '@', 'T', 'O' are blocked.
  static GridMap parse(std::string_view text) {
    std::vector<std::string> lines;
    {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = end + 1;
      }
      while (!lines.empty() && lines.back().empty()) lines.pop_back();
    }

    auto header_value = [&](std::size_t idx, std::string_view key) {
      if (idx >= lines.size()) throw MapError("map header truncated");
      std::istringstream in(lines[idx]);
      std::string k, v, extra;
      in >> k >> v;
      if (k != key || v.empty() || (in >> extra)) {
        throw MapError("malformed map header line " + std::to_string(idx + 1) +
                       ": expected '" + std::string(key) + " <value>'");
      }
      return v;
    };

    header_value(0, "type");
    auto parse_dim = [](const std::string& s, const char* what) {
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || value <= 0) {
        throw MapError(std::string("malformed map header: bad ") + what);
      }
      return value;
    };
    const int height = parse_dim(header_value(1, "height"), "height");
    const int width = parse_dim(header_value(2, "width"), "width");
    if (lines.size() < 4 || lines[3] != "map") {
      throw MapError("malformed map header: expected 'map'");
    }
    if (lines.size() - 4 != static_cast<std::size_t>(height)) {
      throw MapError("map has " + std::to_string(lines.size() - 4) +
                     " rows, header says " + std::to_string(height));
    }

    std::vector<bool> passable(static_cast<std::size_t>(width) * height);
    for (int r = 0; r < height; ++r) {
      const auto& row = lines[4 + r];
      if (row.size() != static_cast<std::size_t>(width)) {
        throw MapError("map row " + std::to_string(r) + " has length " +
                       std::to_string(row.size()) + ", expected " +
                       std::to_string(width));
      }
      for (int c = 0; c < width; ++c) {
        switch (row[c]) {
          case '.':
          case 'G':
            passable[static_cast<std::size_t>(r) * width + c] = true;
            break;
          case '@':
          case 'T':
          case 'O':
            break;
          default:
            throw MapError(std::string("unknown map character '") + row[c] +
                           "' at row " + std::to_string(r));
        }
      }
    }
    return GridMap(width, height, std::move(passable));
  }

  static GridMap load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MapError("cannot open map file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  GridMap(int width, int height, std::vector<bool> passable)
      : width_(width), height_(height), passable_(std::move(passable)) {
    if (passable_.size() != static_cast<std::size_t>(width_) * height_) {
      throw MapError("passability mask does not match dimensions");
    }
    cell_to_vertex_.assign(passable_.size(), kNoVertex);
    for (std::size_t idx = 0; idx < passable_.size(); ++idx) {
      if (!passable_[idx]) continue;
      cell_to_vertex_[idx] = static_cast<Vertex>(vertex_to_cell_.size());
      vertex_to_cell_.push_back(static_cast<std::int32_t>(idx));
    }
    // Neighbor order: up, left, right, down, i.e. ascending vertex id.
    neighbor_offsets_.assign(1, 0);
    neighbor_offsets_.reserve(vertex_to_cell_.size() + 1);
    for (auto idx : vertex_to_cell_) {
      const int r = idx / width_;
      const int c = idx % width_;
      const Cell around[4] = {{r - 1, c}, {r, c - 1}, {r, c + 1}, {r + 1, c}};
      for (auto nb : around) {
        const auto v = vertex_at(nb.row, nb.col);
        if (v != kNoVertex) neighbors_.push_back(v);
      }
      neighbor_offsets_.push_back(static_cast<std::int32_t>(neighbors_.size()));
    }
  }

  // Serializes back to the MovingAI grammar ('.' and '@' only).
  std::string serialize() const {
    std::string out = "type octile\nheight " + std::to_string(height_) +
                      "\nwidth " + std::to_string(width_) + "\nmap\n";
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        out += passable(r, c) ? '.' : '@';
      }
      out += '\n';
    }
    return out;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t num_vertices() const { return vertex_to_cell_.size(); }

  bool in_bounds(int row, int col) const {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  bool passable(int row, int col) const {
    return in_bounds(row, col) &&
           passable_[static_cast<std::size_t>(row) * width_ + col];
  }
  Vertex vertex_at(int row, int col) const {
    if (!in_bounds(row, col)) return kNoVertex;
    return cell_to_vertex_[static_cast<std::size_t>(row) * width_ + col];
  }
  Vertex vertex_at(Cell cell) const { return vertex_at(cell.row, cell.col); }

  bool valid(Vertex v) const {
    return v >= 0 && static_cast<std::size_t>(v) < vertex_to_cell_.size();
  }

  Cell cell_of(Vertex v) const {
    check(v);
    const auto idx = vertex_to_cell_[v];
    return {idx / width_, idx % width_};
  }

  std::span<const Vertex> neighbors(Vertex v) const {
    check(v);
    return unchecked_neighbors(v);
  }

  // Hot-path accessor; caller guarantees v is valid.
  std::span<const Vertex> unchecked_neighbors(Vertex v) const {
    const auto begin = neighbor_offsets_[v];
    const auto end = neighbor_offsets_[v + 1];
    return {neighbors_.data() + begin, static_cast<std::size_t>(end - begin)};
  }

  bool adjacent(Vertex u, Vertex v) const {
    for (auto w : unchecked_neighbors(u)) {
      if (w == v) return true;
    }
    return false;
  }

  // Index of `to` among neighbors(from), kWaitSlot if to == from, -1 if not a
  // legal single-agent move.
  static constexpr int kWaitSlot = 4;
  int move_slot(Vertex from, Vertex to) const {
    if (from == to) return kWaitSlot;
    const auto nbs = unchecked_neighbors(from);
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      if (nbs[k] == to) return static_cast<int>(k);
    }
    return -1;
  }

  friend bool operator==(const GridMap& a, const GridMap& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.passable_ == b.passable_;
  }

 private:
  void check(Vertex v) const {
    if (!valid(v)) throw std::out_of_range("invalid vertex id " + std::to_string(v));
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<bool> passable_;
  std::vector<Vertex> cell_to_vertex_;
  std::vector<std::int32_t> vertex_to_cell_;
  std::vector<std::int32_t> neighbor_offsets_{0};
  std::vector<Vertex> neighbors_;
};

using Distance = std::uint32_t;
inline constexpr Distance kUnreachable = std::numeric_limits<Distance>::max();

// Per-goal BFS tables, built on first query. Safe for concurrent readers: a
// table is computed at most once even when several threads ask for it first.
class DistanceOracle {
 public:
  explicit DistanceOracle(const GridMap& map)
      : map_(&map), slots_(std::make_unique<Slot[]>(map.num_vertices())) {}

  DistanceOracle(const DistanceOracle&) = delete;
  DistanceOracle& operator=(const DistanceOracle&) = delete;

  const GridMap& map() const { return *map_; }

  Distance dist(Vertex v, Vertex goal) const {
    if (!map_->valid(v)) throw std::out_of_range("invalid vertex id " + std::to_string(v));
    return table(goal)[v];
  }

  std::span<const Distance> table(Vertex goal) const {
    if (!map_->valid(goal)) {
      throw std::out_of_range("invalid goal vertex id " + std::to_string(goal));
    }
    auto& slot = slots_[goal];
    if (const auto* ready = slot.ready.load(std::memory_order_acquire)) {
      return *ready;
    }
    std::call_once(slot.once, [&] {
      slot.table = build(goal);
      tables_built_.fetch_add(1, std::memory_order_relaxed);
      slot.ready.store(&slot.table, std::memory_order_release);
    });
    return slot.table;
  }

  std::size_t table_count() const {
    return tables_built_.load(std::memory_order_relaxed);
  }

 private:
  struct Slot {
    std::once_flag once;
    std::vector<Distance> table;
    std::atomic<const std::vector<Distance>*> ready{nullptr};
  };

  std::vector<Distance> build(Vertex goal) const {
    std::vector<Distance> d(map_->num_vertices(), kUnreachable);
    std::vector<Vertex> queue;
    queue.reserve(map_->num_vertices());
    d[goal] = 0;
    queue.push_back(goal);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto u = queue[head];
      for (auto v : map_->unchecked_neighbors(u)) {
        if (d[v] != kUnreachable) continue;
        d[v] = d[u] + 1;
        queue.push_back(v);
      }
    }
    return d;
  }

  const GridMap* map_;
  std::unique_ptr<Slot[]> slots_;
  mutable std::atomic<std::size_t> tables_built_{0};
};

}  // namespace lllg
