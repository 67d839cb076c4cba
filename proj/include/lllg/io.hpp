// MovingAI .scen reading, trace and stop-count heatmap writing.
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lllg/grid_map.hpp"
#include "lllg/mapf_core.hpp"

namespace lllg {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One "version 1" row. Columns x are map columns, y are map rows.
struct ScenarioEntry {
  int bucket = 0;
  std::string map_name;
  int map_width = 0;
  int map_height = 0;
  Cell start;
  Cell goal;
  double optimal_length = 0.0;
};

inline std::vector<ScenarioEntry> parse_scenario(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError("empty scenario file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::istringstream head(line);
    std::string word;
    double version = 0;
    if (!(head >> word >> version) || word != "version" || version != 1.0) {
      throw ScenarioError("expected 'version 1' header, got '" + line + "'");
    }
  }
  std::vector<ScenarioEntry> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    // Map names never contain tabs; split on tabs first, whitespace otherwise.
    std::vector<std::string> fields;
    if (line.find('\t') != std::string::npos) {
      std::size_t pos = 0;
      while (pos <= line.size()) {
        auto end = line.find('\t', pos);
        if (end == std::string::npos) end = line.size();
        fields.push_back(line.substr(pos, end - pos));
        pos = end + 1;
      }
    } else {
      std::istringstream ws(line);
      std::string f;
      while (ws >> f) fields.push_back(f);
    }
    if (fields.size() != 9) {
      throw ScenarioError("scenario line " + std::to_string(line_no) + " has " +
                          std::to_string(fields.size()) + " fields, expected 9");
    }
    try {
      ScenarioEntry e;
      e.bucket = std::stoi(fields[0]);
      e.map_name = fields[1];
      e.map_width = std::stoi(fields[2]);
      e.map_height = std::stoi(fields[3]);
      e.start = {std::stoi(fields[5]), std::stoi(fields[4])};
      e.goal = {std::stoi(fields[7]), std::stoi(fields[6])};
      e.optimal_length = std::stod(fields[8]);
      rows.push_back(std::move(e));
    } catch (const std::logic_error&) {
      throw ScenarioError("scenario line " + std::to_string(line_no) + " is not numeric");
    }
  }
  return rows;
}

inline std::vector<ScenarioEntry> load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// Start configuration from the first n rows; goals are ignored.
inline Configuration scenario_starts(const GridMap& map, const std::vector<ScenarioEntry>& rows,
                                     std::size_t n) {
  if (rows.size() < n) {
    throw ScenarioError("scenario has " + std::to_string(rows.size()) + " rows, " +
                        std::to_string(n) + " agents requested");
  }
  Configuration q;
  q.reserve(n);
  std::vector<bool> used(map.num_vertices());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    for (const auto& c : {r.start, r.goal}) {
      if (!map.in_bounds(c.row, c.col)) {
        throw ScenarioError("scenario row " + std::to_string(i) + " references a cell outside the map");
      }
    }
    const auto v = map.vertex_at(r.start);
    if (v == kNoVertex) {
      throw ScenarioError("scenario row " + std::to_string(i) + " starts on a blocked cell");
    }
    if (used[v]) throw ScenarioError("scenario row " + std::to_string(i) + " repeats a start cell");
    used[v] = true;
    q.push_back(v);
  }
  return q;
}

// Trace line: "t:(row,col),(row,col),..." one per executed configuration.
inline void write_trace(std::ostream& out, const GridMap& map, const Plan& trace) {
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out << t << ':';
    for (auto v : trace[t]) {
      const auto c = map.cell_of(v);
      out << '(' << c.row << ',' << c.col << "),";
    }
    out << '\n';
  }
}

// height x width grid of stop counts, -1 on obstacles.
inline void write_heatmap_grid(std::ostream& out, const GridMap& map,
                               const std::vector<std::uint64_t>& stop_counts) {
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (c > 0) out << ',';
      const auto v = map.vertex_at(r, c);
      if (v == kNoVertex) {
        out << -1;
      } else {
        out << (static_cast<std::size_t>(v) < stop_counts.size() ? stop_counts[v] : 0);
      }
    }
    out << '\n';
  }
}

// (stop count, number of passable vertices with that count), ascending.
inline std::map<std::uint64_t, std::uint64_t> stop_histogram(
    const GridMap& map, const std::vector<std::uint64_t>& stop_counts) {
  std::map<std::uint64_t, std::uint64_t> hist;
  for (std::size_t v = 0; v < map.num_vertices(); ++v) {
    ++hist[v < stop_counts.size() ? stop_counts[v] : 0];
  }
  return hist;
}

inline void write_histogram(std::ostream& out, const GridMap& map,
                            const std::vector<std::uint64_t>& stop_counts) {
  out << "stop_count,vertices\n";
  for (const auto& [count, freq] : stop_histogram(map, stop_counts)) {
    out << count << ',' << freq << '\n';
  }
}

// Writes <path> (grid) and <stem>_hist<ext> (histogram).
inline std::filesystem::path histogram_path(const std::filesystem::path& grid_path) {
  auto p = grid_path;
  p.replace_filename(grid_path.stem().string() + "_hist" + grid_path.extension().string());
  return p;
}

inline void write_heatmap(const std::filesystem::path& path, const GridMap& map,
                          const std::vector<std::uint64_t>& stop_counts) {
  std::ofstream grid(path);
  if (!grid) throw std::runtime_error("cannot write heatmap " + path.string());
  write_heatmap_grid(grid, map, stop_counts);
  const auto hpath = histogram_path(path);
  std::ofstream hist(hpath);
  if (!hist) throw std::runtime_error("cannot write histogram " + hpath.string());
  write_histogram(hist, map, stop_counts);
  if (!grid || !hist) throw std::runtime_error("write failed for heatmap " + path.string());
}

}  // namespace lllg
