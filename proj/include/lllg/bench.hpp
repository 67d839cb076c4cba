// Benchmark harness: episode matrices from flag sets and sweeps, CSV records.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lllg/grid_map.hpp"
#include "lllg/io.hpp"
#include "lllg/lifelong.hpp"

namespace lllg::bench {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string map_path;
  std::string scen_path;
  int agents = 0;
  int steps = 500;
  std::string solver = "lllg";
  std::optional<std::string> scheme;  // only meaningful for lllg; default pi
  int w_phi = 20;
  int w_pi = 10;
  int m = 2;
  double alpha = 3.0;
  std::string refine = "none";
  std::string hindrance = "auto";  // auto: off for pibt, on otherwise
  double budget_ms = 10000.0;
  std::optional<std::uint64_t> budget_expansions;
  int k_lns = 8;
  std::uint64_t seed = 0;
  int instances = 1;
  std::vector<std::string> sweeps;
  std::string out;
  std::string heatmap;
  std::string trace;
  int jobs = 1;
};

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto end = s.find(sep, pos);
    out.push_back(s.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

// "key=v1,v2,..." where any value may be an inclusive integer range "a..b".
inline SweepAxis parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("bad --sweep '" + spec + "', expected key=values");
  }
  SweepAxis axis{spec.substr(0, eq), {}};
  for (const auto& item : split(spec.substr(eq + 1), ',')) {
    if (item.empty()) throw UsageError("empty value in --sweep '" + spec + "'");
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      axis.values.push_back(item);
      continue;
    }
    long long lo = 0, hi = 0;
    try {
      std::size_t a = 0, b = 0;
      const auto left = item.substr(0, dots);
      const auto right = item.substr(dots + 2);
      lo = std::stoll(left, &a);
      hi = std::stoll(right, &b);
      if (a != left.size() || b != right.size()) throw std::invalid_argument("range");
    } catch (const std::logic_error&) {
      throw UsageError("bad range '" + item + "' in --sweep");
    }
    if (hi < lo) throw UsageError("empty range '" + item + "' in --sweep");
    for (auto v = lo; v <= hi; ++v) axis.values.push_back(std::to_string(v));
  }
  return axis;
}

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(value, &used));
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
      out = static_cast<T>(std::stoull(value, &used));
    } else {
      out = static_cast<T>(std::stoll(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::logic_error&) {
    throw UsageError("bad value '" + value + "' for " + key);
  }
}

}  // namespace detail

// Sets one sweepable field by its flag name (without leading dashes).
inline void apply(Options& o, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "agents") o.agents = parse_number<int>(key, value);
  else if (key == "steps") o.steps = parse_number<int>(key, value);
  else if (key == "seed") o.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "solver") o.solver = value;
  else if (key == "scheme") o.scheme = value;
  else if (key == "w-phi") o.w_phi = parse_number<int>(key, value);
  else if (key == "w-pi") o.w_pi = parse_number<int>(key, value);
  else if (key == "m") o.m = parse_number<int>(key, value);
  else if (key == "alpha") o.alpha = parse_number<double>(key, value);
  else if (key == "refine") o.refine = value;
  else if (key == "hindrance") o.hindrance = value;
  else if (key == "budget-ms") o.budget_ms = parse_number<double>(key, value);
  else if (key == "budget-expansions") o.budget_expansions = parse_number<std::uint64_t>(key, value);
  else if (key == "k-lns") o.k_lns = parse_number<int>(key, value);
  else throw UsageError("unknown sweep key '" + key + "'");
}

// Cartesian product of all sweeps (first sweep varies slowest), then
// `instances` consecutive seeds per point unless seed itself is swept.
inline std::vector<Options> expand(const Options& base) {
  std::vector<SweepAxis> axes;
  bool seed_swept = false;
  for (const auto& s : base.sweeps) {
    axes.push_back(parse_sweep(s));
    seed_swept = seed_swept || axes.back().key == "seed";
  }
  if (base.instances < 1) throw UsageError("--instances must be >= 1");
  if (!seed_swept && base.instances > 1) {
    SweepAxis seeds{"seed", {}};
    for (int k = 0; k < base.instances; ++k) seeds.values.push_back(std::to_string(base.seed + k));
    axes.push_back(seeds);
  }
  std::vector<Options> out{base};
  for (const auto& axis : axes) {
    std::vector<Options> next;
    for (const auto& o : out) {
      for (const auto& v : axis.values) {
        auto copy = o;
        apply(copy, axis.key, v);
        next.push_back(std::move(copy));
      }
    }
    out = std::move(next);
  }
  return out;
}

inline Solver parse_solver(const std::string& s) {
  if (s == "pibt") return Solver::kPibt;
  if (s == "lacam") return Solver::kLacam;
  if (s == "lllg") return Solver::kLllg;
  throw UsageError("unknown solver '" + s + "' (pibt|lacam|lllg)");
}

inline WarmStart parse_scheme(const std::string& s) {
  if (s == "empty") return WarmStart::kEmpty;
  if (s == "phi") return WarmStart::kPhi;
  if (s == "pi") return WarmStart::kPi;
  throw UsageError("unknown scheme '" + s + "' (empty|phi|pi)");
}

inline Refiner parse_refiner(const std::string& s) {
  if (s == "none") return Refiner::kNone;
  if (s == "lacam-star") return Refiner::kLacamStar;
  if (s == "lns") return Refiner::kLns;
  throw UsageError("unknown refiner '" + s + "' (none|lacam-star|lns)");
}

inline bool resolve_hindrance(const Options& o) {
  if (o.hindrance == "on") return true;
  if (o.hindrance == "off") return false;
  if (o.hindrance == "auto") return parse_solver(o.solver) != Solver::kPibt;
  throw UsageError("unknown hindrance setting '" + o.hindrance + "' (auto|on|off)");
}

inline void check(const Options& o) {
  const auto solver = parse_solver(o.solver);
  if (o.scheme) {
    parse_scheme(*o.scheme);
    if (solver != Solver::kLllg) {
      throw UsageError("--scheme only applies to --solver lllg");
    }
  }
  const auto refiner = parse_refiner(o.refine);
  if (refiner != Refiner::kNone && solver == Solver::kPibt) {
    throw UsageError("--refine needs a windowed solver (lacam or lllg)");
  }
  resolve_hindrance(o);
  if (o.agents <= 0) throw UsageError("--agents must be positive");
  if (o.steps < 0) throw UsageError("--steps must be non-negative");
  if (o.w_phi < 1 || o.w_pi < 1) throw UsageError("window sizes must be >= 1");
  if (o.m < 0) throw UsageError("--m must be >= 0");
  if (o.alpha < 0) throw UsageError("--alpha must be non-negative");
  if (o.budget_ms <= 0) throw UsageError("--budget-ms must be positive");
  if (o.k_lns < 1) throw UsageError("--k-lns must be >= 1");
  if (o.jobs < 1) throw UsageError("--jobs must be >= 1");
}

struct RunRecord {
  std::string map;
  int agents = 0;
  std::string solver;
  std::string scheme;
  std::string hindrance;
  int w_phi = 0;
  int w_pi = 0;
  int m = 0;
  double alpha = 0;
  std::string refiner;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  double throughput = 0;
  double mean_runtime_s = 0;
  double max_runtime_s = 0;
  std::uint64_t fallbacks = 0;
  std::uint64_t completed_tasks = 0;
};

inline constexpr const char* kCsvHeader =
    "map,agents,solver,scheme,hindrance,w_phi,w_pi,m,alpha,refiner,seed,steps,throughput,"
    "mean_runtime_s,max_runtime_s,fallbacks,completed_tasks";

inline std::string format_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string to_csv(const RunRecord& r) {
  std::ostringstream out;
  out << r.map << ',' << r.agents << ',' << r.solver << ',' << r.scheme << ',' << r.hindrance
      << ',' << r.w_phi << ',' << r.w_pi << ',' << r.m << ',' << format_double(r.alpha, 3) << ','
      << r.refiner << ',' << r.seed << ',' << r.steps << ',' << format_double(r.throughput) << ','
      << format_double(r.mean_runtime_s, 6) << ',' << format_double(r.max_runtime_s, 6) << ','
      << r.fallbacks << ',' << r.completed_tasks;
  return out.str();
}

// Distinct uniformly random starts, used when no scenario file is given.
inline Configuration random_starts(const GridMap& map, std::size_t n, std::uint64_t seed) {
  if (n > map.num_vertices()) throw UsageError("more agents than passable cells");
  std::vector<Vertex> all(map.num_vertices());
  for (std::size_t v = 0; v < all.size(); ++v) all[v] = static_cast<Vertex>(v);
  Rng rng(seed ^ 0x5eed5eedULL);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n);
  return all;
}

inline EpisodeConfig to_episode(const Options& o, const GridMap& map, const DistanceOracle& oracle,
                                Configuration start) {
  EpisodeConfig cfg;
  cfg.map = &map;
  cfg.oracle = &oracle;
  cfg.start = std::move(start);
  cfg.total_steps = o.steps;
  cfg.solver = parse_solver(o.solver);
  cfg.scheme = parse_scheme(o.scheme.value_or("pi"));
  cfg.refiner = parse_refiner(o.refine);
  cfg.w_phi = o.w_phi;
  cfg.w_pi = o.w_pi;
  cfg.m = o.m;
  cfg.alpha = o.alpha;
  cfg.hindrance = resolve_hindrance(o);
  cfg.k_lns = o.k_lns;
  cfg.budget_seconds = o.budget_ms / 1000.0;
  cfg.budget_expansions = o.budget_expansions;
  cfg.task_seed = o.seed;
  cfg.planner_seed = o.seed * 0x9e3779b97f4a7c15ULL + 1;
  return cfg;
}

inline RunRecord make_record(const Options& o, const std::string& map_name,
                             const EpisodeResult& r) {
  RunRecord rec;
  rec.map = map_name;
  rec.agents = o.agents;
  rec.solver = o.solver;
  rec.scheme = parse_solver(o.solver) == Solver::kLllg ? o.scheme.value_or("pi") : "-";
  rec.hindrance = resolve_hindrance(o) ? "on" : "off";
  rec.w_phi = o.w_phi;
  rec.w_pi = o.w_pi;
  rec.m = o.m;
  rec.alpha = o.alpha;
  rec.refiner = o.refine;
  rec.seed = o.seed;
  rec.steps = r.metrics.executed_steps;
  rec.throughput = r.metrics.throughput();
  rec.mean_runtime_s = r.metrics.mean_runtime();
  rec.max_runtime_s = r.metrics.max_runtime();
  rec.fallbacks = r.fallbacks;
  rec.completed_tasks = r.metrics.completed_tasks;
  return rec;
}

// "out.csv" -> "out_3.csv" when several episodes share one output path.
inline std::filesystem::path indexed_path(const std::string& path, std::size_t index,
                                          std::size_t total) {
  std::filesystem::path p(path);
  if (total <= 1) return p;
  p.replace_filename(p.stem().string() + "_" + std::to_string(index) + p.extension().string());
  return p;
}

// Runs the whole matrix. Returns the records in sweep order.
inline std::vector<RunRecord> run(const Options& base, std::ostream& log) {
  const auto matrix = expand(base);
  for (const auto& o : matrix) check(o);
  if (base.map_path.empty()) throw UsageError("--map is required");
  const auto map = GridMap::load(base.map_path);
  const DistanceOracle oracle(map);
  const auto map_name = std::filesystem::path(base.map_path).filename().string();
  std::optional<std::vector<ScenarioEntry>> scen;
  if (!base.scen_path.empty()) {
    scen = load_scenario(base.scen_path);
    std::clog << "note: scenario goals and optimal lengths are ignored; lifelong goals are generated\n";
  }
  std::vector<std::optional<RunRecord>> records(matrix.size());
  std::vector<std::string> errors(matrix.size());
  std::atomic<std::size_t> next{0};
  std::mutex sink;

  auto worker = [&] {
    for (auto idx = next.fetch_add(1); idx < matrix.size(); idx = next.fetch_add(1)) {
      const auto& o = matrix[idx];
      try {
        auto start = scen ? scenario_starts(map, *scen, static_cast<std::size_t>(o.agents))
                          : random_starts(map, static_cast<std::size_t>(o.agents), o.seed);
        auto cfg = to_episode(o, map, oracle, std::move(start));
        cfg.record_trace = !base.trace.empty();
        const auto result = run_episode(cfg);
        if (!base.trace.empty()) {
          std::ofstream t(indexed_path(base.trace, idx, matrix.size()));
          if (!t) throw std::runtime_error("cannot write trace file");
          write_trace(t, map, result.trace);
        }
        if (!base.heatmap.empty()) {
          write_heatmap(indexed_path(base.heatmap, idx, matrix.size()), map,
                        result.metrics.stop_counts);
        }
        auto rec = make_record(o, map_name, result);
        std::lock_guard lock(sink);
        log << to_csv(rec) << '\n';
        records[idx] = std::move(rec);
      } catch (const ScenarioError& e) {
        std::lock_guard lock(sink);
        errors[idx] = std::string("usage: ") + e.what();
      } catch (const std::exception& e) {
        std::lock_guard lock(sink);
        errors[idx] = e.what();
      }
    }
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(base.jobs), matrix.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t idx = 0; idx < errors.size(); ++idx) {
    if (errors[idx].starts_with("usage: ")) throw UsageError(errors[idx].substr(7));
    if (!errors[idx].empty()) {
      throw std::runtime_error("episode " + std::to_string(idx) + " aborted: " + errors[idx]);
    }
  }
  std::vector<RunRecord> out;
  for (auto& r : records) out.push_back(std::move(*r));
  if (!base.out.empty()) {
    std::ofstream csv(base.out);
    if (!csv) throw std::runtime_error("cannot write " + base.out);
    csv << kCsvHeader << '\n';
    for (const auto& r : out) csv << to_csv(r) << '\n';
  }
  return out;
}

}  // namespace lllg::bench
