#pragma once

/// Batch experiments: configuration loading, seeded multi-run execution,
/// per-tick averaging and CSV output.
///
/// Config files are flat `key = value` text. `#` starts a comment. Lists are
/// written `[a, b]`. Recognised keys:
///
///   grid_size, poi_count, home_count, weeks, runs, step_sigma, seed, jobs,
///   threshold (int or list), strategy (name, list of names, or `all`),
///   closure_requires_both_strong (bool), out (directory)

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "siov/config.hpp"
#include "siov/engine.hpp"
#include "siov/metrics.hpp"
#include "siov/random.hpp"
#include "siov/strategy.hpp"

namespace siov {

struct ExperimentSpec {
  SimConfig base{};
  std::vector<StrategyKind> strategies{kAllStrategies.begin(), kAllStrategies.end()};
  std::vector<int> thresholds{5};
  std::filesystem::path out_dir{"results"};
  std::uint64_t master_seed{0};
  int jobs{1};

  std::size_t cell_count() const { return strategies.size() * thresholds.size(); }

  void validate() const {
    base.validate();
    if (strategies.empty()) throw OutOfRangeError("strategy", "at least one strategy required");
    if (thresholds.empty()) throw OutOfRangeError("threshold", "at least one threshold required");
    for (int th : thresholds) {
      if (th < 1) throw OutOfRangeError("threshold", "must be >= 1");
    }
    if (jobs < 1) throw OutOfRangeError("jobs", "must be >= 1");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

inline std::vector<std::string_view> split_list(std::string_view value) {
  value = trim(value);
  if (!value.empty() && value.front() == '[') {
    if (value.back() != ']') throw ParseError("unterminated list: " + std::string(value));
    value = value.substr(1, value.size() - 2);
  }
  std::vector<std::string_view> items;
  while (true) {
    const auto comma = value.find(',');
    auto item = unquote(value.substr(0, comma));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return items;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = unquote(text);
  T out{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec == std::errc::result_out_of_range) {
    throw OutOfRangeError(std::string(key), "value does not fit: " + std::string(text));
  }
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError("invalid number for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return out;
}

// from_chars for double is missing from older libstdc++.
template <>
inline double parse_number<double>(std::string_view key, std::string_view text) {
  text = unquote(text);
  const std::string buf(text);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(buf, &used);
  } catch (const std::out_of_range&) {
    throw OutOfRangeError(std::string(key), "value does not fit: " + buf);
  } catch (const std::invalid_argument&) {
    used = 0;
  }
  if (buf.empty() || used != buf.size()) {
    throw ParseError("invalid number for " + std::string(key) + ": '" + buf + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  text = unquote(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError("invalid boolean for " + std::string(key) + ": '" + std::string(text) + "'");
}

}  // namespace detail

/// Applies one `key = value` setting. Shared by the config file reader and
/// the command-line overrides.
inline void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  using detail::parse_number;
  const std::string k(key);
  if (key == "grid_size") {
    spec.base.grid_size = parse_number<int>(key, value);
  } else if (key == "poi_count") {
    spec.base.poi_count = parse_number<int>(key, value);
  } else if (key == "home_count") {
    spec.base.home_count = parse_number<int>(key, value);
  } else if (key == "weeks") {
    spec.base.weeks = parse_number<int>(key, value);
  } else if (key == "runs") {
    spec.base.runs = parse_number<int>(key, value);
  } else if (key == "step_sigma") {
    spec.base.step_sigma = parse_number<double>(key, value);
  } else if (key == "seed") {
    spec.master_seed = parse_number<std::uint64_t>(key, value);
    spec.base.seed = spec.master_seed;
  } else if (key == "jobs") {
    spec.jobs = parse_number<int>(key, value);
  } else if (key == "closure_requires_both_strong") {
    spec.base.closure_requires_both_strong = detail::parse_bool(key, value);
  } else if (key == "out") {
    spec.out_dir = std::string(detail::unquote(value));
  } else if (key == "threshold") {
    spec.thresholds.clear();
    for (auto item : detail::split_list(value)) spec.thresholds.push_back(parse_number<int>(key, item));
    if (!spec.thresholds.empty()) spec.base.strong_tie_threshold = spec.thresholds.front();
  } else if (key == "strategy") {
    spec.strategies.clear();
    for (auto item : detail::split_list(value)) {
      if (item == "all") {
        spec.strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
        continue;
      }
      auto s = parse_strategy(item);
      if (!s) throw OutOfRangeError("strategy", "unknown strategy '" + std::string(item) + "'");
      spec.strategies.push_back(*s);
    }
    if (!spec.strategies.empty()) spec.base.strategy = spec.strategies.front();
  } else {
    throw UnknownKeyError(k);
  }
}

/// Parses config text. Missing keys keep their defaults. The result is
/// validated.
inline ExperimentSpec parse_config(std::string_view text) {
  ExperimentSpec spec;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_setting(spec, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  spec.validate();
  return spec;
}

inline ExperimentSpec load_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw MissingFileError(path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// A run failed; carries the seed needed to reproduce it.
class RunError : public std::runtime_error {
 public:
  RunError(std::size_t run_index, std::uint64_t seed, const std::string& what)
      : std::runtime_error("run " + std::to_string(run_index) + " (seed " +
                           std::to_string(seed) + ") failed: " + what),
        run_index_(run_index),
        seed_(seed) {}
  std::size_t run_index() const { return run_index_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t run_index_;
  std::uint64_t seed_;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Executes `runs` independent runs of `config`. Run i uses seed
/// split_seed(master_seed, i) regardless of which thread executes it.
/// The first failing run (by index) is rethrown as RunError.
inline std::vector<RunSeries> run_batch(const SimConfig& config, std::uint64_t master_seed,
                                        int runs, int jobs) {
  const auto n = static_cast<std::size_t>(std::max(runs, 0));
  std::vector<RunSeries> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run(config, split_seed(master_seed, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RunError(i, split_seed(master_seed, i), e.what());
    } catch (...) {
      throw RunError(i, split_seed(master_seed, i), "unknown exception");
    }
  }
  return results;
}

struct AggregateSeries {
  StrategyKind strategy{};
  int threshold{};
  std::size_t runs{};
  std::vector<MetricsSample> mean;           // per-tick mean across runs
  std::vector<double> weekly_no_visit_mean;  // per-week mean across runs
  std::vector<int> first_run_no_visit;       // per-week count, run 0 only
};

/// Per-tick arithmetic mean across runs, reduced in run-index order.
inline AggregateSeries aggregate(std::span<const RunSeries> runs) {
  AggregateSeries agg;
  agg.runs = runs.size();
  if (runs.empty()) return agg;

  const std::size_t ticks = runs.front().samples.size();
  const std::size_t weeks = runs.front().weekly_no_visit.size();
  for (const auto& r : runs) {
    if (r.samples.size() != ticks || r.weekly_no_visit.size() != weeks) {
      throw std::invalid_argument("aggregate: runs have different lengths");
    }
  }

  const double inv = 1.0 / static_cast<double>(runs.size());
  agg.mean.resize(ticks);
  for (std::size_t t = 0; t < ticks; ++t) {
    MetricsSample m{runs.front().samples[t].clock, 0.0, 0.0, 0.0};
    for (const auto& r : runs) {
      m.quality_index += r.samples[t].quality_index;
      m.connectivity_index += r.samples[t].connectivity_index;
      m.sdu += r.samples[t].sdu;
    }
    m.quality_index *= inv;
    m.connectivity_index *= inv;
    m.sdu *= inv;
    agg.mean[t] = m;
  }

  agg.weekly_no_visit_mean.assign(weeks, 0.0);
  for (std::size_t w = 0; w < weeks; ++w) {
    for (const auto& r : runs) agg.weekly_no_visit_mean[w] += r.weekly_no_visit[w];
    agg.weekly_no_visit_mean[w] *= inv;
  }
  agg.first_run_no_visit = runs.front().weekly_no_visit;
  return agg;
}

inline std::string cell_name(StrategyKind strategy, int threshold) {
  return std::string(to_string(strategy)) + "_th" + std::to_string(threshold);
}

inline std::string series_csv(const AggregateSeries& agg) {
  std::string out = "tick,quality_index,connectivity_index,sdu\n";
  char line[128];
  for (const auto& s : agg.mean) {
    std::snprintf(line, sizeof line, "%lld,%.6f,%.6f,%.6f\n", static_cast<long long>(s.clock),
                  s.quality_index, s.connectivity_index, s.sdu);
    out += line;
  }
  return out;
}

inline std::string no_visit_csv(const AggregateSeries& agg) {
  std::string out = "week,no_visit_count\n";
  for (std::size_t w = 0; w < agg.first_run_no_visit.size(); ++w) {
    out += std::to_string(w + 1) + "," + std::to_string(agg.first_run_no_visit[w]) + "\n";
  }
  return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw OutputError("failed writing " + path.string());
}

}  // namespace detail

/// Called after each finished cell.
using CellCallback = std::function<void(const AggregateSeries&)>;

/// Runs every (strategy, threshold) cell and writes
/// `<strategy>_th<threshold>.csv` and `<strategy>_th<threshold>_novisit.csv`
/// into the output directory.
inline std::vector<AggregateSeries> run_experiment(const ExperimentSpec& spec,
                                                   const CellCallback& on_cell = {}) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec || !std::filesystem::is_directory(spec.out_dir)) {
    throw OutputError("cannot create output directory " + spec.out_dir.string() +
                      (ec ? ": " + ec.message() : std::string{}));
  }

  std::vector<AggregateSeries> cells;
  for (auto strategy : spec.strategies) {
    for (int threshold : spec.thresholds) {
      SimConfig config = spec.base;
      config.strategy = strategy;
      config.strong_tie_threshold = threshold;
      config.seed = spec.master_seed;

      const auto runs = run_batch(config, spec.master_seed, config.runs, spec.jobs);
      AggregateSeries agg = aggregate(runs);
      agg.strategy = strategy;
      agg.threshold = threshold;

      const auto name = cell_name(strategy, threshold);
      detail::write_file(spec.out_dir / (name + ".csv"), series_csv(agg));
      detail::write_file(spec.out_dir / (name + "_novisit.csv"), no_visit_csv(agg));
      if (on_cell) on_cell(agg);
      cells.push_back(std::move(agg));
    }
  }
  return cells;
}

}  // namespace siov
