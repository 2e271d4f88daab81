#pragma once

/// Per-hour evaluation measures: quality-index, connectivity-index and the
/// standard deviation of PoI utilization (SDU), plus the weekly count of
/// vehicles that made no visit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "siov/core.hpp"

namespace siov {

struct MetricsSample {
  Hour clock{};
  double quality_index{};
  double connectivity_index{};
  double sdu{};
  friend bool operator==(const MetricsSample&, const MetricsSample&) = default;
};

struct RunSeries {
  std::vector<MetricsSample> samples;   // one per tick
  std::vector<int> weekly_no_visit;     // one per completed week
  friend bool operator==(const RunSeries&, const RunSeries&) = default;
};

/// Mean of every experience cell in every plan, suspended rows included.
inline double quality_index(std::span<const Vehicle> vehicles) {
  if (vehicles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& v : vehicles) {
    for (const auto& row : v.plan.rows) sum += row.experience;
  }
  return sum / static_cast<double>(vehicles.size() * kPlanRows);
}

/// Number of vehicles parked at each PoI, in the order of `pois`.
inline std::vector<std::size_t> poi_occupancy(std::span<const Poi> pois,
                                              std::span<const Vehicle> vehicles) {
  std::vector<std::size_t> counts(pois.size(), 0);
  for (const auto& v : vehicles) {
    if (!v.at_poi()) continue;
    auto it = std::ranges::find(pois, *v.current_poi, &Poi::id);
    if (it != pois.end()) ++counts[static_cast<std::size_t>(it - pois.begin())];
  }
  return counts;
}

/// Mean number of other vehicles co-located with each vehicle this hour.
/// A PoI holding n vehicles contributes n(n-1) to the sum.
inline double connectivity_index(std::span<const std::size_t> occupancy,
                                 std::size_t vehicle_count) {
  if (vehicle_count == 0) return 0.0;
  double links = 0.0;
  for (auto n : occupancy) {
    if (n > 1) links += static_cast<double>(n) * static_cast<double>(n - 1);
  }
  return links / static_cast<double>(vehicle_count);
}

inline double connectivity_index(std::span<const Poi> pois, std::span<const Vehicle> vehicles) {
  const auto occ = poi_occupancy(pois, vehicles);
  return connectivity_index(occ, vehicles.size());
}

/// Population standard deviation (divisor N) of PoI occupant counts.
inline double poi_utilization_sd(std::span<const std::size_t> occupancy) {
  if (occupancy.empty()) return 0.0;
  const double n = static_cast<double>(occupancy.size());
  double mean = 0.0;
  for (auto c : occupancy) mean += static_cast<double>(c);
  mean /= n;
  double ss = 0.0;
  for (auto c : occupancy) {
    const double d = static_cast<double>(c) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / n);
}

inline double poi_utilization_sd(std::span<const Poi> pois, std::span<const Vehicle> vehicles) {
  const auto occ = poi_occupancy(pois, vehicles);
  return poi_utilization_sd(occ);
}

/// Counts vehicles that completed no arrival during the week just ended,
/// then clears the per-vehicle flags for the next week.
inline int weekly_no_visit(std::span<Vehicle> vehicles) {
  int count = 0;
  for (auto& v : vehicles) {
    if (!v.visited_this_week) ++count;
    v.visited_this_week = false;
  }
  return count;
}

}  // namespace siov
