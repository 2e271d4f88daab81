#pragma once

/// Domain types: identifiers, the weekly plan matrix, social-tie tables,
/// vehicles and points of interest.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "siov/random.hpp"

namespace siov {

inline constexpr int kHoursPerWeek = 168;
inline constexpr std::size_t kPlanRows = 3;
inline constexpr int kMinDuration = 1;
inline constexpr int kMaxDuration = 5;

/// Simulation time in absolute hours since the start of a run.
using Hour = std::int64_t;

template <class Tag>
struct Id {
  std::uint32_t value{};

  friend constexpr auto operator<=>(const Id&, const Id&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value;
  }
};

using VehicleId = Id<struct VehicleTag>;
using PoiId = Id<struct PoiTag>;
using HomeId = Id<struct HomeTag>;

struct Cell {
  int x{};
  int y{};
  friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

struct PlanRow {
  PoiId poi;
  int time{};      // hour of week, [0, 168)
  int duration{};  // hours, >= 1
  double experience{1.0};
  bool suspended{false};

  friend bool operator==(const PlanRow&, const PlanRow&) = default;
};

/// A vehicle's weekly schedule. Always exactly three rows; rows are only
/// ever overwritten in place.
struct Plan {
  std::array<PlanRow, kPlanRows> rows{};

  bool any_suspended() const {
    return std::ranges::any_of(rows, &PlanRow::suspended);
  }
  bool all_suspended() const {
    return std::ranges::all_of(rows, &PlanRow::suspended);
  }

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Draws a random weekly plan: PoI uniform over `poi_ids`, time uniform over
/// the hours of the week, duration uniform on [1, 5].
template <RandomSource R>
Plan new_plan(R& rng, std::span<const PoiId> poi_ids) {
  if (poi_ids.empty()) {
    throw std::invalid_argument("new_plan: no points of interest to choose from");
  }
  Plan plan;
  for (auto& row : plan.rows) {
    row.poi = poi_ids[rng.below(poi_ids.size())];
    row.time = static_cast<int>(uniform_int(rng, 0, kHoursPerWeek - 1));
    row.duration = static_cast<int>(uniform_int(rng, kMinDuration, kMaxDuration));
    row.experience = 1.0;
    row.suspended = false;
  }
  return plan;
}

struct TieRecord {
  VehicleId peer;
  Hour last_encounter{};
  int encounters{};
  bool strong{false};

  friend bool operator==(const TieRecord&, const TieRecord&) = default;
};

/// Contact records held by one vehicle, keyed by peer id. Iteration is in
/// ascending peer order.
class TieTable {
 public:
  TieTable() = default;
  explicit TieTable(VehicleId owner) : owner_(owner) {}

  VehicleId owner() const { return owner_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  bool contains(VehicleId peer) const { return records_.contains(peer); }

  const TieRecord* find(VehicleId peer) const {
    auto it = records_.find(peer);
    return it == records_.end() ? nullptr : &it->second;
  }

  /// Peer at position `index` in ascending-id order.
  VehicleId peer_at(std::size_t index) const {
    if (index >= records_.size()) throw std::out_of_range("TieTable::peer_at");
    return std::next(records_.begin(), static_cast<std::ptrdiff_t>(index))->first;
  }

  /// Counts one co-location encounter with `peer` at hour `now`. The tie
  /// turns strong once the count reaches `threshold` and never reverts.
  const TieRecord& record_encounter(VehicleId peer, Hour now, int threshold) {
    check_peer(peer);
    auto [it, inserted] = records_.try_emplace(peer, TieRecord{peer, now, 0, false});
    TieRecord& rec = it->second;
    if (!inserted && now < rec.last_encounter) {
      throw std::invalid_argument("TieTable::record_encounter: time went backwards");
    }
    rec.last_encounter = now;
    rec.encounters += 1;
    if (rec.encounters >= threshold) rec.strong = true;
    return rec;
  }

  /// Inserts a tie that is strong from the start, as produced by triadic
  /// closure. Its counter is set to the threshold. No-op if a record exists.
  bool insert_strong(VehicleId peer, Hour now, int threshold) {
    check_peer(peer);
    return records_.try_emplace(peer, TieRecord{peer, now, std::max(threshold, 1), true})
        .second;
  }

  /// Peers with a strong tie, ascending.
  std::vector<VehicleId> strong_friends() const {
    std::vector<VehicleId> out;
    for (const auto& [peer, rec] : records_) {
      if (rec.strong) out.push_back(peer);
    }
    return out;
  }

  std::size_t strong_count() const {
    return static_cast<std::size_t>(std::ranges::count_if(
        records_, [](const auto& kv) { return kv.second.strong; }));
  }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  friend bool operator==(const TieTable&, const TieTable&) = default;

 private:
  void check_peer(VehicleId peer) const {
    if (peer == owner_) {
      throw std::invalid_argument("TieTable: a vehicle cannot hold a tie to itself");
    }
  }

  VehicleId owner_{};
  std::map<VehicleId, TieRecord> records_;
};

enum class VehicleState : std::uint8_t {
  AtHome = 0,
  Outbound = 1,
  AtPoi = 2,
  Communicating = 3,
};

inline const char* to_string(VehicleState s) {
  switch (s) {
    case VehicleState::AtHome: return "at_home";
    case VehicleState::Outbound: return "outbound";
    case VehicleState::AtPoi: return "at_poi";
    case VehicleState::Communicating: return "communicating";
  }
  return "?";
}

class Vehicle {
 public:
  Vehicle() = default;
  Vehicle(VehicleId id, HomeId home, double expectation, Plan plan)
      : id(id), home(home), plan(plan), ties(id), expectation_(expectation) {}

  VehicleId id;
  HomeId home;
  VehicleState state{VehicleState::AtHome};
  std::optional<PoiId> current_poi;  // destination while outbound
  int remaining_stay{0};
  std::optional<std::size_t> active_row;  // plan row being executed
  Plan plan;
  TieTable ties;
  bool visited_this_week{false};

  /// Fixed personal quality bar.
  double expectation() const { return expectation_; }

  bool at_poi() const {
    return state == VehicleState::AtPoi || state == VehicleState::Communicating;
  }

  friend bool operator==(const Vehicle&, const Vehicle&) = default;

 private:
  double expectation_{0.0};
};

struct Poi {
  PoiId id;
  double quality{};
  Cell position;
  friend bool operator==(const Poi&, const Poi&) = default;
};

struct Home {
  HomeId id;
  Cell position;
  friend bool operator==(const Home&, const Home&) = default;
};

}  // namespace siov
