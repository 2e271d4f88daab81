#pragma once

/// Outbound selection strategies and the social operators they rely on:
/// blacklisting of disappointing plan rows, replacement of suspended rows
/// with rows borrowed from strong-tie friends, and triadic closure.

#include <array>
#include <cstddef>
#include <optional>
#include <ranges>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "siov/core.hpp"
#include "siov/random.hpp"

namespace siov {

enum class StrategyKind : std::uint8_t {
  AsPlanned,
  Blacklist,
  Replace,
  ReplaceWithClosure,
};

inline constexpr std::array<StrategyKind, 4> kAllStrategies{
    StrategyKind::AsPlanned, StrategyKind::Blacklist, StrategyKind::Replace,
    StrategyKind::ReplaceWithClosure};

inline std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::AsPlanned: return "as_planned";
    case StrategyKind::Blacklist: return "blacklist";
    case StrategyKind::Replace: return "replace";
    case StrategyKind::ReplaceWithClosure: return "replace_closure";
  }
  return "?";
}

inline std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (auto s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  if (name == "asplanned") return StrategyKind::AsPlanned;
  if (name == "replace_with_closure") return StrategyKind::ReplaceWithClosure;
  return std::nullopt;
}

/// Strategies that exchange ties while parked at a PoI.
constexpr bool uses_communication(StrategyKind s) {
  return s == StrategyKind::Replace || s == StrategyKind::ReplaceWithClosure;
}

struct Visit {
  PoiId poi;
  int duration{};
  std::size_t row{};
  friend bool operator==(const Visit&, const Visit&) = default;
};

using OutboundDecision = std::optional<Visit>;

/// Executes the plan as written: the lowest-index row scheduled for this
/// hour, regardless of experience or suspension.
inline OutboundDecision check_outbound_as_planned(const Plan& plan, int hour_of_week) {
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    const auto& row = plan.rows[i];
    if (row.time == hour_of_week) return Visit{row.poi, row.duration, i};
  }
  return std::nullopt;
}

/// Visits the scheduled row if its last experience beat the expectation.
/// Otherwise suspends it and looks for the first other live row whose
/// experience is at least the expectation; that row is moved to the current
/// hour and visited instead.
inline OutboundDecision check_outbound_blacklist(Plan& plan, int hour_of_week,
                                                 double expectation) {
  std::optional<std::size_t> scheduled;
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    if (plan.rows[i].time == hour_of_week && !plan.rows[i].suspended) {
      scheduled = i;
      break;
    }
  }
  if (!scheduled) return std::nullopt;

  PlanRow& row = plan.rows[*scheduled];
  if (row.experience > expectation) return Visit{row.poi, row.duration, *scheduled};

  row.suspended = true;
  for (std::size_t j = 0; j < plan.rows.size(); ++j) {
    PlanRow& alt = plan.rows[j];
    if (!alt.suspended && alt.experience >= expectation) {
      alt.time = hour_of_week;
      return Visit{alt.poi, alt.duration, j};
    }
  }
  return std::nullopt;
}

/// Overwrites each suspended row with the first live row found among the
/// friends' plans. `friend_plans` yields `const Plan&` in ascending friend
/// id order; it is only read.
template <std::ranges::input_range R>
  requires std::convertible_to<std::ranges::range_reference_t<R>, const Plan&>
void replace_suspended(Plan& plan, R&& friend_plans) {
  for (auto& row : plan.rows) {
    if (!row.suspended) continue;
    for (const Plan& donor : friend_plans) {
      auto live = std::ranges::find_if(donor.rows, [](const PlanRow& r) { return !r.suspended; });
      if (live != donor.rows.end()) {
        row = *live;
        break;
      }
    }
  }
}

/// Replacement followed by blacklist selection on the updated plan.
template <std::ranges::input_range R>
OutboundDecision check_outbound_replace(Plan& plan, int hour_of_week, double expectation,
                                        R&& friend_plans) {
  if (plan.any_suspended()) replace_suspended(plan, std::forward<R>(friend_plans));
  return check_outbound_blacklist(plan, hour_of_week, expectation);
}

struct ClosureParams {
  Hour now{};
  int threshold{1};
  bool requires_both_strong{false};
};

/// One triadic-closure attempt around `self`. Two contacts are drawn
/// independently from self's table; if they differ and the first is a
/// strong tie (and, optionally, the second too), they are joined by a
/// strong tie in both directions where missing.
///
/// `table_of(id)` must return a mutable TieTable& for any vehicle id.
/// Returns true if any record was created.
template <RandomSource Rand, class TableOf>
bool triadic_closure(VehicleId self, TableOf&& table_of, Rand& rng, const ClosureParams& params) {
  const TieTable& mine = table_of(self);
  const std::size_t nof = mine.size();
  if (nof <= 1) return false;

  const std::size_t fv_index = rng.below(nof);
  const std::size_t sv_index = rng.below(nof);
  if (fv_index == sv_index) return false;

  const VehicleId fv = mine.peer_at(fv_index);
  const VehicleId sv = mine.peer_at(sv_index);
  if (!mine.find(fv)->strong) return false;
  if (params.requires_both_strong && !mine.find(sv)->strong) return false;

  bool created = false;
  created |= table_of(fv).insert_strong(sv, params.now, params.threshold);
  created |= table_of(sv).insert_strong(fv, params.now, params.threshold);
  return created;
}

}  // namespace siov
