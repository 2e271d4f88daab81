#pragma once

/// World construction and the hourly tick that drives every vehicle through
/// its state machine:
///
///   AtHome --check_outbound--> Outbound --move_location--> AtPoi
///     ^                                                      |
///     +---- move_home <---- communicate <---- check_inbound -+
///
/// A vehicle whose stay runs out enters Communicating and, in the same hour,
/// talks to its neighbours and returns home.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ranges>
#include <stdexcept>
#include <utility>
#include <vector>

#include "siov/config.hpp"
#include "siov/core.hpp"
#include "siov/metrics.hpp"
#include "siov/quality.hpp"
#include "siov/random.hpp"
#include "siov/strategy.hpp"

namespace siov {

/// Observer with no hooks. Any subset of the following members may be
/// provided by a custom observer:
///
///   on_depart(const Vehicle&, Hour, const Visit&)
///   on_arrive(const Vehicle&, Hour, const Poi&, double experience)
///   on_communicate(const Vehicle&, Hour)
///   on_encounter(VehicleId, VehicleId, Hour)
///   on_return(const Vehicle&, Hour)
///   on_plan_change(const Vehicle&, Hour)  after a strategy edits the plan
///   on_tick_end(const World&, const MetricsSample&)
struct NullObserver {};

template <QualityModel Q = RandomWalkQuality>
class BasicWorld {
 public:
  BasicWorld() = default;

  /// Assembles a world from explicit parts. PoIs, homes and vehicles are
  /// sorted by id; ids must be unique.
  BasicWorld(SimConfig config, Q quality_model, std::vector<Poi> pois, std::vector<Home> homes,
             std::vector<Vehicle> vehicles, Rng rng)
      : config_(config),
        quality_model_(std::move(quality_model)),
        pois_(std::move(pois)),
        homes_(std::move(homes)),
        vehicles_(std::move(vehicles)),
        rng_(std::move(rng)) {
    sort_unique(pois_, &Poi::id, "poi");
    sort_unique(homes_, &Home::id, "home");
    sort_unique(vehicles_, &Vehicle::id, "vehicle");
  }

  const SimConfig& config() const { return config_; }
  const Q& quality_model() const { return quality_model_; }
  Hour clock() const { return clock_; }
  int hour_of_week() const { return static_cast<int>(clock_ % kHoursPerWeek); }

  std::span<const Poi> pois() const { return pois_; }
  std::span<Poi> pois() { return pois_; }
  std::span<const Home> homes() const { return homes_; }
  std::span<const Vehicle> vehicles() const { return vehicles_; }
  std::span<Vehicle> vehicles() { return vehicles_; }
  Rng& rng() { return rng_; }

  Poi& poi(PoiId id) { return *lookup(pois_, id, &Poi::id); }
  const Poi& poi(PoiId id) const { return *lookup(pois_, id, &Poi::id); }
  Vehicle& vehicle(VehicleId id) { return *lookup(vehicles_, id, &Vehicle::id); }
  const Vehicle& vehicle(VehicleId id) const { return *lookup(vehicles_, id, &Vehicle::id); }

  void advance_clock() { ++clock_; }

  friend bool operator==(const BasicWorld&, const BasicWorld&) = default;

 private:
  template <class T, class Key>
  static void sort_unique(std::vector<T>& items, Key key, const char* what) {
    std::ranges::sort(items, {}, key);
    auto dup = std::ranges::adjacent_find(items, {}, key);
    if (dup != items.end()) {
      throw SetupError(std::string("duplicate ") + what + " id");
    }
  }

  template <class Vec, class IdT, class Key>
  static auto lookup(Vec& items, IdT id, Key key) -> decltype(&items[0]) {
    // Ids produced by setup are dense, so try the direct slot first.
    if (id.value < items.size() && std::invoke(key, items[id.value]) == id) {
      return &items[id.value];
    }
    auto it = std::ranges::lower_bound(items, id, {}, key);
    if (it == items.end() || std::invoke(key, *it) != id) {
      throw std::out_of_range("unknown id " + std::to_string(id.value));
    }
    return &*it;
  }

  SimConfig config_{};
  Q quality_model_{};
  std::vector<Poi> pois_;
  std::vector<Home> homes_;
  std::vector<Vehicle> vehicles_;
  Hour clock_{0};
  Rng rng_{};
};

using World = BasicWorld<RandomWalkQuality>;

/// Lays out PoIs and homes on distinct random cells, attaches vehicles to
/// random homes, and draws plans, expectations and initial qualities.
template <QualityModel Q>
BasicWorld<Q> setup(const SimConfig& config, std::uint64_t seed, Q quality_model) {
  config.validate_world();
  const auto cells_total =
      static_cast<std::int64_t>(config.grid_size) * static_cast<std::int64_t>(config.grid_size);
  if (static_cast<std::int64_t>(config.poi_count) + config.home_count > cells_total) {
    throw SetupError("grid too small for the requested PoIs and homes");
  }

  Rng rng(seed);

  // Partial Fisher-Yates over cell indices gives distinct cells.
  const auto needed = static_cast<std::size_t>(config.poi_count + config.home_count);
  std::vector<std::int64_t> cell_index(static_cast<std::size_t>(cells_total));
  for (std::size_t i = 0; i < cell_index.size(); ++i) cell_index[i] = static_cast<std::int64_t>(i);
  for (std::size_t i = 0; i < needed; ++i) {
    const auto j = i + rng.below(cell_index.size() - i);
    std::swap(cell_index[i], cell_index[j]);
  }
  auto cell_at = [&](std::size_t i) {
    return Cell{static_cast<int>(cell_index[i] % config.grid_size),
                static_cast<int>(cell_index[i] / config.grid_size)};
  };

  std::vector<Poi> pois;
  std::vector<PoiId> poi_ids;
  for (int p = 0; p < config.poi_count; ++p) {
    const PoiId id{static_cast<std::uint32_t>(p)};
    pois.push_back(Poi{id, quality_model.initial(rng), cell_at(static_cast<std::size_t>(p))});
    poi_ids.push_back(id);
  }

  std::vector<Home> homes;
  for (int h = 0; h < config.home_count; ++h) {
    homes.push_back(Home{HomeId{static_cast<std::uint32_t>(h)},
                         cell_at(static_cast<std::size_t>(config.poi_count + h))});
  }

  std::vector<Vehicle> vehicles;
  const int vehicle_count = config.vehicle_count();
  vehicles.reserve(static_cast<std::size_t>(vehicle_count));
  for (int v = 0; v < vehicle_count; ++v) {
    const HomeId home{static_cast<std::uint32_t>(rng.below(homes.size()))};
    const double expectation = rng.uniform01();
    Plan plan = new_plan(rng, std::span<const PoiId>(poi_ids));
    vehicles.emplace_back(VehicleId{static_cast<std::uint32_t>(v)}, home, expectation, plan);
  }

  return BasicWorld<Q>(config, std::move(quality_model), std::move(pois), std::move(homes),
                       std::move(vehicles), std::move(rng));
}

inline World setup(const SimConfig& config, std::uint64_t seed) {
  return setup(config, seed, RandomWalkQuality{config.step_sigma});
}

struct TickReport {
  MetricsSample sample;
  std::optional<int> week_no_visit;  // set when this tick closed a week
};

namespace detail {

template <class Obs, class... Args>
void notify_depart(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_depart(std::forward<Args>(args)...); })
    obs.on_depart(std::forward<Args>(args)...);
}
template <class Obs, class... Args>
void notify_arrive(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_arrive(std::forward<Args>(args)...); })
    obs.on_arrive(std::forward<Args>(args)...);
}
template <class Obs, class... Args>
void notify_communicate(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_communicate(std::forward<Args>(args)...); })
    obs.on_communicate(std::forward<Args>(args)...);
}
template <class Obs, class... Args>
void notify_encounter(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_encounter(std::forward<Args>(args)...); })
    obs.on_encounter(std::forward<Args>(args)...);
}
template <class Obs, class... Args>
void notify_return(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_return(std::forward<Args>(args)...); })
    obs.on_return(std::forward<Args>(args)...);
}
template <class Obs, class... Args>
void notify_plan_change(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_plan_change(std::forward<Args>(args)...); })
    obs.on_plan_change(std::forward<Args>(args)...);
}
template <class Obs, class... Args>
void notify_tick_end(Obs& obs, Args&&... args) {
  if constexpr (requires { obs.on_tick_end(std::forward<Args>(args)...); })
    obs.on_tick_end(std::forward<Args>(args)...);
}

template <QualityModel Q>
OutboundDecision check_outbound(BasicWorld<Q>& world, Vehicle& v) {
  const int hour = world.hour_of_week();
  switch (world.config().strategy) {
    case StrategyKind::AsPlanned:
      return check_outbound_as_planned(v.plan, hour);
    case StrategyKind::Blacklist:
      return check_outbound_blacklist(v.plan, hour, v.expectation());
    case StrategyKind::Replace:
    case StrategyKind::ReplaceWithClosure: {
      const auto& w = world;
      auto friend_plans =
          v.ties | std::views::filter([](const auto& kv) { return kv.second.strong; }) |
          std::views::transform(
              [&w](const auto& kv) -> const Plan& { return w.vehicle(kv.first).plan; });
      return check_outbound_replace(v.plan, hour, v.expectation(), friend_plans);
    }
  }
  return std::nullopt;
}

template <QualityModel Q, class Obs>
void communicate(BasicWorld<Q>& world, std::size_t self, Obs& obs) {
  const SimConfig& cfg = world.config();
  if (!uses_communication(cfg.strategy)) return;

  auto vehicles = world.vehicles();
  Vehicle& v = vehicles[self];
  const Hour now = world.clock();
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (i == self) continue;
    Vehicle& other = vehicles[i];
    if (!other.at_poi() || other.current_poi != v.current_poi) continue;
    v.ties.record_encounter(other.id, now, cfg.strong_tie_threshold);
    other.ties.record_encounter(v.id, now, cfg.strong_tie_threshold);
    notify_encounter(obs, v.id, other.id, now);
  }

  if (cfg.strategy == StrategyKind::ReplaceWithClosure) {
    triadic_closure(
        v.id, [&world](VehicleId id) -> TieTable& { return world.vehicle(id).ties; },
        world.rng(),
        ClosureParams{now, cfg.strong_tie_threshold, cfg.closure_requires_both_strong});
  }
}

inline void move_home(Vehicle& v) {
  v.state = VehicleState::AtHome;
  v.current_poi.reset();
  v.active_row.reset();
  v.remaining_stay = 0;
}

}  // namespace detail

/// Advances the world by one hour. Vehicles act in ascending id order, each
/// running the handler of the state it held at the start of its turn; then
/// PoI qualities step, metrics are sampled and the clock moves on.
template <QualityModel Q, class Obs = NullObserver>
TickReport tick(BasicWorld<Q>& world, Obs&& obs = {}) {
  const Hour now = world.clock();
  auto vehicles = world.vehicles();

  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    Vehicle& v = vehicles[i];
    switch (v.state) {
      case VehicleState::AtHome: {
        std::optional<Plan> before;
        if constexpr (requires { obs.on_plan_change(std::as_const(v), now); }) before = v.plan;
        auto visit = detail::check_outbound(world, v);
        if (before && *before != v.plan) detail::notify_plan_change(obs, std::as_const(v), now);
        if (visit) {
          v.state = VehicleState::Outbound;
          v.current_poi = visit->poi;
          v.remaining_stay = visit->duration;
          v.active_row = visit->row;
          detail::notify_depart(obs, std::as_const(v), now, *visit);
        }
        break;
      }
      case VehicleState::Outbound: {
        const Poi& poi = world.poi(*v.current_poi);
        const double exp = experience_of(poi.quality, world.rng());
        v.plan.rows[*v.active_row].experience = exp;
        v.state = VehicleState::AtPoi;
        v.visited_this_week = true;
        detail::notify_arrive(obs, std::as_const(v), now, poi, exp);
        break;
      }
      case VehicleState::AtPoi: {
        if (--v.remaining_stay > 0) break;
        v.state = VehicleState::Communicating;
        [[fallthrough]];
      }
      case VehicleState::Communicating: {
        detail::notify_communicate(obs, std::as_const(v), now);
        detail::communicate(world, i, obs);
        detail::move_home(v);
        detail::notify_return(obs, std::as_const(v), now);
        break;
      }
    }
  }

  for (auto& poi : world.pois()) {
    poi.quality = world.quality_model().step(poi.quality, world.rng());
  }

  const std::span<const Poi> pois = world.pois();
  const std::span<const Vehicle> cvehicles = world.vehicles();
  const auto occupancy = poi_occupancy(pois, cvehicles);
  TickReport report;
  report.sample = MetricsSample{now, quality_index(cvehicles),
                                connectivity_index(occupancy, cvehicles.size()),
                                poi_utilization_sd(occupancy)};
  detail::notify_tick_end(obs, std::as_const(world), report.sample);

  world.advance_clock();
  if (world.clock() % kHoursPerWeek == 0) report.week_no_visit = weekly_no_visit(vehicles);
  return report;
}

/// Runs an existing world for 168 x weeks ticks from its current clock.
template <QualityModel Q, class Obs = NullObserver>
RunSeries run(BasicWorld<Q>& world, int weeks, Obs&& obs = {}) {
  RunSeries series;
  if (weeks <= 0) return series;
  const auto ticks = static_cast<std::size_t>(weeks) * kHoursPerWeek;
  series.samples.reserve(ticks);
  series.weekly_no_visit.reserve(static_cast<std::size_t>(weeks));
  for (std::size_t t = 0; t < ticks; ++t) {
    auto report = tick(world, obs);
    series.samples.push_back(report.sample);
    if (report.week_no_visit) series.weekly_no_visit.push_back(*report.week_no_visit);
  }
  return series;
}

/// Sets up a world from `run_seed` and runs it for config.weeks weeks.
template <QualityModel Q, class Obs = NullObserver>
RunSeries run(const SimConfig& config, std::uint64_t run_seed, Q quality_model, Obs&& obs = {}) {
  if (config.weeks <= 0) return {};
  auto world = setup(config, run_seed, std::move(quality_model));
  return run(world, config.weeks, std::forward<Obs>(obs));
}

template <class Obs = NullObserver>
  requires(!QualityModel<std::remove_cvref_t<Obs>>)
RunSeries run(const SimConfig& config, std::uint64_t run_seed, Obs&& obs = {}) {
  return run(config, run_seed, RandomWalkQuality{config.step_sigma}, std::forward<Obs>(obs));
}

}  // namespace siov
