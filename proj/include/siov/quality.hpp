#pragma once

/// PoI service quality over time, and what a visiting vehicle perceives.

#include <algorithm>
#include <concepts>

#include "siov/random.hpp"

namespace siov {

inline constexpr double kExperienceSpread = 0.25;

template <RandomSource R>
double init_quality(R& rng) {
  return rng.uniform01();
}

/// One hourly step of a clamped uniform random walk.
template <RandomSource R>
double step_quality(double q, double step_sigma, R& rng) {
  const double delta = uniform_real(rng, -step_sigma, step_sigma);
  return std::clamp(q + delta, 0.0, 1.0);
}

/// Offered quality perturbed multiplicatively by up to +-25%. Not clamped
/// above 1.
template <RandomSource R>
double experience_of(double q, R& rng) {
  const double u = uniform_real(rng, -kExperienceSpread, kExperienceSpread);
  return q * (1.0 + u);
}

/// How PoI quality is initialised and evolves. The engine is parameterised
/// on this so the process can be swapped.
template <class M>
concept QualityModel = requires(const M& m, double q, Rng& rng) {
  { m.initial(rng) } -> std::convertible_to<double>;
  { m.step(q, rng) } -> std::convertible_to<double>;
};

struct RandomWalkQuality {
  double step_sigma{0.05};

  template <RandomSource R>
  double initial(R& rng) const {
    return init_quality(rng);
  }
  template <RandomSource R>
  double step(double q, R& rng) const {
    return step_quality(q, step_sigma, rng);
  }

  friend bool operator==(const RandomWalkQuality&, const RandomWalkQuality&) = default;
};

static_assert(QualityModel<RandomWalkQuality>);

}  // namespace siov
