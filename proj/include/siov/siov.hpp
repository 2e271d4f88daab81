#pragma once

#include "siov/config.hpp"
#include "siov/core.hpp"
#include "siov/engine.hpp"
#include "siov/experiment.hpp"
#include "siov/metrics.hpp"
#include "siov/quality.hpp"
#include "siov/random.hpp"
#include "siov/strategy.hpp"
