// Umbrella header.

#pragma once

#include "aoi/analytics.hpp"
#include "aoi/channel.hpp"
#include "aoi/csv.hpp"
#include "aoi/experiment.hpp"
#include "aoi/optimizer.hpp"
#include "aoi/rng.hpp"
#include "aoi/simulator.hpp"
#include "aoi/stats.hpp"
