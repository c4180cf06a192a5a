#pragma once

// Umbrella header for the whole toolkit.

#include "nfl/case1.hpp"
#include "nfl/case2.hpp"
#include "nfl/chaos.hpp"
#include "nfl/csv.hpp"
#include "nfl/errors.hpp"
#include "nfl/ifs.hpp"
#include "nfl/noise.hpp"
#include "nfl/parallel.hpp"
#include "nfl/rational.hpp"
#include "nfl/rng.hpp"
#include "nfl/simulate.hpp"
#include "nfl/version.hpp"
