#pragma once

// Umbrella header: data-driven modeling, FIR identification and
// receding-horizon predictive control from measured trajectories.

#include "smm/bench.hpp"
#include "smm/control.hpp"
#include "smm/csv.hpp"
#include "smm/estimator.hpp"
#include "smm/kernel.hpp"
#include "smm/lti.hpp"
#include "smm/numeric.hpp"
#include "smm/rng.hpp"
#include "smm/signal_matrix.hpp"
#include "smm/stats.hpp"
