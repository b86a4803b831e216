#pragma once

// Internal pointwise evaluators shared between the analytic translation units.

#include "aoi/analytic.hpp"

namespace aoi::detail {

// Pr{Delta > k} by direct positive tail summation (no 1 - cdf cancellation).
double star_violation(const SystemParams& params, int k);
double preemptive_violation(const SystemParams& params, int n_p, int k);

}  // namespace aoi::detail
