#pragma once

#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

// Truncated probability mass function on {support_start, support_start+1, ...}
// with an explicit upper bound on the mass beyond the truncation. tail_ratio
// records the geometric decay the bound was derived from (0 when unknown).
struct Pmf {
  int support_start = 0;
  std::vector<double> probs;  // probs[i] = Pr{X = support_start + i}
  double tail_bound = 0.0;
  double tail_ratio = 0.0;

  int support_end() const { return support_start + static_cast<int>(probs.size()) - 1; }
  double at(int n) const;
  double sum() const;
  void validate() const;  // throws InvalidParams on a broken invariant
};

// Sum of n * p_n over the truncated support.
double pmf_mean(const Pmf& pmf);

// Half-width of the interval around pmf_mean accounting for truncated mass:
// tail_bound times a geometric-tail estimate of where that mass sits.
double pmf_mean_error_bound(const Pmf& pmf);

// (1/2) sum |a_n - b_n| over the union support, plus (1/2)(tails) as slack.
double pmf_total_variation(const Pmf& a, const Pmf& b);

// Conservative bound on mass past n_max for sequences decaying at least like
// ratio^n up to a quadratic polynomial factor.
double geometric_tail_bound(double last_prob, double ratio, int n_max);

}  // namespace aoi
