#pragma once

#include <functional>
#include <string>
#include <vector>

#include "aoi/age_state.hpp"
#include "aoi/pmf.hpp"

namespace aoi {

// Stationary probabilities over an AgeStateSpace, indexed by rank.
// clamped_top marks tables produced by the truncated chain, where the v1 =
// n_cap level is a saturation artifact: marginals drop it and fold it into the
// tail bound. tail_bound covers mass outside the represented states and
// tail_ratio the geometric decay it derives from.
struct StationaryTable {
  AgeStateSpace space;
  std::vector<double> probs;
  double residual = 0.0;
  long iterations = 0;
  bool converged = true;
  bool clamped_top = false;
  double tail_bound = 0.0;
  double tail_ratio = 0.0;
  std::string note;

  double prob(const AgeState& s) const;
  double prob(std::uint64_t rank) const { return probs[rank]; }
  double total() const;
};

// Marginal distribution of one state component, optionally restricted to and
// renormalized by a condition. Component 0 (the AoI) starts at 1, others at 0.
Pmf marginal(const StationaryTable& table, int component,
             const std::function<bool(const AgeState&)>& condition = nullptr);

}  // namespace aoi
