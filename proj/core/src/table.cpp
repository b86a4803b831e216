#include "aoi/table.hpp"

#include <numeric>

namespace aoi {

double StationaryTable::prob(const AgeState& s) const { return probs[space.rank(s)]; }

double StationaryTable::total() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

Pmf marginal(const StationaryTable& table, int component,
             const std::function<bool(const AgeState&)>& condition) {
  if (component < 0 || component >= table.space.dimension())
    throw InvalidParams("marginal component out of range");

  const int cap = table.space.n_cap();
  // With a clamped top the v1 = n_cap level is the truncation surrogate, not a
  // real probability; it is dropped here and lives inside tail_bound instead.
  const bool drop_top = table.clamped_top;

  std::vector<double> acc(cap + 1, 0.0);
  double kept_mass = 0.0;
  double cond_mass = 0.0;
  bool have_condition = static_cast<bool>(condition);

  table.space.for_each([&](const AgeState& s, std::uint64_t r) {
    double w = table.probs[r];
    if (w == 0.0) return;
    if (have_condition && !condition(s)) return;
    cond_mass += w;
    if (drop_top && s.v[0] == cap) return;
    acc[s.v[component]] += w;
    kept_mass += w;
  });

  if (have_condition && cond_mass <= 0.0)
    throw EmptyCondition("conditioning event has zero probability mass");

  Pmf out;
  out.support_start = component == 0 ? 1 : 0;
  out.tail_ratio = table.tail_ratio;
  int hi = cap - (drop_top && component == 0 ? 1 : 0);
  out.probs.assign(acc.begin() + out.support_start, acc.begin() + hi + 1);

  double scale = have_condition ? cond_mass : 1.0;
  if (have_condition)
    for (double& x : out.probs) x /= scale;
  // Unconditional: the producer's tail_bound already covers the dropped clamp
  // level. Conditional: the dropped conditioned mass is added explicitly.
  double dropped = have_condition ? (cond_mass - kept_mass) / scale : 0.0;
  out.tail_bound = table.tail_bound / scale + dropped;
  return out;
}

}  // namespace aoi
