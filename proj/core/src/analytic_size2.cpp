#include <cmath>

#include "aoi/analytic.hpp"

namespace aoi {

namespace {

void require_stable(const SystemParams& pr) {
  if (!(pr.p() < pr.gamma()))
    throw Unstable("buffered model requires p < gamma strictly");
  if (std::abs(pr.gamma() - pr.p()) <= kNearSingularCutoff)
    throw NearSingular("|gamma - p| <= 1e-9; use the chain engine instead");
}

double clamp_nonneg(double x) { return x < 0.0 ? 0.0 : x; }

double n_of(const SystemParams& pr) {
  double p = pr.p(), g = pr.gamma();
  return (p + g - 2.0 * p * g) * g + p * p * (1.0 - g) * (1.0 - g);
}

double geo12_pmf_at(const SystemParams& pr, int n) {
  double p = pr.p(), g = pr.gamma(), nn = n_of(pr);
  double xn = std::pow(1.0 - p, n), zn = std::pow(1.0 - g, n);
  double v = p * (1.0 - p) * (1.0 - p) * g * g * g * g / (nn * (g - p) * (g - p)) * (xn - zn) -
             p * p * g * g * g / nn * (0.5 / (1.0 - g) + (1.0 - p) / (g - p)) * n * zn +
             p * p * g * g * g / (2.0 * nn) * n * n * zn / (1.0 - g);
  return clamp_nonneg(v);
}

}  // namespace

double ber_geo12_state_prob(const SystemParams& params, const AgeState& state) {
  require_stable(params);
  validate_age_state(state);
  if (state.dimension() != 3) throw InvalidState("size-2 state must have 3 components");
  double p = params.p(), g = params.gamma(), nn = n_of(params);
  int n = state.v[0], m = state.v[1], l = state.v[2];
  double xp = 1.0 - p, zg = 1.0 - g;
  if (m == 0) {
    return p * xp * g * g * g / (nn * (g - p)) * (std::pow(xp, n) - std::pow(zg, n));
  }
  if (l == 0) {
    return p * p * std::pow(g, 3) / (nn * (g - p)) *
               (std::pow(xp, n) * std::pow(zg, m) - std::pow(xp, m) * std::pow(zg, n)) +
           p * std::pow(g, 3) / nn *
               (std::pow(zg, n - 1) - std::pow(xp, m) * std::pow(zg, n - 1));
  }
  return std::pow(p * g, 3) / (nn * (g - p)) *
             (std::pow(xp, n - l) * std::pow(zg, m) - std::pow(xp, m - l) * std::pow(zg, n)) +
         p * p * std::pow(g, 3) / nn *
             (std::pow(zg, n - 1) - std::pow(xp, m - l) * std::pow(zg, n - 1));
}

Pmf ber_geo12_aoi_pmf(const SystemParams& params, int n_max) {
  require_stable(params);
  if (n_max < 1) throw InvalidParams("n_max must be >= 1");
  Pmf out;
  out.support_start = 1;
  out.probs.resize(n_max);
  for (int n = 1; n <= n_max; ++n) out.probs[n - 1] = geo12_pmf_at(params, n);
  out.tail_ratio = std::max(1.0 - params.p(), 1.0 - params.gamma());
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, n_max);
  return out;
}

double ber_geo12_aoi_cdf(const SystemParams& params, int k) {
  require_stable(params);
  if (k < 1) return 0.0;
  double p = params.p(), g = params.gamma(), nn = n_of(params);
  double xp = 1.0 - p, zg = 1.0 - g;
  double xk = std::pow(xp, k), zk = std::pow(zg, k);
  return 1.0 - std::pow(xp, 3) * std::pow(g, 4) / (nn * (g - p) * (g - p)) * xk +
         p * zg / (nn * (g - p)) *
             (xp * xp * std::pow(g, 3) / (g - p) + p * p * zg) * zk +
         p * p * g / nn * (xp * zg * g / (g - p) - (2.0 - g) / 2.0) * k * zk -
         (p * g) * (p * g) / (2.0 * nn) * k * k * zk;
}

Pmf ber_geo12_system_time_pmf(const SystemParams& params, int m_max) {
  require_stable(params);
  if (m_max < 1) throw InvalidParams("m_max must be >= 1");
  double p = params.p(), g = params.gamma(), nn = n_of(params);
  Pmf out;
  out.support_start = 0;
  out.probs.resize(m_max + 1);
  out.probs[0] = (1.0 - p) * g * g / nn;
  for (int m = 1; m <= m_max; ++m)
    out.probs[m] = p * g * g / nn * (1.0 + (m - 1) * p) * std::pow(1.0 - g, m);
  out.tail_ratio = 1.0 - g;
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, m_max);
  return out;
}

Pmf ber_geo12_waiting_time_pmf(const SystemParams& params, int l_max) {
  require_stable(params);
  if (l_max < 1) throw InvalidParams("l_max must be >= 1");
  double p = params.p(), g = params.gamma(), nn = n_of(params);
  Pmf out;
  out.support_start = 0;
  out.probs.resize(l_max + 1);
  out.probs[0] = (p + g - 2.0 * p * g) * g / nn;
  for (int l = 1; l <= l_max; ++l)
    out.probs[l] = p * p * g / nn * std::pow(1.0 - g, l + 1);
  out.tail_ratio = 1.0 - g;
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, l_max);
  return out;
}

}  // namespace aoi
