#include <cmath>

#include "analytic_detail.hpp"
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

struct StarConsts {
  double p, g, xp, zg, y, b, q;  // xp = 1-p, zg = 1-gamma, y = xp*zg, q = b^2 - pg
};

StarConsts consts_of(const SystemParams& pr) {
  StarConsts c;
  c.p = pr.p();
  c.g = pr.gamma();
  c.xp = 1.0 - c.p;
  c.zg = 1.0 - c.g;
  c.y = c.xp * c.zg;
  c.b = c.p + c.g - c.p * c.g;
  c.q = c.b * c.b - c.p * c.g;
  return c;
}

double star_pi_n00(const StarConsts& c, int n) {
  return c.p * std::pow(c.xp, n - 1) -
         c.p * c.zg * (1.0 + c.p * c.g * c.b / c.q * n) * std::pow(c.y, n - 1);
}

// Row sum over pi(n, m, 0), m = 1..n-1.
double star_sum_nm0(const StarConsts& c, int n) {
  double yn1 = std::pow(c.y, n - 1);
  return c.p * c.p * c.zg / (c.xp * c.g) *
             (std::pow(c.xp, n - 1) - (1.0 + (n - 1) * c.g) * yn1) +
         (c.p + 2.0 * c.g - 2.0 * c.p * c.g) * c.g * c.g / c.q *
             (std::pow(c.zg, n - 1) - (1.0 + (n - 1) * c.p) * yn1) -
         c.p * c.p * c.g * c.zg * c.b * (c.p + c.g - 2.0 * c.p * c.g) / (2.0 * c.q) * n *
             (n - 1.0) * std::pow(c.y, n - 2);
}

// Double sum over pi(n, m, l), m = 2..n-1, l = 1..m-1; zero at n = 2.
double star_sum_nml(const StarConsts& c, int n) {
  double yn2 = std::pow(c.y, n - 2), yn1 = yn2 * c.y;
  double zn2 = std::pow(c.zg, n - 2), zn1 = zn2 * c.zg;
  double s1 = c.p * c.p * c.zg * c.zg *
              (c.p / (c.g * (c.g - c.p)) * std::pow(c.xp, n - 2) -
               c.g / (c.p * (c.g - c.p)) * zn2 +
               (1.0 / c.p + 1.0 / c.g + (n - 2.0)) * yn2);
  double s2 = c.p * c.g * c.b / c.q *
              ((c.p + c.g - 2.0 * c.p * c.g) * c.zg / c.p *
                   (zn2 - yn2 - c.p * (n - 2.0) * yn2) -
               c.p * c.p * c.zg * c.zg / 2.0 * (n - 1.0) * (n - 2.0) * yn2);
  double s3 = c.g * c.g * (c.p + 2.0 * c.g - 2.0 * c.p * c.g) / c.q *
                  (c.p * (n - 2.0) * zn1 - 2.0 * c.xp * zn1 + 2.0 * yn1 +
                   c.p * (n - 2.0) * yn1) +
              (c.p * c.g) * (c.p * c.g) * c.b / (2.0 * c.q) * (n - 1.0) * (n - 2.0) * yn1;
  return s1 - s2 + s3;
}

double star_pmf_at(const StarConsts& c, int n) {
  if (n < 1) return 0.0;
  if (n == 1) return c.p * c.xp * std::pow(c.g, 3) / c.q;
  return clamp_nonneg(star_pi_n00(c, n) + star_sum_nm0(c, n) + star_sum_nml(c, n));
}

}  // namespace

double ber_geo12star_t(const SystemParams& params, int n) {
  StarConsts c = consts_of(params);
  if (n <= 0) return c.xp * c.g * c.g / c.q;
  double d1 = c.p * c.g * c.zg * (c.p + 2.0 * c.g - 2.0 * c.p * c.g) / c.q;
  double d2 = c.p * c.g * c.xp * c.zg * c.b / c.q;
  return d1 * std::pow(c.zg, n - 1) - d2 * std::pow(c.y, n - 1);
}

double ber_geo12star_state_prob(const SystemParams& params, const AgeState& state) {
  require_stable(params);
  validate_age_state(state);
  if (state.dimension() != 3) throw InvalidState("size-2 state must have 3 components");
  StarConsts c = consts_of(params);
  int n = state.v[0], m = state.v[1], l = state.v[2];
  if (m == 0) return star_pi_n00(c, n);
  if (l == 0) {
    return c.p * c.p * std::pow(c.xp, n - 2) * std::pow(c.zg, m) *
               (1.0 - std::pow(c.zg, n - m)) +
           (c.p * c.g) * (c.p * c.g) * (c.p + 2.0 * c.g - 2.0 * c.p * c.g) / c.q * m *
               std::pow(c.xp, m - 1) * std::pow(c.zg, n - 1) -
           c.p * c.p * c.g * c.zg * c.b / c.q *
               (c.p * c.zg * n + (c.g - c.p) * m) * std::pow(c.y, n - 2);
  }
  return std::pow(c.p, 3) * std::pow(c.xp, n - m + l - 2) * std::pow(c.zg, m) *
             (1.0 - std::pow(c.zg, n - m)) -
         c.p * c.p * c.g * c.b *
             (c.p * c.p * c.zg * (n - m) + c.xp * c.g) / c.q *
             std::pow(c.xp, n - m + l - 2) * std::pow(c.zg, n - 1) +
         (c.p * c.g) * (c.p * c.g) * (c.p + 2.0 * c.g - 2.0 * c.p * c.g) / c.q *
             std::pow(c.xp, l - 1) * std::pow(c.zg, n - 1) * (1.0 - std::pow(c.xp, m - l)) +
         (c.p * c.g) * (c.p * c.g) * c.b / c.q * std::pow(c.y, n - 1);
}

Pmf ber_geo12star_aoi_pmf(const SystemParams& params, int n_max) {
  require_stable(params);
  if (n_max < 1) throw InvalidParams("n_max must be >= 1");
  StarConsts c = consts_of(params);
  Pmf out;
  out.support_start = 1;
  out.probs.resize(n_max);
  for (int n = 1; n <= n_max; ++n) out.probs[n - 1] = star_pmf_at(c, n);
  out.tail_ratio = std::max(c.xp, c.zg);
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, n_max);
  return out;
}

double detail::star_violation(const SystemParams& params, int k) {
  require_stable(params);
  if (k < 1) k = 0;
  StarConsts c = consts_of(params);
  // Direct tail sum; every term is positive, so no cancellation, and the
  // geometric decay (ratio <= max(1-p, 1-gamma)) caps the truncation error
  // far below double precision.
  double tail = 0.0;
  for (int n = k + 1;; ++n) {
    double t = star_pmf_at(c, n);
    tail += t;
    if (t <= 1e-18 * tail || t == 0.0) break;
    if (n > k + 1000000) throw NonNormalizable("violation tail did not settle");
  }
  return tail;
}

double ber_geo12star_aoi_cdf(const SystemParams& params, int k) {
  require_stable(params);
  if (k < 1) return 0.0;
  return 1.0 - detail::star_violation(params, k);
}

Pmf ber_geo12star_system_time_pmf(const SystemParams& params, int m_max) {
  require_stable(params);
  if (m_max < 1) throw InvalidParams("m_max must be >= 1");
  Pmf out;
  out.support_start = 0;
  out.probs.resize(m_max + 1);
  for (int m = 0; m <= m_max; ++m) out.probs[m] = clamp_nonneg(ber_geo12star_t(params, m));
  out.tail_ratio = 1.0 - params.gamma();
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, m_max);
  return out;
}

Pmf ber_geo12star_waiting_time_pmf(const SystemParams& params, int l_max) {
  require_stable(params);
  if (l_max < 1) throw InvalidParams("l_max must be >= 1");
  StarConsts c = consts_of(params);
  Pmf out;
  out.support_start = 0;
  out.probs.resize(l_max + 1);
  out.probs[0] = c.g * (c.p + c.g - 2.0 * c.p * c.g) / c.q;
  for (int l = 1; l <= l_max; ++l)
    out.probs[l] = c.p * c.p * c.zg * c.zg * c.b / c.q * std::pow(c.y, l - 1);
  out.tail_ratio = c.y;
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, l_max);
  return out;
}

}  // namespace aoi
