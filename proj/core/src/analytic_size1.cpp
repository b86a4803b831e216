#include <algorithm>
#include <cmath>
#include <vector>

#include "analytic_detail.hpp"
#include "aoi/analytic.hpp"

namespace aoi {

namespace {

double beta_of(const SystemParams& pr) {
  return pr.p() + pr.gamma() - pr.p() * pr.gamma();
}

void require_nonsingular(const SystemParams& pr) {
  if (std::abs(pr.gamma() - pr.p()) <= kNearSingularCutoff)
    throw NearSingular("|gamma - p| <= 1e-9; the closed form divides by gamma - p, "
                       "use the chain engine instead");
}

double clamp_nonneg(double x) { return x < 0.0 ? 0.0 : x; }

// Pr{Delta = n} of the plain Ber/Geo/1/1 model.
double geo11_pmf_at(const SystemParams& pr, int n) {
  double p = pr.p(), g = pr.gamma(), b = beta_of(pr);
  double a_coef = p * (1.0 - p) * g * g * g / (b * (g - p) * (g - p));
  double b_coef = (p * g) * (p * g) / (b * (g - p));
  double xn = std::pow(1.0 - p, n), zn = std::pow(1.0 - g, n);
  return clamp_nonneg(a_coef * (xn - zn) - b_coef * n * zn);
}

}  // namespace

Pmf ber_geo11_aoi_pmf(const SystemParams& params, int n_max) {
  require_nonsingular(params);
  if (n_max < 1) throw InvalidParams("n_max must be >= 1");
  Pmf out;
  out.support_start = 1;
  out.probs.resize(n_max);
  for (int n = 1; n <= n_max; ++n) out.probs[n - 1] = geo11_pmf_at(params, n);
  out.tail_ratio = std::max(1.0 - params.p(), 1.0 - params.gamma());
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, n_max);
  return out;
}

double ber_geo11_aoi_cdf(const SystemParams& params, int k) {
  require_nonsingular(params);
  if (k < 1) return 0.0;
  double p = params.p(), g = params.gamma(), b = beta_of(params);
  double viol = std::pow(1.0 - p, k + 2) * g * g * g -
                (p * (1.0 - p) * g * g + p * p * (g - p)) * std::pow(1.0 - g, k + 1) -
                p * p * g * (g - p) * k * std::pow(1.0 - g, k + 1);
  return 1.0 - viol / (b * (g - p) * (g - p));
}

StationaryTable ber_geo11_state_probs(const SystemParams& params, int n_max) {
  require_nonsingular(params);
  if (n_max < 2) throw InvalidParams("n_max must be >= 2");
  double p = params.p(), g = params.gamma(), b = beta_of(params);
  double c_idle = p * g * g / (b * (g - p));
  double c_busy = (p * g) * (p * g) / (b * (g - p));

  StationaryTable table{AgeStateSpace(2, n_max), {}, 0.0, 0, true, false, 0.0, 0.0, ""};
  table.probs.assign(table.space.size(), 0.0);
  table.space.for_each([&](const AgeState& s, std::uint64_t r) {
    int n = s.v[0], m = s.v[1];
    double v;
    if (m == 0) {
      v = c_idle * (std::pow(1.0 - p, n) - std::pow(1.0 - g, n));
    } else {
      v = c_busy * (std::pow(1.0 - p, n - m) * std::pow(1.0 - g, m) - std::pow(1.0 - g, n));
    }
    table.probs[r] = clamp_nonneg(v);
  });
  table.tail_ratio = std::max(1.0 - p, 1.0 - g);
  table.tail_bound = geometric_tail_bound(geo11_pmf_at(params, n_max), table.tail_ratio, n_max);
  return table;
}

double ber_geo11_busy_probability(const SystemParams& params) {
  return params.p() * (1.0 - params.gamma()) / beta_of(params);
}

Pmf ber_geo11_service_recovery(const StationaryTable& table) {
  return marginal(table, 1, [](const AgeState& s) { return s.v[1] >= 1; });
}

StationaryTable ber_g11_state_probs(const SystemParams& params,
                                    const ServiceDistribution& service,
                                    const PreemptionPolicy& preemption, int n_max) {
  if (n_max < 2) throw InvalidParams("n_max must be >= 2");
  if (!(service.q1() > 0.0))
    throw InvalidParams("the size-1 general solution divides by q_1; q_1 must be > 0");
  preemption.validate(params);

  const double p = params.p();
  const double q1 = service.q1();
  const int series_cap = 10 * n_max;

  // g_prod[i] = prod_{l=1..i} (1 - p g(l)); survivors of i preemption chances.
  std::vector<double> g_prod(series_cap + 2, 1.0);
  for (int i = 1; i <= series_cap + 1; ++i)
    g_prod[i] = g_prod[i - 1] * (1.0 - p * preemption.g(i, params));

  // inner(n) = sum_{j=0..n-2} (1-p)^j g_prod[n-1-j] q_{n-1-j}; the repeated
  // renewal sum behind both the normalization series and the idle-state run.
  auto inner = [&](int n) {
    double acc = 0.0;
    for (int i = n - 1; i >= 1; --i) {  // i = n-1-j, service-time index
      double qi = service.q(i);
      if (qi == 0.0) continue;
      acc += std::pow(1.0 - p, n - 1 - i) * g_prod[i] * qi;
    }
    return acc;
  };

  // Normalization series; terms decay at least geometrically, stop on 1e-16
  // relative or at the 10 * n_max budget.
  double sum_a = 0.0;
  bool converged = false;
  for (int n = 2; n <= series_cap; ++n) {
    double t = inner(n);
    sum_a += t;
    if (t <= 1e-16 * (sum_a + 1e-300)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonNormalizable("normalization series did not settle within the 10 * n_max budget");
  double sum_b = 0.0;
  converged = false;
  for (int m = 1; m <= series_cap; ++m) {
    double t = g_prod[m - 1] * service.tail_from(m);
    sum_b += t;
    if (t <= 1e-16 * (sum_b + 1e-300)) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NonNormalizable("busy-mass series did not settle within the 10 * n_max budget");

  double pi10 = 1.0 / (1.0 / p + (1.0 - q1) / q1 * (sum_a + sum_b));

  std::vector<double> pi_n0(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n)
    pi_n0[n] = pi10 * (std::pow(1.0 - p, n - 1) + (1.0 - q1) / q1 * inner(n));

  // Difference equation for pi(n,1): alpha_j couples preempted service runs.
  std::vector<double> alpha(n_max + 1, 0.0);
  for (int j = 1; j <= n_max; ++j) {
    double tail = service.tail_from(j);
    if (tail == 0.0) continue;
    alpha[j] = g_prod[j - 1] * tail * p * preemption.g(j, params);
  }
  std::vector<double> pi_n1(n_max + 1, 0.0);
  if (n_max >= 2) pi_n1[2] = pi10 * p * (1.0 - q1);
  for (int n = 3; n <= n_max; ++n) {
    double conv = 0.0;
    for (int j = 1; j <= n - 2; ++j) {
      if (alpha[j] == 0.0) continue;
      conv += alpha[j] * pi_n1[n - j];
    }
    pi_n1[n] = pi_n0[n - 1] * p * (1.0 - q1) + (1.0 - q1) * conv;
  }

  StationaryTable table{AgeStateSpace(2, n_max), {}, 0.0, 0, true, false, 0.0, 0.0, ""};
  table.probs.assign(table.space.size(), 0.0);
  double level_mass_top = 0.0;
  table.space.for_each([&](const AgeState& s, std::uint64_t r) {
    int n = s.v[0], m = s.v[1];
    double v;
    if (m == 0)
      v = pi_n0[n];
    else if (m == 1)
      v = pi_n1[n];
    else
      v = pi_n1[n - m + 1] * g_prod[m - 1] * service.tail_from(m);
    table.probs[r] = clamp_nonneg(v);
    if (n == n_max) level_mass_top += table.probs[r];
  });
  table.tail_ratio = 1.0 - p;
  if (service.is_geometric())
    table.tail_ratio = std::max(table.tail_ratio, 1.0 - service.geometric_rate());
  table.tail_bound = geometric_tail_bound(level_mass_top, table.tail_ratio, n_max);
  return table;
}

AnalyticIntermediates analytic_intermediates(const SystemParams& params,
                                             std::optional<int> n_p) {
  const double p = params.p(), g = params.gamma();
  const double b = beta_of(params);
  AnalyticIntermediates out;
  out.n_pg = (p + g - 2.0 * p * g) * g + p * p * (1.0 - g) * (1.0 - g);
  out.m1 = (1.0 - p) * g * g / out.n_pg;
  out.m2 = p * g * (1.0 - g) / out.n_pg;
  double q_star = b * b - p * g;  // equals n_pg identically
  out.t0 = (1.0 - p) * g * g / q_star;
  out.delta_tilde1 = p * g * (1.0 - g) * (p + 2.0 * g - 2.0 * p * g) / q_star;
  out.delta_tilde2 = p * g * (1.0 - p) * (1.0 - g) * b / q_star;

  if (!n_p) return out;

  require_nonsingular(params);
  const int np = *n_p;
  PreemptionPolicy::paper_gtilde(np).validate(params);
  out.n_p = np;
  double denom = np * g * b + g;
  out.xi1 = (np * g + 1.0) * p * b / denom;
  out.xi2 = p * (1.0 - g) * b / denom;
  out.roots = {1.0 - p, 1.0 - g, np * (1.0 - p) * (1.0 - g) / (np + 1.0)};
  const double y = (1.0 - p) * (1.0 - g);
  for (int i = 0; i < 3; ++i)
    out.delta[i] = out.roots[i] > 0.0 ? y / out.roots[i] : 0.0;

  // pi(n,0) from the idle-state run, then seed pi(k,1), k = 3, 4, 5 from the
  // stationary equation of the (n,1) column.
  auto pi_n0 = [&](int n) {
    return out.xi1 * std::pow(1.0 - p, n - 1) -
           out.xi2 * (1.0 + (np + n) * g) * std::pow(y, n - 1);
  };
  double pi10 = (np + 1.0) * p * g * b / (np * b + 1.0);
  std::vector<double> pin1(6, 0.0);
  pin1[2] = pi10 * p * (1.0 - g);
  auto pinm = [&](int n, int m) {
    if (m == 0) return pi_n0(n);
    if (m == 1) return pin1[n];
    return pin1[n - m + 1] * std::pow(y, m - 1) * (np + m) / (np + 1.0);
  };
  for (int n = 3; n <= 5; ++n) {
    double s = 0.0;
    for (int j = 1; j <= n - 2; ++j)
      s += pinm(n - 1, j) * (1.0 - (1.0 - p) * (np + j + 1.0) / (np + j));
    pin1[n] = pi_n0(n - 1) * p * (1.0 - g) + s * (1.0 - g);
  }
  out.pi_n1_seed = {pin1[3], pin1[4], pin1[5]};

  // c1, c2, c3 from the 3x3 root system on pi(k,1), k = 3, 4, 5. N_p = 0 makes
  // r3 = 0 and the third root drops out.
  double r1 = out.roots[0], r2 = out.roots[1], r3 = out.roots[2];
  if (np == 0) {
    out.c[0] = (pin1[4] - r2 * pin1[3]) / ((r1 - r2) * r1 * r1 * r1);
    out.c[1] = (pin1[4] - r1 * pin1[3]) / ((r2 - r1) * r2 * r2 * r2);
    out.c[2] = 0.0;
    return out;
  }
  double m00 = r1 * r1 * r1, m01 = r2 * r2 * r2, m02 = r3 * r3 * r3;
  double det_scale = (r2 - r1) * (r3 - r1) * (r3 - r2);
  if (det_scale == 0.0) throw IllConditioned("repeated characteristic roots");
  out.c[0] = (r2 * r3 * pin1[3] - (r2 + r3) * pin1[4] + pin1[5]) / ((r2 - r1) * (r3 - r1) * m00);
  out.c[1] = (r1 * r3 * pin1[3] - (r1 + r3) * pin1[4] + pin1[5]) / ((r1 - r2) * (r3 - r2) * m01);
  out.c[2] = (r1 * r2 * pin1[3] - (r1 + r2) * pin1[4] + pin1[5]) / ((r1 - r3) * (r2 - r3) * m02);

  // 1-norm condition estimate of the Vandermonde system V_{ki} = r_i^k.
  double norm_v = 0.0, norm_vinv = 0.0;
  double vcols[3] = {r1, r2, r3};
  for (int i = 0; i < 3; ++i) {
    double colsum = 0.0;
    for (int k = 3; k <= 5; ++k) colsum += std::pow(vcols[i], k);
    norm_v = std::max(norm_v, colsum);
  }
  // Rows of V^{-1} follow the same cofactor pattern as the c formulas.
  for (int i = 0; i < 3; ++i) {
    double ra = vcols[(i + 1) % 3], rb = vcols[(i + 2) % 3], ri = vcols[i];
    double den = (ra - ri) * (rb - ri) * ri * ri * ri;
    double rowsum = (std::abs(ra * rb) + std::abs(ra + rb) + 1.0) / std::abs(den);
    norm_vinv = std::max(norm_vinv, rowsum);
  }
  if (norm_v * norm_vinv > 1e12)
    throw IllConditioned("root system condition estimate above 1e12; "
                         "use the chain engine for these parameters");
  return out;
}

namespace {

double preemptive_pmf_at(const AnalyticIntermediates& im, const SystemParams& params, int n) {
  const double p = params.p(), g = params.gamma();
  const double y = (1.0 - p) * (1.0 - g);
  const double np = *im.n_p;
  if (n < 1) return 0.0;
  if (n == 1) {
    double b = beta_of(params);
    return (np + 1.0) * p * g * b / (np * b + 1.0);
  }
  double base = im.xi1 * std::pow(1.0 - p, n - 1) -
                im.xi2 * (1.0 + g + (np + n - 1.0) * g * (1.0 - p * g / y)) *
                    std::pow(y, n - 1);
  double tail_terms = 0.0;
  for (int i = 0; i < 3; ++i) {
    double ri = im.roots[i];
    if (ri <= 0.0 || im.c[i] == 0.0) continue;
    double di = im.delta[i];
    double c_term = im.c[i] * std::pow(ri, n) / (np + 1.0) *
                    (np / (1.0 - di) + 1.0 / ((1.0 - di) * (1.0 - di)));
    // c_i r_i^n delta_i^{n-2} collapses to c_i r_i^2 y^{n-2}; computing it
    // that way avoids overflow when delta_i > 1.
    double d_term = im.c[i] * ri * ri * std::pow(y, n - 2) / (np + 1.0) *
                    (1.0 + (1.0 - di) * (np + n - 2.0)) / ((1.0 - di) * (1.0 - di));
    tail_terms += c_term - d_term;
  }
  return clamp_nonneg(base + tail_terms);
}

}  // namespace

Pmf preemptive_geo_aoi_pmf(const SystemParams& params, int n_p, int n_max) {
  if (n_max < 2) throw InvalidParams("n_max must be >= 2");
  AnalyticIntermediates im = analytic_intermediates(params, n_p);
  Pmf out;
  out.support_start = 1;
  out.probs.resize(n_max);
  for (int n = 1; n <= n_max; ++n) out.probs[n - 1] = preemptive_pmf_at(im, params, n);
  out.tail_ratio = std::max(1.0 - params.p(), 1.0 - params.gamma());
  out.tail_bound = geometric_tail_bound(out.probs.back(), out.tail_ratio, n_max);
  return out;
}

double detail::preemptive_violation(const SystemParams& params, int n_p, int k) {
  AnalyticIntermediates im = analytic_intermediates(params, n_p);
  if (k < 1) k = 0;
  double tail = 0.0;
  for (int n = k + 1;; ++n) {
    double t = preemptive_pmf_at(im, params, n);
    tail += t;
    if (t <= 1e-18 * tail || t == 0.0) break;
    if (n > k + 1000000) throw NonNormalizable("violation tail did not settle");
  }
  return tail;
}

}  // namespace aoi
