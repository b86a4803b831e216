#pragma once

#include <array>
#include <optional>

#include "aoi/params.hpp"
#include "aoi/pmf.hpp"
#include "aoi/table.hpp"

namespace aoi {

// |gamma - p| at or below this means the closed forms (which divide by
// gamma - p) are refused; callers should use the chain engine instead.
inline constexpr double kNearSingularCutoff = 1e-9;

// Default PMF truncation.
inline constexpr int kDefaultNMax = 512;

// Scalar quantities behind the closed forms, exposed for tests and diagnostics.
// The preemptive block (xi, roots, c, delta, seeds) is filled when n_p is set.
struct AnalyticIntermediates {
  double n_pg = 0.0;                    // N(p, gamma)
  double m1 = 0.0, m2 = 0.0;            // column sums of the buffered model
  double t0 = 0.0;                      // idle-server mass, replacement model
  double delta_tilde1 = 0.0, delta_tilde2 = 0.0;

  std::optional<int> n_p;
  double xi1 = 0.0, xi2 = 0.0;
  std::array<double, 3> roots{};        // r1 = 1-p, r2 = 1-gamma, r3
  std::array<double, 3> c{};            // difference-equation coefficients
  std::array<double, 3> delta{};        // (1-p)(1-gamma) / r_i
  std::array<double, 3> pi_n1_seed{};   // pi(3,1), pi(4,1), pi(5,1)
};

AnalyticIntermediates analytic_intermediates(const SystemParams& params,
                                             std::optional<int> n_p = std::nullopt);

// Renewal factor of the size-1 general-service solution.
double ber_g11_factor_f(const SystemParams& params, const ServiceDistribution& service, int n);

// System-time weights t_n of the replacement model (t_0 is the idle mass).
double ber_geo12star_t(const SystemParams& params, int n);

// ---- size 1 ----
Pmf ber_geo11_aoi_pmf(const SystemParams& params, int n_max);
double ber_geo11_aoi_cdf(const SystemParams& params, int k);
StationaryTable ber_geo11_state_probs(const SystemParams& params, int n_max);
// Conditional in-service-age marginal; geometric with rate gamma by theory.
Pmf ber_geo11_service_recovery(const StationaryTable& table);
double ber_geo11_busy_probability(const SystemParams& params);

StationaryTable ber_g11_state_probs(const SystemParams& params,
                                    const ServiceDistribution& service,
                                    const PreemptionPolicy& preemption, int n_max);

Pmf preemptive_geo_aoi_pmf(const SystemParams& params, int n_p, int n_max);

// ---- size 2, queueing ----
double ber_geo12_state_prob(const SystemParams& params, const AgeState& state);
Pmf ber_geo12_aoi_pmf(const SystemParams& params, int n_max);
double ber_geo12_aoi_cdf(const SystemParams& params, int k);
Pmf ber_geo12_system_time_pmf(const SystemParams& params, int m_max);
Pmf ber_geo12_waiting_time_pmf(const SystemParams& params, int l_max);

// ---- size 2, replacement ----
double ber_geo12star_state_prob(const SystemParams& params, const AgeState& state);
Pmf ber_geo12star_aoi_pmf(const SystemParams& params, int n_max);
double ber_geo12star_aoi_cdf(const SystemParams& params, int k);
Pmf ber_geo12star_system_time_pmf(const SystemParams& params, int m_max);
Pmf ber_geo12star_waiting_time_pmf(const SystemParams& params, int l_max);

// ---- violation probability ----
struct ViolationReport {
  int k = 0;
  double p_violation = 0.0;              // Pr{AoI > k}
  double exponent = 0.0;                 // -(1/k) log p_violation
  std::optional<double> lower_bound;     // closed-form bound where one exists
};

ViolationReport violation_report(const ModelSpec& model, int k);

// ---- dispatch over ModelSpec, used by the CLI and the comparison harness ----
bool has_closed_form(const ModelSpec& model);
Pmf analytic_aoi_pmf(const ModelSpec& model, int n_max);
double analytic_aoi_cdf(const ModelSpec& model, int k);

}  // namespace aoi
