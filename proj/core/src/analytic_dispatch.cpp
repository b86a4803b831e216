#include <cmath>

#include "analytic_detail.hpp"
#include "aoi/analytic.hpp"

namespace aoi {

namespace {

// True when a Ber/G/1/1 spec is really the paper's preemptive geometric model.
bool is_preemptive_geometric(const ModelSpec& model) {
  return model.kind() == QueueKind::BerG11 && model.service().is_geometric() &&
         model.preemption().is_paper_gtilde();
}

bool is_plain_geometric_g11(const ModelSpec& model) {
  return model.kind() == QueueKind::BerG11 && model.service().is_geometric() &&
         model.preemption().is_none();
}

double geo11_violation(const SystemParams& pr, int k) {
  double p = pr.p(), g = pr.gamma();
  double b = p + g - p * g;
  return (std::pow(1.0 - p, k + 2) * g * g * g -
          (p * (1.0 - p) * g * g + p * p * (g - p)) * std::pow(1.0 - g, k + 1) -
          p * p * g * (g - p) * k * std::pow(1.0 - g, k + 1)) /
         (b * (g - p) * (g - p));
}

double geo12_violation(const SystemParams& pr, int k) {
  double p = pr.p(), g = pr.gamma();
  double nn = (p + g - 2.0 * p * g) * g + p * p * (1.0 - g) * (1.0 - g);
  double xp = 1.0 - p, zg = 1.0 - g;
  double xk = std::pow(xp, k), zk = std::pow(zg, k);
  return std::pow(xp, 3) * std::pow(g, 4) / (nn * (g - p) * (g - p)) * xk -
         p * zg / (nn * (g - p)) * (xp * xp * std::pow(g, 3) / (g - p) + p * p * zg) * zk -
         p * p * g / nn * (xp * zg * g / (g - p) - (2.0 - g) / 2.0) * k * zk +
         (p * g) * (p * g) / (2.0 * nn) * k * k * zk;
}

}  // namespace

bool has_closed_form(const ModelSpec& model) {
  switch (model.kind()) {
    case QueueKind::BerGeo11:
    case QueueKind::BerGeo12:
    case QueueKind::BerGeo12Star:
      return true;
    case QueueKind::BerG11:
      return true;  // Theorem-2 route, or the explicit preemptive form
    case QueueKind::BerGeo1c:
      return model.capacity() == 1 || model.capacity() == 2;
  }
  return false;
}

Pmf analytic_aoi_pmf(const ModelSpec& model, int n_max) {
  const SystemParams& pr = model.params();
  switch (model.kind()) {
    case QueueKind::BerGeo11:
      return ber_geo11_aoi_pmf(pr, n_max);
    case QueueKind::BerGeo12:
      return ber_geo12_aoi_pmf(pr, n_max);
    case QueueKind::BerGeo12Star:
      return ber_geo12star_aoi_pmf(pr, n_max);
    case QueueKind::BerG11: {
      if (is_preemptive_geometric(model))
        return preemptive_geo_aoi_pmf(pr, *model.preemption().n_p(), n_max);
      if (is_plain_geometric_g11(model)) return ber_geo11_aoi_pmf(pr, n_max);
      // General service: marginalize the Theorem-2 state table.
      StationaryTable table =
          ber_g11_state_probs(pr, model.service(), model.preemption(), n_max);
      return marginal(table, 0);
    }
    case QueueKind::BerGeo1c:
      if (model.capacity() == 1) return ber_geo11_aoi_pmf(pr, n_max);
      if (model.capacity() == 2) return ber_geo12_aoi_pmf(pr, n_max);
      throw InvalidParams("no closed form for Ber/Geo/1/c with c >= 3; use the chain engine");
  }
  throw InvalidParams("unknown model");
}

double analytic_aoi_cdf(const ModelSpec& model, int k) {
  const SystemParams& pr = model.params();
  switch (model.kind()) {
    case QueueKind::BerGeo11:
      return ber_geo11_aoi_cdf(pr, k);
    case QueueKind::BerGeo12:
      return ber_geo12_aoi_cdf(pr, k);
    case QueueKind::BerGeo12Star:
      return ber_geo12star_aoi_cdf(pr, k);
    case QueueKind::BerG11:
      if (is_preemptive_geometric(model))
        return k < 1 ? 0.0
                     : 1.0 - detail::preemptive_violation(pr, *model.preemption().n_p(), k);
      if (is_plain_geometric_g11(model)) return ber_geo11_aoi_cdf(pr, k);
      throw InvalidParams("no closed-form CDF for general service; use the chain engine");
    case QueueKind::BerGeo1c:
      if (model.capacity() == 1) return ber_geo11_aoi_cdf(pr, k);
      if (model.capacity() == 2) return ber_geo12_aoi_cdf(pr, k);
      throw InvalidParams("no closed form for Ber/Geo/1/c with c >= 3; use the chain engine");
  }
  throw InvalidParams("unknown model");
}

ViolationReport violation_report(const ModelSpec& model, int k) {
  if (k < 1) throw InvalidParams("violation threshold k must be >= 1");
  const SystemParams& pr = model.params();
  const double p = pr.p(), g = pr.gamma();
  const double b = p + g - p * g;

  ViolationReport rep;
  rep.k = k;

  auto size1 = [&]() {
    if (std::abs(g - p) <= kNearSingularCutoff)
      throw NearSingular("|gamma - p| <= 1e-9; use the chain engine instead");
    rep.p_violation = geo11_violation(pr, k);
    rep.lower_bound = std::log(1.0 / (1.0 - p)) -
                      std::log((1.0 - p) * (1.0 - p) * g * g * g / (b * (g - p) * (g - p))) / k;
  };
  auto size2 = [&]() {
    if (!(p < g)) throw Unstable("buffered model requires p < gamma strictly");
    if (std::abs(g - p) <= kNearSingularCutoff)
      throw NearSingular("|gamma - p| <= 1e-9; use the chain engine instead");
    double nn = (p + g - 2.0 * p * g) * g + p * p * (1.0 - g) * (1.0 - g);
    rep.p_violation = geo12_violation(pr, k);
    rep.lower_bound =
        std::log(1.0 / (1.0 - p)) -
        std::log(std::pow(1.0 - p, 3) * std::pow(g, 4) / (nn * (g - p) * (g - p)) +
                 (p * g) * (p * g) * k * k / (2.0 * nn)) /
            k;
  };

  switch (model.kind()) {
    case QueueKind::BerGeo11:
      size1();
      break;
    case QueueKind::BerGeo12:
      size2();
      break;
    case QueueKind::BerGeo12Star:
      rep.p_violation = detail::star_violation(pr, k);
      break;
    case QueueKind::BerG11:
      if (is_preemptive_geometric(model)) {
        rep.p_violation = detail::preemptive_violation(pr, *model.preemption().n_p(), k);
      } else if (is_plain_geometric_g11(model)) {
        size1();
      } else {
        throw InvalidParams("no closed-form CDF for general service; use the chain engine");
      }
      break;
    case QueueKind::BerGeo1c:
      if (model.capacity() == 1) {
        size1();
      } else if (model.capacity() == 2) {
        size2();
      } else {
        throw InvalidParams("no closed form for Ber/Geo/1/c with c >= 3; use the chain engine");
      }
      break;
  }
  rep.exponent = -std::log(rep.p_violation) / k;
  return rep;
}

}  // namespace aoi
