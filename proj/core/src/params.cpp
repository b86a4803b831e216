#include "aoi/params.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace aoi {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

SystemParams::SystemParams(double p, double gamma) : p_(p), gamma_(gamma) {
  // p = 1 or gamma = 1 is admitted for degenerate size-1 checks; buffered
  // models add the strict p < gamma requirement at ModelSpec construction.
  if (!std::isfinite(p) || p <= 0.0 || p > 1.0)
    throw InvalidParams("arrival probability p must lie in (0, 1], got " + std::to_string(p));
  if (!std::isfinite(gamma) || gamma <= 0.0 || gamma > 1.0)
    throw InvalidParams("service intensity gamma must lie in (0, 1], got " +
                        std::to_string(gamma));
}

ServiceDistribution ServiceDistribution::geometric(double gamma) {
  if (!std::isfinite(gamma) || gamma <= 0.0 || gamma > 1.0)
    throw InvalidParams("geometric service intensity must lie in (0, 1]");
  ServiceDistribution d;
  d.geometric_ = gamma;
  return d;
}

ServiceDistribution ServiceDistribution::general(std::vector<double> q, double tail_mass) {
  if (q.empty()) throw InvalidParams("general service distribution needs at least q_1");
  for (double qi : q)
    if (!is_probability(qi)) throw InvalidParams("service probabilities must lie in [0, 1]");
  if (!is_probability(tail_mass)) throw InvalidParams("service tail mass must lie in [0, 1]");
  double total = std::accumulate(q.begin(), q.end(), 0.0) + tail_mass;
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidParams("service probabilities plus tail mass must sum to 1, got " +
                        std::to_string(total));
  ServiceDistribution d;
  d.q_ = std::move(q);
  d.tail_mass_ = tail_mass;
  return d;
}

double ServiceDistribution::geometric_rate() const {
  if (!is_geometric()) throw InvalidParams("service distribution is not geometric");
  return *geometric_;
}

double ServiceDistribution::q(int j) const {
  if (j < 1) return 0.0;
  if (is_geometric()) {
    double g = *geometric_;
    return std::pow(1.0 - g, j - 1) * g;
  }
  if (j > static_cast<int>(q_.size())) return 0.0;
  return q_[j - 1];
}

double ServiceDistribution::tail_from(int j) const {
  if (j <= 1) return 1.0;
  if (is_geometric()) return std::pow(1.0 - *geometric_, j - 1);
  double t = tail_mass_;
  for (int i = static_cast<int>(q_.size()); i >= j; --i) t += q_[i - 1];
  return t;
}

double ServiceDistribution::survive(int age) const {
  if (is_geometric()) return 1.0 - *geometric_;
  double denom = tail_from(age);
  if (denom <= 0.0) return 0.0;  // service must already have completed
  return tail_from(age + 1) / denom;
}

double ServiceDistribution::mean() const {
  if (is_geometric()) return 1.0 / *geometric_;
  double m = 0.0;
  for (int j = 1; j <= static_cast<int>(q_.size()); ++j) m += j * q_[j - 1];
  return m;  // tail mass excluded; it is a bound, not a distribution
}

int ServiceDistribution::truncation_index(double rel_eps) const {
  if (is_geometric()) {
    double g = *geometric_;
    if (g >= 1.0) return 1;
    return static_cast<int>(std::ceil(std::log(rel_eps) / std::log(1.0 - g))) + 1;
  }
  return static_cast<int>(q_.size());
}

PreemptionPolicy PreemptionPolicy::none() { return PreemptionPolicy{}; }

PreemptionPolicy PreemptionPolicy::paper_gtilde(int n_p) {
  if (n_p < 0) throw InvalidParams("N_p must be nonnegative");
  PreemptionPolicy p;
  p.kind_ = Kind::PaperGTilde;
  p.n_p_ = n_p;
  return p;
}

PreemptionPolicy PreemptionPolicy::custom(std::function<double(int)> g) {
  if (!g) throw InvalidParams("custom preemption function must be callable");
  PreemptionPolicy p;
  p.kind_ = Kind::Custom;
  p.g_ = std::move(g);
  return p;
}

int PreemptionPolicy::default_n_p(double p) {
  if (p <= 0.0) throw InvalidParams("cannot pick N_p for p <= 0");
  int n_p = 0;
  while (p <= 1.0 / (n_p + 2)) ++n_p;
  return n_p;
}

std::optional<int> PreemptionPolicy::n_p() const {
  if (kind_ == Kind::PaperGTilde) return n_p_;
  return std::nullopt;
}

double PreemptionPolicy::g(int m, const SystemParams& params) const {
  if (m < 1) throw InvalidParams("preemption age must be >= 1");
  double value = 0.0;
  switch (kind_) {
    case Kind::None:
      return 0.0;
    case Kind::PaperGTilde: {
      double p = params.p();
      value = (1.0 - (1.0 - p) * (n_p_ + m + 1.0) / (n_p_ + m)) / p;
      break;
    }
    case Kind::Custom:
      value = g_(m);
      break;
  }
  if (!(value >= 0.0 && value <= 1.0))
    throw InvalidParams("preemption probability g(" + std::to_string(m) +
                        ") = " + std::to_string(value) + " outside [0, 1]");
  return value;
}

void PreemptionPolicy::validate(const SystemParams& params) const {
  if (kind_ == Kind::PaperGTilde) {
    // g~ > 0 for all m >= 1 needs p > 1/(N_p + m + 1); m = 1 is the binding case.
    if (!(params.p() > 1.0 / (n_p_ + 2.0)))
      throw InvalidParams("PaperGTilde requires p > 1/(N_p + 2); p = " +
                          std::to_string(params.p()) + ", N_p = " + std::to_string(n_p_));
  }
  if (kind_ == Kind::Custom) {
    for (int m = 1; m <= 64; ++m) g(m, params);  // range check on a sample of ages
  }
}

ModelSpec::ModelSpec(QueueKind kind, SystemParams params, int capacity,
                     ServiceDistribution service, PreemptionPolicy preemption)
    : kind_(kind),
      params_(params),
      capacity_(capacity),
      service_(std::move(service)),
      preemption_(std::move(preemption)) {
  if (capacity_ < 1) throw InvalidParams("queue capacity must be >= 1");
  if (capacity_ >= 2 && !(params_.p() < params_.gamma()))
    throw Unstable("buffered model requires p < gamma strictly: p = " +
                   std::to_string(params_.p()) + ", gamma = " + std::to_string(params_.gamma()));
  preemption_.validate(params_);
}

ModelSpec ModelSpec::ber_g11(SystemParams params, ServiceDistribution service,
                             PreemptionPolicy preemption) {
  return ModelSpec(QueueKind::BerG11, params, 1, std::move(service), std::move(preemption));
}

ModelSpec ModelSpec::ber_geo11(SystemParams params) {
  return ModelSpec(QueueKind::BerGeo11, params, 1,
                   ServiceDistribution::geometric(params.gamma()), PreemptionPolicy::none());
}

ModelSpec ModelSpec::ber_geo12(SystemParams params) {
  return ModelSpec(QueueKind::BerGeo12, params, 2,
                   ServiceDistribution::geometric(params.gamma()), PreemptionPolicy::none());
}

ModelSpec ModelSpec::ber_geo12_star(SystemParams params) {
  return ModelSpec(QueueKind::BerGeo12Star, params, 2,
                   ServiceDistribution::geometric(params.gamma()), PreemptionPolicy::none());
}

ModelSpec ModelSpec::ber_geo1c(SystemParams params, int c) {
  return ModelSpec(QueueKind::BerGeo1c, params, c,
                   ServiceDistribution::geometric(params.gamma()), PreemptionPolicy::none());
}

std::string ModelSpec::name() const {
  switch (kind_) {
    case QueueKind::BerG11:
      return preemption_.is_none() ? "Ber/G/1/1" : "Ber/G/1/1 (preemptive)";
    case QueueKind::BerGeo11:
      return "Ber/Geo/1/1";
    case QueueKind::BerGeo12:
      return "Ber/Geo/1/2";
    case QueueKind::BerGeo12Star:
      return "Ber/Geo/1/2*";
    case QueueKind::BerGeo1c:
      return "Ber/Geo/1/" + std::to_string(capacity_);
  }
  return "?";
}

}  // namespace aoi
