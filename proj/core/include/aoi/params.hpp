#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

// Per-slot arrival probability p and geometric service intensity gamma.
// rho_d = p / gamma is always recomputed, never stored.
class SystemParams {
 public:
  SystemParams(double p, double gamma);

  double p() const { return p_; }
  double gamma() const { return gamma_; }
  double rho_d() const { return p_ / gamma_; }

 private:
  double p_;
  double gamma_;
};

// Service time distribution of B on {1, 2, ...}: geometric, or a finite list
// q_j = Pr{B = j} with an explicit bound on the mass beyond the list.
class ServiceDistribution {
 public:
  static ServiceDistribution geometric(double gamma);
  // q[i] = Pr{B = i + 1}. tail_mass bounds the probability past the list.
  static ServiceDistribution general(std::vector<double> q, double tail_mass = 0.0);

  bool is_geometric() const { return geometric_.has_value(); }
  double geometric_rate() const;

  double q(int j) const;          // Pr{B = j}, j >= 1
  double q1() const { return q(1); }
  double tail_from(int j) const;  // Pr{B >= j}
  double survive(int age) const;  // Pr{B > age | B > age - 1}
  double mean() const;
  double tail_mass() const { return tail_mass_; }

  // Index beyond which Pr{B >= j} < rel_eps; used to truncate series.
  int truncation_index(double rel_eps) const;

 private:
  ServiceDistribution() = default;
  std::optional<double> geometric_;
  std::vector<double> q_;  // general case, q_[i] = Pr{B = i + 1}
  double tail_mass_ = 0.0;
};

// Probability that a fresh arrival preempts the in-service packet of age m.
class PreemptionPolicy {
 public:
  static PreemptionPolicy none();
  static PreemptionPolicy paper_gtilde(int n_p);
  static PreemptionPolicy custom(std::function<double(int)> g);

  // Smallest integer N_p >= 0 with p > 1 / (N_p + 2).
  static int default_n_p(double p);

  bool is_none() const { return kind_ == Kind::None; }
  bool is_paper_gtilde() const { return kind_ == Kind::PaperGTilde; }
  std::optional<int> n_p() const;

  double g(int m, const SystemParams& params) const;  // m >= 1
  void validate(const SystemParams& params) const;

 private:
  enum class Kind { None, PaperGTilde, Custom };
  Kind kind_ = Kind::None;
  int n_p_ = 0;
  std::function<double(int)> g_;
};

enum class QueueKind { BerG11, BerGeo11, BerGeo12, BerGeo12Star, BerGeo1c };

// Queue discipline plus its policy data. Preemption and general service exist
// only on the size-1 model; buffered models require p < gamma strictly.
class ModelSpec {
 public:
  static ModelSpec ber_g11(SystemParams params, ServiceDistribution service,
                           PreemptionPolicy preemption);
  static ModelSpec ber_geo11(SystemParams params);
  static ModelSpec ber_geo12(SystemParams params);
  static ModelSpec ber_geo12_star(SystemParams params);
  static ModelSpec ber_geo1c(SystemParams params, int c);

  QueueKind kind() const { return kind_; }
  const SystemParams& params() const { return params_; }
  int capacity() const { return capacity_; }
  int state_dimension() const { return capacity_ + 1; }
  const ServiceDistribution& service() const { return service_; }
  const PreemptionPolicy& preemption() const { return preemption_; }
  std::string name() const;

 private:
  ModelSpec(QueueKind kind, SystemParams params, int capacity,
            ServiceDistribution service, PreemptionPolicy preemption);

  QueueKind kind_;
  SystemParams params_;
  int capacity_;
  ServiceDistribution service_;
  PreemptionPolicy preemption_;
};

}  // namespace aoi
