#include <algorithm>
#include <cstdio>
#include <cstring>
#include <ostream>

#include "aoi/chain.hpp"
#include "chain_detail.hpp"

namespace aoi {

using detail::kMaxDim;
using detail::RawSuccessors;

namespace {

// Clamped aging: component i may not exceed n_cap - i, which preserves the
// strict descent; the extreme corner state ages onto itself.
inline std::int32_t age_clamped(std::int32_t v, int comp, int n_cap) {
  std::int32_t cap = static_cast<std::int32_t>(n_cap - comp);
  return v + 1 > cap ? cap : v + 1;
}

void succ_ber_g11(const TransitionKernel& K, const std::int32_t* v, RawSuccessors& out) {
  const int N = K.n_cap();
  const double p = K.model().params().p();
  const double q1 = K.model().service().q1();
  auto put = [&](std::int32_t a, std::int32_t b, double pr) {
    if (pr <= 0.0) return;
    int i = out.count++;
    out.to[i][0] = a;
    out.to[i][1] = b;
    out.prob[i] = pr;
  };
  const std::int32_t n = v[0], m = v[1];
  if (m == 0) {
    put(age_clamped(n, 0, N), 0, 1.0 - p);
    put(age_clamped(n, 0, N), 1, p * (1.0 - q1));
    put(1, 0, p * q1);
    return;
  }
  const double pg = K.preempt_prob(m);
  const double surv = K.survive(m);
  put(age_clamped(n, 0, N), age_clamped(m, 1, N), (1.0 - pg) * surv);
  put(m + 1, 0, (1.0 - pg) * (1.0 - surv));
  put(age_clamped(n, 0, N), 1, pg * (1.0 - q1));
  put(1, 0, pg * q1);
}

// Ber/Geo/1/c for any c >= 1; also the hand-check reference for c = 1.
void succ_ber_geo1c(const TransitionKernel& K, const std::int32_t* v, RawSuccessors& out) {
  const int N = K.n_cap();
  const int dim = K.space().dimension();
  const double p = K.model().params().p();
  const double g = K.model().params().gamma();
  int j = 0;
  while (j < dim && v[j] != 0) ++j;

  auto blank = [&](int i) { std::fill(out.to[i].begin(), out.to[i].end(), 0); };
  auto put_aged = [&](double pr, bool arrival) {
    if (pr <= 0.0) return;
    int i = out.count++;
    blank(i);
    for (int t = 0; t < j; ++t) out.to[i][t] = age_clamped(v[t], t, N);
    if (arrival) out.to[i][j] = 1;
    out.prob[i] = pr;
  };
  auto put_delivered = [&](double pr, bool arrival) {
    if (pr <= 0.0) return;
    int i = out.count++;
    blank(i);
    for (int t = 1; t < j; ++t) out.to[i][t - 1] = v[t] + 1;
    if (arrival) out.to[i][j - 1] = 1;
    out.prob[i] = pr;
  };

  if (j == 1) {  // empty system
    put_aged(1.0 - p, false);
    put_aged(p * (1.0 - g), true);
    int i = out.count++;
    blank(i);
    out.to[i][0] = 1;
    out.prob[i] = p * g;
    return;
  }
  if (j == dim) {  // full: arrivals are discarded
    put_aged(1.0 - g, false);
    put_delivered(g, false);
    return;
  }
  put_aged((1.0 - p) * (1.0 - g), false);
  put_aged(p * (1.0 - g), true);
  put_delivered((1.0 - p) * g, false);
  put_delivered(p * g, true);
}

void succ_ber_geo12(const TransitionKernel& K, const std::int32_t* v, RawSuccessors& out) {
  const int N = K.n_cap();
  const double p = K.model().params().p();
  const double g = K.model().params().gamma();
  auto put = [&](std::int32_t a, std::int32_t b, std::int32_t c, double pr) {
    if (pr <= 0.0) return;
    int i = out.count++;
    out.to[i][0] = a;
    out.to[i][1] = b;
    out.to[i][2] = c;
    out.prob[i] = pr;
  };
  const std::int32_t n = v[0], m = v[1], l = v[2];
  if (m == 0) {
    put(age_clamped(n, 0, N), 0, 0, 1.0 - p);
    put(age_clamped(n, 0, N), 1, 0, p * (1.0 - g));
    put(1, 0, 0, p * g);
  } else if (l == 0) {
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), 0, (1.0 - p) * (1.0 - g));
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), 1, p * (1.0 - g));
    put(m + 1, 0, 0, (1.0 - p) * g);
    put(m + 1, 1, 0, p * g);
  } else {
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), age_clamped(l, 2, N), 1.0 - g);
    put(m + 1, l + 1, 0, g);
  }
}

void succ_ber_geo12_star(const TransitionKernel& K, const std::int32_t* v,
                         RawSuccessors& out) {
  const int N = K.n_cap();
  const double p = K.model().params().p();
  const double g = K.model().params().gamma();
  auto put = [&](std::int32_t a, std::int32_t b, std::int32_t c, double pr) {
    if (pr <= 0.0) return;
    int i = out.count++;
    out.to[i][0] = a;
    out.to[i][1] = b;
    out.to[i][2] = c;
    out.prob[i] = pr;
  };
  const std::int32_t n = v[0], m = v[1], l = v[2];
  if (m == 0) {
    put(age_clamped(n, 0, N), 0, 0, 1.0 - p);
    put(age_clamped(n, 0, N), 1, 0, p * (1.0 - g));
    put(1, 0, 0, p * g);
  } else if (l == 0) {
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), 0, (1.0 - p) * (1.0 - g));
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), 1, p * (1.0 - g));
    put(m + 1, 0, 0, (1.0 - p) * g);
    put(m + 1, 1, 0, p * g);
  } else {
    // A fresh arrival replaces the queued packet before anything else happens.
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), age_clamped(l, 2, N),
        (1.0 - p) * (1.0 - g));
    put(m + 1, l + 1, 0, (1.0 - p) * g);
    put(age_clamped(n, 0, N), age_clamped(m, 1, N), 1, p * (1.0 - g));
    put(m + 1, 1, 0, p * g);
  }
}

}  // namespace

void detail::successors_raw(const TransitionKernel& kernel, const std::int32_t* v,
                            RawSuccessors& out) {
  out.count = 0;
  switch (kernel.model().kind()) {
    case QueueKind::BerG11:
      succ_ber_g11(kernel, v, out);
      return;
    case QueueKind::BerGeo11:
    case QueueKind::BerGeo1c:
      succ_ber_geo1c(kernel, v, out);
      return;
    case QueueKind::BerGeo12:
      succ_ber_geo12(kernel, v, out);
      return;
    case QueueKind::BerGeo12Star:
      succ_ber_geo12_star(kernel, v, out);
      return;
  }
}

std::uint64_t detail::rank_raw(const AgeStateSpace& space, const std::int32_t* v) {
  int dim = space.dimension();
  int j = 0;
  while (j < dim && v[j] != 0) ++j;
  std::uint64_t r = space.shape_offset(j);
  for (int i = 0; i < j; ++i) r += space.choose(v[i] - 1, j - i);
  return r;
}

void detail::apply_kernel(const TransitionKernel& kernel, const double* pi, double* y) {
  const AgeStateSpace& space = kernel.space();
  std::fill(y, y + space.size(), 0.0);
  RawSuccessors succ;
  space.for_each([&](const AgeState& s, std::uint64_t r) {
    double w = pi[r];
    if (w == 0.0) return;
    detail::successors_raw(kernel, s.v.data(), succ);
    for (int i = 0; i < succ.count; ++i)
      y[detail::rank_raw(space, succ.to[i].data())] += w * succ.prob[i];
  });
}

double detail::kernel_residual(const TransitionKernel& kernel, const double* pi) {
  std::vector<double> y(kernel.space().size());
  apply_kernel(kernel, pi, y.data());
  double r = 0.0;
  for (std::uint64_t i = 0; i < y.size(); ++i) r += std::abs(y[i] - pi[i]);
  return r;
}

TransitionKernel::TransitionKernel(ModelSpec model, int n_cap, std::uint64_t state_budget)
    : model_(std::move(model)), space_(model_.state_dimension(), std::max(n_cap, 1)) {
  if (n_cap < 3) throw InvalidParams("kernel truncation must satisfy N >= 3");
  if (model_.state_dimension() > kMaxDim)
    throw InvalidParams("state dimension above the supported cap of " +
                        std::to_string(kMaxDim));
  if (space_.size() > state_budget)
    throw StateSpaceTooLarge("kernel would enumerate " + std::to_string(space_.size()) +
                             " states, over the budget of " + std::to_string(state_budget));
  survive_.assign(n_cap + 2, 0.0);
  preempt_.assign(n_cap + 2, 0.0);
  const ServiceDistribution& service = model_.service();
  const PreemptionPolicy& preemption = model_.preemption();
  for (int a = 1; a <= n_cap + 1; ++a) {
    survive_[a] = service.survive(a);
    preempt_[a] = model_.kind() == QueueKind::BerG11
                      ? model_.params().p() * preemption.g(a, model_.params())
                      : 0.0;
  }
}

double TransitionKernel::survive(int age) const {
  return survive_[std::min<std::size_t>(age, survive_.size() - 1)];
}

double TransitionKernel::preempt_prob(int m) const {
  return preempt_[std::min<std::size_t>(m, preempt_.size() - 1)];
}

void TransitionKernel::successors(const AgeState& s,
                                  std::vector<std::pair<AgeState, double>>& out) const {
  validate_age_state(s);
  if (s.dimension() != space_.dimension() || s.v[0] > n_cap())
    throw InvalidState("state " + s.str() + " outside this kernel");
  RawSuccessors succ;
  detail::successors_raw(*this, s.v.data(), succ);
  out.clear();
  for (int i = 0; i < succ.count; ++i) {
    AgeState t;
    t.v.assign(succ.to[i].begin(), succ.to[i].begin() + space_.dimension());
    out.emplace_back(std::move(t), succ.prob[i]);
  }
}

void TransitionKernel::successors(std::uint64_t rank, std::vector<Transition>& out) const {
  AgeState s = space_.unrank(rank);
  RawSuccessors succ;
  detail::successors_raw(*this, s.v.data(), succ);
  out.clear();
  for (int i = 0; i < succ.count; ++i)
    out.push_back({detail::rank_raw(space_, succ.to[i].data()), succ.prob[i]});
}

double TransitionKernel::row_sum(const AgeState& s) const {
  RawSuccessors succ;
  detail::successors_raw(*this, s.v.data(), succ);
  double total = 0.0;
  for (int i = 0; i < succ.count; ++i) total += succ.prob[i];
  return total;
}

void TransitionKernel::dump(std::ostream& os) const {
  RawSuccessors succ;
  char buf[64];
  space_.for_each([&](const AgeState& s, std::uint64_t) {
    detail::successors_raw(*this, s.v.data(), succ);
    for (int i = 0; i < succ.count; ++i) {
      AgeState t;
      t.v.assign(succ.to[i].begin(), succ.to[i].begin() + space_.dimension());
      std::snprintf(buf, sizeof buf, "%.17g", succ.prob[i]);
      os << s.str() << " -> " << t.str() << ' ' << buf << '\n';
    }
  });
}

SparseKernel SparseKernel::from_dense(const std::vector<std::vector<double>>& rows) {
  SparseKernel k;
  k.n = rows.size();
  k.row_ptr.push_back(0);
  for (const auto& row : rows) {
    if (row.size() != rows.size()) throw InvalidParams("dense kernel must be square");
    double sum = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      sum += row[j];
      if (row[j] != 0.0) {
        k.col.push_back(static_cast<std::uint32_t>(j));
        k.val.push_back(row[j]);
      }
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw InvalidParams("kernel row does not sum to 1");
    k.row_ptr.push_back(k.col.size());
  }
  return k;
}

SparseKernel materialize(const TransitionKernel& kernel) {
  const AgeStateSpace& space = kernel.space();
  if (space.size() > (1ull << 32))
    throw StateSpaceTooLarge("kernel too large to materialize");
  SparseKernel out;
  out.n = space.size();
  out.row_ptr.reserve(out.n + 1);
  out.row_ptr.push_back(0);
  RawSuccessors succ;
  space.for_each([&](const AgeState& s, std::uint64_t) {
    detail::successors_raw(kernel, s.v.data(), succ);
    for (int i = 0; i < succ.count; ++i) {
      out.col.push_back(
          static_cast<std::uint32_t>(detail::rank_raw(space, succ.to[i].data())));
      out.val.push_back(succ.prob[i]);
    }
    out.row_ptr.push_back(out.col.size());
  });
  return out;
}

}  // namespace aoi
