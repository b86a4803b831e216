#include "aoi/sim.hpp"

#include <algorithm>

#include "aoi/chain.hpp"

namespace aoi {

void SimConfig::validate() const {
  if (warmup_slots < 0 || slots <= warmup_slots)
    throw InvalidParams("need slots > warmup_slots >= 0");
  if (histogram_cap < 1024) throw InvalidParams("histogram cap unreasonably small");
  if (mode == Mode::KernelSampling && kernel_n_cap < 3)
    throw InvalidParams("kernel sampling needs kernel_n_cap >= 3");
}

namespace detail {

// One slot of the physical system, matching the chain kernel's one-step law:
// the arrival (and any replacement or preemption it causes) is resolved at the
// slot boundary first, then the in-service packet's completion is drawn, then
// every resident age advances. A delivery resets the AoI to the delivered
// packet's recorded age plus one.
StepEvents physical_step(const ModelSpec& model, PhysicalState& state, SplitMix64& rng) {
  const double p = model.params().p();
  StepEvents ev;
  const bool arrival = rng.uniform() < p;
  if (arrival) ev.generated = true;
  auto& ages = state.ages;
  const int resident = static_cast<int>(ages.size());

  if (model.kind() == QueueKind::BerG11) {
    const ServiceDistribution& service = model.service();
    const double q1 = service.q1();
    if (resident == 0) {
      if (!arrival) {
        ++state.aoi;
        return ev;
      }
      if (rng.uniform() < q1) {  // served within the arrival slot
        ev.delivered = true;
        ev.delivered_age = 0;
        state.aoi = 1;
      } else {
        ages.push_back(1);
        ++state.aoi;
      }
      return ev;
    }
    const int m = ages[0];
    if (arrival) {
      double gm = model.preemption().g(m, model.params());
      if (rng.uniform() < gm) {
        ev.replaced = true;  // in-service packet preempted by the fresh one
        if (rng.uniform() < q1) {
          ev.delivered = true;
          ev.delivered_age = 0;
          state.aoi = 1;
          ages.clear();
        } else {
          ages[0] = 1;
          ++state.aoi;
        }
        return ev;
      }
      ev.discarded = true;
    }
    if (rng.uniform() < 1.0 - service.survive(m)) {
      ev.delivered = true;
      ev.delivered_age = m;
      state.aoi = m + 1;
      ages.clear();
    } else {
      ages[0] = m + 1;
      ++state.aoi;
    }
    return ev;
  }

  // Geometric service, capacity c; the replacement variant refreshes the
  // queued packet instead of discarding the arrival when full.
  const double gamma = model.params().gamma();
  const int c = model.capacity();
  const bool replacing = model.kind() == QueueKind::BerGeo12Star;

  if (resident == 0) {
    if (!arrival) {
      ++state.aoi;
      return ev;
    }
    if (rng.uniform() < gamma) {
      ev.delivered = true;
      ev.delivered_age = 0;
      state.aoi = 1;
    } else {
      ages.push_back(1);
      ++state.aoi;
    }
    return ev;
  }

  bool admitted = false;
  if (arrival) {
    if (resident < c) {
      admitted = true;
    } else if (replacing) {
      ev.replaced = true;   // queued packet swapped for the fresh arrival
      ages.back() = 0;      // ages to 1 below
    } else {
      ev.discarded = true;
    }
  }
  const bool completion = rng.uniform() < gamma;
  if (completion) {
    ev.delivered = true;
    ev.delivered_age = ages[0];
    state.aoi = ages[0] + 1;
    ages.erase(ages.begin());
  } else {
    ++state.aoi;
  }
  for (auto& a : ages) ++a;
  if (admitted) ages.push_back(1);
  return ev;
}

}  // namespace detail

namespace {

struct Recorder {
  const SimConfig& cfg;
  std::vector<std::uint64_t> aoi_counts, m_counts, l_counts;
  std::uint64_t aoi_sum = 0, overflow = 0;
  long long observed = 0;
  SimTrace trace;

  explicit Recorder(const SimConfig& c)
      : cfg(c),
        aoi_counts(c.histogram_cap + 1, 0),
        m_counts(c.histogram_cap + 1, 0),
        l_counts(c.histogram_cap + 1, 0) {}

  void slot(std::int64_t aoi, std::int32_t m, std::int32_t l) {
    std::int64_t a = aoi;
    if (a > cfg.histogram_cap) {
      ++overflow;
      a = cfg.histogram_cap;
    }
    ++aoi_counts[a];
    aoi_sum += static_cast<std::uint64_t>(a);
    ++m_counts[std::min<std::int64_t>(m, cfg.histogram_cap)];
    ++l_counts[std::min<std::int64_t>(l, cfg.histogram_cap)];
    ++observed;
    if (observed <= cfg.trace_slots) {
      trace.aoi.push_back(static_cast<std::int32_t>(a));
      trace.delivered_age.push_back(-1);  // patched after the step
    }
  }

  void delivery(std::int32_t recorded_age) {
    if (observed >= 1 && observed <= cfg.trace_slots && !trace.delivered_age.empty())
      trace.delivered_age.back() = recorded_age;
  }
};

Pmf counts_to_pmf(const std::vector<std::uint64_t>& counts, long long observed,
                  int support_start, std::uint64_t overflow) {
  Pmf out;
  out.support_start = support_start;
  int hi = static_cast<int>(counts.size()) - 1;
  while (hi > support_start && counts[hi] == 0) --hi;
  out.probs.reserve(hi - support_start + 1);
  for (int n = support_start; n <= hi; ++n)
    out.probs.push_back(static_cast<double>(counts[n]) / static_cast<double>(observed));
  out.tail_bound = static_cast<double>(overflow) / static_cast<double>(observed);
  return out;
}

SimStats run_physical(const SimConfig& cfg) {
  SplitMix64 rng(cfg.seed);
  detail::PhysicalState state;
  state.aoi = 1;
  state.ages.reserve(cfg.model.capacity());
  Recorder rec(cfg);
  SimStats stats;

  for (long long slot = 0; slot < cfg.slots; ++slot) {
    if (slot >= cfg.warmup_slots)
      rec.slot(state.aoi, state.ages.empty() ? 0 : state.ages[0],
               state.ages.size() > 1 ? state.ages[1] : 0);
    detail::StepEvents ev = detail::physical_step(cfg.model, state, rng);
    stats.generated += ev.generated;
    stats.delivered += ev.delivered;
    stats.discarded += ev.discarded;
    stats.replaced += ev.replaced;
    if (ev.delivered && slot >= cfg.warmup_slots) rec.delivery(ev.delivered_age);
  }
  stats.in_flight_end = state.ages.size();
  stats.aoi_counts = std::move(rec.aoi_counts);
  stats.system_age_counts = std::move(rec.m_counts);
  stats.waiting_age_counts = std::move(rec.l_counts);
  stats.observed_slots = rec.observed;
  stats.aoi_overflow = rec.overflow;
  stats.mean_aoi = static_cast<double>(rec.aoi_sum) / static_cast<double>(rec.observed);
  stats.trace = std::move(rec.trace);
  return stats;
}

SimStats run_kernel_sampling(const SimConfig& cfg) {
  TransitionKernel kernel(cfg.model, cfg.kernel_n_cap);
  SplitMix64 rng(cfg.seed);
  Recorder rec(cfg);
  SimStats stats;

  AgeState state;
  state.v.assign(cfg.model.state_dimension(), 0);
  state.v[0] = 1;
  std::vector<std::pair<AgeState, double>> succ;

  for (long long slot = 0; slot < cfg.slots; ++slot) {
    if (slot >= cfg.warmup_slots)
      rec.slot(state.v[0], state.v.size() > 1 ? state.v[1] : 0,
               state.v.size() > 2 ? state.v[2] : 0);
    kernel.successors(state, succ);
    double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = succ.size() - 1;
    for (std::size_t i = 0; i < succ.size(); ++i) {
      acc += succ[i].second;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    bool delivered = succ[pick].first.v[0] <= state.v[0];
    state = succ[pick].first;
    if (delivered) {
      ++stats.delivered;
      if (slot >= cfg.warmup_slots) rec.delivery(state.v[0] - 1);
    }
  }
  stats.in_flight_end = state.nonzero_count() - 1;
  stats.aoi_counts = std::move(rec.aoi_counts);
  stats.system_age_counts = std::move(rec.m_counts);
  stats.waiting_age_counts = std::move(rec.l_counts);
  stats.observed_slots = rec.observed;
  stats.aoi_overflow = rec.overflow;
  stats.mean_aoi = static_cast<double>(rec.aoi_sum) / static_cast<double>(rec.observed);
  stats.trace = std::move(rec.trace);
  return stats;
}

}  // namespace

SimStats run(const SimConfig& config) {
  config.validate();
  return config.mode == SimConfig::Mode::Physical ? run_physical(config)
                                                  : run_kernel_sampling(config);
}

double mean_aoi_stream(const SimConfig& config) { return run(config).mean_aoi; }

Pmf SimStats::aoi_pmf() const {
  return counts_to_pmf(aoi_counts, observed_slots, 1, aoi_overflow);
}

Pmf SimStats::system_time_pmf() const {
  return counts_to_pmf(system_age_counts, observed_slots, 0, 0);
}

Pmf SimStats::waiting_time_pmf() const {
  return counts_to_pmf(waiting_age_counts, observed_slots, 0, 0);
}

bool SimStats::operator==(const SimStats& other) const {
  return aoi_counts == other.aoi_counts && system_age_counts == other.system_age_counts &&
         waiting_age_counts == other.waiting_age_counts &&
         observed_slots == other.observed_slots && mean_aoi == other.mean_aoi &&
         generated == other.generated && delivered == other.delivered &&
         discarded == other.discarded && replaced == other.replaced &&
         in_flight_end == other.in_flight_end && aoi_overflow == other.aoi_overflow;
}

}  // namespace aoi
