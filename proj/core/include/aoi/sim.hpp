#pragma once

#include <cstdint>
#include <vector>

#include "aoi/params.hpp"
#include "aoi/pmf.hpp"

namespace aoi {

// splitmix64 (Steele, Lea, Flood 2014). Fixed integer arithmetic, so one seed
// yields one bit-identical stream on every platform.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct SimConfig {
  enum class Mode { Physical, KernelSampling };

  ModelSpec model;
  long long slots = 5'000'000;
  long long warmup_slots = 10'000;
  std::uint64_t seed = 1;
  Mode mode = Mode::Physical;
  int kernel_n_cap = 512;         // truncation used by KernelSampling mode
  int histogram_cap = 1'000'000;  // ages above this land in the overflow tail
  long long trace_slots = 0;      // record this many post-warmup slots

  SimConfig(ModelSpec m) : model(std::move(m)) {}
  void validate() const;
};

struct SimTrace {
  std::vector<std::int32_t> aoi;            // a(k) per recorded slot
  std::vector<std::int32_t> delivered_age;  // recorded system time, -1 if none
};

struct SimStats {
  // Occupancy counts per slot: AoI, in-service age, first queued age.
  std::vector<std::uint64_t> aoi_counts;
  std::vector<std::uint64_t> system_age_counts;
  std::vector<std::uint64_t> waiting_age_counts;
  long long observed_slots = 0;
  double mean_aoi = 0.0;

  // Whole-run packet accounting: generated = delivered + discarded + replaced
  // + in_flight_end. KernelSampling mode only observes deliveries.
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t discarded = 0;
  std::uint64_t replaced = 0;
  std::uint64_t in_flight_end = 0;
  std::uint64_t aoi_overflow = 0;

  SimTrace trace;

  Pmf aoi_pmf() const;
  Pmf system_time_pmf() const;
  Pmf waiting_time_pmf() const;

  bool operator==(const SimStats& other) const;
};

SimStats run(const SimConfig& config);

// Time-average AoI over the post-warmup slots; same accumulation as the
// histogram, so it equals pmf_mean(aoi_pmf()) exactly.
double mean_aoi_stream(const SimConfig& config);

namespace detail {

// One physical slot transition, exposed so tests can match single-step
// frequencies against the kernel rows.
struct PhysicalState {
  std::int64_t aoi = 1;
  std::vector<std::int32_t> ages;  // in-service first, then queue, no zeros
};

struct StepEvents {
  bool generated = false;
  bool delivered = false;
  bool discarded = false;
  bool replaced = false;
  std::int32_t delivered_age = -1;
};

StepEvents physical_step(const ModelSpec& model, PhysicalState& state, SplitMix64& rng);

}  // namespace detail

}  // namespace aoi
