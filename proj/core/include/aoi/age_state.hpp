#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi {

// Age vector (v1, ..., vk): v1 is the AoI, the rest are packet ages. The
// nonzero prefix is strictly decreasing, everything after the first zero is
// zero, and v1 >= 1.
struct AgeState {
  std::vector<std::int32_t> v;

  AgeState() = default;
  AgeState(std::initializer_list<std::int32_t> init) : v(init) {}
  explicit AgeState(std::vector<std::int32_t> ages) : v(std::move(ages)) {}

  int dimension() const { return static_cast<int>(v.size()); }
  int nonzero_count() const;
  bool valid() const;
  std::string str() const;  // "(3,2,1)"

  friend bool operator==(const AgeState&, const AgeState&) = default;
};

void validate_age_state(const AgeState& s);  // throws InvalidState

// Dense rank <-> state codec over every valid k-dimensional age state with
// v1 <= n_cap. States are blocked by the count j of nonzero components; inside
// a block the strictly decreasing tuples are ordered by the colexicographic
// combinatorial number system, so ranks of one (shape, level) slice are
// contiguous and successor ranks are binomial-table arithmetic.
class AgeStateSpace {
 public:
  AgeStateSpace(int dimension, int n_cap);

  int dimension() const { return dim_; }
  int n_cap() const { return n_cap_; }
  std::uint64_t size() const { return total_; }

  std::uint64_t shape_offset(int j) const { return offsets_[j]; }  // j in [1, dim]
  std::uint64_t shape_count(int j) const;
  std::uint64_t choose(int n, int k) const;  // cached C(n, k), k <= dim

  std::uint64_t rank(const AgeState& s) const;
  AgeState unrank(std::uint64_t r) const;

  // f(state, rank) over all states in rank order.
  template <typename F>
  void for_each(F&& f) const {
    AgeState s;
    s.v.assign(dim_, 0);
    std::uint64_t r = 0;
    for (int j = 1; j <= dim_; ++j) {
      if (!first_of_shape(j, s)) continue;
      do {
        f(static_cast<const AgeState&>(s), r);
        ++r;
      } while (next_of_shape(j, s));
    }
  }

 private:
  // Smallest shape-j state (j, j-1, ..., 1, 0, ...); false if none fits.
  bool first_of_shape(int j, AgeState& s) const;
  // Advance within shape j in colex order; false when exhausted.
  bool next_of_shape(int j, AgeState& s) const;

  int dim_;
  int n_cap_;
  std::vector<std::vector<std::uint64_t>> binom_;  // binom_[k][n] = C(n, k)
  std::vector<std::uint64_t> offsets_;             // offsets_[j], j in [1, dim+1]
  std::uint64_t total_;
};

}  // namespace aoi
