#include "aoi/age_state.hpp"

#include <algorithm>

namespace aoi {

int AgeState::nonzero_count() const {
  int j = 0;
  while (j < dimension() && v[j] != 0) ++j;
  return j;
}

bool AgeState::valid() const {
  if (v.empty()) return false;
  if (v[0] < 1) return false;
  int j = nonzero_count();
  for (int i = 1; i < j; ++i)
    if (v[i - 1] <= v[i] || v[i] < 1) return false;
  for (int i = j; i < dimension(); ++i)
    if (v[i] != 0) return false;
  return true;
}

std::string AgeState::str() const {
  std::string s = "(";
  for (int i = 0; i < dimension(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  s += ')';
  return s;
}

void validate_age_state(const AgeState& s) {
  if (!s.valid()) throw InvalidState("invalid age state " + s.str());
}

AgeStateSpace::AgeStateSpace(int dimension, int n_cap) : dim_(dimension), n_cap_(n_cap) {
  if (dimension < 1 || dimension > 32) throw InvalidParams("state dimension out of range");
  if (n_cap < dimension) throw InvalidParams("truncation bound below state dimension");
  binom_.assign(dim_ + 2, std::vector<std::uint64_t>(n_cap_ + 2, 0));
  for (int n = 0; n <= n_cap_ + 1; ++n) binom_[0][n] = 1;
  for (int k = 1; k <= dim_ + 1; ++k)
    for (int n = 1; n <= n_cap_ + 1; ++n)
      binom_[k][n] = binom_[k][n - 1] + binom_[k - 1][n - 1];
  offsets_.assign(dim_ + 2, 0);
  for (int j = 1; j <= dim_; ++j) offsets_[j + 1] = offsets_[j] + binom_[j][n_cap_];
  total_ = offsets_[dim_ + 1];
}

std::uint64_t AgeStateSpace::shape_count(int j) const { return binom_[j][n_cap_]; }

std::uint64_t AgeStateSpace::choose(int n, int k) const {
  if (k < 0 || k > dim_ + 1 || n < 0) return 0;
  if (n > n_cap_ + 1) throw InvalidParams("binomial cache overrun");
  return binom_[k][n];
}

std::uint64_t AgeStateSpace::rank(const AgeState& s) const {
  validate_age_state(s);
  if (s.dimension() != dim_ || s.v[0] > n_cap_)
    throw InvalidState("state " + s.str() + " outside this space");
  int j = s.nonzero_count();
  std::uint64_t r = offsets_[j];
  for (int i = 0; i < j; ++i) r += binom_[j - i][s.v[i] - 1];
  return r;
}

AgeState AgeStateSpace::unrank(std::uint64_t r) const {
  if (r >= total_) throw InvalidState("rank out of range");
  int j = 1;
  while (r >= offsets_[j + 1]) ++j;
  r -= offsets_[j];
  AgeState s;
  s.v.assign(dim_, 0);
  int hi = n_cap_;  // v_i - 1 < previous v - 1, search downward
  for (int i = 0; i < j; ++i) {
    int k = j - i;
    int a = hi - 1;
    while (binom_[k][a] > r) --a;
    s.v[i] = a + 1;
    r -= binom_[k][a];
    hi = a;
  }
  return s;
}

bool AgeStateSpace::first_of_shape(int j, AgeState& s) const {
  if (j > n_cap_) return false;
  for (int i = 0; i < dim_; ++i) s.v[i] = i < j ? j - i : 0;
  return true;
}

bool AgeStateSpace::next_of_shape(int j, AgeState& s) const {
  // Colex increment: bump the deepest component that can grow, reset the ones
  // after it to their minimal staircase.
  for (int i = j - 1; i >= 0; --i) {
    int limit = (i == 0) ? n_cap_ : s.v[i - 1] - 1;
    if (s.v[i] + 1 <= limit) {
      ++s.v[i];
      for (int t = i + 1; t < j; ++t) s.v[t] = j - t;
      return true;
    }
  }
  return false;
}

}  // namespace aoi
