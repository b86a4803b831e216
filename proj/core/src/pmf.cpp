#include "aoi/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace aoi {

double Pmf::at(int n) const {
  int i = n - support_start;
  if (i < 0 || i >= static_cast<int>(probs.size())) return 0.0;
  return probs[i];
}

double Pmf::sum() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

void Pmf::validate() const {
  if (support_start < 0) throw InvalidParams("pmf support must start at 0 or later");
  if (!(tail_bound >= 0.0)) throw InvalidParams("pmf tail bound must be >= 0");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0 + 1e-12))
      throw InvalidParams("pmf entry " + std::to_string(p) + " outside [0, 1]");
  double s = sum();
  if (s > 1.0 + 1e-9) throw InvalidParams("pmf mass " + std::to_string(s) + " exceeds 1");
  if (s + tail_bound < 1.0 - 1e-9)
    throw InvalidParams("pmf mass " + std::to_string(s) + " plus tail bound " +
                        std::to_string(tail_bound) + " falls short of 1");
}

double pmf_mean(const Pmf& pmf) {
  double m = 0.0;
  for (std::size_t i = 0; i < pmf.probs.size(); ++i)
    m += (pmf.support_start + static_cast<double>(i)) * pmf.probs[i];
  return m;
}

double pmf_mean_error_bound(const Pmf& pmf) {
  if (pmf.tail_bound == 0.0) return 0.0;
  double first_tail_value = pmf.support_end() + 1;
  double r = pmf.tail_ratio;
  // Truncated mass sits at support_end + 1 or beyond; a geometric profile with
  // ratio r places its mean at first_tail_value + r / (1 - r).
  double tail_mean = (r > 0.0 && r < 1.0) ? first_tail_value + r / (1.0 - r) : first_tail_value;
  return pmf.tail_bound * tail_mean;
}

double pmf_total_variation(const Pmf& a, const Pmf& b) {
  if (a.support_start != b.support_start)
    throw MismatchedSupport("total variation needs matching support starts: " +
                            std::to_string(a.support_start) + " vs " +
                            std::to_string(b.support_start));
  std::size_t n = std::max(a.probs.size(), b.probs.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pa = i < a.probs.size() ? a.probs[i] : 0.0;
    double pb = i < b.probs.size() ? b.probs[i] : 0.0;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv + 0.5 * (a.tail_bound + b.tail_bound);
}

double geometric_tail_bound(double last_prob, double ratio, int n_max) {
  if (last_prob <= 0.0) return 0.0;
  if (!(ratio > 0.0 && ratio < 1.0)) return last_prob;
  // Geometric remainder, inflated by n_max^2 to cover polynomial factors.
  return last_prob * (ratio / (1.0 - ratio)) * static_cast<double>(n_max) *
         static_cast<double>(n_max);
}

}  // namespace aoi
