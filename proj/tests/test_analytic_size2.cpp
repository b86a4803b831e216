#include <cmath>

#include <doctest.h>

#include "aoi/analytic.hpp"
#include "aoi/sim.hpp"

using namespace aoi;

namespace {
const SystemParams kRef(0.2, 1.0 / 3.0);

double eq118(int n) {
  double x = std::pow(0.8, n), z = std::pow(2.0 / 3.0, n);
  return 10.0 / 17.0 * (x - z) - 9.0 / 136.0 * n * z + n * n * z / 136.0;
}

double eq119(int k) {
  double x = std::pow(0.8, k), z = std::pow(2.0 / 3.0, k);
  return 1.0 - 40.0 / 17.0 * x + 23.0 / 17.0 * z + 3.0 / 68.0 * k * z - k * k * z / 68.0;
}

double eq123(int n) {
  double x = std::pow(0.8, n - 1), z = std::pow(2.0 / 3.0, n - 1),
         y = std::pow(8.0 / 15.0, n - 1);
  return 0.4 * x - 131.0 / 102.0 * z + 194.0 / 255.0 * y + 11.0 / 102.0 * n * z +
         14.0 / 255.0 * n * y;
}

double eq124(int k) {
  double x = std::pow(0.8, k), z = std::pow(2.0 / 3.0, k), y = std::pow(8.0 / 15.0, k);
  return 2.0 * x - 49.0 / 17.0 * z + 32.0 / 17.0 * y + 11.0 / 34.0 * k * z +
         14.0 / 119.0 * k * y;
}
}  // namespace

TEST_CASE("Ber/Geo/1/2 AoI pmf matches the worked example") {
  Pmf pmf = ber_geo12_aoi_pmf(kRef, 64);
  pmf.validate();
  CHECK(pmf.at(1) == doctest::Approx(2.0 / 51.0).epsilon(1e-14));
  for (int n = 1; n <= 50; ++n)
    CHECK(pmf.at(n) == doctest::Approx(eq118(n)).epsilon(1e-12));
}

TEST_CASE("Ber/Geo/1/2 cdf and violation") {
  for (int k = 1; k <= 60; ++k)
    CHECK(ber_geo12_aoi_cdf(kRef, k) == doctest::Approx(eq119(k)).epsilon(1e-12));
  for (int k = 2; k <= 200; ++k) {
    double diff = ber_geo12_aoi_cdf(kRef, k) - ber_geo12_aoi_cdf(kRef, k - 1);
    CHECK(std::abs(diff - eq118(k)) <= 1e-11);
  }
  ModelSpec m = ModelSpec::ber_geo12(kRef);
  ViolationReport r = violation_report(m, 10);
  CHECK(r.p_violation == doctest::Approx(1.0 - eq119(10)).epsilon(1e-11));
  REQUIRE(r.lower_bound.has_value());
  CHECK(r.exponent > *r.lower_bound);
}

TEST_CASE("Ber/Geo/1/2 requires a stable load") {
  CHECK_THROWS_AS(ber_geo12_aoi_pmf(SystemParams(0.5, 0.4), 32), Unstable);
  CHECK_THROWS_AS(ber_geo12_state_prob(SystemParams(0.5, 0.4), AgeState{3, 2, 1}), Unstable);
}

TEST_CASE("Ber/Geo/1/2 state probabilities and the Lemma sums") {
  CHECK(ber_geo12_state_prob(kRef, AgeState{1, 0, 0}) ==
        doctest::Approx(2.0 / 51.0).epsilon(1e-14));
  CHECK_THROWS_AS(ber_geo12_state_prob(kRef, AgeState{3, 3, 0}), InvalidState);
  CHECK_THROWS_AS(ber_geo12_state_prob(kRef, AgeState{2, 0, 1}), InvalidState);

  AnalyticIntermediates im = analytic_intermediates(kRef);
  const int cap = 900;  // (1-p)^900 ~ 1e-87, far below the check tolerance
  double m1 = 0.0;
  for (int n = 1; n <= cap; ++n) m1 += ber_geo12_state_prob(kRef, AgeState{n, 0, 0});
  CHECK(m1 == doctest::Approx(im.m1).epsilon(1e-10));

  double m2 = 0.0;
  for (int n = 2; n <= cap; ++n)
    for (int m = 1; m < n; ++m)
      m2 += ber_geo12_state_prob(kRef, AgeState{n, m, 0});
  CHECK(m2 == doctest::Approx(im.m2).epsilon(1e-8));

  // column sums of Lemma 3: sum_{k >= n} pi(k, n-1, 0) = gamma M2 (1-gamma)^{n-2}
  for (int n = 2; n <= 30; ++n) {
    double s = 0.0;
    for (int k = n; k <= cap; ++k)
      s += ber_geo12_state_prob(kRef, AgeState{k, n - 1, 0});
    double expect = kRef.gamma() * im.m2 * std::pow(1.0 - kRef.gamma(), n - 2);
    CHECK(s == doctest::Approx(expect).epsilon(1e-10));
  }

  // last line of the stationary equations: sum_n pi(n,0,0) = pi(1,0,0)/(p gamma)
  CHECK(m1 == doctest::Approx(ber_geo12_state_prob(kRef, AgeState{1, 0, 0}) /
                              (kRef.p() * kRef.gamma()))
                  .epsilon(1e-10));
}

TEST_CASE("Ber/Geo/1/2 system and waiting time") {
  Pmf tm = ber_geo12_system_time_pmf(kRef, 60);
  Pmf wm = ber_geo12_waiting_time_pmf(kRef, 60);
  tm.validate();
  wm.validate();
  CHECK(wm.at(0) == doctest::Approx(15.0 / 17.0).epsilon(1e-14));
  CHECK(tm.at(0) == doctest::Approx(10.0 / 17.0).epsilon(1e-14));
  CHECK(tm.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(wm.sum() == doctest::Approx(1.0).epsilon(1e-9));
  // W conditional on W >= 1 is geometric with rate gamma
  double w_pos = 1.0 - wm.at(0);
  for (int l = 1; l <= 30; ++l)
    CHECK(wm.at(l) / w_pos ==
          doctest::Approx(kRef.gamma() * std::pow(1.0 - kRef.gamma(), l - 1)).epsilon(1e-10));
}

TEST_CASE("replacement model state probabilities") {
  CHECK(ber_geo12star_state_prob(kRef, AgeState{1, 0, 0}) ==
        doctest::Approx(2.0 / 51.0).epsilon(1e-14));
  CHECK(ber_geo12star_t(kRef, 0) ==
        doctest::Approx((0.8 / 9.0) / (34.0 / 225.0)).epsilon(1e-13));

  // the recursion of Lemma 4 ties deep states to their queue-refresh sources
  const double p = kRef.p(), g = kRef.gamma(), y = 0.8 * (2.0 / 3.0);
  for (auto [n, m, l] : {std::array<int, 3>{7, 4, 2}, {9, 6, 3}, {12, 5, 1}, {6, 5, 4}}) {
    double lhs = ber_geo12star_state_prob(kRef, AgeState{n, m, l});
    double src = 0.0;
    for (int j = 0; j <= m - l - 1; ++j)
      src += ber_geo12star_state_prob(kRef, AgeState{n - l, m - l, j});
    double rhs = src * p * (1.0 - g) * std::pow(y, l - 1);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("replacement model AoI pmf matches the worked example") {
  Pmf pmf = ber_geo12star_aoi_pmf(kRef, 64);
  pmf.validate();
  CHECK(pmf.at(1) == doctest::Approx(2.0 / 51.0).epsilon(1e-13));
  for (int n = 1; n <= 60; ++n)
    CHECK(pmf.at(n) == doctest::Approx(eq123(n)).epsilon(1e-11));

  ModelSpec m = ModelSpec::ber_geo12_star(kRef);
  for (int k = 1; k <= 60; ++k) {
    ViolationReport r = violation_report(m, k);
    CHECK(r.p_violation == doctest::Approx(eq124(k)).epsilon(1e-10));
    CHECK_FALSE(r.lower_bound.has_value());
  }
  Pmf wide = ber_geo12star_aoi_pmf(kRef, 256);
  for (int k = 2; k <= 200; ++k) {
    double diff = ber_geo12star_aoi_cdf(kRef, k) - ber_geo12star_aoi_cdf(kRef, k - 1);
    CHECK(std::abs(diff - wide.at(k)) <= 1e-11);
  }
}

TEST_CASE("replacement model mass accounting") {
  AnalyticIntermediates im = analytic_intermediates(kRef);
  // t_0 + sum t_n = 1
  double total = im.t0;
  for (int n = 1; n <= 2000; ++n) total += ber_geo12star_t(kRef, n);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  // sum_n pi(n,0,0) = pi(1,0,0) / (p gamma)
  double s = 0.0;
  for (int n = 1; n <= 2000; ++n)
    s += ber_geo12star_state_prob(kRef, AgeState{n, 0, 0});
  CHECK(s == doctest::Approx(ber_geo12star_state_prob(kRef, AgeState{1, 0, 0}) /
                             (kRef.p() * kRef.gamma()))
                 .epsilon(1e-10));
}

TEST_CASE("replacement model system and waiting time") {
  Pmf tm = ber_geo12star_system_time_pmf(kRef, 60);
  Pmf wm = ber_geo12star_waiting_time_pmf(kRef, 60);
  tm.validate();
  wm.validate();
  CHECK(wm.at(0) == doctest::Approx(15.0 / 17.0).epsilon(1e-13));
  const double p = kRef.p(), g = kRef.gamma();
  const double beta = p + g - p * g, q = beta * beta - p * g;
  CHECK(wm.at(1) ==
        doctest::Approx(p * p * (1 - g) * (1 - g) * beta / q).epsilon(1e-13));
  // W conditional on W >= 1 decays by (1-p)(1-gamma)
  for (int l = 2; l <= 30; ++l)
    CHECK(wm.at(l) / wm.at(l - 1) ==
          doctest::Approx((1 - p) * (1 - g)).epsilon(1e-12));
  // the system-time weights match the t_n sequence identically
  for (int m = 0; m <= 40; ++m)
    CHECK(tm.at(m) == doctest::Approx(ber_geo12star_t(kRef, m)).epsilon(1e-13));
}

TEST_CASE("normalization identities at random parameter points") {
  SplitMix64 rng(20260810);
  for (int i = 0; i < 100; ++i) {
    double p = 0.02 + 0.96 * rng.uniform();
    double g = 0.02 + 0.96 * rng.uniform();
    double beta = p + g - p * g;
    double n1 = (p + g - 2 * p * g) * g + p * p * (1 - g) * (1 - g);
    // identity (165): p(1-gamma) M1 = (1-p) gamma M2
    double m1 = (1 - p) * g * g / n1, m2 = p * g * (1 - g) / n1;
    CHECK(std::abs(p * (1 - g) * m1 - (1 - p) * g * m2) <= 1e-13);
    // identity (181): N = (1-p) gamma beta + p^2 (1-gamma)
    CHECK(std::abs(n1 - ((1 - p) * g * beta + p * p * (1 - g))) <= 1e-13);
    // identity (217): gamma (p + gamma - 2 p gamma) = beta^2 - p gamma - p^2 (1-gamma)^2
    CHECK(std::abs(g * (p + g - 2 * p * g) -
                   (beta * beta - p * g - p * p * (1 - g) * (1 - g))) <= 1e-13);
  }
}

TEST_CASE("grid properties for the size-2 closed forms") {
  for (double p : {0.05, 0.2, 0.45}) {
    for (double g : {0.5, 0.7, 0.9}) {
      SystemParams pr(p, g);
      for (Pmf pmf : {ber_geo12_aoi_pmf(pr, 512), ber_geo12star_aoi_pmf(pr, 512)}) {
        for (double v : pmf.probs) CHECK(v >= 0.0);
        CHECK(pmf.sum() + pmf.tail_bound >= 1.0 - 1e-9);
        CHECK(pmf.sum() <= 1.0 + 1e-9);
      }
      Pmf pmf12 = ber_geo12_aoi_pmf(pr, 256);
      Pmf pmf2s = ber_geo12star_aoi_pmf(pr, 256);
      for (int k = 2; k <= 200; ++k) {
        CHECK(std::abs(ber_geo12_aoi_cdf(pr, k) - ber_geo12_aoi_cdf(pr, k - 1) -
                       pmf12.at(k)) <= 1e-11);
        CHECK(std::abs(ber_geo12star_aoi_cdf(pr, k) - ber_geo12star_aoi_cdf(pr, k - 1) -
                       pmf2s.at(k)) <= 1e-11);
      }
    }
  }
}
