#include <cmath>

#include <doctest.h>

#include "aoi/analytic.hpp"
#include "aoi/params.hpp"
#include "aoi/pmf.hpp"

using namespace aoi;

TEST_CASE("system params validate their ranges") {
  CHECK_THROWS_AS(SystemParams(0.0, 0.5), InvalidParams);
  CHECK_THROWS_AS(SystemParams(-0.1, 0.5), InvalidParams);
  CHECK_THROWS_AS(SystemParams(1.5, 0.5), InvalidParams);
  CHECK_THROWS_AS(SystemParams(0.3, 0.0), InvalidParams);
  SystemParams pr(0.2, 0.5);
  CHECK(pr.rho_d() == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("buffered models need p < gamma strictly") {
  CHECK_THROWS_AS(ModelSpec::ber_geo12(SystemParams(0.5, 0.4)), Unstable);
  CHECK_THROWS_AS(ModelSpec::ber_geo12(SystemParams(0.4, 0.4)), Unstable);
  CHECK_THROWS_AS(ModelSpec::ber_geo12_star(SystemParams(0.5, 0.5)), Unstable);
  CHECK_THROWS_AS(ModelSpec::ber_geo1c(SystemParams(0.6, 0.5), 3), Unstable);
  CHECK_NOTHROW(ModelSpec::ber_geo1c(SystemParams(0.6, 0.5), 1));  // size 1 is fine
  CHECK_NOTHROW(ModelSpec::ber_geo12(SystemParams(0.2, 0.5)));
}

TEST_CASE("service distributions") {
  auto geo = ServiceDistribution::geometric(1.0 / 3.0);
  CHECK(geo.q(1) == doctest::Approx(1.0 / 3.0));
  CHECK(geo.q(3) == doctest::Approx(4.0 / 27.0));
  CHECK(geo.tail_from(3) == doctest::Approx(4.0 / 9.0));
  CHECK(geo.survive(5) == doctest::Approx(2.0 / 3.0));
  CHECK(geo.mean() == doctest::Approx(3.0));

  auto gen = ServiceDistribution::general({0.4, 0.3, 0.2, 0.1});
  CHECK(gen.q(2) == doctest::Approx(0.3));
  CHECK(gen.q(9) == 0.0);
  CHECK(gen.tail_from(3) == doctest::Approx(0.3));
  CHECK(gen.survive(2) == doctest::Approx(0.3 / 0.6));
  CHECK(gen.mean() == doctest::Approx(2.0));
  CHECK_THROWS_AS(ServiceDistribution::general({0.4, 0.3}), InvalidParams);
  CHECK_THROWS_AS(ServiceDistribution::general({0.4, 0.7}), InvalidParams);
}

TEST_CASE("paper preemption function") {
  SystemParams pr(0.2, 1.0 / 3.0);
  CHECK(PreemptionPolicy::default_n_p(0.2) == 4);
  CHECK(PreemptionPolicy::default_n_p(0.5) == 1);
  CHECK(PreemptionPolicy::default_n_p(0.51) == 0);

  auto pol = PreemptionPolicy::paper_gtilde(4);
  pol.validate(pr);
  double prev = 0.0;
  for (int m = 1; m <= 200; ++m) {
    double g = pol.g(m, pr);
    CHECK(g > 0.0);
    CHECK(g < 1.0);
    CHECK(g >= prev);  // increasing in m
    prev = g;
  }
  // validity condition p > 1/(N_p + 2) fails for N_p = 2 at p = 0.2
  CHECK_THROWS_AS(PreemptionPolicy::paper_gtilde(2).validate(pr), InvalidParams);
  // preemption is only expressible on the size-1 model by construction
  CHECK_NOTHROW(ModelSpec::ber_g11(pr, ServiceDistribution::geometric(pr.gamma()), pol));
}

TEST_CASE("age state validation") {
  CHECK(AgeState{3, 2, 1}.valid());
  CHECK(AgeState{5, 0, 0}.valid());
  CHECK(AgeState{1}.valid());
  CHECK_FALSE(AgeState{3, 3, 0}.valid());
  CHECK_FALSE(AgeState{2, 0, 1}.valid());
  CHECK_FALSE(AgeState{0, 0}.valid());
  CHECK_THROWS_AS(validate_age_state(AgeState{2, 0, 1}), InvalidState);
}

TEST_CASE("age state space ranks round-trip") {
  for (int dim : {2, 3, 4}) {
    AgeStateSpace sp(dim, 9);
    std::uint64_t expected = 0;
    sp.for_each([&](const AgeState& s, std::uint64_t r) {
      CHECK(r == expected);
      CHECK(s.valid());
      CHECK(sp.rank(s) == r);
      CHECK(sp.unrank(r) == s);
      ++expected;
    });
    CHECK(expected == sp.size());
  }
  AgeStateSpace sp3(3, 9);
  CHECK(sp3.size() == 9 + 36 + 84);
}

TEST_CASE("pmf mean") {
  Pmf point{1, {1.0}, 0.0, 0.0};
  point.validate();
  CHECK(pmf_mean(point) == 1.0);

  Pmf uniform{1, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.0, 0.0};
  CHECK(pmf_mean(uniform) == doctest::Approx(2.0).epsilon(1e-15));

  // Ber/Geo/1/1 at p = 1/5, gamma = 1/3. Oracle: geometric series sums
  // sum n x^n = x/(1-x)^2 and sum n^2 x^n = x(1+x)/(1-x)^3 applied to the
  // closed form give mean = (5/7)(20 - 6) - 30/14 = 55/7.
  double x1 = 0.8, x2 = 2.0 / 3.0;
  double s1 = x1 / ((1 - x1) * (1 - x1));          // 20
  double s2 = x2 / ((1 - x2) * (1 - x2));          // 6
  double q2 = x2 * (1 + x2) / std::pow(1 - x2, 3); // 30
  double oracle = (5.0 / 7.0) * (s1 - s2) - q2 / 14.0;
  CHECK(oracle == doctest::Approx(55.0 / 7.0).epsilon(1e-14));

  Pmf aoi = ber_geo11_aoi_pmf(SystemParams(0.2, 1.0 / 3.0), 2000);
  aoi.validate();
  CHECK(pmf_mean(aoi) == doctest::Approx(55.0 / 7.0).epsilon(1e-6));
  CHECK(pmf_mean_error_bound(aoi) < 1e-6);
}

TEST_CASE("pmf total variation") {
  Pmf a{1, {1.0}, 0.0, 0.0};
  Pmf b{1, {0.0, 1.0}, 0.0, 0.0};
  CHECK(pmf_total_variation(a, a) == 0.0);
  CHECK(pmf_total_variation(a, b) == doctest::Approx(1.0));
  Pmf c{1, {0.6, 0.4}, 0.0, 0.0};
  Pmf d{1, {0.5, 0.5}, 0.0, 0.0};
  CHECK(pmf_total_variation(c, d) == doctest::Approx(0.1));
  Pmf e{0, {1.0}, 0.0, 0.0};
  CHECK_THROWS_AS(pmf_total_variation(a, e), MismatchedSupport);
}

TEST_CASE("pmf invariants are enforced") {
  Pmf negative{1, {-0.1, 1.1}, 0.0, 0.0};
  CHECK_THROWS_AS(negative.validate(), InvalidParams);
  Pmf overfull{1, {0.9, 0.9}, 0.0, 0.0};
  CHECK_THROWS_AS(overfull.validate(), InvalidParams);
  Pmf leaky{1, {0.5}, 0.0, 0.0};  // mass 0.5 with no tail bound
  CHECK_THROWS_AS(leaky.validate(), InvalidParams);
  Pmf bounded{1, {0.5}, 0.5, 0.9};
  CHECK_NOTHROW(bounded.validate());
}
