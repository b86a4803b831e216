#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <doctest.h>

#include "aoi/analytic.hpp"
#include "aoi/chain.hpp"
#include "aoi/sim.hpp"

using namespace aoi;

namespace {
const SystemParams kRef(0.2, 1.0 / 3.0);

using SuccMap = std::map<std::vector<std::int32_t>, double>;

SuccMap succ_map(const TransitionKernel& k, const AgeState& s) {
  std::vector<std::pair<AgeState, double>> out;
  k.successors(s, out);
  SuccMap m;
  for (auto& [t, pr] : out) m[t.v] += pr;
  return m;
}
}  // namespace

TEST_CASE("kernel rows match the transition rules") {
  TransitionKernel k11(ModelSpec::ber_geo11(kRef), 40);
  double p = kRef.p(), g = kRef.gamma();

  SuccMap busy = succ_map(k11, AgeState{7, 3});
  CHECK(busy.size() == 2);
  CHECK(busy[{8, 4}] == doctest::Approx(1 - g));
  CHECK(busy[{4, 0}] == doctest::Approx(g));

  SuccMap idle = succ_map(k11, AgeState{7, 0});
  CHECK(idle[{8, 0}] == doctest::Approx(1 - p));
  CHECK(idle[{8, 1}] == doctest::Approx(p * (1 - g)));
  CHECK(idle[{1, 0}] == doctest::Approx(p * g));

  TransitionKernel k12(ModelSpec::ber_geo12(kRef), 40);
  SuccMap empty = succ_map(k12, AgeState{5, 0, 0});
  CHECK(empty[{6, 0, 0}] == doctest::Approx(1 - p));
  CHECK(empty[{6, 1, 0}] == doctest::Approx(p * (1 - g)));
  CHECK(empty[{1, 0, 0}] == doctest::Approx(p * g));

  SuccMap full = succ_map(k12, AgeState{9, 4, 2});
  CHECK(full.size() == 2);
  CHECK(full[{10, 5, 3}] == doctest::Approx(1 - g));
  CHECK(full[{5, 3, 0}] == doctest::Approx(g));

  TransitionKernel kst(ModelSpec::ber_geo12_star(kRef), 40);
  SuccMap sfull = succ_map(kst, AgeState{9, 4, 2});
  CHECK(sfull[{10, 5, 3}] == doctest::Approx((1 - p) * (1 - g)));
  CHECK(sfull[{5, 3, 0}] == doctest::Approx((1 - p) * g));
  CHECK(sfull[{10, 5, 1}] == doctest::Approx(p * (1 - g)));
  CHECK(sfull[{5, 1, 0}] == doctest::Approx(p * g));
}

TEST_CASE("kernel rows sum to one on random states") {
  SplitMix64 rng(99);
  std::vector<ModelSpec> models = {
      ModelSpec::ber_geo11(kRef), ModelSpec::ber_geo12(kRef),
      ModelSpec::ber_geo12_star(kRef), ModelSpec::ber_geo1c(kRef, 3),
      ModelSpec::ber_g11(kRef, ServiceDistribution::general({0.35, 0.25, 0.2, 0.15, 0.05}),
                         PreemptionPolicy::custom([](int m) {
                           return std::min(1.0, 0.1 + 0.05 * m);
                         }))};
  for (const ModelSpec& m : models) {
    TransitionKernel kernel(m, 60);
    for (int i = 0; i < 1000; ++i) {
      std::uint64_t r = rng.next() % kernel.state_count();
      AgeState s = kernel.space().unrank(r);
      CHECK(kernel.row_sum(s) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("ber-geo-1-c with c = 2 matches the dedicated size-2 kernel") {
  TransitionKernel generic(ModelSpec::ber_geo1c(kRef, 2), 30);
  TransitionKernel dedicated(ModelSpec::ber_geo12(kRef), 30);
  REQUIRE(generic.state_count() == dedicated.state_count());
  generic.space().for_each([&](const AgeState& s, std::uint64_t) {
    SuccMap a = succ_map(generic, s);
    SuccMap b = succ_map(dedicated, s);
    REQUIRE(a.size() == b.size());
    for (auto& [t, pr] : a) CHECK(pr == doctest::Approx(b[t]).epsilon(1e-15));
  });
}

TEST_CASE("ber-geo-1-c with c = 1 matches the size-1 kernel") {
  TransitionKernel generic(ModelSpec::ber_geo1c(kRef, 1), 30);
  TransitionKernel dedicated(ModelSpec::ber_geo11(kRef), 30);
  generic.space().for_each([&](const AgeState& s, std::uint64_t) {
    SuccMap a = succ_map(generic, s);
    SuccMap b = succ_map(dedicated, s);
    REQUIRE(a.size() == b.size());
    for (auto& [t, pr] : a) CHECK(pr == doctest::Approx(b[t]).epsilon(1e-15));
  });
}

TEST_CASE("state budget is enforced") {
  CHECK_THROWS_AS(TransitionKernel(ModelSpec::ber_geo12(kRef), 600, 1000),
                  StateSpaceTooLarge);
}

TEST_CASE("explicit-kernel solver basics") {
  SparseKernel sym = SparseKernel::from_dense({{0.5, 0.5}, {0.5, 0.5}});
  VectorSolveResult r = solve_stationary(sym);
  CHECK(r.converged);
  CHECK(r.pi[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.pi[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.residual <= 1e-12);

  SparseKernel ident = SparseKernel::from_dense({{1.0, 0.0}, {0.0, 1.0}});
  VectorSolveResult ri = solve_stationary(ident);
  CHECK(ri.note.find("reducible") != std::string::npos);
  CHECK(ri.residual <= 1e-15);

  CHECK_THROWS_AS(SparseKernel::from_dense({{0.5, 0.4}, {0.5, 0.5}}), InvalidParams);
}

TEST_CASE("power, gauss-seidel and direct solves agree") {
  SolveOptions power_opt;
  power_opt.method = SolveMethod::Power;
  power_opt.tol = 1e-14;
  SolveOptions gs_opt = power_opt;
  gs_opt.method = SolveMethod::GaussSeidel;
  SolveOptions direct_opt = power_opt;
  direct_opt.method = SolveMethod::Direct;

  std::vector<ModelSpec> models = {
      ModelSpec::ber_geo12(kRef), ModelSpec::ber_geo12_star(kRef),
      ModelSpec::ber_geo1c(kRef, 3),
      ModelSpec::ber_g11(kRef, ServiceDistribution::general({0.35, 0.25, 0.2, 0.15, 0.05}),
                         PreemptionPolicy::custom([](int m) {
                           return std::min(1.0, 0.1 + 0.05 * m);
                         }))};
  for (const ModelSpec& m : models) {
    TransitionKernel kernel(m, 24);
    StationaryTable a = solve_stationary(kernel, power_opt);
    StationaryTable b = solve_stationary(kernel, gs_opt);
    StationaryTable c = solve_stationary(kernel, direct_opt);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.residual <= 1e-11);
    CHECK(b.residual <= 1e-11);
    CHECK(c.residual <= 1e-10);
    for (std::uint64_t i = 0; i < a.probs.size(); ++i) {
      CHECK(std::abs(a.probs[i] - b.probs[i]) <= 1e-12);
      CHECK(std::abs(a.probs[i] - c.probs[i]) <= 1e-11);
    }
  }
}

TEST_CASE("gauss-seidel matches the generic engine on the size-2 model") {
  // the dedicated Ber/Geo/1/2 sweep vs the generic Ber/Geo/1/c one
  SolveOptions opt;
  opt.method = SolveMethod::GaussSeidel;
  TransitionKernel a(ModelSpec::ber_geo12(kRef), 60);
  TransitionKernel b(ModelSpec::ber_geo1c(kRef, 2), 60);
  StationaryTable ta = solve_stationary(a, opt);
  StationaryTable tb = solve_stationary(b, opt);
  for (std::uint64_t i = 0; i < ta.probs.size(); ++i)
    CHECK(std::abs(ta.probs[i] - tb.probs[i]) <= 1e-13);
}

TEST_CASE("chain marginals reproduce the closed forms") {
  SolveOptions opt;  // auto method

  SUBCASE("size 1") {
    TransitionKernel kernel(ModelSpec::ber_geo11(kRef), 300);
    StationaryTable table = solve_stationary(kernel, opt);
    CHECK(table.residual <= 1e-11);
    Pmf chain_pmf = marginal(table, 0);
    Pmf exact = ber_geo11_aoi_pmf(kRef, 299);
    CHECK(pmf_total_variation(chain_pmf, exact) <= 1e-8);
  }
  SUBCASE("size 2, queueing") {
    TransitionKernel kernel(ModelSpec::ber_geo12(kRef), 150);
    StationaryTable table = solve_stationary(kernel, opt);
    CHECK(table.residual <= 1e-10);
    Pmf chain_pmf = marginal(table, 0);
    Pmf exact = ber_geo12_aoi_pmf(kRef, 149);
    CHECK(pmf_total_variation(chain_pmf, exact) <= 1e-9);
    // waiting-time marginal
    Pmf wm = marginal(table, 2);
    Pmf exact_w = ber_geo12_waiting_time_pmf(kRef, 60);
    for (int l = 0; l <= 40; ++l)
      CHECK(wm.at(l) == doctest::Approx(exact_w.at(l)).epsilon(1e-7));
    // system-time marginal
    Pmf tm = marginal(table, 1);
    Pmf exact_t = ber_geo12_system_time_pmf(kRef, 60);
    for (int m = 0; m <= 40; ++m)
      CHECK(tm.at(m) == doctest::Approx(exact_t.at(m)).epsilon(1e-7));
  }
  SUBCASE("size 2, replacement") {
    TransitionKernel kernel(ModelSpec::ber_geo12_star(kRef), 150);
    StationaryTable table = solve_stationary(kernel, opt);
    CHECK(table.residual <= 1e-10);
    Pmf chain_pmf = marginal(table, 0);
    Pmf exact = ber_geo12star_aoi_pmf(kRef, 149);
    CHECK(pmf_total_variation(chain_pmf, exact) <= 1e-9);
    Pmf tm = marginal(table, 1);
    for (int m = 0; m <= 40; ++m)
      CHECK(tm.at(m) == doctest::Approx(ber_geo12star_t(kRef, m)).epsilon(1e-7));
    Pmf wm = marginal(table, 2);
    Pmf exact_w = ber_geo12star_waiting_time_pmf(kRef, 60);
    for (int l = 0; l <= 40; ++l)
      CHECK(wm.at(l) == doctest::Approx(exact_w.at(l)).epsilon(1e-7));
  }
  SUBCASE("general service with preemption vs Theorem 2") {
    auto service = ServiceDistribution::general({0.35, 0.25, 0.2, 0.15, 0.05});
    auto g = PreemptionPolicy::custom([](int m) { return std::min(1.0, 0.1 + 0.05 * m); });
    ModelSpec model = ModelSpec::ber_g11(kRef, service, g);
    TransitionKernel kernel(model, 150);
    StationaryTable chain_table = solve_stationary(kernel, opt);
    StationaryTable exact = ber_g11_state_probs(kRef, service, g, 150);
    // compare away from the clamp level
    exact.space.for_each([&](const AgeState& s, std::uint64_t r) {
      if (s.v[0] >= 140) return;
      CHECK(std::abs(chain_table.probs[r] - exact.probs[r]) <= 1e-12);
    });
  }
  SUBCASE("preemptive explicit form vs chain (bracket reading)") {
    ModelSpec model = ModelSpec::ber_g11(kRef, ServiceDistribution::geometric(kRef.gamma()),
                                         PreemptionPolicy::paper_gtilde(4));
    TransitionKernel kernel(model, 300);
    StationaryTable table = solve_stationary(kernel, opt);
    Pmf chain_pmf = marginal(table, 0);
    Pmf exact = preemptive_geo_aoi_pmf(kRef, 4, 299);
    for (int n = 1; n <= 200; ++n)
      CHECK(std::abs(chain_pmf.at(n) - exact.at(n)) <= 1e-12);
  }
}

TEST_CASE("conditional marginal: in-service age is geometric") {
  TransitionKernel kernel(ModelSpec::ber_geo11(kRef), 300);
  StationaryTable table = solve_stationary(kernel, {});
  Pmf rec = marginal(table, 1, [](const AgeState& s) { return s.v[1] >= 1; });
  for (int m = 1; m <= 40; ++m)
    CHECK(rec.at(m) ==
          doctest::Approx(std::pow(2.0 / 3.0, m - 1) / 3.0).epsilon(1e-9));
  CHECK_THROWS_AS(marginal(table, 1, [](const AgeState&) { return false; }),
                  EmptyCondition);
}

TEST_CASE("doubling the truncation moves marginals less than the tail bound") {
  for (const ModelSpec& m : {ModelSpec::ber_geo12(kRef), ModelSpec::ber_geo12_star(kRef)}) {
    StationaryTable t1 = solve_stationary(TransitionKernel(m, 150), {});
    StationaryTable t2 = solve_stationary(TransitionKernel(m, 300), {});
    Pmf p1 = marginal(t1, 0);
    Pmf p2 = marginal(t2, 0);
    double bound = std::max(t1.tail_bound, 1e-15);
    for (int n = 1; n <= p1.support_end(); ++n)
      CHECK(std::abs(p1.at(n) - p2.at(n)) < bound);
  }
}

TEST_CASE("kernel dump is parseable and stochastic") {
  TransitionKernel kernel(ModelSpec::ber_geo12(kRef), 8);
  std::ostringstream os;
  kernel.dump(os);
  std::istringstream is(os.str());
  std::string from, arrow, to;
  double pr;
  std::map<std::string, double> row_sums;
  long lines = 0;
  while (is >> from >> arrow >> to >> pr) {
    REQUIRE(arrow == "->");
    row_sums[from] += pr;
    ++lines;
  }
  CHECK(lines > 0);
  CHECK(row_sums.size() == kernel.state_count());
  for (auto& [s, sum] : row_sums) CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}
