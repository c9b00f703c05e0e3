#include <cmath>

#include "doctest.h"
#include "satmud/baselines.hpp"
#include "test_util.hpp"

using namespace satmud;
using namespace satmud::testing;

TEST_CASE("greedy: single satellite takes everyone while capacity lasts") {
  const Scenario sc = small_scenario(1, 4, 4, 1);
  Rng rng = make_rng(1);
  const MatchingMatrix m = greedy_allocate(sc, 4, 1.0, rng);
  for (int k = 0; k < 4; ++k) CHECK(m.q(k, 0) == 1.0);

  Rng rng2 = make_rng(1);
  CHECK_THROWS_AS(greedy_allocate(sc, 3, 1.0, rng2), InfeasibleError);
}

TEST_CASE("greedy: uncontended preferences give the diagonal matching") {
  const double r = std::sqrt(0.5);
  std::vector<cplx> h(2 * 2 * 2);
  for (int n = 0; n < 2; ++n) {
    h[(n * 2 + 0) * 2 + 0] = cplx(5, 0);
    h[(n * 2 + 0) * 2 + 1] = cplx(1, 0);
    h[(n * 2 + 1) * 2 + 0] = cplx(1, 0);
    h[(n * 2 + 1) * 2 + 1] = cplx(5, 0);
  }
  const Scenario sc =
      manual_scenario(2, 2, 2, h, {cplx(r, 0), cplx(r, 0), cplx(r, 0), cplx(r, 0)}, 1.0);
  Rng rng = make_rng(77);
  const MatchingMatrix m = greedy_allocate(sc, 1, 1.0, rng);
  CHECK(m.q(0, 0) == 1.0);
  CHECK(m.q(1, 1) == 1.0);
  CHECK(m.q(0, 1) == 0.0);
  CHECK(m.q(1, 0) == 0.0);
}

TEST_CASE("greedy: output is feasible across seeds") {
  const Scenario sc = small_scenario(2, 8, 4, 3);
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = make_rng(seed);
    const MatchingMatrix m = greedy_allocate(sc, 3, 1.0, rng);
    CHECK(check_feasibility(m.q, 3, 1.0).feasible);
  }
}

TEST_CASE("round robin: permutation matrix when everything is tight") {
  const Scenario sc = small_scenario(3, 4, 4, 4);
  Rng rng = make_rng(5);
  const MatchingMatrix m = round_robin_allocate(sc, 1, 1.0, rng);
  for (int k = 0; k < 4; ++k) {
    int row = 0;
    for (int j = 0; j < 4; ++j) row += static_cast<int>(m.q(k, j));
    CHECK(row == 1);
  }
  for (int j = 0; j < 4; ++j) {
    int col = 0;
    for (int k = 0; k < 4; ++k) col += static_cast<int>(m.q(k, j));
    CHECK(col == 1);
  }
}

TEST_CASE("round robin: deterministic under a fixed seed") {
  const Scenario sc = small_scenario(4, 8, 4, 3);
  Rng r1 = make_rng(9), r2 = make_rng(9);
  CHECK(round_robin_allocate(sc, 3, 1.0, r1).q ==
        round_robin_allocate(sc, 3, 1.0, r2).q);
}

TEST_CASE("round robin trails greedy on average over fading scenarios") {
  double greedy_mean = 0.0, rr_mean = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Scenario sc = small_scenario(1000 + t, 8, 4, 3);
    RateModelParams params = params_for(sc, 0.0);
    Rng r1 = make_rng(substream(1, t, 1)), r2 = make_rng(substream(1, t, 2));
    greedy_mean += sum_rate(sc, params, greedy_allocate(sc, 3, 1.0, r1).q);
    rr_mean += sum_rate(sc, params, round_robin_allocate(sc, 3, 1.0, r2).q);
  }
  CHECK(rr_mean <= greedy_mean);
}

TEST_CASE("centralized: all-ones upper bound") {
  const MatchingMatrix m = centralized_allocate(5, 3);
  for (size_t i = 0; i < m.q.size(); ++i) CHECK(m.q[i] == 1.0);

  // Its load per satellite follows the closed-form collision expression.
  const Scenario sc = small_scenario(5, 6, 4, 3);
  const auto load = processing_load(sc, centralized_allocate(6, 3).q);
  const double M = sc.config.modulation_order;
  for (int j = 0; j < 3; ++j) {
    double expect = 0.0;
    for (int n = 0; n < sc.config.num_res; ++n) {
      const double f = static_cast<double>(sc.signatures.occupancy[n].size());
      if (f > 0) expect += f * std::pow(M, f - 1);
    }
    CHECK(load[j] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("centralized dominates every feasible allocator when eps = 0") {
  for (uint64_t seed : {21u, 22u, 23u}) {
    const Scenario sc = small_scenario(seed, 6, 4, 3);
    RateModelParams params = params_for(sc, 0.0);
    const double upper = sum_rate(sc, params, centralized_allocate(6, 3).q);
    Rng r1 = make_rng(seed), r2 = make_rng(seed + 1);
    CHECK(sum_rate(sc, params, greedy_allocate(sc, 3, 1.0, r1).q) <= upper + 1e-12);
    CHECK(sum_rate(sc, params, round_robin_allocate(sc, 3, 1.0, r2).q) <= upper + 1e-12);
    CHECK(sum_rate(sc, params, exhaustive_allocate(sc, params, 3, 1.0).q) <=
          upper + 1e-12);
  }
}

TEST_CASE("exhaustive: singleton feasible set") {
  const Scenario sc = small_scenario(30, 3, 3, 2);
  RateModelParams params = params_for(sc, 0.1);
  const MatchingMatrix m = exhaustive_allocate(sc, params, 3, 2.0);
  for (size_t i = 0; i < m.q.size(); ++i) CHECK(m.q[i] == 1.0);
}

TEST_CASE("exhaustive: two permutation candidates") {
  const double r = std::sqrt(0.5);
  std::vector<cplx> h(2 * 2 * 2);
  for (int n = 0; n < 2; ++n) {
    h[(n * 2 + 0) * 2 + 0] = cplx(4, 0);
    h[(n * 2 + 0) * 2 + 1] = cplx(1, 0);
    h[(n * 2 + 1) * 2 + 0] = cplx(1, 0);
    h[(n * 2 + 1) * 2 + 1] = cplx(4, 0);
  }
  const Scenario sc =
      manual_scenario(2, 2, 2, h, {cplx(r, 0), cplx(r, 0), cplx(r, 0), cplx(r, 0)}, 1.0);
  RateModelParams params{0.0, 1.0};
  const MatchingMatrix m = exhaustive_allocate(sc, params, 1, 1.0);
  CHECK(m.q(0, 0) == 1.0);
  CHECK(m.q(1, 1) == 1.0);
}

TEST_CASE("exhaustive: refuses over-budget enumerations naming the count") {
  const Scenario sc = small_scenario(31, 20, 4, 8);
  RateModelParams params = params_for(sc, 0.0);
  try {
    exhaustive_allocate(sc, params, 4, 0.0);
    FAIL("expected a budget refusal");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("exceed") != std::string::npos);
  }
}

TEST_CASE("exhaustive agrees with an independent bitmask enumerator") {
  for (int t = 0; t < 20; ++t) {
    const Scenario sc = small_scenario(500 + t, 3, 3, 2);
    RateModelParams params = params_for(sc, t % 2 ? 0.2 : 0.0);
    const int q_s = 2;
    const double q_l = 1.0;
    const MatchingMatrix fast = exhaustive_allocate(sc, params, q_s, q_l);

    // Independent route: all 2^(K*J) bitmasks, filtered by feasibility.
    double best = -1.0;
    Mat best_q;
    for (uint32_t mask = 0; mask < (1u << 6); ++mask) {
      Mat q(3, 2, 0.0);
      for (int i = 0; i < 6; ++i)
        if ((mask >> i) & 1u) q[i] = 1.0;
      if (!check_feasibility(q, q_s, q_l).feasible) continue;
      const double r = sum_rate(sc, params, q);
      if (r > best) {
        best = r;
        best_q = q;
      }
    }
    CHECK(sum_rate(sc, params, fast.q) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("exhaustive is an upper bound for greedy and round robin") {
  for (int t = 0; t < 10; ++t) {
    const Scenario sc = small_scenario(700 + t, 4, 3, 2);
    RateModelParams params = params_for(sc, 0.2);
    const double best =
        sum_rate(sc, params, exhaustive_allocate(sc, params, 2, 1.0).q);
    Rng r1 = make_rng(t), r2 = make_rng(t + 50);
    CHECK(sum_rate(sc, params, greedy_allocate(sc, 2, 1.0, r1).q) <= best + 1e-12);
    CHECK(sum_rate(sc, params, round_robin_allocate(sc, 2, 1.0, r2).q) <=
          best + 1e-12);
  }
}

TEST_CASE("baseline names map onto kinds") {
  BaselineKind kind;
  CHECK(baseline_from_name("greedy", &kind));
  CHECK(kind == BaselineKind::greedy);
  CHECK(baseline_from_name("exhaustive", &kind));
  CHECK(kind == BaselineKind::exhaustive);
  CHECK_FALSE(baseline_from_name("proposed", &kind));
  CHECK_FALSE(baseline_from_name("bogus", &kind));
}
