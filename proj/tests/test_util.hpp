#ifndef SATMUD_TEST_UTIL_HPP
#define SATMUD_TEST_UTIL_HPP

#include <vector>

#include "satmud/scenario.hpp"

namespace satmud::testing {

// Builds a scenario directly from channel and signature values, bypassing the
// generators. h is row-major (n,k,j), s row-major (n,k).
inline Scenario manual_scenario(int N, int K, int J, const std::vector<cplx>& h,
                                const std::vector<cplx>& s, double sigma2,
                                int modulation_order = 4) {
  Scenario sc;
  sc.config.num_users = K;
  sc.config.num_res = N;
  sc.config.num_sats = J;
  sc.config.modulation_order = modulation_order;
  sc.config.signature_column_weight = 1;

  sc.signatures.num_res = N;
  sc.signatures.num_users = K;
  sc.signatures.s = s;
  sc.signatures.occupancy.assign(N, {});
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      if (sc.signatures.at(n, k) != cplx(0.0, 0.0))
        sc.signatures.occupancy[n].push_back(k);
  sc.signatures.max_collision_degree = 0;
  for (int n = 0; n < N; ++n)
    sc.signatures.max_collision_degree =
        std::max(sc.signatures.max_collision_degree,
                 static_cast<int>(sc.signatures.occupancy[n].size()));

  sc.channel.h = CTensor3(N, K, J);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j)
        sc.channel.h(n, k, j) = h[(static_cast<size_t>(n) * K + k) * J + j];
  sc.channel.distances = Mat(K, J, 1.0);
  sc.channel.sigma2 = sigma2;
  return sc;
}

// Small randomized scenario for property tests.
inline Scenario small_scenario(uint64_t seed, int K = 5, int N = 4, int J = 3,
                               FadingModel fading = FadingModel::rayleigh) {
  ScenarioConfig cfg;
  cfg.num_users = K;
  cfg.num_res = N;
  cfg.num_sats = J;
  cfg.modulation_order = 4;
  cfg.signature_column_weight = std::min(2, N);
  cfg.fading_model = fading;
  cfg.rng_seed = seed;
  return make_scenario(cfg);
}

inline Mat random_matrix(int K, int J, Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(K, J);
  for (size_t i = 0; i < m.size(); ++i) m[i] = u(rng);
  return m;
}

}  // namespace satmud::testing

#endif  // SATMUD_TEST_UTIL_HPP
