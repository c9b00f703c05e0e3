#include "satmud/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace satmud {

namespace {

int int_q_l(double q_l) {
  return std::max(0, static_cast<int>(std::ceil(q_l - 1e-9)));
}

std::vector<int> shuffled_users(int K, Rng& rng) {
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Mat aggregate_gain(const Scenario& sc) {
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;
  Mat w(K, J);
  for (int n = 0; n < sc.config.num_res; ++n)
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) w(k, j) += std::norm(sc.channel.h(n, k, j));
  return w;
}

MatchingMatrix finish(Mat q, int q_s, double q_l) {
  MatchingMatrix m;
  m.q = std::move(q);
  m.q_s = q_s;
  m.q_l = q_l;
  m.binary_flag = true;
  return m;
}

}  // namespace

bool baseline_from_name(const std::string& name, BaselineKind* kind) {
  if (name == "greedy") *kind = BaselineKind::greedy;
  else if (name == "round_robin") *kind = BaselineKind::round_robin;
  else if (name == "centralized") *kind = BaselineKind::centralized;
  else if (name == "exhaustive") *kind = BaselineKind::exhaustive;
  else return false;
  return true;
}

MatchingMatrix greedy_allocate(const Scenario& sc, int q_s, double q_l, Rng& rng) {
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;
  const int need = int_q_l(q_l);
  const int target = std::max(1, need);
  const Mat w = aggregate_gain(sc);

  Mat q(K, J);
  std::vector<int> col(J, 0);
  for (int k : shuffled_users(K, rng)) {
    std::vector<int> prefs(J);
    std::iota(prefs.begin(), prefs.end(), 0);
    std::sort(prefs.begin(), prefs.end(), [&](int a, int b) {
      if (w(k, a) != w(k, b)) return w(k, a) > w(k, b);
      return a < b;
    });
    int assigned = 0;
    for (int j : prefs) {
      if (assigned == target) break;
      if (col[j] < q_s) {
        q(k, j) = 1.0;
        col[j]++;
        assigned++;
      }
    }
    if (assigned < need) {
      std::ostringstream os;
      os << "greedy allocation: user " << k << " got " << assigned << " of "
         << need << " required satellites";
      throw InfeasibleError(os.str());
    }
  }
  return finish(std::move(q), q_s, q_l);
}

MatchingMatrix round_robin_allocate(const Scenario& sc, int q_s, double q_l, Rng& rng) {
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;
  const int need = int_q_l(q_l);
  const int target = std::max(1, need);

  Mat q(K, J);
  std::vector<int> col(J, 0);
  int cursor = 0;
  for (int k : shuffled_users(K, rng)) {
    int assigned = 0;
    int j = cursor;
    for (int scanned = 0; scanned < J && assigned < target; ++scanned) {
      if (col[j] < q_s && q(k, j) == 0.0) {
        q(k, j) = 1.0;
        col[j]++;
        assigned++;
      }
      j = (j + 1) % J;
    }
    cursor = j;
    if (assigned < need) {
      std::ostringstream os;
      os << "round robin allocation: user " << k << " got " << assigned
         << " of " << need << " required satellites";
      throw InfeasibleError(os.str());
    }
  }
  return finish(std::move(q), q_s, q_l);
}

MatchingMatrix centralized_allocate(int K, int J) {
  Mat q(K, J, 1.0);
  MatchingMatrix m;
  m.q = std::move(q);
  m.q_s = K;
  m.q_l = J;
  m.binary_flag = true;
  return m;
}

double exhaustive_candidate_count(int K, int J, double q_l) {
  const int need = int_q_l(q_l);
  double per_user = 0.0;
  for (int t = need; t <= J; ++t) {
    double c = 1.0;
    for (int i = 0; i < t; ++i) c = c * (J - i) / (i + 1);
    per_user += c;
  }
  return std::pow(per_user, K);
}

MatchingMatrix exhaustive_allocate(const Scenario& sc, const RateModelParams& params,
                                   int q_s, double q_l, double budget) {
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;
  const int need = int_q_l(q_l);

  const double count = exhaustive_candidate_count(K, J, q_l);
  if (count > budget) {
    std::ostringstream os;
    os << "exhaustive enumeration refused: " << count
       << " candidates exceed budget " << budget;
    throw ConfigError(os.str());
  }
  if (!binary_matching_exists(K, J, q_s, q_l))
    throw InfeasibleError("exhaustive enumeration: no feasible binary matching");

  const SicContext ctx = SicContext::build(sc);

  // Row subsets in increasing lexicographic order of the row bit pattern
  // (entry j=0 most significant), so the first optimum found is the
  // lexicographically smallest.
  std::vector<std::vector<uint32_t>> row_choices;
  {
    std::vector<uint32_t> masks;
    for (uint32_t m = 0; m < (1u << J); ++m)
      if (static_cast<int>(__builtin_popcount(m)) >= need) masks.push_back(m);
    std::sort(masks.begin(), masks.end(), [&](uint32_t a, uint32_t b) {
      for (int j = 0; j < J; ++j) {
        const uint32_t ba = (a >> j) & 1u, bb = (b >> j) & 1u;
        if (ba != bb) return ba < bb;
      }
      return false;
    });
    row_choices.assign(K, masks);
  }

  Mat q(K, J);
  Mat best_q;
  double best_rate = -std::numeric_limits<double>::infinity();
  std::vector<int> col(J, 0);

  // DFS over users with column-capacity pruning.
  auto rec = [&](auto&& self, int k) -> void {
    if (k == K) {
      const double r = sum_rate(ctx, params, q);
      if (r > best_rate) {
        best_rate = r;
        best_q = q;
      }
      return;
    }
    for (const uint32_t mask : row_choices[k]) {
      bool ok = true;
      for (int j = 0; j < J && ok; ++j)
        if ((mask >> j) & 1u) ok = col[j] < q_s;
      if (!ok) continue;
      for (int j = 0; j < J; ++j)
        if ((mask >> j) & 1u) {
          q(k, j) = 1.0;
          col[j]++;
        }
      self(self, k + 1);
      for (int j = 0; j < J; ++j)
        if ((mask >> j) & 1u) {
          q(k, j) = 0.0;
          col[j]--;
        }
    }
  };
  rec(rec, 0);

  if (best_rate == -std::numeric_limits<double>::infinity())
    throw InfeasibleError("exhaustive enumeration found no feasible matching");
  return finish(std::move(best_q), q_s, q_l);
}

}  // namespace satmud
