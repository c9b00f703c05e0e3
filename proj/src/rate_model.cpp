#include "satmud/rate_model.hpp"

#include <algorithm>
#include <sstream>

namespace satmud {

SicOrder make_sic_order(const Scenario& sc) {
  const int N = sc.config.num_res;
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;
  SicOrder order;
  order.N = N;
  order.K = K;
  order.J = J;
  order.perm.assign(static_cast<size_t>(N) * J, {});
  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < J; ++j) {
      auto& perm = order.perm[static_cast<size_t>(n) * J + j];
      perm.resize(K);
      for (int k = 0; k < K; ++k) perm[k] = k;
      std::sort(perm.begin(), perm.end(), [&](int a, int b) {
        const double va = std::norm(sc.channel.h(n, a, j));
        const double vb = std::norm(sc.channel.h(n, b, j));
        if (va != vb) return va > vb;
        return a < b;
      });
    }
  }
  return order;
}

SicContext SicContext::build(const Scenario& sc) {
  SicContext ctx;
  ctx.N = sc.config.num_res;
  ctx.K = sc.config.num_users;
  ctx.J = sc.config.num_sats;
  ctx.order = make_sic_order(sc);
  ctx.b = Tensor3(ctx.N, ctx.K, ctx.J);
  ctx.v = Tensor3(ctx.N, ctx.K, ctx.J);
  ctx.s2 = Mat(ctx.N, ctx.K);
  for (int n = 0; n < ctx.N; ++n) {
    for (int k = 0; k < ctx.K; ++k) {
      const double s2 = std::norm(sc.signatures.at(n, k));
      ctx.s2(n, k) = s2;
      for (int j = 0; j < ctx.J; ++j) {
        const double v = std::norm(sc.channel.h(n, k, j));
        ctx.v(n, k, j) = v;
        ctx.b(n, k, j) = v * s2;
      }
    }
  }
  return ctx;
}

double residual_interference(const Scenario& sc, const RateModelParams& params,
                             const Mat& q, int n, int k, int j) {
  if (n < 0 || n >= sc.config.num_res || k < 0 || k >= sc.config.num_users ||
      j < 0 || j >= sc.config.num_sats)
    throw std::out_of_range("residual_interference: index out of range");
  const double vk = std::norm(sc.channel.h(n, k, j));
  double sum = 0.0;
  for (int i = 0; i < sc.config.num_users; ++i) {
    const double vi = std::norm(sc.channel.h(n, i, j));
    if (vi >= vk) continue;
    const double s2 = std::norm(sc.signatures.at(n, i));
    if (params.variant == InterferenceVariant::as_printed)
      sum += vk * s2 * q(i, j);
    else
      sum += vi * s2 * (1.0 - q(i, j));
  }
  return params.epsilon * sum;
}

namespace {

// Walks the users of one (n, j) in SIC order and calls
// f(k, b_k, denom_excl) with denom_excl = sigma2 + interference from users
// preceding k in the order + I_{n,k,j}. I uses strict |h|^2 comparison, so
// ties are grouped.
template <typename F>
void sic_walk(const SicContext& ctx, const RateModelParams& params, const Mat& q,
              int n, int j, F&& f) {
  const auto& ord = ctx.order.at(n, j);
  const int K = ctx.K;

  double total_sq = 0, total_vs2 = 0, total_vs2q = 0;
  for (int k = 0; k < K; ++k) {
    const double s2 = ctx.s2(n, k);
    if (s2 == 0.0) continue;
    total_sq += s2 * q(k, j);
    total_vs2 += ctx.v(n, k, j) * s2;
    total_vs2q += ctx.v(n, k, j) * s2 * q(k, j);
  }

  double head_sq = 0, head_vs2 = 0, head_vs2q = 0;  // includes current tie group
  double prefix_bq = 0;
  int p = 0;
  while (p < K) {
    int ge = p;
    const double vref = ctx.v(n, ord[p], j);
    while (ge < K && ctx.v(n, ord[ge], j) == vref) {
      const int i = ord[ge];
      const double s2 = ctx.s2(n, i);
      head_sq += s2 * q(i, j);
      head_vs2 += ctx.v(n, i, j) * s2;
      head_vs2q += ctx.v(n, i, j) * s2 * q(i, j);
      ++ge;
    }
    for (int t = p; t < ge; ++t) {
      const int k = ord[t];
      double interf;
      if (params.variant == InterferenceVariant::as_printed)
        interf = params.epsilon * ctx.v(n, k, j) * (total_sq - head_sq);
      else
        interf = params.epsilon * ((total_vs2 - head_vs2) - (total_vs2q - head_vs2q));
      f(k, ctx.b(n, k, j), params.sigma2 + prefix_bq + interf);
      prefix_bq += ctx.b(n, k, j) * q(k, j);
    }
    p = ge;
  }
}

}  // namespace

double sum_rate(const SicContext& ctx, const RateModelParams& params, const Mat& q) {
  double rate = 0.0;
  for (int n = 0; n < ctx.N; ++n) {
    for (int j = 0; j < ctx.J; ++j) {
      sic_walk(ctx, params, q, n, j, [&](int k, double b, double denom) {
        const double num = b * q(k, j);
        if (num > 0.0) rate += std::log2(1.0 + num / denom);
      });
    }
  }
  return rate;
}

double sum_rate(const Scenario& sc, const RateModelParams& params, const Mat& q) {
  return sum_rate(SicContext::build(sc), params, q);
}

double column_rate(const SicContext& ctx, const RateModelParams& params,
                   const Mat& q, int j) {
  double rate = 0.0;
  for (int n = 0; n < ctx.N; ++n) {
    sic_walk(ctx, params, q, n, j, [&](int k, double b, double denom) {
      const double num = b * q(k, j);
      if (num > 0.0) rate += std::log2(1.0 + num / denom);
    });
  }
  return rate;
}

Tensor3 sic_denominators(const SicContext& ctx, const RateModelParams& params,
                         const Mat& q) {
  Tensor3 denom(ctx.N, ctx.K, ctx.J);
  for (int n = 0; n < ctx.N; ++n)
    for (int j = 0; j < ctx.J; ++j)
      sic_walk(ctx, params, q, n, j,
               [&](int k, double, double d) { denom(n, k, j) = d; });
  return denom;
}

std::vector<double> processing_load(const Scenario& sc, const Mat& q_binary) {
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;
  const int N = sc.config.num_res;
  const double M = static_cast<double>(sc.config.modulation_order);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j) {
      const double v = q_binary(k, j);
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("processing_load requires a binary matching matrix");
    }

  std::vector<double> load(J, 0.0);
  for (int j = 0; j < J; ++j) {
    for (int n = 0; n < N; ++n) {
      int targets = 0;
      for (int k : sc.signatures.occupancy[n])
        if (q_binary(k, j) == 1.0) ++targets;
      if (targets > 0) load[j] += targets * std::pow(M, targets - 1);
    }
  }
  return load;
}

std::string FeasibilityReport::describe() const {
  if (feasible) return "feasible";
  std::ostringstream os;
  os << violations.size() << " violation(s):";
  for (const auto& v : violations) {
    switch (v.kind) {
      case Violation::Kind::row_min:
        os << " [C1 row " << v.index << " short by " << v.margin << "]";
        break;
      case Violation::Kind::col_max:
        os << " [C2 col " << v.index << " over by " << v.margin << "]";
        break;
      case Violation::Kind::not_binary:
        os << " [C3 entry " << v.index << " off-binary by " << v.margin << "]";
        break;
      case Violation::Kind::out_of_box:
        os << " [C4 entry " << v.index << " outside [0,1] by " << v.margin << "]";
        break;
      case Violation::Kind::counting:
        os << " [counting bound violated by " << v.margin << "]";
        break;
    }
  }
  return os.str();
}

FeasibilityReport check_feasibility(const Mat& q, int q_s, double q_l) {
  constexpr double tol = 1e-9;
  FeasibilityReport rep;
  const int K = q.rows();
  const int J = q.cols();
  for (int k = 0; k < K; ++k) {
    double row = 0.0;
    for (int j = 0; j < J; ++j) row += q(k, j);
    if (row < q_l - tol)
      rep.violations.push_back({Violation::Kind::row_min, k, q_l - row});
  }
  for (int j = 0; j < J; ++j) {
    double col = 0.0;
    for (int k = 0; k < K; ++k) col += q(k, j);
    if (col > q_s + tol)
      rep.violations.push_back({Violation::Kind::col_max, j, col - q_s});
  }
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j) {
      const double v = q(k, j);
      const int idx = k * J + j;
      if (v < -tol || v > 1.0 + tol)
        rep.violations.push_back(
            {Violation::Kind::out_of_box, idx, std::max(-v, v - 1.0)});
      else if (std::abs(v - std::round(v)) > tol)
        rep.violations.push_back(
            {Violation::Kind::not_binary, idx, std::abs(v - std::round(v))});
    }
  rep.feasible = rep.violations.empty();
  return rep;
}

double coupled_q_l(int q_s, int K, int J) {
  return static_cast<double>(q_s) * K / J;
}

double clamp_q_l(int q_s, int K, int J) {
  const double ql = coupled_q_l(q_s, K, J);
  if (static_cast<double>(K) * ql <= static_cast<double>(J) * q_s + 1e-12) return ql;
  return std::floor(static_cast<double>(J) * q_s / K);
}

bool binary_matching_exists(int K, int J, int q_s, double q_l) {
  if (q_s < 0) return false;
  const int ql_int = static_cast<int>(std::ceil(q_l - 1e-9));
  if (ql_int > J) return false;
  return static_cast<double>(K) * std::max(ql_int, 0) <=
         static_cast<double>(J) * q_s;
}

}  // namespace satmud
