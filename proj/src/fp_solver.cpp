#include "satmud/fp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace satmud {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kSqrtClamp = 1e-12;

double g_term(double gamma) { return std::log2(1.0 + gamma) - gamma / kLn2; }

double max_nonintegrality(const Mat& q) {
  double m = 0.0;
  for (size_t i = 0; i < q.size(); ++i)
    m = std::max(m, std::abs(q[i] - std::round(q[i])));
  return m;
}

int int_q_l(double q_l) {
  return std::max(0, static_cast<int>(std::ceil(q_l - 1e-9)));
}

}  // namespace

double penalty(const Mat& q, double lambda) {
  double p = 0.0;
  for (size_t i = 0; i < q.size(); ++i) p += q[i] * q[i] - q[i];
  return lambda * p;
}

Mat penalty_gradient(const Mat& q, double lambda) {
  Mat g(q.rows(), q.cols());
  for (size_t i = 0; i < q.size(); ++i) g[i] = lambda * (2.0 * q[i] - 1.0);
  return g;
}

Tensor3 update_gamma(const SicContext& ctx, const RateModelParams& params, const Mat& q) {
  const Tensor3 denom = sic_denominators(ctx, params, q);
  Tensor3 gamma(ctx.N, ctx.K, ctx.J);
  for (int n = 0; n < ctx.N; ++n)
    for (int k = 0; k < ctx.K; ++k)
      for (int j = 0; j < ctx.J; ++j)
        gamma(n, k, j) = ctx.b(n, k, j) * q(k, j) / denom(n, k, j);
  return gamma;
}

Tensor3 update_mu(const Tensor3& gamma) {
  Tensor3 mu(gamma.dim_n(), gamma.dim_k(), gamma.dim_j());
  for (size_t i = 0; i < gamma.size(); ++i) mu[i] = 1.0 / (kLn2 * (1.0 + gamma[i]));
  return mu;
}

Tensor3 update_theta(const SicContext& ctx, const RateModelParams& params,
                     const Mat& q, const Tensor3& gamma) {
  const Tensor3 denom = sic_denominators(ctx, params, q);
  Tensor3 theta(ctx.N, ctx.K, ctx.J);
  for (int n = 0; n < ctx.N; ++n)
    for (int k = 0; k < ctx.K; ++k)
      for (int j = 0; j < ctx.J; ++j) {
        const double own = ctx.b(n, k, j) * q(k, j);
        const double num = own * (1.0 + gamma(n, k, j));
        theta(n, k, j) = num > 0.0
                             ? std::sqrt(num) / (kLn2 * (denom(n, k, j) + own))
                             : 0.0;
      }
  return theta;
}

double dual_transform_value(const SicContext& ctx, const RateModelParams& params,
                            const Mat& q, const Tensor3& gamma, double lambda) {
  const Tensor3 denom = sic_denominators(ctx, params, q);
  double val = 0.0;
  for (int n = 0; n < ctx.N; ++n)
    for (int k = 0; k < ctx.K; ++k)
      for (int j = 0; j < ctx.J; ++j) {
        const double own = ctx.b(n, k, j) * q(k, j);
        const double ga = gamma(n, k, j);
        val += g_term(ga) + own * (1.0 + ga) / (kLn2 * (denom(n, k, j) + own));
      }
  return val + penalty(q, lambda);
}

SlmSubproblem::SlmSubproblem(const SicContext& ctx, const RateModelParams& params,
                             const Tensor3& gamma, const Tensor3& theta,
                             const Mat& anchor, double lambda)
    : u_(ctx.K, ctx.J), lin_rate_(ctx.K, ctx.J), pen_lin_(ctx.K, ctx.J),
      lambda_(lambda) {
  const bool printed = params.variant == InterferenceVariant::as_printed;
  std::vector<double> th2(ctx.K), suffix(ctx.K + 1);

  for (int n = 0; n < ctx.N; ++n) {
    for (int j = 0; j < ctx.J; ++j) {
      const auto& ord = ctx.order.at(n, j);
      for (int p = 0; p < ctx.K; ++p) {
        const double t = theta(n, ord[p], j);
        th2[p] = t * t;
      }
      suffix[ctx.K] = 0.0;
      for (int p = ctx.K - 1; p >= 0; --p) suffix[p] = suffix[p + 1] + th2[p];

      double total_vs2 = 0.0;
      for (int k = 0; k < ctx.K; ++k) total_vs2 += ctx.v(n, k, j) * ctx.s2(n, k);

      double vict = 0.0;      // eps * sum over strictly stronger of th2 * v
      double pref_th2 = 0.0;  // sum over strictly stronger of th2
      double head_vs2 = 0.0;  // v*s2 over strictly-stronger-or-equal users
      int p = 0;
      while (p < ctx.K) {
        int ge = p;
        const double vref = ctx.v(n, ord[p], j);
        while (ge < ctx.K && ctx.v(n, ord[ge], j) == vref) {
          const int i = ord[ge];
          head_vs2 += ctx.v(n, i, j) * ctx.s2(n, i);
          ++ge;
        }
        for (int t = p; t < ge; ++t) {
          const int k = ord[t];
          const double b = ctx.b(n, k, j);
          const double ga = gamma(n, k, j);
          u_(k, j) += 2.0 * theta(n, k, j) * std::sqrt(b * (1.0 + ga));
          lin_rate_(k, j) -= kLn2 * b * suffix[t];
          if (printed) {
            lin_rate_(k, j) -= kLn2 * ctx.s2(n, k) * vict;
            const_rate_ += g_term(ga) - kLn2 * th2[t] * params.sigma2;
          } else {
            lin_rate_(k, j) +=
                kLn2 * params.epsilon * ctx.v(n, k, j) * ctx.s2(n, k) * pref_th2;
            const_rate_ += g_term(ga) -
                           kLn2 * th2[t] * (params.sigma2 +
                                            params.epsilon * (total_vs2 - head_vs2));
          }
        }
        for (int t = p; t < ge; ++t) {
          const int i = ord[t];
          vict += params.epsilon * th2[t] * ctx.v(n, i, j);
          pref_th2 += th2[t];
        }
        p = ge;
      }
    }
  }
  reanchor(anchor);
}

void SlmSubproblem::reanchor(const Mat& anchor) {
  pen_const_ = penalty(anchor, lambda_);
  for (size_t i = 0; i < anchor.size(); ++i) {
    pen_lin_[i] = lambda_ * (2.0 * anchor[i] - 1.0);
    pen_const_ -= pen_lin_[i] * anchor[i];
  }
}

double SlmSubproblem::surrogate(const Mat& q, Mat* grad) const {
  double val = const_rate_ + pen_const_;
  for (size_t i = 0; i < q.size(); ++i) {
    const double lin = lin_rate_[i] + pen_lin_[i];
    val += u_[i] * std::sqrt(std::max(q[i], 0.0)) + lin * q[i];
    if (grad)
      (*grad)[i] = 0.5 * u_[i] / std::sqrt(std::max(q[i], kSqrtClamp)) + lin;
  }
  return val;
}

double SlmSubproblem::surrogate_value(const Mat& q) const { return surrogate(q, nullptr); }

double SlmSubproblem::transform_value(const Mat& q) const {
  double val = const_rate_;
  for (size_t i = 0; i < q.size(); ++i)
    val += u_[i] * std::sqrt(std::max(q[i], 0.0)) + lin_rate_[i] * q[i];
  return val + penalty(q, lambda_);
}

ObjectiveFn SlmSubproblem::objective() const {
  return [this](const Mat& q, Mat* grad) { return surrogate(q, grad); };
}

// Exact per-coordinate ascent on the separable surrogate
// f_i(q) = u_i sqrt(q) + lin_i q within row/column headroom. Each move is
// toward the per-coordinate maximizer and feasibility-preserving, so the
// surrogate value is non-decreasing.
static void coordinate_polish(Mat& q, const Mat& u, const Mat& lin, int q_s,
                              double q_l, int cycles = 4) {
  const int K = q.rows(), J = q.cols();
  std::vector<double> col(J, 0.0), row(K, 0.0);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j) {
      col[j] += q(k, j);
      row[k] += q(k, j);
    }
  for (int c = 0; c < cycles; ++c) {
    double moved = 0.0;
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) {
        const double l = lin(k, j);
        double target;
        if (l >= 0.0)
          target = 1.0;
        else {
          const double r = u(k, j) / (2.0 * -l);
          target = std::min(1.0, r * r);
        }
        double delta = target - q(k, j);
        if (delta > 0.0)
          delta = std::min(delta, std::max(0.0, static_cast<double>(q_s) - col[j]));
        else
          delta = -std::min(-delta, std::max(0.0, row[k] - q_l));
        if (delta == 0.0) continue;
        q(k, j) += delta;
        col[j] += delta;
        row[k] += delta;
        moved += std::abs(delta);
      }
    if (moved < 1e-12) break;
  }
}

Mat initial_matching(int K, int J, int q_s, double q_l) {
  // Column sums K*c <= q_s and row sums J*c >= q_l both hold at
  // c = min(1, q_s/K) when K*q_l <= J*q_s.
  const double c = std::min(1.0, static_cast<double>(q_s) / K);
  return Mat(K, J, c);
}

// Interior start biased toward strong channels: per column, mass proportional
// to the squared aggregate gain, normalized to 0.9*q_s, floored away from the
// theta* = 0 fixed point at q = 0.
static Mat informed_start(const SicContext& ctx, int q_s, double q_l,
                          const MatchingPolytope& polytope) {
  const int K = ctx.K, J = ctx.J;
  Mat w(K, J);
  for (int n = 0; n < ctx.N; ++n)
    for (int k = 0; k < K; ++k)
      for (int j = 0; j < J; ++j) w(k, j) += ctx.b(n, k, j);
  Mat q(K, J);
  for (int j = 0; j < J; ++j) {
    double tot = 0.0;
    for (int k = 0; k < K; ++k) tot += w(k, j) * w(k, j);
    for (int k = 0; k < K; ++k) {
      const double share = tot > 0.0 ? w(k, j) * w(k, j) / tot : 1.0 / K;
      q(k, j) = std::clamp(0.9 * q_s * share, 0.01, 0.99);
    }
  }
  return polytope.project(q);
}

MatchingMatrix round_and_repair(const Mat& q_relaxed, int q_s, double q_l,
                                const SicContext& ctx, const RateModelParams& params,
                                double threshold) {
  const int K = q_relaxed.rows();
  const int J = q_relaxed.cols();
  if (!binary_matching_exists(K, J, q_s, q_l)) {
    std::ostringstream os;
    os << "no binary matching satisfies C1-C3 for K=" << K << " J=" << J
       << " q_s=" << q_s << " q_l=" << q_l;
    throw InfeasibleError(os.str());
  }

  Mat q(K, J);
  for (size_t i = 0; i < q.size(); ++i) q[i] = q_relaxed[i] >= threshold ? 1.0 : 0.0;

  std::vector<int> col(J, 0), row(K, 0);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < J; ++j)
      if (q(k, j) == 1.0) {
        col[j]++;
        row[k]++;
      }

  // C2: drop the assigned user whose removal costs the least column rate.
  for (int j = 0; j < J; ++j) {
    while (col[j] > q_s) {
      const double base = column_rate(ctx, params, q, j);
      int drop = -1;
      double best_loss = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        if (q(k, j) != 1.0) continue;
        q(k, j) = 0.0;
        const double loss = base - column_rate(ctx, params, q, j);
        q(k, j) = 1.0;
        if (loss < best_loss) {
          best_loss = loss;
          drop = k;
        }
      }
      q(drop, j) = 0.0;
      col[j]--;
      row[drop]--;
    }
  }

  // C1: give each deficient user the spare satellite with the largest gain.
  const int need = int_q_l(q_l);
  for (int k = 0; k < K; ++k) {
    while (row[k] < need) {
      int add = -1;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < J; ++j) {
        if (q(k, j) == 1.0 || col[j] >= q_s) continue;
        const double base = column_rate(ctx, params, q, j);
        q(k, j) = 1.0;
        const double gain = column_rate(ctx, params, q, j) - base;
        q(k, j) = 0.0;
        if (gain > best_gain) {
          best_gain = gain;
          add = j;
        }
      }
      if (add >= 0) {
        q(k, add) = 1.0;
        col[add]++;
        row[k]++;
        continue;
      }
      // All columns available to user k are full: swap out a user that can
      // spare an assignment.
      bool swapped = false;
      for (int j = 0; j < J && !swapped; ++j) {
        if (q(k, j) == 1.0) continue;
        for (int i = 0; i < K && !swapped; ++i) {
          if (i == k || q(i, j) != 1.0 || row[i] <= need) continue;
          q(i, j) = 0.0;
          q(k, j) = 1.0;
          row[i]--;
          row[k]++;
          swapped = true;
        }
      }
      if (!swapped)
        throw InfeasibleError("rounding repair could not satisfy C1 despite counting bound");
    }
  }

  MatchingMatrix out;
  out.q = std::move(q);
  out.q_s = q_s;
  out.q_l = q_l;
  out.binary_flag = true;
  const auto rep = check_feasibility(out.q, q_s, q_l);
  if (!rep.feasible)
    throw NumericalError("repaired matrix infeasible: " + rep.describe());
  return out;
}

AllocationReport solve(const Scenario& sc, const RateModelParams& params,
                       int q_s, double q_l, const SolverConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const int K = sc.config.num_users;
  const int J = sc.config.num_sats;

  const MatchingPolytope polytope(K, J, q_s, q_l, cfg.pga.projection_tol);
  if (!binary_matching_exists(K, J, q_s, q_l)) {
    std::ostringstream os;
    os << "no binary matching satisfies C1-C3 for q_s=" << q_s << " q_l=" << q_l;
    throw InfeasibleError(os.str());
  }

  const SicContext ctx = SicContext::build(sc);
  SolverState st;
  st.q = informed_start(ctx, q_s, q_l, polytope);

  const double c0 = sum_rate(ctx, params, st.q);
  const int warmup = cfg.lambda_mode == LambdaMode::scheduled
                         ? std::max(0, cfg.lambda_warmup_outers)
                         : 0;
  st.lambda = cfg.lambda_mode == LambdaMode::fixed ? cfg.lambda_fixed : 0.0;
  if (cfg.lambda_mode == LambdaMode::scheduled && warmup == 0)
    st.lambda = cfg.lambda0_factor * std::max(std::abs(c0), 1e-12);

  AllocationReport report;
  double prev_obj = std::numeric_limits<double>::quiet_NaN();
  double best_obj = -std::numeric_limits<double>::infinity();
  Mat best_q = st.q;

  for (int m = 0; m < cfg.max_outer; ++m) {
    st.gamma = update_gamma(ctx, params, st.q);
    st.mu = update_mu(st.gamma);
    st.theta = update_theta(ctx, params, st.q, st.gamma);

    if (cfg.identity_checks) {
      double recon = 0.0;
      for (size_t i = 0; i < st.gamma.size(); ++i) recon += std::log2(1.0 + st.gamma[i]);
      const double cs = sum_rate(ctx, params, st.q);
      if (std::abs(recon - cs) > 1e-6 * (1.0 + std::abs(cs)))
        throw NumericalError("gamma-tightness identity violated");
    }

    SlmSubproblem slm(ctx, params, st.gamma, st.theta, st.q, st.lambda);

    if (cfg.identity_checks) {
      const double tv = slm.transform_value(st.q);
      const double dv = dual_transform_value(ctx, params, st.q, st.gamma, st.lambda);
      if (std::abs(tv - dv) > 1e-6 * (1.0 + std::abs(dv)))
        throw NumericalError("quadratic-transform tightness violated");
    }

    OuterTrace ot;
    ot.outer = m;
    ot.lambda = st.lambda;

    double prev_sur = std::numeric_limits<double>::quiet_NaN();
    Mat prev_q = st.q;
    for (int t = 0; t < cfg.max_inner; ++t) {
      if (cfg.theta_in_inner_loop && t > 0) {
        st.theta = update_theta(ctx, params, st.q, st.gamma);
        slm = SlmSubproblem(ctx, params, st.gamma, st.theta, st.q, st.lambda);
      }
      const PgaResult res = maximize(slm.objective(), st.q, polytope, cfg.pga);
      st.q = res.argmax;
      {
        Mat lin = slm.linear_coeff();
        const Mat& pen = slm.penalty_linear_coeff();
        for (size_t i = 0; i < lin.size(); ++i) lin[i] += pen[i];
        coordinate_polish(st.q, slm.sqrt_coeff(), lin, q_s, q_l);
      }
      ot.inner_iters = t + 1;
      ot.inner_surrogate.push_back(slm.surrogate_value(st.q));
      const double tv = slm.transform_value(st.q);
      if (!ot.inner_transform.empty() &&
          tv < ot.inner_transform.back() -
                   1e-9 * (1.0 + std::abs(ot.inner_transform.back())))
        throw NumericalError("inner transform objective decreased");
      ot.inner_transform.push_back(tv);
      const bool value_settled =
          !std::isnan(prev_sur) &&
          std::abs(res.value - prev_sur) <=
              cfg.eps_n * std::max(std::abs(prev_sur), 1e-12);
      // A stationary anchor map is an inner fixed point even while tiny value
      // creep continues (degenerate tight polytopes).
      const bool anchor_settled =
          t > 0 && frob_dist(st.q, prev_q) < 1e-7 * std::sqrt(double(st.q.size()));
      if (value_settled || anchor_settled) break;
      prev_sur = res.value;
      prev_q = st.q;
      slm.reanchor(st.q);
    }

    ot.c_sum = sum_rate(ctx, params, st.q);
    ot.penalized_objective = ot.c_sum + penalty(st.q, st.lambda);
    ot.max_nonintegrality = max_nonintegrality(st.q);
    report.trace.push_back(ot);
    report.outer_iters = m + 1;

    if (ot.penalized_objective > best_obj) {
      best_obj = ot.penalized_objective;
      best_q = st.q;
    }

    const bool obj_settled =
        !std::isnan(prev_obj) &&
        std::abs(ot.penalized_objective - prev_obj) <=
            cfg.eps_m * std::max(std::abs(prev_obj), 1e-12);
    if (obj_settled && ot.max_nonintegrality < cfg.nonint_tol) {
      report.converged = true;
      break;
    }
    prev_obj = ot.penalized_objective;

    if (cfg.lambda_mode == LambdaMode::scheduled) {
      if (m + 1 == warmup)
        st.lambda = cfg.lambda0_factor * std::max(std::abs(ot.c_sum), 1e-12);
      else if (m + 1 > warmup && ot.max_nonintegrality >= cfg.nonint_tol)
        st.lambda *= cfg.lambda_growth;
    }
  }

  if (!report.converged) {
    st.q = best_q;
    report.warning = "outer loop hit max_outer before reaching eps_m";
  }

  report.relaxed_objective = report.trace.empty()
                                 ? c0
                                 : sum_rate(ctx, params, st.q) + penalty(st.q, st.lambda);
  report.q_binary =
      round_and_repair(st.q, q_s, q_l, ctx, params, cfg.rounding_threshold);
  report.rounded_sum_rate = sum_rate(ctx, params, report.q_binary.q);
  report.load = processing_load(sc, report.q_binary.q);
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t_start)
          .count();
  return report;
}

}  // namespace satmud
