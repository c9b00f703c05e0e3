#ifndef SATMUD_RATE_MODEL_HPP
#define SATMUD_RATE_MODEL_HPP

#include <string>
#include <vector>

#include "satmud/common.hpp"
#include "satmud/scenario.hpp"

namespace satmud {

// Residual-interference reading: `as_printed` charges the victim gain
// |h_{n,k,j}|^2 weighted by the interferer's q_{i,j}; `complement` is the
// (1 - q_{i,j}), |h_{n,i,j}|^2 alternative offered for sensitivity studies.
enum class InterferenceVariant { as_printed, complement };

struct RateModelParams {
  double epsilon = 0.0;   // E{|x - x_tilde|^2}, residual cancellation power
  double sigma2 = 1.0;    // linear noise power per RE
  InterferenceVariant variant = InterferenceVariant::as_printed;
};

inline RateModelParams params_for(const Scenario& sc, double epsilon,
                                  InterferenceVariant variant = InterferenceVariant::as_printed) {
  return RateModelParams{epsilon, sc.channel.sigma2, variant};
}

// The decision variable Q with its constraint parameters. Continuous during
// the solve, binary at output.
struct MatchingMatrix {
  Mat q;            // K x J, entries in [0,1]
  int q_s = 0;      // max users per satellite (C2)
  double q_l = 0;   // min satellites per user (C1)
  bool binary_flag = false;
};

// Per-(RE, satellite) SIC decode order: users sorted by descending
// |h[n][k][j]|^2, ties broken by user index.
struct SicOrder {
  int N = 0, K = 0, J = 0;
  std::vector<std::vector<int>> perm;  // indexed n*J + j

  const std::vector<int>& at(int n, int j) const { return perm[static_cast<size_t>(n) * J + j]; }
};

SicOrder make_sic_order(const Scenario& sc);

// Cached per-(n,k,j) quantities shared by the rate model and the solver:
// b = |h*s|^2, v = |h|^2, s2 = |s|^2, and the SIC order.
struct SicContext {
  int N = 0, K = 0, J = 0;
  SicOrder order;
  Tensor3 b;   // |h[n][k][j] * s[n][k]|^2
  Tensor3 v;   // |h[n][k][j]|^2
  Mat s2;      // |s[n][k]|^2, N x K

  static SicContext build(const Scenario& sc);
};

// Residual interference I_{n,k,j} from imperfectly canceled non-target users.
double residual_interference(const Scenario& sc, const RateModelParams& params,
                             const Mat& q, int n, int k, int j);

// Overall sum-rate C_SUM in bits/s/Hz, SIC ordering per (n, j).
double sum_rate(const SicContext& ctx, const RateModelParams& params, const Mat& q);
double sum_rate(const Scenario& sc, const RateModelParams& params, const Mat& q);

// Sum-rate restricted to one satellite column (used by rounding repair).
double column_rate(const SicContext& ctx, const RateModelParams& params,
                   const Mat& q, int j);

// denom[n][k][j] = sigma2 + sum over users preceding k in SIC order of
// b_i q_i + I_{n,k,j}; the SINR of user k is b_k q_k / denom.
Tensor3 sic_denominators(const SicContext& ctx, const RateModelParams& params,
                         const Mat& q);

// Traversal-count processing load per satellite:
// load[j] = sum_n sum_{k in F(n) ^ G_j} M^(|F(n) ^ G_j| - 1).
std::vector<double> processing_load(const Scenario& sc, const Mat& q_binary);

struct Violation {
  enum class Kind { row_min, col_max, not_binary, out_of_box, counting };
  Kind kind;
  int index;       // row or column index, -1 for counting
  double margin;   // amount by which the constraint is missed
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  std::string describe() const;
};

FeasibilityReport check_feasibility(const Mat& q, int q_s, double q_l);

// The q_s-coupled q_l rule (q_s * K / J) and the clamp the harness applies
// when that rule violates the counting bound K*q_l <= J*q_s.
double coupled_q_l(int q_s, int K, int J);
double clamp_q_l(int q_s, int K, int J);

// A binary matching satisfying C1-C3 exists iff the integer counting bound
// K*ceil(q_l) <= J*q_s holds and ceil(q_l) <= J.
bool binary_matching_exists(int K, int J, int q_s, double q_l);

}  // namespace satmud

#endif  // SATMUD_RATE_MODEL_HPP
