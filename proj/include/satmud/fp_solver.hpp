#ifndef SATMUD_FP_SOLVER_HPP
#define SATMUD_FP_SOLVER_HPP

#include <string>
#include <vector>

#include "satmud/polytope.hpp"
#include "satmud/rate_model.hpp"

namespace satmud {

enum class LambdaMode { scheduled, fixed };

struct SolverConfig {
  // Penalty schedule. The first lambda_warmup_outers outer iterations run
  // with lambda = 0 so the fractional-programming structure can form; the
  // ladder then starts at lambda0_factor * |C_SUM| and multiplies by
  // lambda_growth each outer iteration until the largest non-integrality
  // drops below nonint_tol.
  LambdaMode lambda_mode = LambdaMode::scheduled;
  int lambda_warmup_outers = 1;
  double lambda0_factor = 0.02;
  double lambda_growth = 4.0;
  double lambda_fixed = 1.0;        // used when lambda_mode == fixed
  double nonint_tol = 1e-3;

  double eps_m = 1e-4;              // outer: relative penalized-objective change
  double eps_n = 1e-5;              // inner: relative change of the surrogate value
  int max_outer = 50;
  int max_inner = 30;
  double rounding_threshold = 0.5;

  bool theta_in_inner_loop = false; // refresh theta before every subproblem
  bool identity_checks = true;      // gamma-tightness and transform-tightness guards
  // The coordinate polish finishes each subproblem, so the solver runs the
  // projected-gradient phase on a small budget.
  PgaConfig pga{.max_iters = 25};
};

struct SolverState {
  Mat q;
  Tensor3 gamma;
  Tensor3 theta;
  Tensor3 mu;
  double lambda = 0.0;
};

struct OuterTrace {
  int outer = 0;
  double penalized_objective = 0.0;   // C_SUM + penalty at the current lambda
  double c_sum = 0.0;
  double max_nonintegrality = 0.0;
  double lambda = 0.0;
  int inner_iters = 0;
  std::vector<double> inner_surrogate;  // surrogate optimum per inner step
  std::vector<double> inner_transform;  // exact-penalty transform objective
};

struct AllocationReport {
  MatchingMatrix q_binary;
  double relaxed_objective = 0.0;
  double rounded_sum_rate = 0.0;
  std::vector<double> load;
  std::vector<OuterTrace> trace;
  bool converged = false;
  int outer_iters = 0;
  double wall_time_ms = 0.0;
  std::string warning;
};

// Penalty p(Q) = lambda * sum(q^2 - q): <= 0 on the box, 0 exactly at binary
// points.
double penalty(const Mat& q, double lambda);
Mat penalty_gradient(const Mat& q, double lambda);

// Closed-form auxiliary updates.
Tensor3 update_gamma(const SicContext& ctx, const RateModelParams& params, const Mat& q);
Tensor3 update_mu(const Tensor3& gamma);
Tensor3 update_theta(const SicContext& ctx, const RateModelParams& params,
                     const Mat& q, const Tensor3& gamma);

// Reference value of the dual-transformed objective (rates only plus penalty),
// used to verify quadratic-transform tightness.
double dual_transform_value(const SicContext& ctx, const RateModelParams& params,
                            const Mat& q, const Tensor3& gamma, double lambda);

// Concave inner subproblem for fixed (gamma, theta): the quadratic-transform
// terms collapse to sum_kj [ u_kj * sqrt(q_kj) + lin_kj * q_kj ] + const,
// with the penalty linearized at the anchor.
class SlmSubproblem {
 public:
  SlmSubproblem(const SicContext& ctx, const RateModelParams& params,
                const Tensor3& gamma, const Tensor3& theta, const Mat& anchor,
                double lambda);

  double surrogate_value(const Mat& q) const;
  // Returns the value; fills grad when non-null. sqrt-gradients clamp q below
  // at 1e-12.
  double surrogate(const Mat& q, Mat* grad) const;
  // Transform objective at the same (gamma, theta): exact penalty, not
  // linearized.
  double transform_value(const Mat& q) const;

  // Re-linearize the penalty at a new anchor; the rate coefficients are
  // unchanged.
  void reanchor(const Mat& anchor);

  ObjectiveFn objective() const;

  const Mat& sqrt_coeff() const { return u_; }
  const Mat& linear_coeff() const { return lin_rate_; }
  const Mat& penalty_linear_coeff() const { return pen_lin_; }

 private:
  Mat u_;         // sqrt(q) coefficients, >= 0
  Mat lin_rate_;  // linear coefficients from the transform denominators
  double const_rate_ = 0.0;
  Mat pen_lin_;   // lambda * (2 q' - 1)
  double pen_const_ = 0.0;
  double lambda_ = 0.0;
};

// Maximal uniform interior point min(1, q_s/K), feasible whenever the
// counting bound holds. A binary start is a fixed point of the gamma/theta
// updates (theta* = 0 wherever q = 0 makes the surrogate flat in that
// entry), so any warm start must stay interior; solve() itself starts from a
// channel-informed interior point.
Mat initial_matching(int K, int J, int q_s, double q_l);

// Threshold at rounding_threshold, then greedy repair: C2 overflows drop the
// smallest-marginal user, C1 deficits add the largest-marginal satellite with
// spare capacity (with a swap fallback).
MatchingMatrix round_and_repair(const Mat& q_relaxed, int q_s, double q_l,
                                const SicContext& ctx, const RateModelParams& params,
                                double threshold = 0.5);

// Algorithm: penalty-relaxed fractional programming with successive
// lower-bound maximization, then rounding and repair.
AllocationReport solve(const Scenario& sc, const RateModelParams& params,
                       int q_s, double q_l, const SolverConfig& cfg = {});

}  // namespace satmud

#endif  // SATMUD_FP_SOLVER_HPP
