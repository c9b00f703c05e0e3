#ifndef SATMUD_POLYTOPE_HPP
#define SATMUD_POLYTOPE_HPP

#include <functional>
#include <vector>

#include "satmud/common.hpp"

namespace satmud {

// Relaxed matching polytope {Q : row sums >= q_l, column sums <= q_s,
// 0 <= q <= 1}. Construction certifies feasibility.
class MatchingPolytope {
 public:
  MatchingPolytope(int K, int J, int q_s, double q_l, double projection_tol = 1e-9);

  int rows() const { return K_; }
  int cols() const { return J_; }
  int q_s() const { return q_s_; }
  double q_l() const { return q_l_; }

  // Euclidean projection via Dykstra's alternating projections over the box,
  // the row half-spaces and the column half-spaces.
  Mat project(const Mat& point) const;

  bool contains(const Mat& q, double tol) const;

 private:
  int K_, J_, q_s_;
  double q_l_;
  double tol_;
};

// Objective callable: returns the value at q; when grad is non-null it must
// also be filled (same shape as q).
using ObjectiveFn = std::function<double(const Mat& q, Mat* grad)>;

struct PgaConfig {
  int max_iters = 500;
  double shrink = 0.5;             // backtracking factor
  double sufficient_increase = 1e-4;
  double grad_tol = 1e-6;          // on the projected-gradient norm
  double projection_tol = 1e-9;
};

struct PgaResult {
  Mat argmax;
  double value = 0.0;
  std::vector<double> trace;  // objective after each accepted step
  int iters = 0;
};

// Projected-gradient ascent with backtracking line search for a concave
// objective over the polytope. Throws NumericalError on non-finite values.
PgaResult maximize(const ObjectiveFn& objective, const Mat& start,
                   const MatchingPolytope& polytope, const PgaConfig& cfg = {});

}  // namespace satmud

#endif  // SATMUD_POLYTOPE_HPP
