#include <cmath>
#include <functional>

#include "doctest.h"
#include "satmud/polytope.hpp"
#include "test_util.hpp"

using namespace satmud;
using namespace satmud::testing;

TEST_CASE("infeasible polytopes are rejected at construction") {
  CHECK_THROWS_AS(MatchingPolytope(4, 2, 1, 2.0), InfeasibleError);  // 4*2 > 2*1
  CHECK_THROWS_AS(MatchingPolytope(2, 2, 1, 3.0), InfeasibleError);  // q_l > J
  CHECK_NOTHROW(MatchingPolytope(4, 2, 2, 1.0));
}

TEST_CASE("project: interior points are fixed points") {
  MatchingPolytope poly(3, 3, 2, 1.0);
  Mat x(3, 3, 0.5);  // rows 1.5 >= 1, cols 1.5 <= 2
  const Mat p = poly.project(x);
  CHECK(frob_dist(p, x) < 1e-9);
}

TEST_CASE("project: with only the box active it is an entrywise clamp") {
  MatchingPolytope poly(2, 3, 2, 0.0);  // q_s = K, q_l = 0
  Mat x(2, 3);
  x(0, 0) = -0.5; x(0, 1) = 0.3; x(0, 2) = 1.7;
  x(1, 0) = 0.9;  x(1, 1) = -2.0; x(1, 2) = 0.0;
  const Mat p = poly.project(x);
  CHECK(p(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(p(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("project: single-row hand-derived solution") {
  // Row constraint x1 + x2 >= 1 over the unit box; projecting the origin
  // lands on the symmetric face point.
  MatchingPolytope poly(1, 2, 1, 1.0);
  Mat x(1, 2, 0.0);
  const Mat p = poly.project(x);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("project: idempotent and non-expansive over random points") {
  MatchingPolytope poly(5, 4, 2, 1.0);
  Rng rng = make_rng(123);
  for (int rep = 0; rep < 1000; ++rep) {
    const Mat x = random_matrix(5, 4, rng, -1.0, 2.0);
    const Mat y = random_matrix(5, 4, rng, -1.0, 2.0);
    const Mat px = poly.project(x);
    const Mat py = poly.project(y);
    CHECK(frob_dist(poly.project(px), px) <= 1e-9);
    CHECK(frob_dist(px, py) <= frob_dist(x, y) + 1e-9);
    CHECK(poly.contains(px, 1e-7));
  }
}

TEST_CASE("maximize: strongly concave objective reaches its interior optimum") {
  MatchingPolytope poly(3, 3, 3, 0.5);
  Mat target(3, 3, 0.4);
  ObjectiveFn obj = [&](const Mat& q, Mat* grad) {
    double v = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
      const double d = q[i] - target[i];
      v -= d * d;
      if (grad) (*grad)[i] = -2.0 * d;
    }
    return v;
  };
  Mat start(3, 3, 0.9);
  const PgaResult res = maximize(obj, start, poly);
  CHECK(frob_dist(res.argmax, target) < 1e-6);
}

TEST_CASE("maximize: linear objective over the box hits the sign vertex") {
  MatchingPolytope poly(2, 3, 2, 0.0);
  Mat c(2, 3);
  Rng rng = make_rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (size_t i = 0; i < c.size(); ++i) {
    c[i] = u(rng);
    if (std::abs(c[i]) < 0.05) c[i] = 0.2;  // keep the optimum a strict vertex
  }
  ObjectiveFn obj = [&](const Mat& q, Mat* grad) {
    double v = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
      v += c[i] * q[i];
      if (grad) (*grad)[i] = c[i];
    }
    return v;
  };
  Mat start(2, 3, 0.5);
  const PgaResult res = maximize(obj, start, poly);
  for (size_t i = 0; i < c.size(); ++i)
    CHECK(res.argmax[i] == doctest::Approx(c[i] > 0 ? 1.0 : 0.0).epsilon(1e-6));
}

TEST_CASE("maximize: random concave quadratic matches an active-set oracle") {
  const int K = 2, J = 2;
  MatchingPolytope poly(K, J, 2, 1.0);
  Rng rng = make_rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  for (int rep = 0; rep < 3; ++rep) {
    // f(x) = -(x-z)^T A (x-z) with A positive definite.
    double B[4][4], A[4][4] = {};
    for (auto& row : B)
      for (double& v : row) v = u(rng);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        for (int t = 0; t < 4; ++t) A[i][j] += B[t][i] * B[t][j];
        if (i == j) A[i][j] += 0.3;
      }
    double z[4];
    for (double& v : z) v = 0.5 + 0.75 * u(rng);

    auto value = [&](const double* x) {
      double v = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) v -= (x[i] - z[i]) * A[i][j] * (x[j] - z[j]);
      return v;
    };
    ObjectiveFn obj = [&](const Mat& q, Mat* grad) {
      double x[4] = {q(0, 0), q(0, 1), q(1, 0), q(1, 1)};
      if (grad) {
        for (int i = 0; i < 4; ++i) {
          double g = 0.0;
          for (int j = 0; j < 4; ++j) g -= 2.0 * A[i][j] * (x[j] - z[j]);
          (*grad)[i] = g;
        }
      }
      return value(x);
    };

    // Oracle: enumerate candidate active sets of the 12 linear constraints
    // and solve each equality-constrained KKT system; for a strictly concave
    // quadratic the best feasible candidate is the exact constrained optimum.
    double con_a[12][4] = {};
    double con_b[12];
    int c_idx = 0;
    for (int i = 0; i < 4; ++i) {  // x_i <= 1
      con_a[c_idx][i] = 1.0;
      con_b[c_idx++] = 1.0;
    }
    for (int i = 0; i < 4; ++i) {  // -x_i <= 0
      con_a[c_idx][i] = -1.0;
      con_b[c_idx++] = 0.0;
    }
    con_a[c_idx][0] = -1.0; con_a[c_idx][1] = -1.0; con_b[c_idx++] = -1.0;  // row 0
    con_a[c_idx][2] = -1.0; con_a[c_idx][3] = -1.0; con_b[c_idx++] = -1.0;  // row 1
    con_a[c_idx][0] = 1.0; con_a[c_idx][2] = 1.0; con_b[c_idx++] = 2.0;     // col 0
    con_a[c_idx][1] = 1.0; con_a[c_idx][3] = 1.0; con_b[c_idx++] = 2.0;     // col 1

    auto gauss = [](std::vector<std::vector<double>>& M, std::vector<double>& rhs) {
      const int n = static_cast<int>(rhs.size());
      for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
          if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        if (std::abs(M[piv][col]) < 1e-11) return false;
        std::swap(M[piv], M[col]);
        std::swap(rhs[piv], rhs[col]);
        for (int r = 0; r < n; ++r) {
          if (r == col) continue;
          const double f = M[r][col] / M[col][col];
          for (int t = col; t < n; ++t) M[r][t] -= f * M[col][t];
          rhs[r] -= f * rhs[col];
        }
      }
      for (int i = 0; i < n; ++i) rhs[i] /= M[i][i];
      return true;
    };

    double best_v = -1e300;
    for (uint32_t mask = 0; mask < (1u << 12); ++mask) {
      if (__builtin_popcount(mask) > 4) continue;
      std::vector<int> act;
      for (int t = 0; t < 12; ++t)
        if ((mask >> t) & 1u) act.push_back(t);
      const int m = static_cast<int>(act.size());
      const int n = 4 + m;
      std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
      std::vector<double> rhs(n, 0.0);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          M[i][j] = 2.0 * A[i][j];
          rhs[i] += 2.0 * A[i][j] * z[j];
        }
        for (int t = 0; t < m; ++t) M[i][4 + t] = con_a[act[t]][i];
      }
      for (int t = 0; t < m; ++t) {
        for (int i = 0; i < 4; ++i) M[4 + t][i] = con_a[act[t]][i];
        rhs[4 + t] = con_b[act[t]];
      }
      if (!gauss(M, rhs)) continue;
      double x[4] = {rhs[0], rhs[1], rhs[2], rhs[3]};
      bool ok = true;
      for (int t = 0; t < 12 && ok; ++t) {
        double ax = 0.0;
        for (int i = 0; i < 4; ++i) ax += con_a[t][i] * x[i];
        ok = ax <= con_b[t] + 1e-9;
      }
      if (ok) best_v = std::max(best_v, value(x));
    }

    Mat start(K, J, 0.6);
    const PgaResult res = maximize(obj, start, poly);
    CHECK(res.value == doctest::Approx(best_v).epsilon(1e-4));
  }
}

TEST_CASE("maximize: trace is strictly increasing over accepted steps") {
  MatchingPolytope poly(3, 2, 2, 1.0);
  Mat target(3, 2, 0.25);
  ObjectiveFn obj = [&](const Mat& q, Mat* grad) {
    double v = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
      const double d = q[i] - target[i];
      v -= d * d;
      if (grad) (*grad)[i] = -2.0 * d;
    }
    return v;
  };
  Mat start(3, 2, 1.0);
  const PgaResult res = maximize(obj, start, poly);
  REQUIRE(res.trace.size() > 1);
  for (size_t i = 0; i + 1 < res.trace.size(); ++i)
    CHECK(res.trace[i + 1] > res.trace[i]);
}

TEST_CASE("maximize: non-finite objective raises a numerical error") {
  MatchingPolytope poly(2, 2, 2, 0.0);
  ObjectiveFn obj = [](const Mat&, Mat* grad) {
    if (grad) grad->fill(std::numeric_limits<double>::quiet_NaN());
    return std::numeric_limits<double>::quiet_NaN();
  };
  Mat start(2, 2, 0.5);
  CHECK_THROWS_AS(maximize(obj, start, poly), NumericalError);
}
