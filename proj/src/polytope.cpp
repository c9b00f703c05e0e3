#include "satmud/polytope.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace satmud {

namespace {

void project_box(Mat& x) {
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], 0.0, 1.0);
}

void project_rows(Mat& x, double q_l) {
  if (q_l <= 0) return;
  const int K = x.rows(), J = x.cols();
  for (int k = 0; k < K; ++k) {
    double s = 0.0;
    for (int j = 0; j < J; ++j) s += x(k, j);
    if (s < q_l) {
      const double add = (q_l - s) / J;
      for (int j = 0; j < J; ++j) x(k, j) += add;
    }
  }
}

void project_cols(Mat& x, int q_s) {
  const int K = x.rows(), J = x.cols();
  for (int j = 0; j < J; ++j) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += x(k, j);
    if (s > q_s) {
      const double sub = (s - q_s) / K;
      for (int k = 0; k < K; ++k) x(k, j) -= sub;
    }
  }
}

}  // namespace

MatchingPolytope::MatchingPolytope(int K, int J, int q_s, double q_l,
                                   double projection_tol)
    : K_(K), J_(J), q_s_(q_s), q_l_(q_l), tol_(projection_tol) {
  if (K < 1 || J < 1) throw ConfigError("polytope dimensions must be positive");
  if (q_s_ < 0 || q_l_ > J_ || static_cast<double>(K_) * q_l_ > static_cast<double>(J_) * q_s_ + 1e-12) {
    std::ostringstream os;
    os << "infeasible matching polytope: K=" << K_ << " J=" << J_
       << " q_s=" << q_s_ << " q_l=" << q_l_;
    throw InfeasibleError(os.str());
  }
}

bool MatchingPolytope::contains(const Mat& q, double tol) const {
  for (size_t i = 0; i < q.size(); ++i)
    if (q[i] < -tol || q[i] > 1.0 + tol) return false;
  for (int k = 0; k < K_; ++k) {
    double s = 0.0;
    for (int j = 0; j < J_; ++j) s += q(k, j);
    if (s < q_l_ - tol) return false;
  }
  for (int j = 0; j < J_; ++j) {
    double s = 0.0;
    for (int k = 0; k < K_; ++k) s += q(k, j);
    if (s > q_s_ + tol) return false;
  }
  return true;
}

Mat MatchingPolytope::project(const Mat& point) const {
  constexpr int kMaxCycles = 5000;
  // When K*q_l == J*q_s every row and column constraint is an equality and
  // the transportation structure admits a closed-form affine projection;
  // two-set Dykstra over {affine, box} converges far faster there than the
  // three-set inequality cycle.
  const bool tight = q_l_ > 0.0 &&
                     std::abs(K_ * q_l_ - static_cast<double>(J_) * q_s_) < 1e-12;

  auto project_affine = [&](Mat& x) {
    std::vector<double> rows(K_, 0.0), cols(J_, 0.0);
    double total = 0.0;
    for (int k = 0; k < K_; ++k)
      for (int j = 0; j < J_; ++j) {
        rows[k] += x(k, j);
        cols[j] += x(k, j);
        total += x(k, j);
      }
    const double target_total = static_cast<double>(K_) * q_l_;
    const double shift = (target_total - total) / (static_cast<double>(K_) * J_);
    for (int k = 0; k < K_; ++k)
      for (int j = 0; j < J_; ++j)
        x(k, j) += (q_l_ - rows[k]) / J_ + (q_s_ - cols[j]) / K_ - shift;
  };

  auto dykstra = [&](Mat x) {
    Mat inc_box(K_, J_), inc_row(K_, J_), inc_col(K_, J_);
    Mat prev(K_, J_);
    for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
      prev = x;

      for (size_t i = 0; i < x.size(); ++i) x[i] += inc_box[i];
      Mat y = x;
      project_box(y);
      for (size_t i = 0; i < x.size(); ++i) inc_box[i] = x[i] - y[i];
      x = y;

      if (tight) {
        for (size_t i = 0; i < x.size(); ++i) x[i] += inc_row[i];
        y = x;
        project_affine(y);
        for (size_t i = 0; i < x.size(); ++i) inc_row[i] = x[i] - y[i];
        x = y;
      } else {
        for (size_t i = 0; i < x.size(); ++i) x[i] += inc_row[i];
        y = x;
        project_rows(y, q_l_);
        for (size_t i = 0; i < x.size(); ++i) inc_row[i] = x[i] - y[i];
        x = y;

        for (size_t i = 0; i < x.size(); ++i) x[i] += inc_col[i];
        y = x;
        project_cols(y, q_s_);
        for (size_t i = 0; i < x.size(); ++i) inc_col[i] = x[i] - y[i];
        x = y;
      }

      if (frob_dist(x, prev) < 0.01 * tol_ && contains(x, 1e-7)) break;
    }
    return x;
  };

  Mat x = dykstra(point);
  if (!contains(x, 1e-7)) {
    // Far-out inputs can defeat the increment arithmetic; restarting from the
    // clamped near-feasible iterate has small increments and converges.
    project_box(x);
    x = dykstra(x);
  }
  // Snap residual box noise so downstream value comparisons see exact bounds.
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) x[i] = 0.0;
    else if (x[i] > 1.0) x[i] = 1.0;
  }
  return x;
}

PgaResult maximize(const ObjectiveFn& objective, const Mat& start,
                   const MatchingPolytope& polytope, const PgaConfig& cfg) {
  auto check_finite = [](double v, const Mat& g, int iter) {
    bool ok = std::isfinite(v);
    for (size_t i = 0; ok && i < g.size(); ++i) ok = std::isfinite(g[i]);
    if (!ok) {
      std::ostringstream os;
      os << "non-finite objective or gradient at PGA iteration " << iter;
      throw NumericalError(os.str());
    }
  };

  PgaResult res;
  Mat x = polytope.contains(start, 1e-7) ? start : polytope.project(start);
  Mat grad(x.rows(), x.cols());
  double f = objective(x, &grad);
  check_finite(f, grad, 0);
  res.trace.push_back(f);

  Mat x_prev, grad_prev;
  double step = 1.0;
  double last_move = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iters; ++it) {
    res.iters = it + 1;

    // Unit-step projected gradient as the stationarity measure. The probe
    // costs a projection, so it runs only once the accepted steps are small.
    if (it == 0 || last_move < 1e3 * cfg.grad_tol) {
      Mat probe = x;
      for (size_t i = 0; i < probe.size(); ++i) probe[i] += grad[i];
      probe = polytope.project(probe);
      if (frob_dist(probe, x) < cfg.grad_tol) break;
    }

    // Barzilai-Borwein warm step, falling back to the last accepted step.
    double t0 = step * 2.0;
    if (it > 0) {
      double dxdx = 0.0, dxdg = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - x_prev[i];
        dxdx += dx * dx;
        dxdg += dx * (grad[i] - grad_prev[i]);
      }
      if (dxdg < 0.0) t0 = -dxdx / dxdg;
    }
    const double reach = 8.0 * std::sqrt(static_cast<double>(x.size())) /
                         std::max(frob_norm(grad), 1e-12);
    t0 = std::clamp(t0, 1e-12, reach);

    // Backtracking along the projection arc.
    double t = t0;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      Mat trial = x;
      for (size_t i = 0; i < trial.size(); ++i) trial[i] += t * grad[i];
      trial = polytope.project(trial);
      double inner = 0.0;
      for (size_t i = 0; i < trial.size(); ++i) inner += grad[i] * (trial[i] - x[i]);
      const double f_trial = objective(trial, nullptr);
      if (std::isfinite(f_trial) &&
          f_trial >= f + cfg.sufficient_increase * inner && inner > 0.0) {
        x_prev = x;
        grad_prev = grad;
        last_move = frob_dist(trial, x);
        x = trial;
        f = objective(x, &grad);
        check_finite(f, grad, it + 1);
        res.trace.push_back(f);
        step = t;
        accepted = true;
        break;
      }
      t *= cfg.shrink;
    }
    if (!accepted) break;  // stalled: no admissible step length left
  }

  res.argmax = x;
  res.value = f;
  return res;
}

}  // namespace satmud
