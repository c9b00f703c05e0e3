#ifndef SATMUD_COMMON_HPP
#define SATMUD_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace satmud {

using cplx = std::complex<double>;

// Error taxonomy, mapped to CLI exit codes 2/3/4.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Dense row-major matrix of doubles. Used for the matching matrix Q (K x J),
// gradients and iterates.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return a_.size(); }

  double& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }
  double& operator[](size_t i) { return a_[i]; }
  double operator[](size_t i) const { return a_[i]; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  void fill(double v) { a_.assign(a_.size(), v); }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Mat& x, const Mat& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

inline double frob_dist(const Mat& x, const Mat& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double frob_norm(const Mat& x) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

// Complex tensor with layout [n][k][j], n the resource element, k the user,
// j the satellite.
class CTensor3 {
 public:
  CTensor3() = default;
  CTensor3(int n, int k, int j, cplx fill = {})
      : n_(n), k_(k), j_(j), a_(static_cast<size_t>(n) * k * j, fill) {}

  int dim_n() const { return n_; }
  int dim_k() const { return k_; }
  int dim_j() const { return j_; }
  size_t size() const { return a_.size(); }

  cplx& operator()(int n, int k, int j) {
    return a_[(static_cast<size_t>(n) * k_ + k) * j_ + j];
  }
  cplx operator()(int n, int k, int j) const {
    return a_[(static_cast<size_t>(n) * k_ + k) * j_ + j];
  }

  friend bool operator==(const CTensor3& x, const CTensor3& y) {
    return x.n_ == y.n_ && x.k_ == y.k_ && x.j_ == y.j_ && x.a_ == y.a_;
  }

 private:
  int n_ = 0, k_ = 0, j_ = 0;
  std::vector<cplx> a_;
};

// Real tensor with the same [n][k][j] layout (auxiliary variables gamma,
// theta, mu and cached channel powers).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int n, int k, int j, double fill = 0.0)
      : n_(n), k_(k), j_(j), a_(static_cast<size_t>(n) * k * j, fill) {}

  int dim_n() const { return n_; }
  int dim_k() const { return k_; }
  int dim_j() const { return j_; }
  size_t size() const { return a_.size(); }

  double& operator()(int n, int k, int j) {
    return a_[(static_cast<size_t>(n) * k_ + k) * j_ + j];
  }
  double operator()(int n, int k, int j) const {
    return a_[(static_cast<size_t>(n) * k_ + k) * j_ + j];
  }
  double& operator[](size_t i) { return a_[i]; }
  double operator[](size_t i) const { return a_[i]; }

 private:
  int n_ = 0, k_ = 0, j_ = 0;
  std::vector<double> a_;
};

using Rng = std::mt19937_64;

// splitmix64; used to derive independent substreams so that a tensor drawn
// for (seed, k, j) does not change when K or J grows.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t substream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

inline Rng make_rng(uint64_t seed) { return Rng(mix64(seed)); }

}  // namespace satmud

#endif  // SATMUD_COMMON_HPP
