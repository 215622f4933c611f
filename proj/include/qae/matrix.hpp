#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace qae {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

// Operators live on 1..4 qubits, so every dimension is a power of two <= 16.
inline bool valid_dim(std::size_t n) {
  return n == 1 || n == 2 || n == 4 || n == 8 || n == 16;
}

}  // namespace detail

/// Dense complex matrix in row-major order.
class Mat {
 public:
  Mat() = default;

  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {
    check_dims(rows, cols);
  }

  Mat(std::size_t rows, std::size_t cols, std::initializer_list<cplx> entries)
      : rows_(rows), cols_(cols), e_(entries) {
    check_dims(rows, cols);
    if (e_.size() != rows * cols) throw std::invalid_argument("matrix: entry count mismatch");
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return e_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return e_[i * cols_ + j]; }

  const std::vector<cplx>& entries() const { return e_; }

  Mat& operator+=(const Mat& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < e_.size(); ++k) e_[k] += o.e_[k];
    return *this;
  }

  Mat& operator-=(const Mat& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < e_.size(); ++k) e_[k] -= o.e_[k];
    return *this;
  }

  Mat& operator*=(cplx s) {
    for (auto& v : e_) v *= s;
    return *this;
  }

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, cplx s) { return a *= s; }
  friend Mat operator*(cplx s, Mat a) { return a *= s; }

  friend Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product: shape mismatch");
    Mat c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  Mat adjoint() const {
    Mat m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  cplx trace() const {
    require_square();
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : e_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
  }

  void require_square() const {
    if (rows_ != cols_) throw std::invalid_argument("matrix: expected square");
  }

 private:
  void require_same_shape(const Mat& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix: shape mismatch");
  }

  static void check_dims(std::size_t rows, std::size_t cols) {
    if (!detail::valid_dim(rows) || !detail::valid_dim(cols))
      throw std::invalid_argument("matrix: dimensions must be powers of two up to 16, got " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> e_;
};

inline double max_abs_diff(const Mat& a, const Mat& b) {
  Mat d = a;
  d -= b;
  return d.max_abs();
}

/// Kronecker product. Square operator products beyond 16x16 are not supported.
inline Mat kron(const Mat& a, const Mat& b) {
  const std::size_t r = a.rows() * b.rows();
  const std::size_t c = a.cols() * b.cols();
  if (a.rows() == a.cols() && b.rows() == b.cols() && r > 16)
    throw std::invalid_argument("kron: operator product exceeds 16x16");
  Mat m(r, c);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          m(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return m;
}

// Pauli matrices and basis projectors, used all over the pulse algebra.
inline Mat sigma_x() { return Mat(2, 2, {0, 1, 1, 0}); }
inline Mat sigma_y() { return Mat(2, 2, {0, cplx(0, -1), cplx(0, 1), 0}); }
inline Mat sigma_z() { return Mat(2, 2, {1, 0, 0, -1}); }
inline Mat proj0() { return Mat(2, 2, {1, 0, 0, 0}); }
inline Mat proj1() { return Mat(2, 2, {0, 0, 0, 1}); }

using Vec = std::vector<cplx>;

inline Vec operator*(const Mat& m, const Vec& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("matrix-vector: shape mismatch");
  Vec out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline double vec_norm(const Vec& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline cplx vec_dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline Mat outer(const Vec& a, const Vec& b) {
  Mat m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

}  // namespace qae
