#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "qae/matrix.hpp"

namespace qae {

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = -1e-9;  // Kraus arithmetic accumulates roundoff
inline constexpr double kUnitaryTol = 1e-10;

struct EighResult {
  std::vector<double> values;  // ascending
  Mat vectors;                 // columns, a = V diag(values) V+
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
/// Plenty for the 2..16 dimensional operators handled here.
inline EighResult eigh(const Mat& a, double hermitian_tol = kHermitianTol) {
  a.require_square();
  if (!a.is_hermitian(hermitian_tol)) throw std::invalid_argument("eigh: matrix not Hermitian");
  const std::size_t n = a.rows();

  Mat d = a;
  // Symmetrize away the sub-tolerance asymmetry so the iteration sees an exact
  // Hermitian input.
  for (std::size_t i = 0; i < n; ++i) {
    d(i, i) = d(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx m = 0.5 * (d(i, j) + std::conj(d(j, i)));
      d(i, j) = m;
      d(j, i) = std::conj(m);
    }
  }
  Mat v = Mat::identity(n);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += std::norm(d(i, j));
    return std::sqrt(2.0 * s);
  };

  const double scale = std::max(d.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 64 && off_norm() > 1e-15 * scale * n; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = d(p, q);
        const double absa = std::abs(apq);
        if (absa <= 1e-300) continue;
        const cplx phase = apq / absa;
        const double tau = (d(q, q).real() - d(p, p).real()) / (2.0 * absa);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx gpq = s * phase;

        // d <- G+ d G with G = I except G(p,p)=G(q,q)=c, G(p,q)=gpq, G(q,p)=-conj(gpq)
        for (std::size_t k = 0; k < n; ++k) {
          const cplx dkp = d(k, p);
          const cplx dkq = d(k, q);
          d(k, p) = c * dkp - std::conj(gpq) * dkq;
          d(k, q) = gpq * dkp + c * dkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx dpk = d(p, k);
          const cplx dqk = d(q, k);
          d(p, k) = c * dpk - gpq * dqk;
          d(q, k) = std::conj(gpq) * dpk + c * dqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = c * vkp - std::conj(gpq) * vkq;
          v(k, q) = gpq * vkp + c * vkq;
        }
        d(p, q) = 0.0;
        d(q, p) = 0.0;
        d(p, p) = d(p, p).real();
        d(q, q) = d(q, q).real();
      }
    }
  }

  EighResult r;
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.values[i] = d(i, i).real();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return r.values[i] < r.values[j]; });

  EighResult sorted;
  sorted.values.resize(n);
  sorted.vectors = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sorted.values[j] = r.values[order[j]];
    for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, j) = v(i, order[j]);
  }
  return sorted;
}

inline double min_eigenvalue(const Mat& hermitian) { return eigh(hermitian).values.front(); }

/// Hermitian, trace-one, positive semidefinite operator: the simulated state.
class DensityMatrix {
 public:
  explicit DensityMatrix(Mat m) : m_(std::move(m)) {
    m_.require_square();
    if (!m_.is_hermitian(kHermitianTol))
      throw std::invalid_argument("density matrix: not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > kTraceTol)
      throw std::invalid_argument("density matrix: trace differs from one");
    if (min_eigenvalue(m_) < kPsdTol)
      throw std::invalid_argument("density matrix: negative eigenvalue");
  }

  static DensityMatrix from_pure(const Vec& psi) {
    const double n = vec_norm(psi);
    if (std::abs(n - 1.0) > 1e-10)
      throw std::invalid_argument("density matrix: state vector not normalized");
    return DensityMatrix(outer(psi, psi));
  }

  std::size_t dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  Mat m_;
};

class Unitary {
 public:
  explicit Unitary(Mat m) : m_(std::move(m)) {
    m_.require_square();
    if (max_abs_diff(m_.adjoint() * m_, Mat::identity(m_.rows())) > kUnitaryTol)
      throw std::invalid_argument("unitary: U+U differs from identity");
  }

  std::size_t dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  Unitary adjoint() const { return Unitary(m_.adjoint()); }

  friend Unitary operator*(const Unitary& a, const Unitary& b) {
    return Unitary(a.m_ * b.m_);
  }

 private:
  Mat m_;
};

/// e^(-i scale h) for Hermitian h, via eigendecomposition.
inline Unitary expm_hermitian(const Mat& h, double scale) {
  const EighResult e = eigh(h);
  const std::size_t n = h.rows();
  Mat u(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const cplx ph = std::polar(1.0, -scale * e.values[k]);
        s += e.vectors(i, k) * ph * std::conj(e.vectors(j, k));
      }
      u(i, j) = s;
    }
  }
  return Unitary(u);
}

inline DensityMatrix apply_unitary(const Unitary& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) throw std::invalid_argument("apply_unitary: dimension mismatch");
  return DensityMatrix(u.mat() * rho.mat() * u.mat().adjoint());
}

namespace detail {

inline Mat partial_trace_raw(const Mat& rho, const std::vector<std::size_t>& dims,
                             const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (std::size_t d : dims) total *= d;
  if (total != rho.rows() || rho.rows() != rho.cols())
    throw std::invalid_argument("partial_trace: subsystem dims inconsistent with matrix");
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set empty");
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw std::invalid_argument("partial_trace: keep index out of range");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate keep index");
    kept[k] = true;
  }

  std::vector<std::size_t> keep_idx, tr_idx;
  for (std::size_t s = 0; s < dims.size(); ++s) (kept[s] ? keep_idx : tr_idx).push_back(s);

  std::vector<std::size_t> stride(dims.size(), 1);
  for (std::size_t s = dims.size(); s-- > 1;) stride[s - 1] = stride[s] * dims[s];

  std::size_t dim_keep = 1, dim_tr = 1;
  for (std::size_t s : keep_idx) dim_keep *= dims[s];
  for (std::size_t s : tr_idx) dim_tr *= dims[s];

  auto expand = [&](std::size_t packed, const std::vector<std::size_t>& subs) {
    std::size_t base = 0;
    for (std::size_t s = subs.size(); s-- > 0;) {
      const std::size_t d = dims[subs[s]];
      base += (packed % d) * stride[subs[s]];
      packed /= d;
    }
    return base;
  };

  Mat out(dim_keep, dim_keep);
  for (std::size_t i = 0; i < dim_keep; ++i) {
    const std::size_t ri = expand(i, keep_idx);
    for (std::size_t j = 0; j < dim_keep; ++j) {
      const std::size_t rj = expand(j, keep_idx);
      cplx s = 0.0;
      for (std::size_t t = 0; t < dim_tr; ++t) {
        const std::size_t rt = expand(t, tr_idx);
        s += rho(ri + rt, rj + rt);
      }
      out(i, j) = s;
    }
  }
  return out;
}

}  // namespace detail

/// Reduced state over the kept subsystems; subsystem 0 is the most significant
/// index (basis order |electron, nucleus> for the two-qubit device).
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& dims,
                                   const std::vector<std::size_t>& keep) {
  return DensityMatrix(detail::partial_trace_raw(rho.mat(), dims, keep));
}

/// <psi|rho|psi>, clipped to [0,1] for roundoff.
inline double fidelity_pure(const Vec& psi, const DensityMatrix& rho) {
  if (psi.size() != rho.dim()) throw std::invalid_argument("fidelity_pure: dimension mismatch");
  if (std::abs(vec_norm(psi) - 1.0) > 1e-10)
    throw std::invalid_argument("fidelity_pure: state vector not normalized");
  cplx f = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) f += std::conj(psi[i]) * rho(i, j) * psi[j];
  return std::clamp(f.real(), 0.0, 1.0);
}

}  // namespace qae
