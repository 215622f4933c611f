#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qae/rng.hpp"

namespace qae {

struct FitPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 0.0;  // <= 0 means unweighted
};

struct FitOptions {
  std::size_t max_iterations = 200;
  std::size_t bootstrap_resamples = 0;  // 0: covariance-based uncertainties
  std::uint64_t bootstrap_seed = 0;
};

struct FitResult {
  double y0 = 0.0;
  double a0 = 0.0;
  double t = 0.0;
  double sigma_y0 = 0.0;
  double sigma_a0 = 0.0;
  double sigma_t = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// d(y0 + A0 exp(-x/t)) / d(y0, A0, t).
inline std::array<double, 3> exp_decay_jacobian_row(double /*y0*/, double a0, double t, double x) {
  const double e = std::exp(-x / t);
  return {1.0, e, a0 * x / (t * t) * e};
}

namespace detail {

inline std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> a,
                                    std::array<double, 3> b) {
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("fit: singular normal equations");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j < 3; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  return {b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]};
}

inline std::array<std::array<double, 3>, 3> invert3(std::array<std::array<double, 3>, 3> a) {
  std::array<std::array<double, 3>, 3> inv{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (std::size_t col = 0; col < 3; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("fit: singular covariance");
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < 3; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < 3; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct FitCore {
  double y0, a0, t;
  double ssr;
  bool converged;
  std::size_t iterations;
};

inline FitCore fit_core(std::span<const FitPoint> pts, const std::vector<double>& w,
                        std::size_t max_iterations, double y0, double a0, double t) {
  const std::size_t n = pts.size();

  auto weighted_ssr = [&](double py0, double pa0, double pt) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = pts[i].y - (py0 + pa0 * std::exp(-pts[i].x / pt));
      s += w[i] * r * r;
    }
    return s;
  };

  double ssr = weighted_ssr(y0, a0, t);
  double lambda = 1e-3;
  bool converged = false;
  std::size_t it = 0;
  for (; it < max_iterations; ++it) {
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    for (std::size_t i = 0; i < n; ++i) {
      const std::array<double, 3> j = exp_decay_jacobian_row(y0, a0, t, pts[i].x);
      const double r = pts[i].y - (y0 + a0 * std::exp(-pts[i].x / t));
      for (std::size_t p = 0; p < 3; ++p) {
        jtr[p] += w[i] * j[p] * r;
        for (std::size_t qd = 0; qd < 3; ++qd) jtj[p][qd] += w[i] * j[p] * j[qd];
      }
    }

    auto damped = jtj;
    for (std::size_t p = 0; p < 3; ++p) damped[p][p] += lambda * std::max(jtj[p][p], 1e-30);
    std::array<double, 3> step{};
    try {
      step = solve3(damped, jtr);
    } catch (const std::runtime_error&) {
      break;
    }

    const double cy0 = y0 + step[0], ca0 = a0 + step[1], ct = t + step[2];
    if (!(ct > 0.0) || !std::isfinite(cy0) || !std::isfinite(ca0) || !std::isfinite(ct)) {
      lambda *= 10.0;
      continue;
    }
    const double cssr = weighted_ssr(cy0, ca0, ct);
    if (cssr <= ssr) {
      const double scale = std::abs(y0) + std::abs(a0) + std::abs(t) + 1e-30;
      const double moved = std::abs(step[0]) + std::abs(step[1]) + std::abs(step[2]);
      const bool tiny_step = moved < 1e-12 * scale;
      const bool tiny_gain = (ssr - cssr) < 1e-14 * (ssr + 1e-300);
      y0 = cy0;
      a0 = ca0;
      t = ct;
      ssr = cssr;
      lambda = std::max(lambda / 4.0, 1e-12);
      if (tiny_step || tiny_gain) {
        converged = true;
        ++it;
        break;
      }
    } else {
      lambda *= 8.0;
      if (lambda > 1e12) break;
    }
  }
  return {y0, a0, t, ssr, converged, it};
}

}  // namespace detail

/// Weighted least squares for y = y0 + A0 exp(-x/t). Log-linear regression on
/// (y - min y) seeds the parameters, a damped Gauss-Newton iteration with the
/// analytic Jacobian refines them. Non-convergence is reported, not thrown.
inline FitResult fit_exponential(std::span<const FitPoint> pts, const FitOptions& opt = {}) {
  const std::size_t n = pts.size();
  if (n < 4) throw std::invalid_argument("fit_exponential: need at least 4 points");

  bool all_weighted = true;
  for (const auto& p : pts)
    if (!(p.sigma > 0.0)) all_weighted = false;
  std::vector<double> w(n, 1.0);
  if (all_weighted)
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / (pts[i].sigma * pts[i].sigma);

  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }

  // Seed from ln(y - min y) where positive.
  double y0 = ymin, a0 = std::max(ymax - ymin, 1e-12), t = std::max((xmax - xmin) / 3.0, 1e-12);
  {
    double sx = 0, sz = 0, sxx = 0, sxz = 0;
    std::size_t m = 0;
    for (const auto& p : pts) {
      const double z = p.y - ymin;
      if (z <= 0.0) continue;
      const double lz = std::log(z);
      sx += p.x;
      sz += lz;
      sxx += p.x * p.x;
      sxz += p.x * lz;
      ++m;
    }
    if (m >= 2) {
      const double denom = m * sxx - sx * sx;
      if (std::abs(denom) > 1e-300) {
        const double slope = (m * sxz - sx * sz) / denom;
        const double intercept = (sz - slope * sx) / m;
        if (slope < -1e-300) {
          t = -1.0 / slope;
          a0 = std::exp(intercept);
        }
      }
    }
  }

  const detail::FitCore core = detail::fit_core(pts, w, opt.max_iterations, y0, a0, t);

  FitResult res;
  res.y0 = core.y0;
  res.a0 = core.a0;
  res.t = core.t;
  res.converged = core.converged;
  res.iterations = core.iterations;
  {
    double s = 0.0;
    for (const auto& p : pts) {
      const double r = p.y - (core.y0 + core.a0 * std::exp(-p.x / core.t));
      s += r * r;
    }
    res.residual_norm = std::sqrt(s);
  }

  // Covariance of the linearized fit at the solution.
  try {
    std::array<std::array<double, 3>, 3> jtj{};
    for (std::size_t i = 0; i < n; ++i) {
      const std::array<double, 3> j = exp_decay_jacobian_row(core.y0, core.a0, core.t, pts[i].x);
      for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t qd = 0; qd < 3; ++qd) jtj[p][qd] += w[i] * j[p] * j[qd];
    }
    auto cov = detail::invert3(jtj);
    double scale = 1.0;
    if (!all_weighted && n > 3) scale = core.ssr / static_cast<double>(n - 3);
    res.sigma_y0 = std::sqrt(std::max(cov[0][0] * scale, 0.0));
    res.sigma_a0 = std::sqrt(std::max(cov[1][1] * scale, 0.0));
    res.sigma_t = std::sqrt(std::max(cov[2][2] * scale, 0.0));
  } catch (const std::runtime_error&) {
    res.sigma_y0 = res.sigma_a0 = res.sigma_t = std::numeric_limits<double>::quiet_NaN();
  }

  // Optional bootstrap over point noise.
  if (opt.bootstrap_resamples > 0 && all_weighted) {
    std::vector<double> ts;
    std::vector<double> y0s, a0s;
    std::mt19937_64 rng = make_stream(opt.bootstrap_seed, {0x66697462ULL});  // "fitb"
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<FitPoint> resampled(pts.begin(), pts.end());
    for (std::size_t k = 0; k < opt.bootstrap_resamples; ++k) {
      for (std::size_t i = 0; i < n; ++i)
        resampled[i].y = pts[i].y + pts[i].sigma * gauss(rng);
      const detail::FitCore c =
          detail::fit_core(resampled, w, opt.max_iterations, core.y0, core.a0, core.t);
      if (c.converged) {
        ts.push_back(c.t);
        y0s.push_back(c.y0);
        a0s.push_back(c.a0);
      }
    }
    auto sample_std = [](const std::vector<double>& v) {
      if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double s = 0.0;
      for (double x : v) s += (x - mean) * (x - mean);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    if (ts.size() >= 2) {
      res.sigma_t = sample_std(ts);
      res.sigma_y0 = sample_std(y0s);
      res.sigma_a0 = sample_std(a0s);
    }
  }

  return res;
}

}  // namespace qae
