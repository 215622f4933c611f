#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qae/decay_fit.hpp"

using namespace qae;

TEST_CASE("noiseless exponential recovery") {
  SUBCASE("bare-lifetime shape") {
    std::vector<FitPoint> pts;
    for (int i = 0; i < 8; ++i) {
      const double x = 2.0 * i;
      pts.push_back({x, 0.5 * std::exp(-x / 2.22), 0.0});
    }
    const FitResult f = fit_exponential(pts);
    CHECK(f.converged);
    CHECK(std::abs(f.t - 2.22) / 2.22 < 1e-6);
    CHECK(std::abs(f.a0 - 0.5) < 1e-6);
    CHECK(std::abs(f.y0) < 1e-6);
  }
  SUBCASE("offset shape") {
    std::vector<FitPoint> pts;
    for (int i = 0; i < 13; ++i) {
      const double x = 500.0 * i;
      pts.push_back({x, 0.1 + 0.4 * std::exp(-x / 3030.0), 0.0});
    }
    const FitResult f = fit_exponential(pts);
    CHECK(f.converged);
    CHECK(std::abs(f.t - 3030.0) / 3030.0 < 1e-6);
    CHECK(std::abs(f.a0 - 0.4) < 1e-6);
    CHECK(std::abs(f.y0 - 0.1) < 1e-6);
  }
}

TEST_CASE("analytic Jacobian matches central finite differences") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    // sample inside the fitting regime (a few time constants) where the
    // finite differences themselves stay well conditioned
    const double y0 = u(rng) - 1.5, a0 = u(rng), t = u(rng);
    const double x = u(rng) * t;
    const std::array<double, 3> j = exp_decay_jacobian_row(y0, a0, t, x);
    auto model = [&](double py0, double pa0, double pt) {
      return py0 + pa0 * std::exp(-x / pt);
    };
    const double h = 1e-6;
    const std::array<double, 3> fd{
        (model(y0 + h, a0, t) - model(y0 - h, a0, t)) / (2 * h),
        (model(y0, a0 + h, t) - model(y0, a0 - h, t)) / (2 * h),
        (model(y0, a0, t + h * t) - model(y0, a0, t - h * t)) / (2 * h * t)};
    for (std::size_t p = 0; p < 3; ++p) {
      const double scale = std::max(std::abs(j[p]), 1e-3);
      CHECK(std::abs(j[p] - fd[p]) / scale < 1e-6);
    }
  }
}

TEST_CASE("weights suppress a corrupted point") {
  std::vector<FitPoint> pts;
  for (int i = 0; i < 10; ++i) {
    const double x = 1.0 * i;
    pts.push_back({x, 0.3 + 0.6 * std::exp(-x / 2.5), 1e-4});
  }
  pts[4].y += 50.0;
  pts[4].sigma = 1e6;  // flagged as useless
  const FitResult f = fit_exponential(pts);
  CHECK(f.converged);
  CHECK(std::abs(f.t - 2.5) / 2.5 < 1e-4);
}

TEST_CASE("noisy synthetic recovery stays in band") {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> gauss(0.0, 3.4e-4);
  std::vector<FitPoint> pts;
  for (int i = 0; i < 7; ++i) {
    const double x = 2.0 * i;
    pts.push_back({x, 0.5 * std::exp(-x / 2.218) + gauss(rng), 3.4e-4});
  }
  const FitResult f = fit_exponential(pts);
  CHECK(f.converged);
  CHECK(f.t > 2.0);
  CHECK(f.t < 2.5);
  CHECK(f.sigma_t > 0.0);
  CHECK(f.sigma_t < 0.2);
}

TEST_CASE("bootstrap uncertainties roughly agree with the covariance ones") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> gauss(0.0, 1e-3);
  std::vector<FitPoint> pts;
  for (int i = 0; i < 13; ++i) {
    const double x = 500.0 * i;
    pts.push_back({x, 0.45 * std::exp(-x / 3100.0) + gauss(rng), 1e-3});
  }
  const FitResult cov = fit_exponential(pts);
  FitOptions opt;
  opt.bootstrap_resamples = 200;
  opt.bootstrap_seed = 7;
  const FitResult boot = fit_exponential(pts, opt);
  CHECK(boot.sigma_t > 0.3 * cov.sigma_t);
  CHECK(boot.sigma_t < 3.0 * cov.sigma_t);
}

TEST_CASE("failure modes are reported, not thrown") {
  SUBCASE("too few points") {
    std::vector<FitPoint> pts{{0, 1, 0}, {1, 0.5, 0}, {2, 0.25, 0}};
    CHECK_THROWS_AS(fit_exponential(pts), std::invalid_argument);
  }
  SUBCASE("iteration starvation leaves converged false with best-effort params") {
    std::mt19937_64 rng(54);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<FitPoint> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({static_cast<double>(i), u(rng), 0.0});
    FitOptions opt;
    opt.max_iterations = 1;
    const FitResult f = fit_exponential(pts, opt);
    CHECK(!f.converged);
    CHECK(std::isfinite(f.t));
    CHECK(f.t > 0.0);
  }
}
