#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qae/hqca.hpp"

using namespace qae;

namespace {

const double kPiAmp = 0.625 / 3.81;
const double kAngleScale = 2.0 * kPi * 0.8 * 3.81;  // rotation angle per volt at 800 ns

double ideal_cost(double b1, double b2) {
  DeviceContext ctx;
  ctx.ideal = true;
  EncoderParams p;
  p.b1_volts = b1;
  p.b2_volts = b2;
  return encoder_cost(p, ctx);
}

// Analytic electron-|0> cost for the default calibration: the MW1 arc acts on
// |11>, the MW2 arc on |00>.
double closed_form_cost(double b1, double b2) {
  const double th1 = kAngleScale * b1;
  const double th2 = kAngleScale * b2;
  return 0.5 * (std::cos(th2 / 2) * std::cos(th2 / 2) + std::sin(th1 / 2) * std::sin(th1 / 2));
}

}  // namespace

TEST_CASE("fd_gradient") {
  SUBCASE("constant oracle gives zero gradient") {
    const CostFn constant = [](const std::vector<double>&) { return 0.7; };
    const FdGradient g = fd_gradient({0.1, 0.2}, 0, 0.05, constant);
    CHECK(g.gradient == 0.0);
    CHECK(g.delta_p == 0.0);
  }
  SUBCASE("sign matches the analytic derivative of the readout arc") {
    const CostFn oracle = [](const std::vector<double>& v) { return ideal_cost(v[0], v[1]); };
    // climbing side of the arc: positive derivative
    CHECK(fd_gradient({0.05, 0.0}, 0, 0.001, oracle).gradient > 0.0);
    // descending side just past the pi flip
    CHECK(fd_gradient({kPiAmp * 1.3, 0.0}, 0, 0.001, oracle).gradient < 0.0);
    // B2 pulls the |00> input out of electron zero
    CHECK(fd_gradient({0.05, 0.05}, 1, 0.001, oracle).gradient < 0.0);
  }
  SUBCASE("forward difference error halves with the step") {
    const CostFn oracle = [](const std::vector<double>& v) { return ideal_cost(v[0], v[1]); };
    const double b1 = 0.06;
    const double analytic =
        0.5 * std::sin(kAngleScale * b1) * 0.5 * kAngleScale;  // d cost / d b1
    double prev_err = 0.0;
    for (int k = 0; k < 6; ++k) {
      const double h = 0.02 / (1 << k);
      const double err = std::abs(fd_gradient({b1, 0.0}, 0, h, oracle).gradient - analytic);
      if (k > 0) {
        const double ratio = prev_err / err;
        CHECK(ratio > 1.6);
        CHECK(ratio < 2.4);
      }
      prev_err = err;
    }
  }
  SUBCASE("shot-noisy estimate stays within the propagated binomial bound") {
    DeviceContext ideal;
    ideal.ideal = true;
    DeviceContext noisy;
    noisy.ideal = false;
    noisy.noise.readout_depol = 0.0;  // isolate sampling noise

    const double step = 0.05;
    const std::vector<double> at{0.08, 0.02};
    const CostFn exact = [&](const std::vector<double>& v) {
      EncoderParams p;
      p.b1_volts = v[0];
      p.b2_volts = v[1];
      return encoder_cost(p, ideal);
    };
    const double g_true = fd_gradient(at, 0, step, exact).gradient;

    const double bound = 3.0 * (std::sqrt(2.0) * 0.0006) / step;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::uint64_t calls = 0;
      const CostFn sampled = [&](const std::vector<double>& v) {
        EncoderParams p;
        p.b1_volts = v[0];
        p.b2_volts = v[1];
        std::mt19937_64 rng = make_stream(seed, {77, calls++});
        return encoder_cost(p, noisy, &rng);
      };
      CHECK(std::abs(fd_gradient(at, 0, step, sampled).gradient - g_true) < bound);
    }
  }
  SUBCASE("invalid probe step rejected") {
    const CostFn constant = [](const std::vector<double>&) { return 0.0; };
    CHECK_THROWS_AS(fd_gradient({0.1}, 0, 0.0, constant), std::invalid_argument);
  }
}

TEST_CASE("hqca_train from the ideal optimum terminates immediately") {
  DeviceContext ctx;
  ctx.ideal = true;
  HqcaConfig cfg;
  cfg.initial.b1_volts = kPiAmp;
  cfg.initial.b2_volts = 0.0;
  cfg.target_cost = 0.99;

  const TrainingTrace trace = hqca_train(cfg, ctx);
  CHECK(trace.converged());
  CHECK(trace.rows.size() == 1);
  CHECK(trace.final_cost == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(trace.final_params[0] == kPiAmp);
  CHECK(trace.final_params[1] == 0.0);
}

TEST_CASE("hqca_train ideal convergence cross-checked against a grid search") {
  DeviceContext ctx;
  ctx.ideal = true;
  HqcaConfig cfg;
  cfg.target_cost = 0.999;
  cfg.max_iterations = 200;

  const TrainingTrace trace = hqca_train(cfg, ctx);
  CHECK(trace.converged());
  const double b1 = trace.final_params[0];
  const double b2 = trace.final_params[1];
  CHECK(std::abs(b2) <= 0.005);
  CHECK(std::abs(kAngleScale * b1 - kPi) <= 0.05 * kPi);
  CHECK(trace.final_cost >= 0.99);

  // coarse grid oracle (the acceptance suite runs the full 0.001 V one)
  double best = -1.0, best_b1 = 0.0, best_b2 = 0.0;
  for (double g1 = 0.0; g1 <= 0.3 + 1e-12; g1 += 0.002) {
    for (double g2 = 0.0; g2 <= 0.3 + 1e-12; g2 += 0.002) {
      const double c = closed_form_cost(g1, g2);
      if (c > best) {
        best = c;
        best_b1 = g1;
        best_b2 = g2;
      }
    }
  }
  CHECK(ideal_cost(best_b1, best_b2) == doctest::Approx(best).epsilon(1e-10));
  CHECK(std::abs(b1 - best_b1) < 0.01);
  CHECK(std::abs(b2 - best_b2) < 0.005);
  CHECK(trace.final_cost >= best - 0.01);
}

TEST_CASE("hqca_train under shot noise and readout decoherence") {
  DeviceContext ctx;  // defaults: 3e6 shots, depol 0.12
  HqcaConfig cfg;
  cfg.target_cost = 0.93;
  cfg.max_iterations = 30;
  cfg.seed = 5;

  const TrainingTrace trace = hqca_train(cfg, ctx);
  CHECK(trace.converged());
  CHECK(trace.final_cost >= 0.93);
  CHECK(trace.rows.size() <= 30);

  // same seed replays the exact trace
  const TrainingTrace replay = hqca_train(cfg, ctx);
  REQUIRE(replay.rows.size() == trace.rows.size());
  for (std::size_t q = 0; q < trace.rows.size(); ++q) {
    CHECK(replay.rows[q].cost == trace.rows[q].cost);
    CHECK(replay.rows[q].params == trace.rows[q].params);
    CHECK(replay.rows[q].gradients == trace.rows[q].gradients);
  }
}

TEST_CASE("hqca_train trace invariants") {
  DeviceContext ctx;
  ctx.ideal = true;
  HqcaConfig cfg;
  cfg.target_cost = 0.999;
  cfg.max_iterations = 120;
  const TrainingTrace trace = hqca_train(cfg, ctx);

  SUBCASE("amplitudes never go negative") {
    for (const auto& r : trace.rows) {
      CHECK(r.params[0] >= 0.0);
      CHECK(r.params[1] >= 0.0);
    }
    CHECK(trace.final_params[0] >= 0.0);
    CHECK(trace.final_params[1] >= 0.0);
  }
  SUBCASE("probe steps never grow") {
    for (std::size_t q = 1; q < trace.rows.size(); ++q)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(trace.rows[q].probe_steps[j] <= trace.rows[q - 1].probe_steps[j]);
  }
  SUBCASE("ideal cost is nondecreasing when no halving happened") {
    for (std::size_t q = 1; q < trace.rows.size(); ++q) {
      const bool halved = trace.rows[q].probe_steps[0] < trace.rows[q - 1].probe_steps[0] ||
                          trace.rows[q].probe_steps[1] < trace.rows[q - 1].probe_steps[1];
      if (!halved) CHECK(trace.rows[q].cost >= trace.rows[q - 1].cost - 1e-12);
    }
  }
  SUBCASE("device query bookkeeping is exact") {
    // 2 + 2 * parameters preparations per full iteration, baseline only when
    // the certified stop fires.
    std::size_t prev = 0;
    for (std::size_t q = 0; q < trace.rows.size(); ++q) {
      const std::size_t delta = trace.rows[q].device_queries - prev;
      if (q + 1 == trace.rows.size() && trace.converged() && trace.rows[q].gradients[0] == 0.0 &&
          trace.rows[q].gradients[1] == 0.0 && trace.rows[q].cost >= 1.0 - 1e-12) {
        CHECK(delta == 2);
      } else {
        CHECK(delta == 6);
      }
      prev = trace.rows[q].device_queries;
    }
  }
}

TEST_CASE("literal reset mode replays the supplement wording without converging") {
  DeviceContext ctx;
  ctx.ideal = true;

  HqcaConfig literal;
  literal.literal_reset = true;
  literal.target_cost = 0.999;
  literal.max_iterations = 40;
  const TrainingTrace lt = hqca_train(literal, ctx);
  CHECK(!lt.converged());
  // gradients are re-measured at the initial point every iteration, so the
  // recorded cost never moves
  CHECK(lt.rows.front().cost == doctest::Approx(lt.rows.back().cost).epsilon(1e-12));

  HqcaConfig consistent;
  consistent.target_cost = 0.999;
  consistent.max_iterations = 120;
  const TrainingTrace ct = hqca_train(consistent, ctx);
  CHECK(ct.converged());
  CHECK(std::abs(kAngleScale * ct.final_params[0] - kPi) < 0.05 * kPi);
  CHECK(std::abs(kAngleScale * lt.final_params[0] - kPi) > 0.05 * kPi);
}

TEST_CASE("fd_train_pqc") {
  SUBCASE("zero-init identity circuit on |00> is already perfect") {
    FdConfig cfg;
    cfg.initial_angles = std::vector<double>(PqcParams::angle_count(2), 0.0);
    Vec zero(4, 0.0);
    zero[0] = 1.0;
    const TrainingTrace trace = fd_train_pqc(cfg, {zero}, 2, 1);
    CHECK(trace.converged());
    CHECK(trace.rows.front().cost == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace.rows.front().iteration == 1);
    for (double a : trace.final_params) CHECK(a == 0.0);
  }
  SUBCASE("compresses a two-qubit Bell state into one qubit") {
    FdConfig cfg;
    cfg.max_iterations = 800;
    cfg.target_fidelity = 0.995;
    cfg.init_seed = 3;
    const double r = 1.0 / std::sqrt(2.0);
    const TrainingTrace trace = fd_train_pqc(cfg, {Vec{r, 0, 0, r}}, 2, 1);
    double best = 0.0;
    for (const auto& row : trace.rows) best = std::max(best, row.cost);
    best = std::max(best, trace.final_cost);
    CHECK(best >= 0.95);
  }
  SUBCASE("needs at least one input") {
    FdConfig cfg;
    CHECK_THROWS_AS(fd_train_pqc(cfg, {}, 2, 1), std::invalid_argument);
  }
}
