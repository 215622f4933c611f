#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qae/autoencoder.hpp"
#include "qae/rng.hpp"

namespace qae {

struct HqcaConfig {
  EncoderParams initial{};  // B1 = 0.02 V, B2 = 0.1 V, phi1 = phi2 = pi/4
  double probe_step_v = 0.05;
  double learning_rate = 0.006;       // volts per unit probability gradient
  double halving_threshold = 0.02;    // |dP| below this halves the probe step
  // Floor for the halved probe steps. Without it the step shrinks
  // geometrically once the cost plateaus and the measured gradient variance
  // grows as 1/step until the iterate is kicked off the optimum.
  double min_probe_step_v = 1e-3;
  std::size_t max_iterations = 50;
  double target_cost = 0.93;
  std::size_t stability_window = 3;
  double stability_band = 0.01;
  bool literal_reset = false;  // probe from the initial values instead of the iterate
  std::uint64_t seed = 0;

  void validate() const {
    if (!(probe_step_v > 0.0)) throw std::invalid_argument("hqca: probe step must be > 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("hqca: learning rate must be > 0");
    if (!(min_probe_step_v > 0.0) || min_probe_step_v > probe_step_v)
      throw std::invalid_argument("hqca: min probe step must be in (0, probe_step]");
    if (max_iterations == 0) throw std::invalid_argument("hqca: max_iterations must be >= 1");
  }
};

enum class TrainStatus { Converged, MaxIterations };

struct TraceRow {
  std::size_t iteration = 0;  // 1-based
  std::vector<double> params;
  double cost = 0.0;
  std::vector<double> gradients;
  std::vector<double> probe_steps;
  std::size_t device_queries = 0;  // cumulative state preparations
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  TrainStatus status = TrainStatus::MaxIterations;
  std::vector<double> final_params;
  double final_cost = 0.0;

  bool converged() const { return status == TrainStatus::Converged; }
};

struct FdGradient {
  double gradient = 0.0;
  double delta_p = 0.0;
};

using CostFn = std::function<double(const std::vector<double>&)>;

/// Forward-difference gradient of the cost in one parameter. The baseline
/// evaluation can be shared by the caller.
inline FdGradient fd_gradient(const std::vector<double>& params, std::size_t index,
                              double probe_step, const CostFn& cost,
                              std::optional<double> baseline = std::nullopt) {
  if (!(probe_step > 0.0)) throw std::invalid_argument("fd_gradient: probe step must be > 0");
  if (index >= params.size()) throw std::invalid_argument("fd_gradient: parameter index");
  const double base = baseline ? *baseline : cost(params);
  std::vector<double> probe = params;
  probe[index] += probe_step;
  const double delta_p = cost(probe) - base;
  return {delta_p / probe_step, delta_p};
}

/// Coordinate-wise training loop for the two-pulse encoder: one shared
/// baseline per iteration, a forward probe per amplitude, fixed learning
/// rate, probe-step halving once the cost response drops below threshold,
/// and clamping of negative amplitudes. Phases are not optimized.
inline TrainingTrace hqca_train(const HqcaConfig& cfg, const DeviceContext& ctx) {
  cfg.validate();
  cfg.initial.validate();

  double b1 = cfg.initial.b1_volts;
  double b2 = cfg.initial.b2_volts;
  std::vector<double> probe{cfg.probe_step_v, cfg.probe_step_v};
  std::size_t queries = 0;

  auto cost_at = [&](double a1, double a2, std::uint64_t iter, std::uint64_t eval) {
    EncoderParams p = cfg.initial;
    p.b1_volts = a1;
    p.b2_volts = a2;
    queries += 2;  // |00> and |11> preparations
    if (ctx.ideal) return encoder_cost(p, ctx);
    std::mt19937_64 rng = make_stream(cfg.seed, {stream::kHqca, iter, eval});
    return encoder_cost(p, ctx, &rng);
  };

  TrainingTrace trace;
  for (std::size_t q = 1; q <= cfg.max_iterations; ++q) {
    const double eb1 = cfg.literal_reset ? cfg.initial.b1_volts : b1;
    const double eb2 = cfg.literal_reset ? cfg.initial.b2_volts : b2;

    const double baseline = cost_at(eb1, eb2, q, 0);

    TraceRow row;
    row.iteration = q;
    row.params = {b1, b2, cfg.initial.phi1_rad, cfg.initial.phi2_rad};
    row.cost = baseline;
    row.probe_steps = probe;

    // The cost is bounded by one, so measuring one certifies the optimum;
    // probing would only walk the iterate off it.
    if (baseline >= 1.0 - 1e-12 && baseline >= cfg.target_cost) {
      row.gradients = {0.0, 0.0};
      row.device_queries = queries;
      trace.rows.push_back(row);
      trace.status = TrainStatus::Converged;
      break;
    }

    std::vector<double> grads(2);
    std::array<bool, 2> halve{false, false};
    for (std::size_t j = 0; j < 2; ++j) {
      const double pb1 = eb1 + (j == 0 ? probe[j] : 0.0);
      const double pb2 = eb2 + (j == 1 ? probe[j] : 0.0);
      const double probed = cost_at(pb1, pb2, q, j + 1);
      const double delta_p = probed - baseline;
      grads[j] = delta_p / probe[j];
      if (std::abs(delta_p) < cfg.halving_threshold) halve[j] = true;
    }

    row.gradients = grads;
    row.device_queries = queries;
    trace.rows.push_back(row);

    b1 = std::max(0.0, b1 + cfg.learning_rate * grads[0]);
    b2 = std::max(0.0, b2 + cfg.learning_rate * grads[1]);
    for (std::size_t j = 0; j < 2; ++j)
      if (halve[j]) probe[j] = std::max(0.5 * probe[j], cfg.min_probe_step_v);

    if (trace.rows.size() >= cfg.stability_window) {
      bool stable = true;
      const std::size_t first = trace.rows.size() - cfg.stability_window;
      for (std::size_t i = first; i < trace.rows.size() && stable; ++i) {
        if (trace.rows[i].cost < cfg.target_cost) stable = false;
        for (std::size_t k = i + 1; k < trace.rows.size() && stable; ++k)
          if (std::abs(trace.rows[i].cost - trace.rows[k].cost) >= cfg.stability_band)
            stable = false;
      }
      if (stable) {
        trace.status = TrainStatus::Converged;
        break;
      }
    }
  }

  trace.final_params = {b1, b2, cfg.initial.phi1_rad, cfg.initial.phi2_rad};
  trace.final_cost = trace.rows.empty() ? 0.0 : trace.rows.back().cost;
  return trace;
}

inline EncoderParams encoder_from_trace(const TrainingTrace& trace, const EncoderParams& base) {
  if (trace.final_params.size() < 2)
    throw std::invalid_argument("encoder_from_trace: trace has no parameters");
  EncoderParams p = base;
  p.b1_volts = trace.final_params[0];
  p.b2_volts = trace.final_params[1];
  return p;
}

// ---------------------------------------------------------------------------
// Finite-difference trainer for the multi-qubit circuit.
// ---------------------------------------------------------------------------

struct FdConfig {
  double probe_step_rad = 0.01;
  double learning_rate = 0.5;
  std::size_t max_iterations = 2000;
  double target_fidelity = 0.999;
  std::uint64_t init_seed = 0;
  double init_spread_rad = kPi / 2.0;  // uniform initial angles in +-spread
  std::optional<std::vector<double>> initial_angles;

  void validate() const {
    if (!(probe_step_rad > 0.0)) throw std::invalid_argument("fd: probe step must be > 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("fd: learning rate must be > 0");
  }
};

/// Gradient ascent on the mean trash-register overlap across the inputs,
/// central finite differences per angle. Trace rows carry the fidelity per
/// iteration; angles are reported in final_params.
inline TrainingTrace fd_train_pqc(const FdConfig& cfg, const std::vector<Vec>& inputs,
                                  std::size_t n_qubits, std::size_t n_latent) {
  cfg.validate();
  if (inputs.empty()) throw std::invalid_argument("fd_train_pqc: need at least one input state");

  PqcParams p;
  p.n_qubits = n_qubits;
  p.n_latent = n_latent;
  const std::size_t n_angles = PqcParams::angle_count(n_qubits);
  if (cfg.initial_angles) {
    p.angles = *cfg.initial_angles;
  } else {
    std::mt19937_64 rng = make_stream(cfg.init_seed, {stream::kPqc, n_qubits, n_latent});
    std::uniform_real_distribution<double> dist(-cfg.init_spread_rad, cfg.init_spread_rad);
    p.angles.resize(n_angles);
    for (auto& a : p.angles) a = dist(rng);
  }
  p.validate();

  std::size_t queries = 0;
  auto mean_cost = [&](const PqcParams& params) {
    double sum = 0.0;
    for (const Vec& in : inputs) sum += pqc_trash_cost(params, in);
    queries += inputs.size();
    return sum / static_cast<double>(inputs.size());
  };

  TrainingTrace trace;
  double fidelity = mean_cost(p);
  for (std::size_t q = 1; q <= cfg.max_iterations; ++q) {
    TraceRow row;
    row.iteration = q;
    row.cost = fidelity;
    row.device_queries = queries;
    trace.rows.push_back(row);
    if (fidelity >= cfg.target_fidelity) {
      trace.status = TrainStatus::Converged;
      break;
    }

    std::vector<double> grad(n_angles);
    for (std::size_t i = 0; i < n_angles; ++i) {
      PqcParams plus = p, minus = p;
      plus.angles[i] += cfg.probe_step_rad;
      minus.angles[i] -= cfg.probe_step_rad;
      grad[i] = (mean_cost(plus) - mean_cost(minus)) / (2.0 * cfg.probe_step_rad);
    }
    for (std::size_t i = 0; i < n_angles; ++i) p.angles[i] += cfg.learning_rate * grad[i];
    fidelity = mean_cost(p);
  }

  trace.final_params = p.angles;
  trace.final_cost = fidelity;
  return trace;
}

}  // namespace qae
