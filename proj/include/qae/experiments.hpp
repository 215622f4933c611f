#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qae/autoencoder.hpp"
#include "qae/decay_fit.hpp"
#include "qae/hqca.hpp"
#include "qae/tomography.hpp"

namespace qae {

enum class ProtocolKind { Bare, Cnot, Autoencoder };

inline std::string protocol_name(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Bare: return "bare";
    case ProtocolKind::Cnot: return "cnot";
    case ProtocolKind::Autoencoder: return "autoencoder";
  }
  return "?";
}

enum class CnotCalMode { Nominal, Exact };

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::Bare;
  std::vector<double> tau_grid_us;
  double alpha_sq = 0.5;
  std::optional<EncoderParams> encoder;  // required for the autoencoder kind
  CnotCalMode cnot_cal = CnotCalMode::Nominal;
  double pulse_duration_ns = 800.0;

  void validate() const {
    if (tau_grid_us.empty()) throw std::invalid_argument("protocol: empty tau grid");
    for (std::size_t i = 0; i < tau_grid_us.size(); ++i) {
      if (tau_grid_us[i] < 0.0) throw std::invalid_argument("protocol: negative tau");
      if (i > 0 && tau_grid_us[i] <= tau_grid_us[i - 1])
        throw std::invalid_argument("protocol: tau grid must be strictly increasing");
    }
    if (kind == ProtocolKind::Autoencoder && !encoder)
      throw std::invalid_argument("protocol: autoencoder kind requires a trained encoder");
    if (alpha_sq < 0.0 || alpha_sq > 1.0)
      throw std::invalid_argument("protocol: alpha^2 outside [0,1]");
  }
};

struct DecayPoint {
  double tau_us = 0.0;
  double modulus = 0.0;
  double std_error = 0.0;
};

struct DecayCurve {
  ProtocolKind kind = ProtocolKind::Bare;
  std::vector<DecayPoint> points;
  std::vector<TomographyRecord> records;
};

/// Everything a protocol run needs: the device model, measurement statistics,
/// and the seeding scheme.
struct RunContext {
  DeviceContext device{};
  std::size_t n_bootstrap = 50;
  std::uint64_t seed = 0;
  std::uint64_t run_tag = 0;  // disambiguates streams across runs in one process
};

/// The disentangling pulse of the comparison experiment: a conditional MW1 pi
/// flip. Nominal mode computes the amplitude from kappa alone and stays blind
/// to the quadratic nonlinearity; exact mode inverts the full response.
inline Unitary cnot_pulse(CnotCalMode mode, const CalibrationModel& cal, double duration_ns) {
  const double t_us = duration_ns * 1e-3;
  const double target_rabi = 0.5 / t_us;  // pi rotation
  const double amp = mode == CnotCalMode::Nominal ? target_rabi / cal.mw1.kappa_mhz_per_v
                                                  : amplitude_for_rabi(target_rabi, cal.mw1);
  return pulse_unitary({Channel::MW1, amp, 0.0, duration_ns}, cal);
}

/// Runs one lifetime protocol over its tau grid. Ideal contexts record exact
/// moduli; otherwise every point is the mean of n_bootstrap shot-noisy
/// tomography passes with the sample standard error attached.
inline DecayCurve run_protocol(const ProtocolSpec& spec, const RunContext& ctx) {
  spec.validate();
  const PlCalibration pl = PlCalibration::from_shots(ctx.device.shots);
  const DensityMatrix rho0 = prepare_state(spec.alpha_sq);

  DecayCurve curve;
  curve.kind = spec.kind;
  for (std::size_t ti = 0; ti < spec.tau_grid_us.size(); ++ti) {
    const double tau = spec.tau_grid_us[ti];

    DensityMatrix rho = rho0;
    switch (spec.kind) {
      case ProtocolKind::Bare:
        rho = free_evolution(rho, tau, ctx.device.noise);
        break;
      case ProtocolKind::Cnot: {
        const Unitary u = cnot_pulse(spec.cnot_cal, ctx.device.cal, spec.pulse_duration_ns);
        rho = apply_unitary(u, rho);
        rho = refresh_electron(rho);  // discard whatever the pulse left on the electron
        rho = free_evolution(rho, tau, ctx.device.noise);
        rho = apply_unitary(u, rho);
        break;
      }
      case ProtocolKind::Autoencoder:
        rho = apply_autoencoder_cycle(rho, *spec.encoder, tau, ctx.device.noise, ctx.device.cal);
        break;
    }

    if (ctx.device.ideal) {
      TomographyRecord rec = tomograph(rho, pl);
      rec.tau_us = tau;
      curve.records.push_back(rec);
      curve.points.push_back({tau, rec.modulus, 0.0});
      continue;
    }

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t b = 0; b < ctx.n_bootstrap; ++b) {
      std::mt19937_64 rng = make_stream(
          ctx.seed, {stream::kProtocol, ctx.run_tag, static_cast<std::uint64_t>(spec.kind), ti, b});
      TomographyRecord rec = tomograph(rho, pl, ctx.device.shots.repeats, &rng);
      rec.tau_us = tau;
      rec.seed = combine_seed(ctx.seed, {stream::kProtocol, ctx.run_tag,
                                         static_cast<std::uint64_t>(spec.kind), ti, b});
      curve.records.push_back(rec);
      sum += rec.modulus;
      sum_sq += rec.modulus * rec.modulus;
    }
    const double nb = static_cast<double>(ctx.n_bootstrap);
    const double mean = sum / nb;
    double se = 0.0;
    if (ctx.n_bootstrap > 1) {
      const double var = std::max(0.0, (sum_sq - nb * mean * mean) / (nb - 1.0));
      se = std::sqrt(var / nb);
    }
    curve.points.push_back({tau, mean, se});
  }
  return curve;
}

inline FitResult fit_exponential(const DecayCurve& curve, const FitOptions& opt = {}) {
  std::vector<FitPoint> pts;
  pts.reserve(curve.points.size());
  for (const auto& p : curve.points) pts.push_back({p.tau_us, p.modulus, p.std_error});
  return fit_exponential(std::span<const FitPoint>(pts), opt);
}

struct SweepRow {
  double alpha_sq = 0.0;
  double bare_modulus = 0.0;
  double bare_std_error = 0.0;
  double encoded_modulus = 0.0;
  double encoded_std_error = 0.0;
};

/// Residual |00><11| coherence with and without encoding after a fixed
/// storage time, across the state family.
inline std::vector<SweepRow> alpha_sweep(const std::vector<double>& alpha_sqs, double tau_us,
                                         const EncoderParams& encoder, const RunContext& ctx) {
  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < alpha_sqs.size(); ++ai) {
    RunContext local = ctx;
    local.run_tag = combine_seed(ctx.run_tag, {stream::kSweep, ai});

    ProtocolSpec bare{ProtocolKind::Bare, {tau_us}, alpha_sqs[ai], std::nullopt};
    ProtocolSpec enc{ProtocolKind::Autoencoder, {tau_us}, alpha_sqs[ai], encoder};
    const DecayCurve cb = run_protocol(bare, local);
    const DecayCurve ce = run_protocol(enc, local);
    rows.push_back({alpha_sqs[ai], cb.points[0].modulus, cb.points[0].std_error,
                    ce.points[0].modulus, ce.points[0].std_error});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Multi-qubit reproduction cases.
// ---------------------------------------------------------------------------

enum class MultiqubitCase { Ghz3, W3, Cat4 };

inline std::string multiqubit_name(MultiqubitCase c) {
  switch (c) {
    case MultiqubitCase::Ghz3: return "ghz3";
    case MultiqubitCase::W3: return "w3";
    case MultiqubitCase::Cat4: return "cat4";
  }
  return "?";
}

inline Vec ghz_state(std::size_t n_qubits) {
  Vec v(std::size_t{1} << n_qubits, 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  v.front() = r;
  v.back() = r;
  return v;
}

inline Vec w3_state() {
  const double r = 1.0 / std::sqrt(3.0);
  return Vec{0.0, r, r, 0.0, r, 0.0, 0.0, 0.0};
}

/// 16 basis coefficients sqrt(i/136), i = 1..16.
inline Vec cat4_state() {
  Vec v(16);
  for (std::size_t i = 0; i < 16; ++i) v[i] = std::sqrt(static_cast<double>(i + 1) / 136.0);
  return v;
}

struct MultiqubitSeedResult {
  std::uint64_t seed = 0;
  double best_fidelity = 0.0;
  std::size_t best_iteration = 0;
  bool converged = false;
};

struct MultiqubitResult {
  MultiqubitCase which = MultiqubitCase::Ghz3;
  std::size_t n_qubits = 3;
  std::size_t n_latent = 1;
  std::vector<MultiqubitSeedResult> per_seed;
  std::size_t best_index = 0;
  TrainingTrace best_trace;

  double best_fidelity() const { return per_seed[best_index].best_fidelity; }
};

/// Trains the circuit on the case's target state for several seeds and keeps
/// the best run. GHZ and W compress 3 -> 1 qubits, the cat state 4 -> 2.
inline MultiqubitResult reproduce_multiqubit(MultiqubitCase which, const FdConfig& base,
                                             std::size_t n_seeds = 5, std::uint64_t master_seed = 0) {
  Vec target;
  std::size_t n_qubits = 3, n_latent = 1;
  switch (which) {
    case MultiqubitCase::Ghz3: target = ghz_state(3); break;
    case MultiqubitCase::W3: target = w3_state(); break;
    case MultiqubitCase::Cat4:
      target = cat4_state();
      n_qubits = 4;
      n_latent = 2;
      break;
  }

  MultiqubitResult result;
  result.which = which;
  result.n_qubits = n_qubits;
  result.n_latent = n_latent;

  double best = -1.0;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    FdConfig cfg = base;
    cfg.init_seed = combine_seed(master_seed, {stream::kPqc, static_cast<std::uint64_t>(which), s});
    const TrainingTrace trace = fd_train_pqc(cfg, {target}, n_qubits, n_latent);

    MultiqubitSeedResult sr;
    sr.seed = cfg.init_seed;
    sr.converged = trace.converged();
    sr.best_fidelity = trace.final_cost;
    sr.best_iteration = trace.rows.empty() ? 0 : trace.rows.back().iteration;
    for (const auto& row : trace.rows) {
      if (row.cost > sr.best_fidelity) {
        sr.best_fidelity = row.cost;
        sr.best_iteration = row.iteration;
      }
    }
    result.per_seed.push_back(sr);
    if (sr.best_fidelity > best) {
      best = sr.best_fidelity;
      result.best_index = s;
      result.best_trace = trace;
    }
  }
  return result;
}

}  // namespace qae
