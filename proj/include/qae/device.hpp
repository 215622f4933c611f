#pragma once

#include <array>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "qae/linalg.hpp"
#include "qae/matrix.hpp"

namespace qae {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Spin-system reference values. Stored as configuration only; the dynamics
/// run in the effective two-qubit rotating frame.
struct PhysicalConstants {
  double d_mhz = 2870.0;            // zero-field splitting
  double a_parallel_mhz = -2.153228;
  double q_mhz = -4.945;
  double b_z_mt = 52.0;
  double f_mw1_mhz = 1412.0;
  double f_mw2_mhz = 1414.153228;
  double f_rf1_mhz = 5.101870;
  double f_rf2_mhz = 2.940878;
};

/// Decoherence times in microseconds; infinity disables a channel.
/// readout_depol is a two-qubit depolarizing probability applied to the state
/// right before a (non-ideal) training readout, capping the measurable cost
/// the same way an imperfect readout stage does.
struct NoiseParams {
  double t2_electron_us = 2.22;
  double t2_nuclear_us = 3100.0;
  double t1_electron_us = 6000.0;
  double t1_nuclear_us = kInf;
  double readout_depol = 0.12;

  void validate() const {
    for (double t : {t2_electron_us, t2_nuclear_us, t1_electron_us, t1_nuclear_us})
      if (!(t > 0.0)) throw std::invalid_argument("noise: times must be positive or infinite");
    if (readout_depol < 0.0 || readout_depol > 1.0)
      throw std::invalid_argument("noise: readout_depol outside [0,1]");
  }

  static NoiseParams none() { return {kInf, kInf, kInf, kInf, 0.0}; }
};

enum class Channel { MW1, MW2, RF1, RF2 };

inline std::string channel_name(Channel c) {
  switch (c) {
    case Channel::MW1: return "MW1";
    case Channel::MW2: return "MW2";
    case Channel::RF1: return "RF1";
    case Channel::RF2: return "RF2";
  }
  return "?";
}

struct ChannelCal {
  double kappa_mhz_per_v = 3.81;  // linear Rabi-per-volt coefficient
  double eta_per_v = 0.0;         // quadratic nonlinearity

  void validate() const {
    if (!(kappa_mhz_per_v > 0.0)) throw std::invalid_argument("calibration: kappa must be > 0");
    if (eta_per_v < 0.0) throw std::invalid_argument("calibration: eta must be >= 0");
  }
};

struct CalibrationModel {
  ChannelCal mw1{3.81, 0.0};
  ChannelCal mw2{3.81, 0.0};
  ChannelCal rf1{0.02, 0.0};
  ChannelCal rf2{0.02, 0.0};

  const ChannelCal& channel(Channel c) const {
    switch (c) {
      case Channel::MW1: return mw1;
      case Channel::MW2: return mw2;
      case Channel::RF1: return rf1;
      case Channel::RF2: return rf2;
    }
    throw std::invalid_argument("calibration: invalid channel");
  }

  void validate() const {
    mw1.validate();
    mw2.validate();
    rf1.validate();
    rf2.validate();
  }
};

struct PulseSpec {
  Channel channel = Channel::MW1;
  double amplitude_volts = 0.0;
  double phase_rad = 0.0;
  double duration_ns = 800.0;

  void validate() const {
    if (!(duration_ns > 0.0)) throw std::invalid_argument("pulse: duration must be > 0");
    if (amplitude_volts < 0.0) throw std::invalid_argument("pulse: amplitude must be >= 0");
  }
};

/// Per-basis-state mean photon counts; PL01 != PL10 keeps the off-diagonal
/// reconstruction denominators alive.
struct ShotConfig {
  long long repeats = 3'000'000;
  std::uint64_t rng_seed = 0;
  double pl00 = 1.00;
  double pl01 = 0.85;
  double pl10 = 0.70;
  double pl11 = 0.60;

  void validate() const {
    if (repeats < 1) throw std::invalid_argument("shots: repeats must be >= 1");
    const std::array<double, 4> pl{pl00, pl01, pl10, pl11};
    for (double v : pl)
      if (!(v > 0.0)) throw std::invalid_argument("shots: brightness must be positive");
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j)
        if (pl[i] == pl[j]) throw std::invalid_argument("shots: brightness values must be distinct");
  }
};

/// Rabi frequency (MHz) produced by driving a channel at `v` volts.
inline double device_response(double v, Channel c, const CalibrationModel& cal) {
  if (v < 0.0) throw std::invalid_argument("device_response: negative voltage");
  const ChannelCal& cc = cal.channel(c);
  return cc.kappa_mhz_per_v * v * (1.0 + cc.eta_per_v * v);
}

/// Drive amplitude that realizes a target Rabi frequency on a channel,
/// inverting the quadratic response.
inline double amplitude_for_rabi(double rabi_mhz, const ChannelCal& cc) {
  if (rabi_mhz < 0.0) throw std::invalid_argument("amplitude_for_rabi: negative target");
  if (cc.eta_per_v == 0.0) return rabi_mhz / cc.kappa_mhz_per_v;
  const double k = cc.kappa_mhz_per_v, e = cc.eta_per_v;
  return (-k + std::sqrt(k * k + 4.0 * k * e * rabi_mhz)) / (2.0 * k * e);
}

/// Conditional pulse unitary in the rotating frame. MW pulses rotate the
/// electron inside one nuclear subspace, RF pulses rotate the nucleus inside
/// one electron subspace; rotation angle is 2*pi*t*B.
inline Unitary pulse_unitary(const PulseSpec& p, const CalibrationModel& cal) {
  p.validate();
  const double rabi_mhz = device_response(p.amplitude_volts, p.channel, cal);
  const double angle = 2.0 * kPi * (p.duration_ns * 1e-3) * rabi_mhz;

  Mat axis_half = 0.5 * (std::cos(p.phase_rad) * sigma_x() + std::sin(p.phase_rad) * sigma_y());
  Mat generator(4, 4);
  switch (p.channel) {
    case Channel::MW1: generator = kron(axis_half, proj1()); break;
    case Channel::MW2: generator = kron(axis_half, proj0()); break;
    case Channel::RF1: generator = kron(proj1(), axis_half); break;
    case Channel::RF2: generator = kron(proj0(), axis_half); break;
  }
  return expm_hermitian(generator, angle);
}

namespace detail {

inline void apply_two_kraus(Mat& rho, const Mat& k0, const Mat& k1) {
  rho = k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint();
}

/// Phase- and amplitude-damping Kraus channels for both qubits, applied to a
/// raw matrix so complete positivity can be probed on non-state inputs too.
inline Mat decohere_raw(Mat rho, double tau_us, const NoiseParams& noise) {
  if (rho.rows() != 4 || rho.cols() != 4)
    throw std::invalid_argument("free_evolution: expected a two-qubit state");
  if (tau_us < 0.0) throw std::invalid_argument("free_evolution: negative time");
  if (tau_us == 0.0) return rho;

  const Mat id2 = Mat::identity(2);
  struct QubitNoise {
    double t2, t1;
    bool electron;
  };
  for (const auto& qn : {QubitNoise{noise.t2_electron_us, noise.t1_electron_us, true},
                         QubitNoise{noise.t2_nuclear_us, noise.t1_nuclear_us, false}}) {
    auto embed = [&](const Mat& k) { return qn.electron ? kron(k, id2) : kron(id2, k); };

    if (std::isfinite(qn.t2)) {
      // coherence factor e^(-tau/T2)  ->  lambda = 1 - e^(-2 tau/T2)
      const double lam = 1.0 - std::exp(-2.0 * tau_us / qn.t2);
      const Mat k0(2, 2, {1, 0, 0, std::sqrt(1.0 - lam)});
      const Mat k1(2, 2, {0, 0, 0, std::sqrt(lam)});
      apply_two_kraus(rho, embed(k0), embed(k1));
    }
    if (std::isfinite(qn.t1)) {
      const double p = 1.0 - std::exp(-tau_us / qn.t1);
      const Mat k0(2, 2, {1, 0, 0, std::sqrt(1.0 - p)});
      const Mat k1(2, 2, {0, std::sqrt(p), 0, 0});
      apply_two_kraus(rho, embed(k0), embed(k1));
    }
  }
  return rho;
}

}  // namespace detail

/// Free evolution for tau microseconds under independent per-qubit dephasing
/// (T2) and relaxation (T1).
inline DensityMatrix free_evolution(const DensityMatrix& rho, double tau_us,
                                    const NoiseParams& noise) {
  noise.validate();
  return DensityMatrix(detail::decohere_raw(rho.mat(), tau_us, noise));
}

/// rho -> (1-p) rho + p I/d.
inline DensityMatrix depolarize(const DensityMatrix& rho, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarize: probability outside [0,1]");
  if (p == 0.0) return rho;
  const std::size_t d = rho.dim();
  Mat m = rho.mat();
  m *= cplx(1.0 - p);
  m += (p / static_cast<double>(d)) * Mat::identity(d);
  return DensityMatrix(m);
}

/// Exact diagonal of the state.
inline std::array<double, 4> measure_populations(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("measure_populations: expected two qubits");
  std::array<double, 4> p{};
  for (std::size_t i = 0; i < 4; ++i) p[i] = std::max(0.0, rho(i, i).real());
  return p;
}

/// Empirical frequencies of a multinomial sample of size `repeats` drawn from
/// the diagonal.
inline std::array<double, 4> measure_populations(const DensityMatrix& rho, const ShotConfig& shots,
                                                 std::mt19937_64& rng) {
  shots.validate();
  std::array<double, 4> p = measure_populations(rho);
  double total = p[0] + p[1] + p[2] + p[3];
  long long remaining = shots.repeats;
  std::array<long long, 4> counts{};
  for (std::size_t i = 0; i < 3 && remaining > 0; ++i) {
    const double q = total > 0.0 ? std::clamp(p[i] / total, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long long> bin(remaining, q);
    counts[i] = bin(rng);
    remaining -= counts[i];
    total -= p[i];
  }
  counts[3] = remaining;
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < 4; ++i)
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(shots.repeats);
  return f;
}

/// Ideal density matrix of alpha|00> + beta|11>, beta real and non-negative.
inline DensityMatrix prepare_state(double alpha_sq) {
  if (alpha_sq < 0.0 || alpha_sq > 1.0)
    throw std::invalid_argument("prepare_state: alpha^2 outside [0,1]");
  const double alpha = std::sqrt(alpha_sq);
  const double beta = std::sqrt(1.0 - alpha_sq);
  return DensityMatrix::from_pure(Vec{alpha, 0.0, 0.0, beta});
}

inline DensityMatrix prepare_state(const Vec& pure) { return DensityMatrix::from_pure(pure); }

inline DensityMatrix prepare_bell() { return prepare_state(0.5); }

/// Pulse-based preparation from the optically polarized |01> state: an RF2
/// rotation splits the nuclear amplitude, a conditional MW1 pi pulse lifts the
/// |01> component to |11>. Coherence magnitude matches the ideal preparation;
/// the relative phase depends on the pulse phases.
inline DensityMatrix prepare_state_pulsed(double alpha_sq, const CalibrationModel& cal,
                                          double duration_ns = 800.0) {
  if (alpha_sq < 0.0 || alpha_sq > 1.0)
    throw std::invalid_argument("prepare_state: alpha^2 outside [0,1]");
  // |01> -> cos(theta/2)|01> - ... ; choose theta so the |00> weight is alpha^2
  const double theta = 2.0 * std::asin(std::sqrt(alpha_sq));
  const double t_us = duration_ns * 1e-3;
  const double rf_amp = amplitude_for_rabi(theta / (2.0 * kPi * t_us), cal.rf2);
  const double mw_amp = amplitude_for_rabi(0.5 / t_us, cal.mw1);  // pi pulse

  const Unitary split = pulse_unitary({Channel::RF2, rf_amp, kPi / 2.0, duration_ns}, cal);
  const Unitary lift = pulse_unitary({Channel::MW1, mw_amp, 0.0, duration_ns}, cal);
  const DensityMatrix polarized = DensityMatrix::from_pure(Vec{0.0, 1.0, 0.0, 0.0});
  return apply_unitary(lift, apply_unitary(split, polarized));
}

}  // namespace qae
