#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qae/device.hpp"
#include "qae/linalg.hpp"
#include "qae/matrix.hpp"

namespace qae {

/// The four tunable encoder parameters plus the fixed pulse duration.
/// Defaults are the initial guess the training loop starts from.
struct EncoderParams {
  double b1_volts = 0.02;
  double b2_volts = 0.1;
  double phi1_rad = kPi / 4.0;
  double phi2_rad = kPi / 4.0;
  double duration_ns = 800.0;

  void validate() const {
    if (b1_volts < 0.0 || b2_volts < 0.0)
      throw std::invalid_argument("encoder: amplitudes must be >= 0");
    if (!(duration_ns > 0.0)) throw std::invalid_argument("encoder: duration must be > 0");
  }
};

/// The emulated quantum processor the training loop queries: calibration,
/// decoherence, shot statistics. `ideal` bypasses both sampling and the
/// readout imperfection.
struct DeviceContext {
  CalibrationModel cal{};
  NoiseParams noise{};
  ShotConfig shots{};
  bool ideal = false;
};

/// Two-pulse encoder, MW1 first: U_E = U_MW2 * U_MW1.
inline Unitary build_encoder(const EncoderParams& p, const CalibrationModel& cal) {
  p.validate();
  const Unitary u1 = pulse_unitary({Channel::MW1, p.b1_volts, p.phi1_rad, p.duration_ns}, cal);
  const Unitary u2 = pulse_unitary({Channel::MW2, p.b2_volts, p.phi2_rad, p.duration_ns}, cal);
  return u2 * u1;
}

/// Deterministic ancilla refresh: |0><0|_e x tr_e(rho).
inline DensityMatrix refresh_electron(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("refresh_electron: expected two qubits");
  const Mat nuclear = detail::partial_trace_raw(rho.mat(), {2, 2}, {1});
  return DensityMatrix(kron(proj0(), nuclear));
}

/// Post-selected variant: project onto electron |0> and renormalize.
inline DensityMatrix project_electron_zero(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("project_electron_zero: expected two qubits");
  const Mat p = kron(proj0(), Mat::identity(2));
  Mat m = p * rho.mat() * p;
  const double tr = m.trace().real();
  if (tr < 1e-15)
    throw std::runtime_error("project_electron_zero: no population in electron |0>");
  m *= cplx(1.0 / tr);
  return DensityMatrix(m);
}

/// Mean probability that the electron ends in |0> after encoding |00> and
/// |11>. Shot-noisy when an RNG is supplied and the context is not ideal.
inline double encoder_cost(const EncoderParams& p, const DeviceContext& ctx,
                           std::mt19937_64* rng = nullptr) {
  const Unitary enc = build_encoder(p, ctx.cal);
  double sum = 0.0;
  for (double alpha_sq : {1.0, 0.0}) {  // |00> and |11>
    DensityMatrix rho = apply_unitary(enc, prepare_state(alpha_sq));
    if (!ctx.ideal && ctx.noise.readout_depol > 0.0)
      rho = depolarize(rho, ctx.noise.readout_depol);
    const std::array<double, 4> pops = (!ctx.ideal && rng != nullptr)
                                           ? measure_populations(rho, ctx.shots, *rng)
                                           : measure_populations(rho);
    sum += pops[0] + pops[1];
  }
  return sum / 2.0;
}

/// Encode, refresh the electron, store for tau under the free-evolution
/// channel, refresh again, decode with the adjoint.
inline DensityMatrix apply_autoencoder_cycle(const DensityMatrix& rho_in, const EncoderParams& p,
                                             double tau_us, const NoiseParams& noise,
                                             const CalibrationModel& cal,
                                             bool post_select = false) {
  const Unitary enc = build_encoder(p, cal);
  auto refresh = [&](const DensityMatrix& r) {
    return post_select ? project_electron_zero(r) : refresh_electron(r);
  };
  DensityMatrix rho = apply_unitary(enc, rho_in);
  rho = refresh(rho);
  rho = free_evolution(rho, tau_us, noise);
  rho = refresh(rho);
  return apply_unitary(enc.adjoint(), rho);
}

// ---------------------------------------------------------------------------
// Parameterized quantum circuit for the multi-qubit autoencoder: per-qubit
// Euler layers at both ends with all ordered controlled rotations in between,
// n(n-1) + 2n gates, three angles each.
// ---------------------------------------------------------------------------

struct PqcGate {
  bool controlled = false;
  std::size_t control = 0;  // meaningful when controlled
  std::size_t target = 0;
};

inline std::vector<PqcGate> pqc_layout(std::size_t n_qubits) {
  std::vector<PqcGate> gates;
  for (std::size_t q = 0; q < n_qubits; ++q) gates.push_back({false, 0, q});
  for (std::size_t c = 0; c < n_qubits; ++c)
    for (std::size_t t = 0; t < n_qubits; ++t)
      if (t != c) gates.push_back({true, c, t});
  for (std::size_t q = 0; q < n_qubits; ++q) gates.push_back({false, 0, q});
  return gates;
}

struct PqcParams {
  std::size_t n_qubits = 2;
  std::size_t n_latent = 1;
  std::vector<double> angles;

  static std::size_t gate_count(std::size_t n) { return n * (n - 1) + 2 * n; }
  static std::size_t angle_count(std::size_t n) { return 3 * gate_count(n); }

  void validate() const {
    if (n_qubits < 2 || n_qubits > 4)
      throw std::invalid_argument("pqc: supported sizes are 2..4 qubits");
    if (n_latent < 1 || n_latent >= n_qubits)
      throw std::invalid_argument("pqc: latent size must satisfy 1 <= n_latent < n_qubits");
    if (angles.size() != angle_count(n_qubits))
      throw std::invalid_argument("pqc: expected " + std::to_string(angle_count(n_qubits)) +
                                  " angles, got " + std::to_string(angles.size()));
  }

  std::size_t n_trash() const { return n_qubits - n_latent; }
};

/// Rz(c) Ry(b) Rz(a), Rz(a) applied first.
inline Mat euler_rotation(double a, double b, double c) {
  const Mat rz_a(2, 2, {std::polar(1.0, -a / 2), 0, 0, std::polar(1.0, a / 2)});
  const Mat ry(2, 2, {std::cos(b / 2), -std::sin(b / 2), std::sin(b / 2), std::cos(b / 2)});
  const Mat rz_c(2, 2, {std::polar(1.0, -c / 2), 0, 0, std::polar(1.0, c / 2)});
  return rz_c * ry * rz_a;
}

namespace detail {

// Qubit 0 is the most significant index bit, matching the subsystem order
// used by partial_trace.
inline void apply_single_qubit(Vec& psi, std::size_t n, std::size_t q, const Mat& u) {
  const std::size_t stride = std::size_t{1} << (n - 1 - q);
  for (std::size_t base = 0; base < psi.size(); base += 2 * stride) {
    for (std::size_t k = 0; k < stride; ++k) {
      const std::size_t i0 = base + k;
      const std::size_t i1 = i0 + stride;
      const cplx a0 = psi[i0], a1 = psi[i1];
      psi[i0] = u(0, 0) * a0 + u(0, 1) * a1;
      psi[i1] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

inline void apply_controlled(Vec& psi, std::size_t n, std::size_t control, std::size_t target,
                             const Mat& u) {
  const std::size_t cbit = std::size_t{1} << (n - 1 - control);
  const std::size_t stride = std::size_t{1} << (n - 1 - target);
  for (std::size_t i0 = 0; i0 < psi.size(); ++i0) {
    if ((i0 & cbit) == 0 || (i0 & stride) != 0) continue;
    const std::size_t i1 = i0 + stride;
    const cplx a0 = psi[i0], a1 = psi[i1];
    psi[i0] = u(0, 0) * a0 + u(0, 1) * a1;
    psi[i1] = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

}  // namespace detail

inline Vec apply_pqc(const PqcParams& p, Vec psi) {
  p.validate();
  if (psi.size() != (std::size_t{1} << p.n_qubits))
    throw std::invalid_argument("apply_pqc: state dimension mismatch");
  const std::vector<PqcGate> gates = pqc_layout(p.n_qubits);
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const Mat u = euler_rotation(p.angles[3 * g], p.angles[3 * g + 1], p.angles[3 * g + 2]);
    if (gates[g].controlled)
      detail::apply_controlled(psi, p.n_qubits, gates[g].control, gates[g].target, u);
    else
      detail::apply_single_qubit(psi, p.n_qubits, gates[g].target, u);
  }
  return psi;
}

/// Full circuit matrix, assembled by projector algebra. The slow sibling of
/// apply_pqc, kept for contracts and cross-checks.
inline Unitary build_pqc(const PqcParams& p) {
  p.validate();
  const std::size_t n = p.n_qubits;
  const std::size_t dim = std::size_t{1} << n;

  auto embed = [&](const Mat& op, std::size_t q) {
    Mat out = (q == 0) ? op : kron(Mat::identity(std::size_t{1} << q), op);
    const std::size_t rest = n - 1 - q;
    if (rest > 0) out = kron(out, Mat::identity(std::size_t{1} << rest));
    return out;
  };

  Mat total = Mat::identity(dim);
  const std::vector<PqcGate> gates = pqc_layout(n);
  for (std::size_t g = 0; g < gates.size(); ++g) {
    const Mat u = euler_rotation(p.angles[3 * g], p.angles[3 * g + 1], p.angles[3 * g + 2]);
    Mat full(dim, dim);
    if (gates[g].controlled) {
      full = embed(proj0(), gates[g].control) +
             embed(proj1(), gates[g].control) * embed(u, gates[g].target);
    } else {
      full = embed(u, gates[g].target);
    }
    total = full * total;
  }
  return Unitary(total);
}

/// Probability that the trash register (the first n - n_latent qubits) of
/// U|input> reads all zeros; equals the reconstruction fidelity of the
/// refresh-and-decode cycle for pure inputs.
inline double pqc_trash_cost(const PqcParams& p, const Vec& input) {
  if (std::abs(vec_norm(input) - 1.0) > 1e-10)
    throw std::invalid_argument("pqc_trash_cost: input not normalized");
  const Vec out = apply_pqc(p, input);
  const std::size_t latent_dim = std::size_t{1} << p.n_latent;
  double cost = 0.0;
  for (std::size_t k = 0; k < latent_dim; ++k) cost += std::norm(out[k]);
  return std::clamp(cost, 0.0, 1.0);
}

/// Refresh-and-decode reconstruction with a post-selected trash register:
/// encode, keep the latent block conditioned on trash |0...0>, renormalize,
/// reset the trash qubits and decode with the adjoint. Post-selection makes
/// the reconstruction fidelity equal the trash overlap for every pure input;
/// the deterministic refresh of the two-qubit device cycle lives in
/// apply_autoencoder_cycle.
inline DensityMatrix pqc_reconstruct(const PqcParams& p, const Vec& input) {
  const Unitary u = build_pqc(p);
  const DensityMatrix encoded = apply_unitary(u, DensityMatrix::from_pure(input));

  // trash register = leading index bits, so trash |0...0> is the top-left block
  const std::size_t latent_dim = std::size_t{1} << p.n_latent;
  Mat latent(latent_dim, latent_dim);
  for (std::size_t i = 0; i < latent_dim; ++i)
    for (std::size_t j = 0; j < latent_dim; ++j) latent(i, j) = encoded(i, j);
  const double weight = latent.trace().real();
  if (weight < 1e-15)
    throw std::runtime_error("pqc_reconstruct: no population in the trash reference state");
  latent *= cplx(1.0 / weight);

  Mat trash_ref(std::size_t{1} << p.n_trash(), std::size_t{1} << p.n_trash());
  trash_ref(0, 0) = 1.0;
  const DensityMatrix refreshed = DensityMatrix(kron(trash_ref, latent));
  return apply_unitary(u.adjoint(), refreshed);
}

}  // namespace qae
