#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "qae/device.hpp"
#include "qae/linalg.hpp"
#include "qae/rng.hpp"

namespace qae {

/// Reference brightness of the four basis states.
struct PlCalibration {
  double pl00 = 1.00;
  double pl01 = 0.85;
  double pl10 = 0.70;
  double pl11 = 0.60;

  static PlCalibration from_shots(const ShotConfig& s) {
    return {s.pl00, s.pl01, s.pl10, s.pl11};
  }

  void validate() const {
    for (double v : {pl00, pl01, pl10, pl11})
      if (!(v > 0.0)) throw std::invalid_argument("pl calibration: brightness must be positive");
    if (pl01 == pl10)
      throw std::invalid_argument("pl calibration: PL01 == PL10 breaks the coherence readout");
  }

  std::array<double, 4> values() const { return {pl00, pl01, pl10, pl11}; }
};

struct TomographyRecord {
  double tau_us = 0.0;
  double a2 = 0.0;       // p(|00>)
  double a_tilde = 0.0;  // p(|01>)
  double a = 0.0;        // p(|10>)
  double d = 0.0;        // p(|11>)
  double b_tilde = 0.0;  // Re <00|rho|11>
  double c_tilde = 0.0;  // Im <00|rho|11>
  double modulus = 0.0;
  std::uint64_t seed = 0;
};

inline double coherence_modulus(double b_tilde, double c_tilde) {
  return std::hypot(b_tilde, c_tilde);
}

// ---------------------------------------------------------------------------
// Pulse programs. The exact matrices matter: the diagonal sequences realize
// the population permutations behind the calibration-matrix rows, and the
// phase-cycled pi/2 rotations pin the sign conventions of the reconstruction
// formulas. All are unitaries on the |electron, nucleus> basis.
// ---------------------------------------------------------------------------

namespace tomo {

inline Unitary mw1_pi() {
  const cplx i(0.0, 1.0);
  return Unitary(Mat(4, 4, {1, 0, 0, 0, 0, 0, 0, i, 0, 0, 1, 0, 0, i, 0, 0}));
}

inline Unitary mw2_pi() {
  const cplx i(0.0, 1.0);
  return Unitary(Mat(4, 4, {0, 0, i, 0, 0, 1, 0, 0, i, 0, 0, 0, 0, 0, 0, 1}));
}

inline Unitary rf2_pi() {
  const cplx i(0.0, 1.0);
  return Unitary(Mat(4, 4, {0, i, 0, 0, i, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}));
}

/// Nuclear pi/2 rotation inside the electron-|0> block, one of the four
/// phase-cycle settings. Index k = 0..3 selects the +y, -y, +x, -x variants.
inline Unitary phase_pulse(std::size_t k) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  std::array<cplx, 4> block{};
  switch (k) {
    case 0: block = {r, r * i, r * i, r}; break;
    case 1: block = {r, -r * i, -r * i, r}; break;
    case 2: block = {r, -r, r, r}; break;
    case 3: block = {r, r, -r, r}; break;
    default: throw std::invalid_argument("phase_pulse: index must be 0..3");
  }
  Mat m = Mat::identity(4);
  m(0, 0) = block[0];
  m(0, 1) = block[1];
  m(1, 0) = block[2];
  m(1, 1) = block[3];
  return Unitary(m);
}

}  // namespace tomo

enum class DiagSequence { M1, M2, M3, M4 };
enum class PhaseSequence { P1, P2, P3, P4 };

inline std::vector<Unitary> diagonal_sequence(DiagSequence s) {
  switch (s) {
    case DiagSequence::M1: return {};
    case DiagSequence::M2: return {tomo::mw1_pi()};
    case DiagSequence::M3: return {tomo::rf2_pi()};
    case DiagSequence::M4: return {tomo::rf2_pi(), tomo::mw2_pi(), tomo::rf2_pi()};
  }
  throw std::invalid_argument("diagonal_sequence: unknown sequence");
}

inline std::vector<Unitary> offdiag_sequence(PhaseSequence s) {
  const std::size_t k = static_cast<std::size_t>(s);
  return {tomo::mw1_pi(), tomo::phase_pulse(k), tomo::mw2_pi()};
}

/// Mean brightness per readout after running a pulse program, Poisson-noisy
/// when a repeat count and RNG are supplied.
inline double simulate_fluorescence(const DensityMatrix& rho, const std::vector<Unitary>& sequence,
                                    const PlCalibration& pl, long long repeats = 0,
                                    std::mt19937_64* rng = nullptr) {
  pl.validate();
  DensityMatrix state = rho;
  for (const Unitary& u : sequence) state = apply_unitary(u, state);
  const std::array<double, 4> pops = measure_populations(state);
  const std::array<double, 4> ref = pl.values();
  double brightness = 0.0;
  for (std::size_t i = 0; i < 4; ++i) brightness += pops[i] * ref[i];
  if (rng == nullptr) return brightness;
  if (repeats < 1) throw std::invalid_argument("simulate_fluorescence: repeats must be >= 1");
  std::poisson_distribution<long long> poisson(brightness * static_cast<double>(repeats));
  return static_cast<double>(poisson(*rng)) / static_cast<double>(repeats);
}

namespace detail {

// 4x4 linear solve with partial pivoting; also produces the inverse for the
// condition estimate.
struct Solve4 {
  std::array<double, 4> solution{};
  double condition = 0.0;
};

inline Solve4 solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b) {
  auto norm1 = [](const std::array<std::array<double, 4>, 4>& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < 4; ++i) s += std::abs(m[i][j]);
      best = std::max(best, s);
    }
    return best;
  };
  const double a_norm = norm1(a);

  std::array<std::array<double, 4>, 4> inv{};
  for (std::size_t i = 0; i < 4; ++i) inv[i][i] = 1.0;

  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300)
      throw std::runtime_error("tomography: singular calibration matrix");
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    std::swap(b[col], b[piv]);

    const double d = a[col][col];
    for (std::size_t j = 0; j < 4; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    b[col] /= d;
    for (std::size_t r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < 4; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
      b[r] -= f * b[col];
    }
  }

  Solve4 out;
  out.solution = b;
  out.condition = a_norm * norm1(inv);
  return out;
}

}  // namespace detail

/// Calibration matrix of the four diagonal readout sequences.
inline std::array<std::array<double, 4>, 4> calibration_matrix(const PlCalibration& pl) {
  return {{{pl.pl00, pl.pl01, pl.pl10, pl.pl11},
           {pl.pl00, pl.pl11, pl.pl10, pl.pl01},
           {pl.pl01, pl.pl00, pl.pl10, pl.pl11},
           {pl.pl00, pl.pl10, pl.pl01, pl.pl11}}};
}

inline double calibration_condition(const PlCalibration& pl) {
  return detail::solve4(calibration_matrix(pl), {0, 0, 0, 0}).condition;
}

/// Populations (a2, a~, a, d) from the four measured brightness values.
inline std::array<double, 4> diagonal_tomography(const std::array<double, 4>& measured,
                                                 const PlCalibration& pl) {
  pl.validate();
  const detail::Solve4 s = detail::solve4(calibration_matrix(pl), measured);
  if (s.condition > 1e8)
    throw std::runtime_error("tomography: calibration matrix ill-conditioned");
  return s.solution;
}

struct OffDiagonal {
  double b_tilde = 0.0;
  double c_tilde = 0.0;
};

/// The phase-cycled coherence readout: MW1 pi, nuclear pi/2 at four phases,
/// MW2 pi, brightness. Returns the real and imaginary parts of <00|rho|11>.
inline OffDiagonal off_diagonal_tomography(const DensityMatrix& rho, const PlCalibration& pl,
                                           long long repeats = 0, std::mt19937_64* rng = nullptr) {
  pl.validate();
  std::array<double, 4> x{};
  for (std::size_t k = 0; k < 4; ++k) {
    x[k] = simulate_fluorescence(rho, offdiag_sequence(static_cast<PhaseSequence>(k)), pl, repeats,
                                 rng);
  }
  const double denom = 2.0 * (pl.pl01 - pl.pl10);
  return {(x[0] - x[1]) / denom, (x[2] - x[3]) / denom};
}

/// Full partial-tomography pass: four diagonal sequences plus the four
/// phase-cycled ones.
inline TomographyRecord tomograph(const DensityMatrix& rho, const PlCalibration& pl,
                                  long long repeats = 0, std::mt19937_64* rng = nullptr) {
  std::array<double, 4> m{};
  for (std::size_t k = 0; k < 4; ++k) {
    m[k] =
        simulate_fluorescence(rho, diagonal_sequence(static_cast<DiagSequence>(k)), pl, repeats, rng);
  }
  const std::array<double, 4> pops = diagonal_tomography(m, pl);
  const OffDiagonal od = off_diagonal_tomography(rho, pl, repeats, rng);

  TomographyRecord rec;
  rec.a2 = pops[0];
  rec.a_tilde = pops[1];
  rec.a = pops[2];
  rec.d = pops[3];
  rec.b_tilde = od.b_tilde;
  rec.c_tilde = od.c_tilde;
  rec.modulus = coherence_modulus(od.b_tilde, od.c_tilde);
  return rec;
}

}  // namespace qae
