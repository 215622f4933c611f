#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qae/tomography.hpp"

using namespace qae;

namespace {

/// Random state of the reconstructible form: arbitrary diagonal plus a
/// |00><11| coherence inside the positivity disc.
DensityMatrix random_partial_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 4> pop{u(rng) + 0.05, u(rng) + 0.05, u(rng) + 0.05, u(rng) + 0.05};
  const double total = pop[0] + pop[1] + pop[2] + pop[3];
  for (auto& p : pop) p /= total;
  const double radius = std::sqrt(pop[0] * pop[3]) * 0.95 * u(rng);
  const double angle = 2.0 * kPi * u(rng);
  const double b = radius * std::cos(angle);
  const double c = radius * std::sin(angle);
  Mat m(4, 4);
  m(0, 0) = pop[0];
  m(1, 1) = pop[1];
  m(2, 2) = pop[2];
  m(3, 3) = pop[3];
  m(0, 3) = cplx(b, c);
  m(3, 0) = cplx(b, -c);
  return DensityMatrix(m);
}

}  // namespace

TEST_CASE("simulate_fluorescence basics") {
  const PlCalibration pl;
  SUBCASE("|00> read directly gives PL00") {
    CHECK(simulate_fluorescence(prepare_state(1.0), {}, pl) == doctest::Approx(pl.pl00));
  }
  SUBCASE("maximally mixed state averages the four references") {
    Mat mixed = Mat::identity(4);
    mixed *= cplx(0.25);
    const double mean = (pl.pl00 + pl.pl01 + pl.pl10 + pl.pl11) / 4.0;
    CHECK(simulate_fluorescence(DensityMatrix(mixed), {}, pl) == doctest::Approx(mean));
  }
  SUBCASE("Bell state read directly mixes PL00 and PL11") {
    CHECK(simulate_fluorescence(prepare_bell(), diagonal_sequence(DiagSequence::M1), pl) ==
          doctest::Approx((pl.pl00 + pl.pl11) / 2.0));
  }
}

TEST_CASE("diagonal tomography") {
  const PlCalibration pl;
  SUBCASE("pure |00> forward-simulates to the expected readings and inverts") {
    const DensityMatrix rho = prepare_state(1.0);
    std::array<double, 4> m{};
    for (std::size_t k = 0; k < 4; ++k)
      m[k] = simulate_fluorescence(rho, diagonal_sequence(static_cast<DiagSequence>(k)), pl);
    CHECK(m[0] == doctest::Approx(pl.pl00));
    CHECK(m[1] == doctest::Approx(pl.pl00));
    CHECK(m[2] == doctest::Approx(pl.pl01));
    CHECK(m[3] == doctest::Approx(pl.pl00));
    const std::array<double, 4> pops = diagonal_tomography(m, pl);
    CHECK(pops[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(pops[1]) < 1e-12);
    CHECK(std::abs(pops[2]) < 1e-12);
    CHECK(std::abs(pops[3]) < 1e-12);
  }
  SUBCASE("Bell state populations") {
    std::array<double, 4> m{};
    for (std::size_t k = 0; k < 4; ++k)
      m[k] = simulate_fluorescence(prepare_bell(), diagonal_sequence(static_cast<DiagSequence>(k)),
                                   pl);
    const std::array<double, 4> pops = diagonal_tomography(m, pl);
    CHECK(pops[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pops[3] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("random diagonal states round-trip exactly") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      std::array<double, 4> pop{u(rng), u(rng), u(rng), u(rng)};
      const double total = pop[0] + pop[1] + pop[2] + pop[3];
      for (auto& p : pop) p /= total;
      Mat m(4, 4);
      for (std::size_t i = 0; i < 4; ++i) m(i, i) = pop[i];
      const DensityMatrix rho(m);
      std::array<double, 4> meas{};
      for (std::size_t k = 0; k < 4; ++k)
        meas[k] = simulate_fluorescence(rho, diagonal_sequence(static_cast<DiagSequence>(k)), pl);
      const std::array<double, 4> rec = diagonal_tomography(meas, pl);
      for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(rec[i] - pop[i]) < 1e-10);
    }
  }
  SUBCASE("condition number of the default calibration is sane") {
    const double cond = calibration_condition(pl);
    CHECK(cond > 1.0);
    CHECK(cond < 1e4);
  }
  SUBCASE("near-degenerate brightness is rejected as ill-conditioned") {
    PlCalibration bad{1.0, 1.0 + 1e-10, 1.0 + 2e-10, 1.0 + 3e-10};
    CHECK_THROWS_AS(diagonal_tomography({1, 1, 1, 1}, bad), std::runtime_error);
  }
  SUBCASE("PL01 == PL10 rejected at calibration time") {
    PlCalibration bad{1.0, 0.7, 0.7, 0.6};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("off-diagonal tomography") {
  const PlCalibration pl;
  const double r = 1.0 / std::sqrt(2.0);
  SUBCASE("Bell state reads (0.5, 0)") {
    const OffDiagonal od = off_diagonal_tomography(prepare_bell(), pl);
    CHECK(od.b_tilde == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(od.c_tilde) < 1e-10);
  }
  SUBCASE("phase-shifted Bell moves the coherence into the c~ channel") {
    // <00|rho|11> = -i/2 for (|00> + i|11>)/sqrt(2)
    const DensityMatrix rho = prepare_state(Vec{r, 0, 0, cplx(0, 1) * r});
    const OffDiagonal od = off_diagonal_tomography(rho, pl);
    CHECK(std::abs(od.b_tilde) < 1e-10);
    CHECK(od.c_tilde == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(coherence_modulus(od.b_tilde, od.c_tilde) == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("diagonal states carry no coherence") {
    const DensityMatrix rho(Mat(4, 4, {0.4, 0, 0, 0, 0, 0.1, 0, 0, 0, 0, 0.2, 0, 0, 0, 0, 0.3}));
    const OffDiagonal od = off_diagonal_tomography(rho, pl);
    CHECK(std::abs(od.b_tilde) < 1e-12);
    CHECK(std::abs(od.c_tilde) < 1e-12);
  }
  SUBCASE("relative phase rotates between the two channels") {
    for (double phi : {0.3, 1.2, 2.5, 4.0}) {
      // <00|rho|11> = exp(-i phi)/2
      const DensityMatrix rho = prepare_state(Vec{r, 0, 0, std::polar(r, phi)});
      const OffDiagonal od = off_diagonal_tomography(rho, pl);
      CHECK(od.b_tilde == doctest::Approx(0.5 * std::cos(phi)).epsilon(1e-9));
      CHECK(od.c_tilde == doctest::Approx(-0.5 * std::sin(phi)).epsilon(1e-9));
      CHECK(coherence_modulus(od.b_tilde, od.c_tilde) == doctest::Approx(0.5).epsilon(1e-10));
    }
  }
}

TEST_CASE("coherence_modulus") {
  CHECK(coherence_modulus(0.5, 0.0) == 0.5);
  CHECK(coherence_modulus(0.0, 0.0) == 0.0);
  CHECK(coherence_modulus(0.3, 0.4) == doctest::Approx(0.5));
}

TEST_CASE("noiseless round trip over the full reconstructible family") {
  const PlCalibration pl;
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    const DensityMatrix rho = random_partial_state(rng);
    const TomographyRecord rec = tomograph(rho, pl);
    CHECK(std::abs(rec.a2 - rho(0, 0).real()) < 1e-10);
    CHECK(std::abs(rec.a_tilde - rho(1, 1).real()) < 1e-10);
    CHECK(std::abs(rec.a - rho(2, 2).real()) < 1e-10);
    CHECK(std::abs(rec.d - rho(3, 3).real()) < 1e-10);
    CHECK(std::abs(rec.b_tilde - rho(0, 3).real()) < 1e-10);
    CHECK(std::abs(rec.c_tilde - rho(0, 3).imag()) < 1e-10);
    CHECK(std::abs(rec.a2 + rec.a_tilde + rec.a + rec.d - 1.0) < 1e-10);
    CHECK(rec.modulus <= std::sqrt(rec.a2 * rec.d) + 1e-10);
  }
}

TEST_CASE("shot-noisy reconstruction is unbiased") {
  const PlCalibration pl;
  const DensityMatrix truth = prepare_bell();
  const long long repeats = 3'000'000;

  std::vector<double> bs, a2s, ds;
  const int n_seeds = 100;
  for (int s = 0; s < n_seeds; ++s) {
    std::mt19937_64 rng = make_stream(900 + s, {stream::kTomography});
    const TomographyRecord rec = tomograph(truth, pl, repeats, &rng);
    bs.push_back(rec.b_tilde);
    a2s.push_back(rec.a2);
    ds.push_back(rec.d);
  }
  auto mean_and_se = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);
    return std::pair<double, double>{mean, std::sqrt(var / static_cast<double>(v.size()))};
  };
  const auto [mb, seb] = mean_and_se(bs);
  const auto [ma2, sea2] = mean_and_se(a2s);
  const auto [md, sed] = mean_and_se(ds);
  CHECK(std::abs(mb - 0.5) < 3.0 * seb);
  CHECK(std::abs(ma2 - 0.5) < 3.0 * sea2);
  CHECK(std::abs(md - 0.5) < 3.0 * sed);
  CHECK(seb < 5e-4);  // 3e6 repeats pin each pass to the 1e-3 scale
}
