#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numbers>

#include "lsqcolor/estimators.hpp"
#include "lsqcolor/matched_filter.hpp"
#include "support.hpp"

using namespace lsqcolor;
using namespace lsqcolor::test;

namespace {

constexpr double kPi = std::numbers::pi;

cplx direct_dtft(const ZeroExtendedSequence& g, double dt, double f) {
  cplx acc{};
  for (long k = g.support_start(); k <= g.support_end(); ++k)
    acc += g.at(k) * std::polar(1.0, -2.0 * kPi * double(k) * f * dt);
  return dt * acc;
}

NoiseModel colored(double dt, std::size_t n, double alpha = -1.0, double amp = 1.0) {
  return NoiseModel(power_law(amp, alpha, dt, n), dt, n - 1);
}

/// Real template inside the data window [1, n].
ZeroExtendedSequence random_template(std::mt19937_64& rng, Eigen::Index n) {
  return ZeroExtendedSequence(1, random_matrix(rng, n, 1, false));
}

PsdFunction cosine_perturbation(const NoiseModel& model, int cycles) {
  const double dt = model.dt();
  return [&model, cycles, dt](double f) {
    return model.psd(f) * std::cos(2.0 * kPi * cycles * f * dt);
  };
}

}  // namespace

TEST(SpectralGls1d, WhiteMeanAndVariance) {
  const double dt = 1.0, sigma = 0.9;
  const Eigen::Index n = 20;
  std::mt19937_64 rng(1);
  const SampledSignal m(dt, random_vector(rng, n));
  const NoiseModel model(white_from_sigma(sigma, dt), dt, std::size_t(n - 1));
  const auto e = spectral_gls_1d(ZeroExtendedSequence(1, CMatrix::Ones(n, 1)), m, model, 8 * n);
  EXPECT_LT(std::abs(e.x_star(0) - m.values().mean()), 1e-6 * std::abs(m.values().mean()));
  EXPECT_LT(std::abs((*e.covariance)(0, 0) - sigma * sigma / double(n)), 1e-6 * sigma * sigma / n);
}

TEST(SpectralGls1d, NoiseFreeFixedPoint) {
  const Eigen::Index n = 32;
  std::mt19937_64 rng(2);
  const auto g = random_template(rng, n);
  const cplx c(2.5, -0.5);
  const SampledSignal m(1.0, c * g.block().col(0));
  const auto e = spectral_gls_1d(g, m, colored(1.0, n), 8 * n);
  EXPECT_LT(std::abs(e.x_star(0) - c), 1e-8 * std::abs(c));
}

TEST(SpectralGls1d, MatchesGlsSpectralOnSameGrid) {
  const Eigen::Index n = 24;
  const double dt = 0.5;
  std::mt19937_64 rng(3);
  const auto model = colored(dt, n, -1.5);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix j = random_matrix(rng, n, 1);
    const SampledSignal m(dt, random_vector(rng, n));
    const std::size_t grid = 1024;
    const auto a = spectral_gls_1d(ZeroExtendedSequence(1, j), m, model, grid);
    const auto b = gls_spectral(DesignMatrix(j, dt), m, model, n, grid);
    EXPECT_LT(std::abs(a.x_star(0) - b.x_star(0)), 1e-9 * std::abs(b.x_star(0)));
    EXPECT_LT(std::abs((*a.covariance)(0, 0) - (*b.covariance)(0, 0)),
              1e-9 * std::abs((*b.covariance)(0, 0)));
  }
}

TEST(SpectralGls1d, TemplateOutsideWindow) {
  const SampledSignal m(1.0, CVector::Ones(8));
  EXPECT_ERROR_KIND(spectral_gls_1d(ZeroExtendedSequence(5, CMatrix::Ones(6, 1)), m,
                                    colored(1.0, 8), 64),
                    ErrorKind::DimensionMismatch);
}

TEST(SpectralGls1d, InvariantUnderPsdScaling) {
  const Eigen::Index n = 16;
  std::mt19937_64 rng(4);
  const auto g = random_template(rng, n);
  const SampledSignal m(1.0, random_vector(rng, n));
  const auto a = spectral_gls_1d(g, m, colored(1.0, n, -1.0, 1.0), 256);
  const auto b = spectral_gls_1d(g, m, colored(1.0, n, -1.0, 4.0), 256);
  EXPECT_LT(std::abs(a.x_star(0) - b.x_star(0)), 1e-12 * std::abs(a.x_star(0)));
  EXPECT_LT(std::abs((*b.covariance)(0, 0) - 4.0 * (*a.covariance)(0, 0)),
            1e-12 * std::abs((*b.covariance)(0, 0)));
}

TEST(MatchedGain, WhiteImpulseAndHomogeneity) {
  const NoiseModel unit(psd::White{1.0}, 1.0, 3);
  EXPECT_NEAR(matched_gain(ZeroExtendedSequence::impulse(2), unit, 16), 1.0, 1e-14);
  const NoiseModel three(psd::White{3.0}, 1.0, 3);
  EXPECT_NEAR(matched_gain(ZeroExtendedSequence::impulse(2), three, 16), 3.0, 1e-13);
}

TEST(MatchedGain, EqualsSpectralGlsVariance) {
  const Eigen::Index n = 16;
  std::mt19937_64 rng(5);
  const auto g = random_template(rng, n);
  const auto model = colored(1.0, n);
  const double k = matched_gain(g, model, 128);
  const auto e = spectral_gls_1d(g, SampledSignal(1.0, CVector::Ones(n)), model, 128);
  EXPECT_LT(std::abs(k - (*e.covariance)(0, 0).real()), 1e-12 * k);
}

TEST(BuildMatchedFilter, WhiteIsTimeReversedConjugate) {
  const double dt = 0.5, level = 2.0;
  const NoiseModel model(psd::White{level}, dt, 7);
  CMatrix b(4, 1);
  b << cplx(1, 1), 2.0, cplx(0, -1), 0.5;
  const ZeroExtendedSequence g(2, b);
  const auto filter = build_matched_filter(g, model, 64);
  const auto h = idtft(filter.spectrum, -5, -2);
  // F{h} = K conj(F{g}) / S  =>  h_k = K / S * conj(g_-k)
  for (long k = -5; k <= -2; ++k)
    EXPECT_LT(std::abs(h.at(k) - filter.gain / level * std::conj(g.at(-k))), 1e-12) << k;
}

TEST(BuildMatchedFilter, TimeShiftIsPhaseFactor) {
  const Eigen::Index n = 8;
  std::mt19937_64 rng(6);
  const auto g = random_template(rng, n);
  const auto model = colored(1.0, n);
  const auto a = build_matched_filter(g, model, 64, 0.0);
  const auto b = build_matched_filter(g, model, 64, 3.0);
  for (Eigen::Index j = 0; j < 64; ++j) {
    const cplx phase = std::polar(1.0, -2.0 * kPi * a.spectrum.freqs(j) * 3.0);
    EXPECT_LT(std::abs(b.spectrum.values(j, 0) - a.spectrum.values(j, 0) * phase), 1e-14);
  }
}

TEST(BuildMatchedFilter, UnitGainOutputIsBandIntegral) {
  const Eigen::Index n = 12;
  const double dt = 1.0;
  std::mt19937_64 rng(7);
  const auto g = random_template(rng, n);
  // smooth, strictly positive S so the grid rule converges fast
  const NoiseModel model(psd::Tabulated{{{0.0, 3.0}, {0.25, 1.0}, {0.5, 2.0}}}, dt, n - 1);
  const auto filter = build_matched_filter(g, model, 4096, 0.0, 1.0);
  const cplx out = apply_filter(filter, SampledSignal(dt, g.block().col(0)));

  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double f) { return std::norm(direct_dtft(g, dt, f)) / model.psd(f); };
  double want = 0.0;
  for (auto [lo, hi] : {std::pair{-0.5, -0.25}, {-0.25, 0.0}, {0.0, 0.25}, {0.25, 0.5}})
    want += gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 10, 1e-13);
  EXPECT_LT(std::abs(out - want), 1e-5 * want);
}

TEST(ApplyFilter, UnitGainZeroAndEquivalence) {
  const Eigen::Index n = 32;
  std::mt19937_64 rng(8);
  const auto model = colored(1.0, n, -1.0);
  const auto g = random_template(rng, n);
  const auto filter = build_matched_filter(g, model, 8 * n);
  EXPECT_LT(std::abs(apply_filter(filter, SampledSignal(1.0, g.block().col(0))) - 1.0), 1e-8);
  EXPECT_EQ(apply_filter(filter, SampledSignal(1.0, CVector::Zero(n))), cplx(0.0));

  for (int trial = 0; trial < 10; ++trial) {
    const SampledSignal m(1.0, random_vector(rng, n));
    const auto e = spectral_gls_1d(g, m, model, 8 * n);
    EXPECT_LT(std::abs(apply_filter(filter, m) - e.x_star(0)), 1e-9 * std::abs(e.x_star(0)));
  }
}

TEST(ApplyFilter, GridMismatch) {
  const auto model = colored(1.0, 8);
  const auto filter = build_matched_filter(ZeroExtendedSequence(1, CMatrix::Ones(8, 1)), model, 16);
  EXPECT_ERROR_KIND(apply_filter(filter, SampledSignal(0.5, CVector::Ones(8))), ErrorKind::GridMismatch);
  EXPECT_ERROR_KIND(apply_filter(filter, SampledSignal(1.0, CVector::Ones(20))), ErrorKind::GridMismatch);
}

TEST(PsdMismatch, ProportionalAndZeroEpsilon) {
  const Eigen::Index n = 32;
  std::mt19937_64 rng(9);
  const auto g = random_template(rng, n);
  const auto model = colored(1.0, n);
  const auto r0 = psd_mismatch_variance(g, model, model.psd_function(), 0.0, 256);
  EXPECT_EQ(r0.v_used, r0.v_true);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto r = psd_mismatch_variance(g, model, model.psd_function(), eps, 256);
    EXPECT_LT(std::abs(r.measured_rel_excess), 1e-10);
    EXPECT_LT(std::abs(r.predicted_rel_excess), 1e-10);
  }
}

TEST(PsdMismatch, SecondOrderLaw) {
  const Eigen::Index n = 32;
  std::mt19937_64 rng(10);
  const auto g = random_template(rng, n);
  const auto model = colored(1.0, n, -1.0);
  const auto w = cosine_perturbation(model, 3);
  std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3}, measured;
  for (double e : eps) {
    const auto r = psd_mismatch_variance(g, model, w, e, 256);
    EXPECT_GE(r.v_used, r.v_true * (1 - 1e-14));  // Cauchy-Schwarz
    measured.push_back(r.measured_rel_excess);
    if (e <= 1e-2)
      EXPECT_LT(std::abs(r.measured_rel_excess - r.predicted_rel_excess),
                0.1 * r.predicted_rel_excess)
          << e;
  }
  const double slope = loglog_slope(eps, measured);
  EXPECT_GE(slope, 1.9);
  EXPECT_LE(slope, 2.1);
}

TEST(PsdMismatch, PerturbationTooLarge) {
  const auto model = colored(1.0, 8);
  auto w = [&](double f) { return 2.0 * model.psd(f); };
  EXPECT_ERROR_KIND(psd_mismatch_variance(ZeroExtendedSequence(1, CMatrix::Ones(8, 1)), model, w,
                                          0.1, 64),
                    ErrorKind::PerturbationTooLarge);
}

TEST(LoglogSlope, PowerLawAndErrors) {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
  const std::vector<double> one{1.0};
  EXPECT_ERROR_KIND(loglog_slope(one, one), ErrorKind::InvalidArgument);
}
