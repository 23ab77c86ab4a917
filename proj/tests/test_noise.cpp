#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numbers>
#include <set>

#include "lsqcolor/noise.hpp"
#include "lsqcolor/spectral.hpp"
#include "support.hpp"

using namespace lsqcolor;
using namespace lsqcolor::test;

namespace {

constexpr double kPi = std::numbers::pi;

/// 2 * int_0^{1/(2dt)} S(f) cos(2 pi k f dt) df for an even real S, adaptive
/// Gauss-Kronrod split at the kink.
double correlation_oracle(const std::function<double(double)>& s, long k, double dt, double kink) {
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double f) { return s(f) * std::cos(2.0 * kPi * double(k) * f * dt); };
  double total = 0.0;
  const double nyq = 0.5 / dt;
  if (kink > 0.0 && kink < nyq) {
    total += gauss_kronrod<double, 61>::integrate(integrand, 0.0, kink, 15, 1e-13);
    total += gauss_kronrod<double, 61>::integrate(integrand, kink, nyq, 15, 1e-13);
  } else {
    total += gauss_kronrod<double, 61>::integrate(integrand, 0.0, nyq, 15, 1e-13);
  }
  return 2.0 * total;
}

CMatrix sample_covariance(const NoiseSynthesizer& synth, std::uint64_t seed, int draws,
                          Eigen::Index n, CVector* mean = nullptr) {
  CMatrix acc = CMatrix::Zero(n, n);
  CVector sum = CVector::Zero(n);
  for (int t = 0; t < draws; ++t) {
    const CVector e = synth.draw(seed, std::uint64_t(t)).values();
    acc += e * e.adjoint();
    sum += e;
  }
  if (mean) *mean = sum / double(draws);
  return acc / double(draws);
}

}  // namespace

TEST(Psd, Families) {
  EXPECT_DOUBLE_EQ(evaluate_psd(white_from_sigma(2.0, 0.5), 0.3), 2.0);
  const auto pl = power_law(3.0, -1.0, 0.5, 100);
  EXPECT_DOUBLE_EQ(pl.f_min, 1.0 / (10 * 100 * 0.5));
  EXPECT_DOUBLE_EQ(evaluate_psd(pl, 0.25), 3.0 / 0.25);
  EXPECT_DOUBLE_EQ(evaluate_psd(pl, -0.25), 3.0 / 0.25);
  EXPECT_DOUBLE_EQ(evaluate_psd(pl, 0.0), 3.0 / pl.f_min);

  const psd::Tabulated tab{{{0.0, 1.0}, {0.2, 3.0}}};
  EXPECT_DOUBLE_EQ(evaluate_psd(tab, 0.1), 2.0);
  EXPECT_DOUBLE_EQ(evaluate_psd(tab, -0.1), 2.0);  // mirrored one-sided table
  EXPECT_DOUBLE_EQ(evaluate_psd(tab, 0.4), 3.0);   // clamped
}

TEST(Psd, Validation) {
  EXPECT_ERROR_KIND(validate_psd(psd::White{-1.0}), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(validate_psd(psd::PowerLaw{1.0, 3.0, 0.1}), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(validate_psd(psd::PowerLaw{1.0, -1.0, 0.0}), ErrorKind::InvalidArgument);
  EXPECT_ERROR_KIND(validate_psd(psd::Tabulated{{{0.2, 1.0}, {0.1, 1.0}}}),
                    ErrorKind::InvalidArgument);
}

TEST(PsdToCorrelation, WhiteIsImpulse) {
  const double sigma = 1.7, dt = 0.01;
  const NoiseModel model(white_from_sigma(sigma, dt), dt, 10);
  EXPECT_NEAR(model.correlation_at(0).real(), sigma * sigma, 1e-12);
  for (long k = 1; k <= 10; ++k) EXPECT_LT(std::abs(model.correlation_at(k)), 1e-12);
}

TEST(PsdToCorrelation, CosineModulatedSpectrum) {
  // S = a + b cos(2 pi L f dt)  =>  R(0) = a/dt, R(+-L) = b/(2 dt), zero elsewhere
  const double a = 2.0, b = 1.2, dt = 0.5;
  const long l = 3;
  auto s = [&](double f) { return a + b * std::cos(2.0 * kPi * double(l) * f * dt); };
  const auto r = psd_to_correlation(s, 8, dt, 64);
  for (long k = 0; k <= 8; ++k) {
    const double want = k == 0 ? a / dt : (k == l ? b / (2.0 * dt) : 0.0);
    EXPECT_LT(std::abs(r[std::size_t(k)] - want), 1e-12) << k;
  }
}

TEST(PsdToCorrelation, GridMustCoverLags) {
  auto s = [](double) { return 1.0; };
  EXPECT_ERROR_KIND(psd_to_correlation(s, 10, 1.0, 16), ErrorKind::GridTooCoarse);
}

TEST(NoiseModel, CorrelationSymmetryAndBound) {
  const double dt = 1.0;
  const NoiseModel model(power_law(1.0, -1.5, dt, 32), dt, 31);
  const double r0 = model.correlation_at(0).real();
  EXPECT_GT(r0, 0.0);
  EXPECT_EQ(model.correlation_at(0).imag(), 0.0);
  for (long k = 1; k <= 31; ++k) {
    EXPECT_EQ(model.correlation_at(-k), std::conj(model.correlation_at(k)));
    EXPECT_LE(std::abs(model.correlation_at(k)), r0);
  }
}

TEST(NoiseModel, FloorKeepsPsdPositive) {
  const NoiseModel model(psd::Tabulated{{{0.0, 0.0}, {0.1, 0.0}, {0.2, 5.0}, {0.5, 5.0}}}, 1.0, 4);
  EXPECT_DOUBLE_EQ(model.s_max(), 5.0);
  EXPECT_DOUBLE_EQ(model.s_floor(), 5e-12);
  EXPECT_DOUBLE_EQ(model.psd(0.05), 5e-12);
  EXPECT_DOUBLE_EQ(model.psd(0.3), 5.0);
}

TEST(NoiseModel, SilentModel) {
  const NoiseModel model(white_from_sigma(0.0, 1.0), 1.0, 7);
  EXPECT_TRUE(model.silent());
  const auto e = synthesize_noise(model, 8, 42);
  EXPECT_EQ(e.values(), CVector::Zero(8));
}

TEST(BuildCovariance, WhiteAndHandToeplitz) {
  const NoiseModel white(white_from_sigma(1.5, 1.0), 1.0, 5);
  const auto om = build_covariance(white, 6).dense();
  EXPECT_LT(max_abs(om - 2.25 * CMatrix::Identity(6, 6)), 1e-12);

  const ToeplitzCovariance t({1.0, 0.5});
  CMatrix want(2, 2);
  want << 1.0, 0.5, 0.5, 1.0;
  EXPECT_EQ(t.dense(), want);

  const ToeplitzCovariance c({2.0, cplx(0.5, 0.3)});
  EXPECT_EQ(c.dense()(1, 0), cplx(0.5, 0.3));
  EXPECT_EQ(c.dense()(0, 1), cplx(0.5, -0.3));
}

TEST(BuildCovariance, RejectsIndefinite) {
  EXPECT_ERROR_KIND(ToeplitzCovariance({1.0, 2.0}), ErrorKind::NotPSD);
  EXPECT_ERROR_KIND(ToeplitzCovariance({-1.0}), ErrorKind::NotPSD);
}

TEST(BuildCovariance, PowerLawMatchesPerEntryQuadrature) {
  const double dt = 0.5, amp = 2.0;
  const long n = 16;
  const auto spec = power_law(amp, -1.0, dt, n);
  const NoiseModel model(spec, dt, n - 1);
  const auto om = build_covariance(model, n).dense();
  auto s = [&](double f) { return amp / std::max(std::abs(f), spec.f_min); };
  const double r0 = correlation_oracle(s, 0, dt, spec.f_min);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const double want = correlation_oracle(s, i - j, dt, spec.f_min);
      EXPECT_LT(std::abs(om(i, j) - want), 1e-8 * r0) << i << "," << j;
    }
}

TEST(WienerKhintchine, DtftOfCorrelationReturnsPsd) {
  const double dt = 1.0;
  auto s = [](double f) { return 1.0 / (1.0 + (f / 0.1) * (f / 0.1)); };
  const long lags = 300;
  const auto r = psd_to_correlation(s, std::size_t(lags), dt, 1 << 16);
  CMatrix block(2 * lags + 1, 1);
  for (long k = -lags; k <= lags; ++k)
    block(k + lags, 0) = k >= 0 ? r[std::size_t(k)] : std::conj(r[std::size_t(-k)]);
  const auto spec = dtft(ZeroExtendedSequence(-lags, block), dt, 4096);
  for (Eigen::Index j = 0; j < spec.grid_size(); ++j) {
    const double want = s(spec.freqs(j));
    EXPECT_LT(std::abs(spec.values(j, 0) - want), 0.02 * want) << spec.freqs(j);
  }
}

TEST(Synthesis, DeterministicAndSeedSensitive) {
  const NoiseModel model(power_law(1.0, -1.0, 1.0, 64), 1.0, 63);
  const auto a = synthesize_noise(model, 64, 5, 2);
  const auto b = synthesize_noise(model, 64, 5, 2);
  const auto c = synthesize_noise(model, 64, 5, 3);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
  for (Eigen::Index i = 0; i < 64; ++i) EXPECT_EQ(a.values()(i).imag(), 0.0);
}

TEST(Synthesis, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t t = 0; t < 256; ++t) seen.insert(derive_seed(s, t));
  EXPECT_EQ(seen.size(), 1024u);
}

TEST(Synthesis, WhiteSampleMoments) {
  const Eigen::Index n = 32;
  const int draws = 10000;
  const NoiseModel model(white_from_sigma(1.0, 1.0), 1.0, n - 1);
  const NoiseSynthesizer synth(model, n);
  CVector mean;
  const CMatrix cov = sample_covariance(synth, 11, draws, n, &mean);
  EXPECT_LT(max_abs(cov - CMatrix::Identity(n, n)), 0.1);
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 4.0 / std::sqrt(double(draws)));
}

TEST(Synthesis, ColoredSampleCovarianceConverges) {
  const Eigen::Index n = 32;
  const NoiseModel model(power_law(1.0, -1.0, 1.0, n), 1.0, n - 1);
  const NoiseSynthesizer synth(model, n);
  const CMatrix om = build_covariance(model, n).dense();
  const CMatrix cov = sample_covariance(synth, 12, 10000, n);
  EXPECT_LT(max_abs(cov - om), 0.1 * max_abs(om));
}

TEST(Synthesis, CholeskyFallbackMatchesCovariance) {
  // random-walk-like spectrum: the circulant embedding goes negative
  const Eigen::Index n = 16;
  const NoiseModel model(power_law(1.0, -2.0, 1.0, n), 1.0, n - 1);
  const NoiseSynthesizer synth(model, n);
  EXPECT_FALSE(synth.uses_circulant_embedding());
  const CMatrix om = build_covariance(model, n).dense();
  const CMatrix cov = sample_covariance(synth, 13, 10000, n);
  EXPECT_LT(max_abs(cov - om), 0.1 * max_abs(om));
}

TEST(Synthesis, CirculantPathForModerateColor) {
  const NoiseModel model(power_law(1.0, -1.0, 1.0, 32), 1.0, 31);
  EXPECT_TRUE(NoiseSynthesizer(model, 32).uses_circulant_embedding());
}
