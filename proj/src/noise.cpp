#include "lsqcolor/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "fft.hpp"
#include "lsqcolor/spectral.hpp"

namespace lsqcolor {

namespace {

struct PsdEvaluator {
  double f;
  double operator()(const psd::White& w) const { return w.level; }
  double operator()(const psd::PowerLaw& p) const {
    return p.amplitude * std::pow(std::max(std::abs(f), p.f_min), p.exponent);
  }
  double operator()(const psd::Tabulated& t) const {
    const auto& pts = t.points;
    const double x = pts.front().first >= 0.0 ? std::abs(f) : f;
    if (x <= pts.front().first) return pts.front().second;
    if (x >= pts.back().first) return pts.back().second;
    const auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                                     [](double v, const auto& p) { return v < p.first; });
    const auto lo = hi - 1;
    const double u = (x - lo->first) / (hi->first - lo->first);
    return (1.0 - u) * lo->second + u * hi->second;
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool cholesky_with_jitter(const CMatrix& a, double jitter, CMatrix& lower) {
  Eigen::LLT<CMatrix> llt(a + jitter * CMatrix::Identity(a.rows(), a.cols()));
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  return (lower.diagonal().real().array() > 0.0).all();
}

}  // namespace

psd::White white_from_sigma(double sigma, double dt) { return psd::White{sigma * sigma * dt}; }

psd::PowerLaw power_law(double amplitude, double exponent, double dt, std::size_t n) {
  return psd::PowerLaw{amplitude, exponent, 1.0 / (double(n) * dt * 10.0)};
}

void validate_psd(const PsdSpec& spec) {
  if (auto* w = std::get_if<psd::White>(&spec)) {
    if (!(w->level >= 0.0) || !std::isfinite(w->level))
      throw Error(ErrorKind::InvalidArgument, "white level must be finite and >= 0");
  } else if (auto* p = std::get_if<psd::PowerLaw>(&spec)) {
    if (!(p->amplitude >= 0.0) || !std::isfinite(p->amplitude))
      throw Error(ErrorKind::InvalidArgument, "power-law amplitude must be finite and >= 0");
    if (!(p->exponent >= -2.0 && p->exponent <= 2.0))
      throw Error(ErrorKind::InvalidArgument, "power-law exponent must lie in [-2, 2]");
    if (!(p->f_min > 0.0) || !std::isfinite(p->f_min))
      throw Error(ErrorKind::InvalidArgument, "power-law f_min must be positive");
  } else {
    const auto& t = std::get<psd::Tabulated>(spec);
    if (t.points.empty()) throw Error(ErrorKind::InvalidArgument, "tabulated PSD has no points");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto [f, s] = t.points[i];
      if (!std::isfinite(f) || !std::isfinite(s) || s < 0.0)
        throw Error(ErrorKind::InvalidArgument, "tabulated PSD values must be finite and >= 0");
      if (i > 0 && !(f > t.points[i - 1].first))
        throw Error(ErrorKind::InvalidArgument, "tabulated PSD frequencies must increase");
    }
  }
}

double evaluate_psd(const PsdSpec& spec, double f) { return std::visit(PsdEvaluator{f}, spec); }

std::vector<cplx> psd_to_correlation(const PsdFunction& s, std::size_t max_lag, double dt,
                                     std::size_t grid_size) {
  if (grid_size < 2 * max_lag + 1)
    throw Error(ErrorKind::GridTooCoarse, "correlation grid must exceed twice the lag count");
  Spectrum spec;
  spec.dt = dt;
  spec.freqs = frequency_grid(grid_size, dt);
  spec.values.resize(Eigen::Index(grid_size), 1);
  for (Eigen::Index j = 0; j < spec.freqs.size(); ++j) spec.values(j, 0) = s(spec.freqs(j));
  const auto r = idtft(spec, 0, long(max_lag));
  std::vector<cplx> out(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = r.block()(Eigen::Index(k), 0);
  return out;
}

NoiseModel::NoiseModel(PsdSpec spec, double dt, std::size_t max_lag, NoiseModelOptions options)
    : spec_(std::move(spec)), dt_(dt) {
  validate_psd(spec_);
  if (!(dt_ > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  if (!(options.floor_rel > 0.0 && options.floor_rel < 1.0))
    throw Error(ErrorKind::InvalidArgument, "floor_rel must lie in (0, 1)");
  const std::size_t grid =
      std::max(options.quadrature_points, std::bit_ceil(4 * (max_lag + 1)));

  const auto freqs = frequency_grid(grid, dt_);
  for (Eigen::Index j = 0; j < freqs.size(); ++j) max_ = std::max(max_, evaluate_psd(spec_, freqs(j)));
  max_ = std::max(max_, evaluate_psd(spec_, 0.0));
  if (auto* p = std::get_if<psd::PowerLaw>(&spec_)) max_ = std::max(max_, evaluate_psd(spec_, p->f_min));
  floor_ = options.floor_rel * max_;

  if (silent()) {
    correlation_.assign(max_lag + 1, cplx{});
    return;
  }
  correlation_ = psd_to_correlation(psd_function(), max_lag, dt_, grid);
  correlation_[0] = correlation_[0].real();
}

double NoiseModel::psd(double f) const { return std::max(evaluate_psd(spec_, f), floor_); }

PsdFunction NoiseModel::psd_function() const {
  return [spec = spec_, floor = floor_](double f) {
    return std::max(evaluate_psd(spec, f), floor);
  };
}

cplx NoiseModel::correlation_at(long k) const {
  const auto idx = std::size_t(std::abs(k));
  if (idx >= correlation_.size())
    throw Error(ErrorKind::DimensionMismatch,
                "lag " + std::to_string(k) + " beyond tabulated correlation");
  return k >= 0 ? correlation_[idx] : std::conj(correlation_[idx]);
}

ToeplitzCovariance::ToeplitzCovariance(std::vector<cplx> lags) : lags_(std::move(lags)) {
  if (lags_.empty()) throw Error(ErrorKind::InvalidArgument, "covariance needs at least one lag");
  const double r0 = lags_[0].real();
  if (!(r0 > 0.0) || std::abs(lags_[0].imag()) > 1e-12 * r0)
    throw Error(ErrorKind::NotPSD, "R(0) must be real and positive");
  const CMatrix omega = dense();
  if (cholesky_with_jitter(omega, 0.0, lower_)) return;
  jitter_ = 1e-10 * r0;
  if (!cholesky_with_jitter(omega, jitter_, lower_))
    throw Error(ErrorKind::NotPSD, "Toeplitz covariance is not positive semidefinite");
}

CMatrix ToeplitzCovariance::dense() const {
  const auto n = size();
  CMatrix omega(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      omega(i, j) = i >= j ? lags_[std::size_t(i - j)] : std::conj(lags_[std::size_t(j - i)]);
  return omega;
}

ToeplitzCovariance build_covariance(const NoiseModel& model, Eigen::Index n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "covariance dimension must be >= 1");
  if (std::size_t(n - 1) > model.max_lag()) {
    std::ostringstream os;
    os << "noise model tabulates " << model.max_lag() << " lags, need " << n - 1;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  const auto& r = model.correlation();
  return ToeplitzCovariance(std::vector<cplx>(r.begin(), r.begin() + n));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x632BE59BD9B4E019ULL));
}

NoiseSynthesizer::NoiseSynthesizer(const NoiseModel& model, Eigen::Index n)
    : dt_(model.dt()), n_(n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  if (std::size_t(n - 1) > model.max_lag())
    throw Error(ErrorKind::DimensionMismatch, "noise model has too few correlation lags");
  if (model.silent()) {
    silent_ = true;
    return;
  }
  std::vector<cplx> r(model.correlation().begin(), model.correlation().begin() + n);
  const double r0 = r[0].real();
  real_ = std::all_of(r.begin(), r.end(),
                      [r0](const cplx& v) { return std::abs(v.imag()) <= 1e-12 * r0; });
  if (real_)
    for (auto& v : r) v = v.real();

  if (n == 1) {
    sqrt_eigen_ = {std::sqrt(r0)};
    return;
  }
  // circulant of size 2(n-1): R(0..n-1) followed by conj(R(n-2..1))
  const std::size_t m = 2 * std::size_t(n - 1);
  std::vector<cplx> c(m);
  for (std::size_t k = 0; k < std::size_t(n); ++k) c[k] = r[k];
  for (std::size_t k = 1; k + 1 < std::size_t(n); ++k) c[m - k] = std::conj(r[k]);
  detail::fft_forward(c);
  double lmax = 0.0, lmin = 0.0;
  for (const auto& v : c) {
    lmax = std::max(lmax, v.real());
    lmin = std::min(lmin, v.real());
  }
  if (lmin >= -1e-10 * lmax) {
    sqrt_eigen_.resize(m);
    for (std::size_t j = 0; j < m; ++j)
      sqrt_eigen_[j] = std::sqrt(std::max(c[j].real(), 0.0) / double(m));
    return;
  }
  try {
    lower_ = ToeplitzCovariance(std::move(r)).cholesky_lower();
  } catch (const Error& e) {
    throw Error(ErrorKind::EmbeddingFailed,
                std::string("circulant embedding negative and Cholesky failed: ") + e.what());
  }
}

SampledSignal NoiseSynthesizer::draw(std::uint64_t seed, std::uint64_t trial) const {
  if (silent_) return SampledSignal(dt_, CVector::Zero(n_));
  std::mt19937_64 rng(derive_seed(seed, trial));
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector e(n_);
  const double scale = real_ ? 1.0 : std::sqrt(0.5);

  if (!sqrt_eigen_.empty()) {
    if (n_ == 1) {
      const double a = normal(rng);
      const double b = real_ ? 0.0 : normal(rng);
      e(0) = sqrt_eigen_[0] * scale * cplx(a, b);
      return SampledSignal(dt_, std::move(e));
    }
    std::vector<cplx> z(sqrt_eigen_.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double a = normal(rng);
      const double b = normal(rng);
      z[j] = sqrt_eigen_[j] * scale * cplx(a, b);
    }
    detail::fft_backward(z);
    for (Eigen::Index k = 0; k < n_; ++k)
      e(k) = real_ ? cplx(z[std::size_t(k)].real(), 0.0) : z[std::size_t(k)];
    return SampledSignal(dt_, std::move(e));
  }

  CVector w(n_);
  for (Eigen::Index k = 0; k < n_; ++k) {
    const double a = normal(rng);
    const double b = real_ ? 0.0 : normal(rng);
    w(k) = scale * cplx(a, b);
  }
  e = lower_ * w;
  if (real_) e = e.real().cast<cplx>();
  return SampledSignal(dt_, std::move(e));
}

SampledSignal synthesize_noise(const NoiseModel& model, Eigen::Index n, std::uint64_t seed,
                               std::uint64_t trial) {
  return NoiseSynthesizer(model, n).draw(seed, trial);
}

}  // namespace lsqcolor
