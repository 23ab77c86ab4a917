#pragma once

// Stationary Gaussian noise: PSD families, correlation via Wiener-Khintchine,
// Toeplitz covariance and synthetic draws.

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "lsqcolor/model.hpp"

namespace lsqcolor {

namespace psd {
/// Constant S(f) = level.
struct White {
  double level = 1.0;
};
/// S(f) = amplitude * max(|f|, f_min)^exponent
struct PowerLaw {
  double amplitude = 1.0;
  double exponent = -1.0;
  double f_min = 0.0;
};
/// Piecewise-linear S through (frequency, value) points, clamped beyond the
/// table ends. A table with no negative frequency is mirrored to negative f.
struct Tabulated {
  std::vector<std::pair<double, double>> points;
};
}  // namespace psd

using PsdSpec = std::variant<psd::White, psd::PowerLaw, psd::Tabulated>;
using PsdFunction = std::function<double(double)>;

/// White noise of per-sample standard deviation sigma: S = sigma^2 dt.
psd::White white_from_sigma(double sigma, double dt);
/// Power law regularized at f_min = 1 / (10 n dt).
psd::PowerLaw power_law(double amplitude, double exponent, double dt, std::size_t n);

/// Raw value of the spec (no floor applied). Validates parameters.
double evaluate_psd(const PsdSpec& spec, double f);
void validate_psd(const PsdSpec& spec);

/// R(k dt) for k = 0..max_lag as the band integral of S(f) exp(i 2 pi k f dt)
/// on a `grid_size`-point grid. R(-k) = conj(R(k)).
std::vector<cplx> psd_to_correlation(const PsdFunction& s, std::size_t max_lag, double dt,
                                     std::size_t grid_size);

struct NoiseModelOptions {
  double floor_rel = 1e-12;                ///< S_floor = floor_rel * max S
  std::size_t quadrature_points = 1 << 18;  ///< grid for the correlation integrals
};

class NoiseModel {
 public:
  NoiseModel(PsdSpec spec, double dt, std::size_t max_lag, NoiseModelOptions options = {});

  /// S(f), floored at s_floor().
  double psd(double f) const;
  PsdFunction psd_function() const;

  const PsdSpec& spec() const noexcept { return spec_; }
  double dt() const noexcept { return dt_; }
  double s_floor() const noexcept { return floor_; }
  double s_max() const noexcept { return max_; }
  /// True for the all-zero PSD (noise-free data); such a model has no inverse.
  bool silent() const noexcept { return max_ == 0.0; }
  std::size_t max_lag() const noexcept { return correlation_.size() - 1; }
  /// R(0..max_lag)
  const std::vector<cplx>& correlation() const noexcept { return correlation_; }
  cplx correlation_at(long k) const;

 private:
  PsdSpec spec_;
  double dt_;
  double floor_ = 0.0;
  double max_ = 0.0;
  std::vector<cplx> correlation_;
};

/// Hermitian Toeplitz Omega(i, j) = R((i - j) dt), with its Cholesky factor.
class ToeplitzCovariance {
 public:
  /// lags = R(0), R(dt), ..., R((N-1) dt)
  explicit ToeplitzCovariance(std::vector<cplx> lags);

  Eigen::Index size() const noexcept { return Eigen::Index(lags_.size()); }
  const std::vector<cplx>& lags() const noexcept { return lags_; }
  CMatrix dense() const;
  /// Lower L with Omega + jitter I = L L'.
  const CMatrix& cholesky_lower() const noexcept { return lower_; }
  double jitter() const noexcept { return jitter_; }

 private:
  std::vector<cplx> lags_;
  CMatrix lower_;
  double jitter_ = 0.0;
};

ToeplitzCovariance build_covariance(const NoiseModel& model, Eigen::Index n);

/// Derives the stream seed for one Monte Carlo trial.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial);

/// Draws zero-mean Gaussian vectors with covariance Omega. Circulant
/// embedding when its spectrum is nonnegative, Cholesky otherwise. Real
/// correlation gives real draws.
class NoiseSynthesizer {
 public:
  NoiseSynthesizer(const NoiseModel& model, Eigen::Index n);

  SampledSignal draw(std::uint64_t seed, std::uint64_t trial = 0) const;
  bool uses_circulant_embedding() const noexcept { return !sqrt_eigen_.empty(); }

 private:
  double dt_;
  Eigen::Index n_;
  bool real_ = true;
  bool silent_ = false;
  std::vector<double> sqrt_eigen_;  // circulant path
  CMatrix lower_;                   // Cholesky path
};

SampledSignal synthesize_noise(const NoiseModel& model, Eigen::Index n, std::uint64_t seed,
                               std::uint64_t trial = 0);

}  // namespace lsqcolor
