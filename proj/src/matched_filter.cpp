#include "lsqcolor/matched_filter.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace lsqcolor {

namespace {

struct BandSamples {
  Spectrum template_spectrum;
  Eigen::VectorXd s;
};

Eigen::VectorXd sample_psd(const PsdFunction& s, const Eigen::VectorXd& freqs) {
  Eigen::VectorXd out(freqs.size());
  for (Eigen::Index i = 0; i < freqs.size(); ++i) out(i) = s(freqs(i));
  return out;
}

void require_positive_psd(const Eigen::VectorXd& s) {
  const double peak = s.maxCoeff();
  const double low = s.minCoeff();
  if (!(peak > 0.0) || !(low >= kSpectralFloorRel * peak)) {
    std::ostringstream os;
    os << "PSD on the band has min " << low << " against max " << peak;
    throw Error(ErrorKind::SpectralZero, os.str());
  }
}

void require_single_column(const ZeroExtendedSequence& g) {
  if (g.columns() != 1) throw Error(ErrorKind::DimensionMismatch, "template must have one column");
}

BandSamples template_band(const ZeroExtendedSequence& g, const PsdFunction& s, double dt,
                          std::size_t grid_size) {
  require_single_column(g);
  BandSamples b{dtft(g, dt, grid_size), {}};
  b.s = sample_psd(s, b.template_spectrum.freqs);
  require_positive_psd(b.s);
  return b;
}

/// int |F{g}|^2 / S df
double information(const BandSamples& b) {
  const auto& fg = b.template_spectrum.values.col(0);
  return band_weight(std::size_t(b.s.size()), b.template_spectrum.dt) *
         (fg.cwiseAbs2().array() / b.s.array()).sum();
}

void require_model(const NoiseModel& model) {
  if (model.silent()) throw Error(ErrorKind::SpectralZero, "noise PSD is identically zero");
}

}  // namespace

Estimate spectral_gls_1d(const ZeroExtendedSequence& g_template, const SampledSignal& m,
                         const PsdFunction& s, std::size_t grid_size) {
  require_single_column(g_template);
  const long first = m.origin_index();
  const long last = first + long(m.size()) - 1;
  if (g_template.support_start() < first || g_template.support_end() > last)
    throw Error(ErrorKind::DimensionMismatch, "template support lies outside the data window");
  const double dt = m.dt();
  const auto band = template_band(g_template, s, dt, grid_size);
  const Spectrum fm = dtft(ZeroExtendedSequence::from_signal(m), dt, grid_size);
  const auto& fg = band.template_spectrum.values.col(0);
  const double w = band_weight(grid_size, dt);

  const double info = information(band);
  const cplx proj = w * (fg.conjugate().array() * fm.values.col(0).array() / band.s.array()).sum();

  Estimate est;
  est.method = Method::GlsSpectral;
  est.x_star = CVector::Constant(1, proj / info);
  est.covariance = CMatrix::Constant(1, 1, 1.0 / info);
  est.condition = {1.0, "band_quadrature"};
  const Eigen::ArrayXcd fr = fm.values.col(0).array() - est.x_star(0) * fg.array();
  est.residual_norm = std::sqrt(w * (fr.abs2() / band.s.array()).sum());
  return est;
}

Estimate spectral_gls_1d(const ZeroExtendedSequence& g_template, const SampledSignal& m,
                         const NoiseModel& model, std::size_t grid_size) {
  require_same_dt(m.dt(), model.dt(), "signal vs noise model");
  require_model(model);
  return spectral_gls_1d(g_template, m, model.psd_function(), grid_size);
}

double matched_gain(const ZeroExtendedSequence& g_template, const NoiseModel& model,
                    std::size_t grid_size) {
  require_model(model);
  return 1.0 / information(template_band(g_template, model.psd_function(), model.dt(), grid_size));
}

MatchedFilter build_matched_filter(const ZeroExtendedSequence& g_template, const NoiseModel& model,
                                   std::size_t grid_size, double t0, std::optional<double> gain,
                                   std::string label) {
  require_model(model);
  const auto band = template_band(g_template, model.psd_function(), model.dt(), grid_size);
  MatchedFilter filter;
  filter.gain = gain.value_or(1.0 / information(band));
  filter.t0 = t0;
  filter.template_label = std::move(label);
  filter.spectrum = band.template_spectrum;
  const auto& freqs = band.template_spectrum.freqs;
  for (Eigen::Index i = 0; i < freqs.size(); ++i) {
    const cplx phase = std::polar(1.0, -2.0 * std::numbers::pi * freqs(i) * t0);
    filter.spectrum.values(i, 0) =
        filter.gain * std::conj(band.template_spectrum.values(i, 0)) / band.s(i) * phase;
  }
  return filter;
}

cplx apply_filter(const MatchedFilter& filter, const SampledSignal& m) {
  const auto& h = filter.spectrum;
  if (std::abs(h.dt - m.dt()) > 1e-12 * h.dt)
    throw Error(ErrorKind::GridMismatch, "signal time step differs from the filter's");
  if (h.grid_size() < m.size())
    throw Error(ErrorKind::GridMismatch, "filter grid is coarser than the signal length");
  const auto grid = std::size_t(h.grid_size());
  const Spectrum fm = dtft(ZeroExtendedSequence::from_signal(m), m.dt(), grid);
  cplx acc{};
  for (Eigen::Index i = 0; i < h.freqs.size(); ++i)
    acc += h.values(i, 0) * fm.values(i, 0) *
           std::polar(1.0, 2.0 * std::numbers::pi * h.freqs(i) * filter.t0);
  return band_weight(grid, h.dt) * acc;
}

MismatchResult psd_mismatch_variance(const ZeroExtendedSequence& g_template,
                                     const NoiseModel& model, const PsdFunction& w, double epsilon,
                                     std::size_t grid_size) {
  require_model(model);
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorKind::InvalidArgument, "epsilon must be finite and >= 0");
  const auto band = template_band(g_template, model.psd_function(), model.dt(), grid_size);
  const Eigen::ArrayXd s = band.s.array();
  const Eigen::ArrayXd wv = sample_psd(w, band.template_spectrum.freqs).array();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!std::isfinite(wv(i)) || std::abs(wv(i)) > s(i) * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "|w| exceeds S at f=" << band.template_spectrum.freqs(i);
      throw Error(ErrorKind::PerturbationTooLarge, os.str());
    }
  }
  const Eigen::ArrayXd used = s + epsilon * wv;
  require_positive_psd(used.matrix());

  const double dw = band_weight(grid_size, model.dt());
  const Eigen::ArrayXd g2 = band.template_spectrum.values.col(0).cwiseAbs2().array();
  const double a = dw * (g2 / s).sum();
  const double a_used = dw * (g2 / used).sum();
  const double noise_used = dw * (g2 * s / used.square()).sum();  // sandwich under the true S
  const double b = dw * (g2 * wv / s.square()).sum();
  const double c = dw * (g2 * wv.square() / s.cube()).sum();

  MismatchResult r;
  r.v_true = 1.0 / a;
  r.v_used = epsilon == 0.0 ? r.v_true : noise_used / (a_used * a_used);
  r.measured_rel_excess = (r.v_used - r.v_true) / r.v_true;
  r.predicted_rel_excess = epsilon * epsilon * (r.v_true * c - r.v_true * r.v_true * b * b);
  r.large_epsilon = epsilon > 0.3;
  return r;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "slope needs at least two paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw Error(ErrorKind::InvalidArgument, "log-log slope needs positive values");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = double(x.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorKind::InvalidArgument, "slope needs distinct x values");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace lsqcolor
