#pragma once

// One-parameter spectral GLS, the matched filter, and sensitivity of the
// estimator variance to a misspecified PSD.

#include <cstddef>
#include <optional>
#include <string>

#include "lsqcolor/noise.hpp"
#include "lsqcolor/spectral.hpp"

namespace lsqcolor {

/// x* = (int |F{g}|^2/S)^-1 int conj(F{g}) F{m}/S, V = (int |F{g}|^2/S)^-1.
Estimate spectral_gls_1d(const ZeroExtendedSequence& g_template, const SampledSignal& m,
                         const NoiseModel& model, std::size_t grid_size);
Estimate spectral_gls_1d(const ZeroExtendedSequence& g_template, const SampledSignal& m,
                         const PsdFunction& s, std::size_t grid_size);

/// K = (int |F{g}|^2 / S df)^-1
double matched_gain(const ZeroExtendedSequence& g_template, const NoiseModel& model,
                    std::size_t grid_size);

struct MatchedFilter {
  Spectrum spectrum;  ///< F{h}(f) = K conj(F{g}(f)) / S(f) exp(-i 2 pi f t0)
  double gain = 1.0;
  double t0 = 0.0;
  std::string template_label;
};

MatchedFilter build_matched_filter(const ZeroExtendedSequence& g_template, const NoiseModel& model,
                                   std::size_t grid_size, double t0 = 0.0,
                                   std::optional<double> gain = std::nullopt,
                                   std::string label = "template");

/// int F{h} F{m} exp(i 2 pi f t0) df: the filter output at t0.
cplx apply_filter(const MatchedFilter& filter, const SampledSignal& m);

struct MismatchResult {
  double v_used = 0.0;  ///< true variance of the estimator built with S + eps w
  double v_true = 0.0;  ///< variance of the estimator built with S
  double measured_rel_excess = 0.0;
  double predicted_rel_excess = 0.0;  ///< eps^2 [V int w^2 |F|^2/S^3 - V^2 (int w |F|^2/S^2)^2]
  bool large_epsilon = false;         ///< eps above 0.3, expansion unreliable
};

MismatchResult psd_mismatch_variance(const ZeroExtendedSequence& g_template,
                                     const NoiseModel& model, const PsdFunction& w, double epsilon,
                                     std::size_t grid_size);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace lsqcolor
