#pragma once

// Discrete-time Fourier analysis of finitely supported sequences.
//
// Conventions:
//   F{G}_l(f)   = dt * sum_k G(k, l) exp(-i 2 pi k f dt)
//   F^-1{h}_k   = integral over [-1/(2dt), 1/(2dt)) of h(f) exp(+i 2 pi k f dt) df
// Band integrals are evaluated on the uniform grid f_j = -1/(2dt) + j/(M dt),
// j = 0..M-1, with the periodic trapezoid rule (all weights 1/(M dt)).

#include <cstddef>

#include "lsqcolor/model.hpp"

namespace lsqcolor {

/// Sequence over Z x [0, p) that is zero outside [support_start, support_end].
class ZeroExtendedSequence {
 public:
  ZeroExtendedSequence(long support_start, CMatrix block);
  /// J-breve / m-breve: rows of the matrix placed at indices origin, origin+1, ...
  static ZeroExtendedSequence from_design(const DesignMatrix& j);
  static ZeroExtendedSequence from_signal(const SampledSignal& m);
  static ZeroExtendedSequence impulse(long at, cplx value = 1.0);

  long support_start() const noexcept { return start_; }
  long support_end() const noexcept { return start_ + long(block_.rows()) - 1; }
  Eigen::Index length() const noexcept { return block_.rows(); }
  Eigen::Index columns() const noexcept { return block_.cols(); }
  const CMatrix& block() const noexcept { return block_; }

  /// Value at (k, l); zero off support.
  cplx at(long k, Eigen::Index l = 0) const noexcept;
  /// Copy of the values on [first, last], zero-filled where off support.
  CMatrix window(long first, long last) const;

 private:
  long start_;
  CMatrix block_;
};

struct Spectrum {
  double dt = 1.0;
  Eigen::VectorXd freqs;  ///< M points spanning [-1/(2dt), 1/(2dt))
  CMatrix values;         ///< M x p

  Eigen::Index grid_size() const noexcept { return freqs.size(); }
};

Eigen::VectorXd frequency_grid(std::size_t m, double dt);

/// Band quadrature weight 1/(M dt) of the periodic trapezoid rule.
inline double band_weight(std::size_t m, double dt) { return 1.0 / (double(m) * dt); }

Spectrum dtft(const ZeroExtendedSequence& g, double dt, std::size_t grid_size);

/// Inverse DTFT sampled at k in [k_first, k_last].
ZeroExtendedSequence idtft(const Spectrum& h, long k_first, long k_last);

/// <A|B>(k, l) = sum_j conj(A(j, k)) B(j, l)
CMatrix matrix_scalar_product(const ZeroExtendedSequence& a, const ZeroExtendedSequence& b);

/// (1/dt) * band integral of conj(F{A}) F{B}.
CMatrix parseval_product(const ZeroExtendedSequence& a, const ZeroExtendedSequence& b, double dt,
                         std::size_t grid_size);

/// (Q * X)(k, l) = sum_i Q(k - i) X(i, l). Q must have one column.
ZeroExtendedSequence gen_convolve(const ZeroExtendedSequence& q, const ZeroExtendedSequence& x);

/// Direct O(n m) double sum, no FFT.
ZeroExtendedSequence gen_convolve_direct(const ZeroExtendedSequence& q,
                                         const ZeroExtendedSequence& x);

/// Smallest |F{Q}| allowed relative to max |F{Q}| before a kernel is rejected.
inline constexpr double kSpectralFloorRel = 1e-10;

/// Lags [-pad, pad] of F^-1{dt^2 / spectrum}, where `kernel_spectrum` is the
/// DTFT of the forward kernel (single column) on a grid of at least 2 pad + 1
/// points. Throws SpectralZero when the spectrum has a near-null.
ZeroExtendedSequence inverse_kernel(const Spectrum& kernel_spectrum, long pad);

/// Grid used by gen_deconvolve when none is given.
std::size_t default_deconvolution_grid(Eigen::Index kernel_length, long pad);

/// L_Q^-1(Y) with the inverse kernel truncated to lags |k| <= pad. The result
/// lives on Y's support widened by pad on both sides.
ZeroExtendedSequence gen_deconvolve(const ZeroExtendedSequence& q, const ZeroExtendedSequence& y,
                                    long pad, std::size_t grid_size = 0);

}  // namespace lsqcolor
