#include "lsqcolor/spectral.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "fft.hpp"

namespace lsqcolor {

namespace {

constexpr Eigen::Index kDirectConvolutionLimit = 1 << 14;

double parity(long k) { return (k % 2 == 0) ? 1.0 : -1.0; }

void require_grid(std::size_t m, Eigen::Index needed, const char* what) {
  if (m == 0 || Eigen::Index(m) < needed) {
    std::ostringstream os;
    os << what << ": grid of " << m << " points is coarser than the required " << needed;
    throw Error(ErrorKind::GridTooCoarse, os.str());
  }
}

}  // namespace

ZeroExtendedSequence::ZeroExtendedSequence(long support_start, CMatrix block)
    : start_(support_start), block_(std::move(block)) {
  if (block_.rows() < 1 || block_.cols() < 1)
    throw Error(ErrorKind::InvalidArgument, "sequence block must be non-empty");
}

ZeroExtendedSequence ZeroExtendedSequence::from_design(const DesignMatrix& j) {
  return ZeroExtendedSequence(j.origin_index(), j.entries());
}

ZeroExtendedSequence ZeroExtendedSequence::from_signal(const SampledSignal& m) {
  return ZeroExtendedSequence(m.origin_index(), m.values());
}

ZeroExtendedSequence ZeroExtendedSequence::impulse(long at, cplx value) {
  CMatrix b(1, 1);
  b(0, 0) = value;
  return ZeroExtendedSequence(at, std::move(b));
}

cplx ZeroExtendedSequence::at(long k, Eigen::Index l) const noexcept {
  if (k < start_ || k > support_end() || l < 0 || l >= block_.cols()) return {};
  return block_(k - start_, l);
}

CMatrix ZeroExtendedSequence::window(long first, long last) const {
  CMatrix out = CMatrix::Zero(std::max<long>(last - first + 1, 0), block_.cols());
  const long lo = std::max(first, start_);
  const long hi = std::min(last, support_end());
  if (lo <= hi) out.middleRows(lo - first, hi - lo + 1) = block_.middleRows(lo - start_, hi - lo + 1);
  return out;
}

Eigen::VectorXd frequency_grid(std::size_t m, double dt) {
  Eigen::VectorXd f(Eigen::Index(m), 1);
  for (std::size_t j = 0; j < m; ++j) f(Eigen::Index(j)) = -0.5 / dt + double(j) / (double(m) * dt);
  return f;
}

Spectrum dtft(const ZeroExtendedSequence& g, double dt, std::size_t grid_size) {
  require_grid(grid_size, g.length(), "dtft");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  Spectrum s;
  s.dt = dt;
  s.freqs = frequency_grid(grid_size, dt);
  s.values.resize(Eigen::Index(grid_size), g.columns());
  std::vector<cplx> buf(grid_size);
  for (Eigen::Index l = 0; l < g.columns(); ++l) {
    std::fill(buf.begin(), buf.end(), cplx{});
    // f_j dt = -1/2 + j/M, so exp(-i 2 pi k f_j dt) = (-1)^k exp(-i 2 pi k j / M)
    for (Eigen::Index r = 0; r < g.length(); ++r) {
      const long k = g.support_start() + long(r);
      buf[detail::wrap_index(k, grid_size)] += parity(k) * g.block()(r, l);
    }
    detail::fft_forward(buf);
    for (std::size_t j = 0; j < grid_size; ++j) s.values(Eigen::Index(j), l) = dt * buf[j];
  }
  return s;
}

ZeroExtendedSequence idtft(const Spectrum& h, long k_first, long k_last) {
  if (k_last < k_first) throw Error(ErrorKind::InvalidArgument, "idtft: empty lag range");
  const auto m = std::size_t(h.values.rows());
  if (m == 0 || h.freqs.size() != h.values.rows())
    throw Error(ErrorKind::DimensionMismatch, "idtft: spectrum grid and values disagree");
  const double w = band_weight(m, h.dt);
  CMatrix out(k_last - k_first + 1, h.values.cols());
  std::vector<cplx> buf(m);
  for (Eigen::Index l = 0; l < h.values.cols(); ++l) {
    for (std::size_t j = 0; j < m; ++j) buf[j] = h.values(Eigen::Index(j), l);
    detail::fft_backward(buf);
    for (long k = k_first; k <= k_last; ++k)
      out(k - k_first, l) = w * parity(k) * buf[detail::wrap_index(k, m)];
  }
  return ZeroExtendedSequence(k_first, std::move(out));
}

CMatrix matrix_scalar_product(const ZeroExtendedSequence& a, const ZeroExtendedSequence& b) {
  const long lo = std::max(a.support_start(), b.support_start());
  const long hi = std::min(a.support_end(), b.support_end());
  if (lo > hi) return CMatrix::Zero(a.columns(), b.columns());
  return a.window(lo, hi).adjoint() * b.window(lo, hi);
}

CMatrix parseval_product(const ZeroExtendedSequence& a, const ZeroExtendedSequence& b, double dt,
                         std::size_t grid_size) {
  // exact only when no nonzero lag difference aliases onto a multiple of M
  const long lo = std::min(a.support_start(), b.support_start());
  const long hi = std::max(a.support_end(), b.support_end());
  require_grid(grid_size, hi - lo + 1, "parseval_product");
  const Spectrum fa = dtft(a, dt, grid_size);
  const Spectrum fb = dtft(b, dt, grid_size);
  return (band_weight(grid_size, dt) / dt) * (fa.values.adjoint() * fb.values);
}

ZeroExtendedSequence gen_convolve_direct(const ZeroExtendedSequence& q,
                                         const ZeroExtendedSequence& x) {
  if (q.columns() != 1) throw Error(ErrorKind::DimensionMismatch, "convolution kernel must have one column");
  CMatrix out = CMatrix::Zero(q.length() + x.length() - 1, x.columns());
  for (Eigen::Index i = 0; i < x.length(); ++i)
    for (Eigen::Index r = 0; r < q.length(); ++r) out.row(i + r) += q.block()(r, 0) * x.block().row(i);
  return ZeroExtendedSequence(q.support_start() + x.support_start(), std::move(out));
}

ZeroExtendedSequence gen_convolve(const ZeroExtendedSequence& q, const ZeroExtendedSequence& x) {
  if (q.columns() != 1) throw Error(ErrorKind::DimensionMismatch, "convolution kernel must have one column");
  if (q.length() * x.length() <= kDirectConvolutionLimit) return gen_convolve_direct(q, x);

  const Eigen::Index out_len = q.length() + x.length() - 1;
  const auto size = std::bit_ceil(std::size_t(out_len));
  std::vector<cplx> kernel(size), column(size);
  for (Eigen::Index r = 0; r < q.length(); ++r) kernel[std::size_t(r)] = q.block()(r, 0);
  detail::fft_forward(kernel);
  CMatrix out(out_len, x.columns());
  for (Eigen::Index l = 0; l < x.columns(); ++l) {
    std::fill(column.begin(), column.end(), cplx{});
    for (Eigen::Index r = 0; r < x.length(); ++r) column[std::size_t(r)] = x.block()(r, l);
    detail::fft_forward(column);
    for (std::size_t j = 0; j < size; ++j) column[j] *= kernel[j];
    detail::fft_backward(column);
    for (Eigen::Index r = 0; r < out_len; ++r) out(r, l) = column[std::size_t(r)] / double(size);
  }
  return ZeroExtendedSequence(q.support_start() + x.support_start(), std::move(out));
}

ZeroExtendedSequence inverse_kernel(const Spectrum& kernel_spectrum, long pad) {
  if (pad < 0) throw Error(ErrorKind::InvalidArgument, "pad must be nonnegative");
  if (kernel_spectrum.values.cols() != 1)
    throw Error(ErrorKind::DimensionMismatch, "kernel spectrum must have one column");
  const auto m = std::size_t(kernel_spectrum.values.rows());
  require_grid(m, 2 * pad + 1, "inverse_kernel");
  const Eigen::ArrayXd mag = kernel_spectrum.values.col(0).array().abs();
  const double peak = mag.maxCoeff();
  const double low = mag.minCoeff();
  if (!(peak > 0.0) || low < kSpectralFloorRel * peak) {
    std::ostringstream os;
    os << "kernel spectrum min/max = " << (peak > 0 ? low / peak : 0.0) << " below "
       << kSpectralFloorRel;
    throw Error(ErrorKind::SpectralZero, os.str());
  }
  Spectrum inv = kernel_spectrum;
  const double dt2 = kernel_spectrum.dt * kernel_spectrum.dt;
  inv.values = (dt2 / kernel_spectrum.values.array()).matrix();
  return idtft(inv, -pad, pad);
}

std::size_t default_deconvolution_grid(Eigen::Index kernel_length, long pad) {
  return std::bit_ceil(std::size_t(8 * (2 * pad + 1 + kernel_length)));
}

ZeroExtendedSequence gen_deconvolve(const ZeroExtendedSequence& q, const ZeroExtendedSequence& y,
                                    long pad, std::size_t grid_size) {
  if (pad < 0) throw Error(ErrorKind::InvalidArgument, "pad must be nonnegative");
  if (grid_size == 0) grid_size = default_deconvolution_grid(q.length(), pad);
  // dt cancels between dt^2 / F{Q} and the band integral; unit step is used.
  const Spectrum fq = dtft(q, 1.0, grid_size);
  return gen_convolve(inverse_kernel(fq, pad), y);
}

}  // namespace lsqcolor
