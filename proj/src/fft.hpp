#pragma once

#include <complex>
#include <vector>

namespace lsqcolor::detail {

/// In-place unnormalized DFT: forward uses exp(-i 2 pi j k / n), backward exp(+...).
void fft_forward(std::vector<std::complex<double>>& data);
void fft_backward(std::vector<std::complex<double>>& data);

/// floor modulo for possibly negative k
inline std::size_t wrap_index(long k, std::size_t n) {
  const long m = long(n);
  long r = k % m;
  return std::size_t(r < 0 ? r + m : r);
}

}  // namespace lsqcolor::detail
