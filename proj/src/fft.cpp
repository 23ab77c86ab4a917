#include "fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace lsqcolor::detail {
namespace {

// The FFTW planner is not re-entrant; execution of a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void transform(std::vector<std::complex<double>>& data, int sign) {
  if (data.size() <= 1) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(int(data.size()), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

void fft_forward(std::vector<std::complex<double>>& data) { transform(data, FFTW_FORWARD); }
void fft_backward(std::vector<std::complex<double>>& data) { transform(data, FFTW_BACKWARD); }

}  // namespace lsqcolor::detail
