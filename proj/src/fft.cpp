#include "odbd/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace odbd::fft {

namespace {

std::mutex planner_mutex;

void transform(Eigen::VectorXcd& data, int sign) {
  if (data.size() == 0) return;
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // The FFTW planner is not thread safe; execution is.
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex);
  fftw_destroy_plan(plan);
}

}  // namespace

void forward(Eigen::VectorXcd& data) { transform(data, FFTW_FORWARD); }

void inverse(Eigen::VectorXcd& data) { transform(data, FFTW_BACKWARD); }

std::size_t good_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t candidate = n;; ++candidate) {
    std::size_t m = candidate;
    for (const std::size_t p : {2u, 3u, 5u, 7u})
      while (m % p == 0) m /= p;
    if (m == 1) return candidate;
  }
}

}  // namespace odbd::fft
