// Minimal in-place FFTW wrapper over Eigen complex vectors.
#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace odbd::fft {

/// Unnormalised forward transform, X[k] = sum x[n] exp(-2 pi j k n / N).
void forward(Eigen::VectorXcd& data);

/// Unnormalised inverse transform (no 1/N factor).
void inverse(Eigen::VectorXcd& data);

/// Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t good_size(std::size_t n);

}  // namespace odbd::fft
