// Complex-baseband signal types, reference/echo synthesis and the
// fractional-delay line shared by synthesis and matched filtering.
#pragma once

#include "odbd/sensor_geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace odbd {

using Vector3d = Eigen::Vector3d;
using cdouble = std::complex<double>;

class SignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadarConfig {
  double carrier_freq = 100e6;   // Hz
  double c = kSpeedOfLight;      // m/s
  double sample_rate = 200e3;    // Hz
  double bandwidth = 100e3;      // Hz
  double cpi = 10.0;             // s
  double max_path = 6.0e6;       // m, longest echo path the reference must cover
  std::optional<GeodeticSite<>> transmitter;  // bistatic when set

  double wavelength() const { return c / carrier_freq; }
  bool bistatic() const { return transmitter.has_value(); }
  std::size_t cpi_samples() const;
  /// Reference samples kept ahead of the CPI so delayed lookups stay valid.
  std::size_t reference_margin() const;
  void validate() const;
};

/// Uniformly sampled complex signal. `epoch` is the time of sample 0 on the
/// scenario clock, which has t = 0 at the CPI centre.
struct SignalBuffer {
  Eigen::VectorXcd samples;
  double sample_rate = 0;
  double epoch = 0;

  Eigen::Index size() const { return samples.size(); }
  double time_of(Eigen::Index n) const { return epoch + double(n) / sample_rate; }
  double power() const;
};

/// Element positions in metres, ECI-aligned axes frozen at the CPI centre.
struct ArrayGeometry {
  std::vector<Vector3d> positions;

  std::size_t size() const { return positions.size(); }
  double max_extent() const;
  static ArrayGeometry single_element() { return {{Vector3d::Zero()}}; }
  static ArrayGeometry from_enu(const std::vector<Vector3d>& enu, const GeodeticSite<>& site,
                                double epoch, const GravityModel<>& g);
};

/// Cascade (pairwise) summation with O(log n) state. The result is the
/// balanced-tree sum of the inputs in arrival order.
template <typename T>
class PairwiseSum {
 public:
  void add(const T& x) {
    T carry = x;
    std::uint64_t c = count_;
    int level = 0;
    while (c & 1u) {
      carry = partial_[level] + carry;
      c >>= 1;
      ++level;
    }
    partial_[level] = carry;
    ++count_;
  }
  T total() const {
    T sum{};
    std::uint64_t c = count_;
    for (int level = 0; c != 0; ++level, c >>= 1)
      if (c & 1u) sum = partial_[level] + sum;
    return sum;
  }
  std::uint64_t count() const { return count_; }

 private:
  std::array<T, 64> partial_{};
  std::uint64_t count_ = 0;
};

/// Index of `from`'s sample 0 in `to`'s sample grid, snapped to an integer
/// when it is one up to rounding.
double sample_offset(const SignalBuffer& from, const SignalBuffer& to);

/// Reference signal oversampled 4x (band-limited FFT interpolation) and
/// read back with 4-point Lagrange cubic interpolation.
class FractionalDelayLine {
 public:
  static constexpr int kOversample = 4;

  explicit FractionalDelayLine(const SignalBuffer& reference);

  /// Value at a fractional index in the original sample grid.
  cdouble at(double index) const {
    const double pos = index * kOversample;
    const double base = std::floor(pos);
    const auto i = static_cast<Eigen::Index>(base);
    const double f = pos - base;
    const double w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
    return w0 * data_[i - 1] + w1 * data_[i] + w2 * data_[i + 1] + w3 * data_[i + 2];
  }
  bool valid(double index) const {
    const double pos = index * kOversample;
    return pos >= 1.0 && pos < double(data_.size() - 3);
  }
  const SignalBuffer& reference() const { return reference_; }
  double epoch() const { return reference_.epoch; }
  double sample_rate() const { return reference_.sample_rate; }

 private:
  SignalBuffer reference_;
  Eigen::VectorXcd data_;
};

/// Total echo path length [m] as a function of CPI time.
using PathFunction = std::function<double(double)>;
/// Unit arrival direction (ECI) as a function of CPI time.
using DirectionFunction = std::function<Vector3d(double)>;

/// Cubic path polynomial over one CPI: c0 + c1 t + c2 t^2 + c3 t^3.
class PathPolynomial {
 public:
  PathPolynomial() = default;
  PathPolynomial(const std::array<double, 4>& coeffs, double cpi) : coeffs_(coeffs), cpi_(cpi) {}

  static PathPolynomial monostatic(const SlantSeries<>& rx);
  static PathPolynomial bistatic(const SlantSeries<>& rx, const SlantSeries<>& tx);

  /// Drops every term above t^order.
  PathPolynomial truncated(int order) const;

  double value(double t) const {
    return coeffs_[0] + t * (coeffs_[1] + t * (coeffs_[2] + t * coeffs_[3]));
  }
  double rate(double t) const { return coeffs_[1] + t * (2.0 * coeffs_[2] + t * 3.0 * coeffs_[3]); }
  double cpi() const { return cpi_; }
  const std::array<double, 4>& coefficients() const { return coeffs_; }

 private:
  std::array<double, 4> coeffs_{};
  double cpi_ = 0;
};

SignalBuffer synthesize_reference(const RadarConfig& cfg, std::uint64_t seed);

/// Empty CPI-aligned surveillance buffer: cfg.cpi_samples() samples starting
/// at -cpi/2.
SignalBuffer make_cpi_buffer(const RadarConfig& cfg);

/// Adds amplitude * ref(t - path/c) * exp(-j 2 pi path / lambda), optionally
/// steered by exp(+j k(t).u) for an element at `element_position`.
void add_echo(SignalBuffer& out, const FractionalDelayLine& ref, const PathFunction& path,
              const RadarConfig& cfg, double amplitude,
              const DirectionFunction* direction = nullptr,
              const Vector3d& element_position = Vector3d::Zero());

void add_noise(SignalBuffer& out, double noise_power, std::uint64_t seed);

/// Independent per-element noise seeds derived from one 64-bit seed.
std::vector<std::uint64_t> element_seeds(std::uint64_t seed, std::size_t count);

SignalBuffer synthesize_echo(const SignalBuffer& ref, const PathFunction& path, const RadarConfig& cfg,
                             double amplitude, double noise_power, std::uint64_t seed);

std::vector<SignalBuffer> synthesize_array_echo(const SignalBuffer& ref, const PathFunction& path,
                                                const DirectionFunction& direction,
                                                const ArrayGeometry& geom, const RadarConfig& cfg,
                                                double amplitude, double noise_power,
                                                std::uint64_t seed);

}  // namespace odbd
