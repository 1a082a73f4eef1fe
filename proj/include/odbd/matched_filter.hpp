// Ambiguity function, orbit-parameterised matched filters and beamforming.
#pragma once

#include "odbd/signal.hpp"

#include <span>

namespace odbd {

/// Inclusive integer bin range.
struct BinRange {
  int first = 0;
  int last = 0;
  int count() const { return last - first + 1; }
};

/// |chi|^2 on a delay (rows) x Doppler (columns) grid.
struct DelayDopplerMap {
  Eigen::MatrixXd power;
  int first_delay_bin = 0;
  int first_doppler_bin = 0;
  double delay_spacing = 0;    // s, 1 / sample_rate
  double doppler_spacing = 0;  // Hz, 1 / cpi

  double delay_of(Eigen::Index row) const { return (first_delay_bin + row) * delay_spacing; }
  double doppler_of(Eigen::Index col) const { return (first_doppler_bin + col) * doppler_spacing; }
  /// (row, col) of the global maximum.
  std::pair<Eigen::Index, Eigen::Index> peak() const;
};

enum class CafMethod { direct, fft };

/// chi(tau, f) = sum_n s[n] d*(t_n - tau) exp(-j 2 pi f t_n); reference
/// samples outside the buffer count as zero.
DelayDopplerMap caf(const SignalBuffer& surv, const SignalBuffer& ref, BinRange delay_bins,
                    BinRange doppler_bins, CafMethod method = CafMethod::fft);

/// Single complex CAF cell by direct (pairwise) summation.
cdouble caf_value(const SignalBuffer& surv, const SignalBuffer& ref, int delay_bin, double doppler_hz);

struct MatchedFilterOptions {
  // When false the delay is frozen at its CPI-centre value (no range
  // migration); the phase still follows the full path polynomial.
  bool track_range_migration = true;
};

/// Coherent statistic against a hypothesised path:
///   chi = sum_n s[n] d*(t_n - path(t_n)/c) exp(+j 2 pi path(t_n) / lambda)
/// A noise-free echo generated along the same path gives amplitude * sum |d|^2.
cdouble matched_filter_orbit(const SignalBuffer& surv, const FractionalDelayLine& ref,
                             const PathPolynomial& path, const RadarConfig& cfg,
                             const MatchedFilterOptions& opts = {});

/// Same statistic for an arbitrary path function (used for reference tracks).
cdouble matched_filter_path(const SignalBuffer& surv, const FractionalDelayLine& ref,
                            const PathFunction& path, const RadarConfig& cfg);

/// Wavevector of magnitude 2 pi / lambda pointing toward the source.
Vector3d wavevector(const TopocentricDirection<>& direction, double lambda);

/// s(t) = sum_n s_n(t) exp(-j k(t).u_n) with per-sample steering.
SignalBuffer beamform(std::span<const SignalBuffer> elements, const ArrayGeometry& geom,
                      const DirectionFunction& direction, double lambda);

/// Beamforming fused with matched_filter_orbit; for one element at the
/// origin it reproduces the single-channel statistic bit for bit.
cdouble matched_filter_orbit_array(std::span<const SignalBuffer> elements, const ArrayGeometry& geom,
                                   const FractionalDelayLine& ref, const PathPolynomial& path,
                                   const DirectionFunction& direction, const RadarConfig& cfg,
                                   const MatchedFilterOptions& opts = {});

/// Arrival direction for a hypothesised target state: cubic Taylor
/// expansion of r(t) minus the exact rotating site position.
class LineOfSight {
 public:
  LineOfSight(const StateDerivatives<>& target, const GeodeticSite<>& site, const GravityModel<>& g);

  Vector3d relative(double t) const;
  Vector3d operator()(double t) const { return relative(t).normalized(); }

 private:
  StateDerivatives<> target_;
  GeodeticSite<> site_;
  GravityModel<> gravity_;
};

}  // namespace odbd
