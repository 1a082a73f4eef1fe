#include "odbd/matched_filter.hpp"

#include "odbd/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace odbd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_cpi_window(const SignalBuffer& surv, double cpi) {
  const double first = surv.time_of(0);
  const double last = surv.time_of(surv.size() - 1);
  const double half = cpi / 2.0 * (1.0 + 1e-12);
  if (first < -half || last > half) throw SignalError("surveillance samples fall outside the track CPI");
}

// Shared inner loop. `sample(n)` yields the (possibly beamformed)
// surveillance sample; `path(t)` the hypothesised total path.
template <typename SampleFn, typename PathFn>
cdouble correlate_along_path(Eigen::Index n_samples, double epoch, double fs, double offset,
                             const FractionalDelayLine& ref, const RadarConfig& cfg,
                             SampleFn&& sample, PathFn&& path, bool migrate) {
  const double inv_lambda = 1.0 / cfg.wavelength();
  const double delay_scale = fs / cfg.c;
  const double frozen_path = path(0.0);
  PairwiseSum<cdouble> acc;
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    const double t = epoch + double(n) / fs;
    const double p = path(t);
    const double index = double(n) + offset - (migrate ? p : frozen_path) * delay_scale;
    if (!ref.valid(index)) throw SignalError("hypothesised delay leaves the reference support");
    const cdouble steer = std::polar(1.0, kTwoPi * (p * inv_lambda));
    acc.add(sample(n) * std::conj(ref.at(index)) * steer);
  }
  return acc.total();
}

}  // namespace

std::pair<Eigen::Index, Eigen::Index> DelayDopplerMap::peak() const {
  Eigen::Index row = 0, col = 0;
  power.maxCoeff(&row, &col);
  return {row, col};
}

cdouble caf_value(const SignalBuffer& surv, const SignalBuffer& ref, int delay_bin, double doppler_hz) {
  const double offset = sample_offset(surv, ref);
  if (offset != std::round(offset)) throw SignalError("surveillance and reference grids are not aligned");
  const auto base = static_cast<Eigen::Index>(offset) - delay_bin;
  PairwiseSum<cdouble> acc;
  for (Eigen::Index n = 0; n < surv.size(); ++n) {
    const Eigen::Index k = n + base;
    if (k < 0 || k >= ref.size()) {
      acc.add(cdouble(0.0));
      continue;
    }
    const double t = surv.time_of(n);
    acc.add(surv.samples(n) * std::conj(ref.samples(k)) * std::polar(1.0, -kTwoPi * doppler_hz * t));
  }
  return acc.total();
}

DelayDopplerMap caf(const SignalBuffer& surv, const SignalBuffer& ref, BinRange delay_bins,
                    BinRange doppler_bins, CafMethod method) {
  if (surv.sample_rate != ref.sample_rate) throw SignalError("sample rates differ");
  if (delay_bins.count() <= 0 || doppler_bins.count() <= 0) throw SignalError("empty bin range");
  const Eigen::Index n = surv.size();
  const double cpi = double(n) / surv.sample_rate;

  DelayDopplerMap map;
  map.first_delay_bin = delay_bins.first;
  map.first_doppler_bin = doppler_bins.first;
  map.delay_spacing = 1.0 / surv.sample_rate;
  map.doppler_spacing = 1.0 / cpi;
  map.power.resize(delay_bins.count(), doppler_bins.count());

  if (method == CafMethod::direct) {
    for (int d = 0; d < delay_bins.count(); ++d)
      for (int f = 0; f < doppler_bins.count(); ++f)
        map.power(d, f) = std::norm(caf_value(surv, ref, delay_bins.first + d, map.doppler_of(f)));
    return map;
  }

  const double offset = sample_offset(surv, ref);
  if (offset != std::round(offset)) throw SignalError("surveillance and reference grids are not aligned");
  Eigen::VectorXcd product(n);
  for (int d = 0; d < delay_bins.count(); ++d) {
    const Eigen::Index base = static_cast<Eigen::Index>(offset) - (delay_bins.first + d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index k = i + base;
      product(i) = (k < 0 || k >= ref.size()) ? cdouble(0.0) : surv.samples(i) * std::conj(ref.samples(k));
    }
    fft::forward(product);
    for (int f = 0; f < doppler_bins.count(); ++f) {
      const Eigen::Index bin = ((doppler_bins.first + f) % n + n) % n;
      map.power(d, f) = std::norm(product(bin));
    }
  }
  return map;
}

cdouble matched_filter_orbit(const SignalBuffer& surv, const FractionalDelayLine& ref,
                             const PathPolynomial& path, const RadarConfig& cfg,
                             const MatchedFilterOptions& opts) {
  check_cpi_window(surv, path.cpi());
  const double offset = sample_offset(surv, ref.reference());
  return correlate_along_path(
      surv.size(), surv.epoch, surv.sample_rate, offset, ref, cfg,
      [&](Eigen::Index n) { return surv.samples(n); }, [&](double t) { return path.value(t); },
      opts.track_range_migration);
}

cdouble matched_filter_path(const SignalBuffer& surv, const FractionalDelayLine& ref,
                            const PathFunction& path, const RadarConfig& cfg) {
  const double offset = sample_offset(surv, ref.reference());
  return correlate_along_path(
      surv.size(), surv.epoch, surv.sample_rate, offset, ref, cfg,
      [&](Eigen::Index n) { return surv.samples(n); }, path, true);
}

Vector3d wavevector(const TopocentricDirection<>& direction, double lambda) {
  if (!(lambda > 0.0)) throw SignalError("wavelength must be positive");
  return (kTwoPi / lambda) * direction_unit_vector(direction);
}

namespace {

void check_elements(std::span<const SignalBuffer> elements, const ArrayGeometry& geom) {
  if (elements.empty() || elements.size() != geom.size())
    throw SignalError("element signal count does not match the array geometry");
  for (const SignalBuffer& e : elements)
    if (e.size() != elements[0].size() || e.sample_rate != elements[0].sample_rate ||
        e.epoch != elements[0].epoch)
      throw SignalError("element signals are not aligned");
}

}  // namespace

SignalBuffer beamform(std::span<const SignalBuffer> elements, const ArrayGeometry& geom,
                      const DirectionFunction& direction, double lambda) {
  check_elements(elements, geom);
  const double k_scale = kTwoPi / lambda;
  SignalBuffer out;
  out.sample_rate = elements[0].sample_rate;
  out.epoch = elements[0].epoch;
  out.samples = Eigen::VectorXcd::Zero(elements[0].size());
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    const Vector3d k = k_scale * direction(out.time_of(n));
    cdouble sum = 0.0;
    for (std::size_t e = 0; e < geom.size(); ++e)
      sum += elements[e].samples(n) * std::polar(1.0, -k.dot(geom.positions[e]));
    out.samples(n) = sum;
  }
  return out;
}

cdouble matched_filter_orbit_array(std::span<const SignalBuffer> elements, const ArrayGeometry& geom,
                                   const FractionalDelayLine& ref, const PathPolynomial& path,
                                   const DirectionFunction& direction, const RadarConfig& cfg,
                                   const MatchedFilterOptions& opts) {
  check_elements(elements, geom);
  const SignalBuffer& first = elements[0];
  check_cpi_window(first, path.cpi());
  const double offset = sample_offset(first, ref.reference());
  const double k_scale = kTwoPi / cfg.wavelength();
  const bool colocated = std::all_of(geom.positions.begin(), geom.positions.end(),
                                     [](const Vector3d& u) { return u.isZero(0.0); });
  if (colocated) {
    // Steering phases are all zero; skip the per-sample direction.
    auto summed = [&](Eigen::Index n) {
      cdouble sum = 0.0;
      for (const SignalBuffer& e : elements) sum += e.samples(n);
      return sum;
    };
    return correlate_along_path(first.size(), first.epoch, first.sample_rate, offset, ref, cfg, summed,
                                [&](double t) { return path.value(t); }, opts.track_range_migration);
  }
  auto steered = [&](Eigen::Index n) {
    const Vector3d k = k_scale * direction(first.time_of(n));
    cdouble sum = 0.0;
    for (std::size_t e = 0; e < geom.size(); ++e)
      sum += elements[e].samples(n) * std::polar(1.0, -k.dot(geom.positions[e]));
    return sum;
  };
  return correlate_along_path(first.size(), first.epoch, first.sample_rate, offset, ref, cfg, steered,
                              [&](double t) { return path.value(t); }, opts.track_range_migration);
}

LineOfSight::LineOfSight(const StateDerivatives<>& target, const GeodeticSite<>& site,
                         const GravityModel<>& g)
    : target_(target), site_(site), gravity_(g) {}

Vector3d LineOfSight::relative(double t) const {
  const Vector3d r = target_.r + t * (target_.v + t * (target_.acc / 2.0 + t * target_.jerk / 6.0));
  const double radius = gravity_.earth_radius + site_.altitude;
  const double theta = site_.longitude + gravity_.earth_rotation_rate * (target_.epoch + t);
  const double rc = radius * std::cos(site_.latitude);
  const Vector3d q(rc * std::cos(theta), rc * std::sin(theta), radius * std::sin(site_.latitude));
  return r - q;
}

}  // namespace odbd
