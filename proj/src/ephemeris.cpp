#include "odbd/ephemeris.hpp"

#include <cmath>

namespace odbd {

EphemerisTrack::EphemerisTrack(const KeplerianElements<>& el, double t_begin, double t_end,
                               double knot_spacing, const GravityModel<>& g)
    : t0_(t_begin), h_(knot_spacing) {
  if (!(knot_spacing > 0.0) || !(t_end > t_begin))
    throw GeometryError("ephemeris span and knot spacing must be positive");
  const auto count = static_cast<std::size_t>(std::ceil((t_end - t_begin) / knot_spacing)) + 1;
  r_.reserve(count);
  v_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t_begin + double(k) * knot_spacing;
    const StateDerivatives<> s = elements_to_state(propagate_kepler(el, t - el.epoch, g), g);
    r_.push_back(s.r);
    v_.push_back(s.v);
  }
}

std::size_t EphemerisTrack::segment(double t, double& s) const {
  const double u = (t - t0_) / h_;
  if (u < -1e-9 || u > double(r_.size() - 1) + 1e-9) throw GeometryError("time outside the ephemeris span");
  auto k = static_cast<std::size_t>(std::floor(u));
  k = std::min(k, r_.size() - 2);
  s = u - double(k);
  return k;
}

Vector3d EphemerisTrack::position(double t) const {
  double s = 0;
  const std::size_t k = segment(t, s);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * r_[k] + h10 * h_ * v_[k] + h01 * r_[k + 1] + h11 * h_ * v_[k + 1];
}

Vector3d EphemerisTrack::velocity(double t) const {
  double s = 0;
  const std::size_t k = segment(t, s);
  const double s2 = s * s;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  return (d00 * r_[k] + d01 * r_[k + 1]) / h_ + d10 * v_[k] + d11 * v_[k + 1];
}

Vector3d site_position(const GeodeticSite<>& site, double t, const GravityModel<>& g) {
  const double radius = g.earth_radius + site.altitude;
  const double theta = site.longitude + g.earth_rotation_rate * t;
  const double rc = radius * std::cos(site.latitude);
  return {rc * std::cos(theta), rc * std::sin(theta), radius * std::sin(site.latitude)};
}

PathFunction truth_path(const EphemerisTrack& track, const GeodeticSite<>& receiver,
                        const std::optional<GeodeticSite<>>& transmitter, const GravityModel<>& g) {
  return [&track, receiver, transmitter, g](double t) {
    const Vector3d r = track.position(t);
    const double rx = (r - site_position(receiver, t, g)).norm();
    const double tx = transmitter ? (r - site_position(*transmitter, t, g)).norm() : rx;
    return rx + tx;
  };
}

DirectionFunction truth_direction(const EphemerisTrack& track, const GeodeticSite<>& receiver,
                                  const GravityModel<>& g) {
  return [&track, receiver, g](double t) {
    return Vector3d((track.position(t) - site_position(receiver, t, g)).normalized());
  };
}

}  // namespace odbd
