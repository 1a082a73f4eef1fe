// Sensor kinematics in ECI, the slant-range derivative chain, per-CPI
// polynomial tracks and topocentric angles.
#pragma once

#include "odbd/orbits.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace odbd {

class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Spherical-Earth site. Latitude/longitude in radians, altitude in metres.
template <typename Scalar = double>
struct GeodeticSite {
  Scalar latitude = 0;
  Scalar longitude = 0;
  Scalar altitude = 0;
};

template <typename Scalar = double>
struct SensorState {
  Vector3<Scalar> q = Vector3<Scalar>::Zero();
  Vector3<Scalar> qd = Vector3<Scalar>::Zero();
  Vector3<Scalar> qdd = Vector3<Scalar>::Zero();
  Vector3<Scalar> qddd = Vector3<Scalar>::Zero();
  Scalar epoch = 0;
};

/// Slant range and its derivatives at the CPI centre, with the CPI length
/// that bounds where the cubic expansion may be evaluated.
template <typename Scalar = double>
struct SlantSeries {
  Scalar rho = 0;
  Scalar rhod = 0;
  Scalar rhodd = 0;
  Scalar rhoddd = 0;
  Scalar cpi = 0;
};

template <typename Scalar = double>
struct SlantSample {
  Scalar rho = 0;
  Scalar rhod = 0;
};

template <typename Scalar = double>
struct TopocentricDirection {
  Scalar alpha = 0;  // [0, 2pi)
  Scalar delta = 0;  // [-pi/2, pi/2]
};

/// Uniformly sampled angle/range track. `t` holds absolute scenario time.
struct MeasurementTrack {
  std::vector<double> t;
  std::vector<double> alpha;
  std::vector<double> delta;
  std::vector<double> rho;
  std::vector<double> rhod;
  double spacing = 0;

  std::size_t size() const { return t.size(); }
};

template <typename Scalar>
void validate_site(const GeodeticSite<Scalar>& site) {
  using std::abs;
  if (!(abs(site.latitude) <= std::numbers::pi_v<Scalar> / 2))
    throw GeometryError("site latitude outside [-90, 90] degrees");
  if (!(site.altitude >= Scalar(0) && site.altitude <= Scalar(10000)))
    throw GeometryError("site altitude must lie within [0, 10] km");
}

/// Earth-fixed site rotating uniformly about the ECI K axis. Sidereal angle
/// is zero at t = 0, so the site's right ascension at t is lon + w t.
template <typename Scalar>
SensorState<Scalar> site_to_sensor_state(const GeodeticSite<Scalar>& site, Scalar t,
                                         const GravityModel<Scalar>& g) {
  using std::cos;
  using std::sin;
  validate_site(site);
  const Scalar radius = g.earth_radius + site.altitude;
  const Scalar w = g.earth_rotation_rate;
  const Scalar theta = site.longitude + w * t;
  const Scalar rc = radius * cos(site.latitude);
  const Scalar ct = cos(theta), st = sin(theta);
  SensorState<Scalar> s;
  s.epoch = t;
  s.q << rc * ct, rc * st, radius * sin(site.latitude);
  s.qd << -w * rc * st, w * rc * ct, Scalar(0);
  s.qdd << -w * w * rc * ct, -w * w * rc * st, Scalar(0);
  s.qddd = -w * w * s.qd;
  return s;
}

template <typename Scalar>
SlantSeries<Scalar> slant_series(const StateDerivatives<Scalar>& target,
                                 const SensorState<Scalar>& sensor, Scalar cpi) {
  const Vector3<Scalar> p = target.r - sensor.q;
  const Vector3<Scalar> pd = target.v - sensor.qd;
  const Vector3<Scalar> pdd = target.acc - sensor.qdd;
  const Vector3<Scalar> pddd = target.jerk - sensor.qddd;
  const Scalar rho = p.norm();
  if (!(rho > Scalar(0))) throw GeometryError("target and sensor positions coincide");

  const Scalar rho2 = rho * rho;
  const Scalar rho3 = rho2 * rho;
  const Scalar rho5 = rho3 * rho2;
  const Scalar p_pd = p.dot(pd);
  const Scalar curvature = pd.squaredNorm() + p.dot(pdd);

  SlantSeries<Scalar> s;
  s.cpi = cpi;
  s.rho = rho;
  s.rhod = p_pd / rho;
  s.rhodd = -(p_pd * p_pd) / rho3 + curvature / rho;
  s.rhoddd = Scalar(3) * p_pd * p_pd * p_pd / rho5 - Scalar(3) * p_pd * curvature / rho3 +
             (Scalar(3) * pd.dot(pdd) + p.dot(pddd)) / rho;
  return s;
}

template <typename Scalar>
SlantSample<Scalar> eval_track(const SlantSeries<Scalar>& s, Scalar t) {
  using std::abs;
  const Scalar half = s.cpi / 2;
  if (!(abs(t) <= half * (Scalar(1) + Scalar(1e-12))))
    throw GeometryError("track evaluated outside its CPI window");
  return {s.rho + t * (s.rhod + t * (s.rhodd / 2 + t * s.rhoddd / 6)),
          s.rhod + t * (s.rhodd + t * s.rhoddd / 2)};
}

template <typename Scalar>
TopocentricDirection<Scalar> topocentric_direction(const Vector3<Scalar>& rho_vec) {
  using std::atan2;
  using std::sqrt;
  if (!(rho_vec.norm() > Scalar(0))) throw GeometryError("direction of a zero vector");
  const Scalar horizontal = sqrt(rho_vec.x() * rho_vec.x() + rho_vec.y() * rho_vec.y());
  return {wrap_two_pi(atan2(rho_vec.y(), rho_vec.x())), atan2(rho_vec.z(), horizontal)};
}

template <typename Scalar>
Vector3<Scalar> direction_unit_vector(const TopocentricDirection<Scalar>& d) {
  using std::cos;
  using std::sin;
  return Vector3<Scalar>(cos(d.delta) * cos(d.alpha), cos(d.delta) * sin(d.alpha), sin(d.delta));
}

/// Local east/north/up unit vectors of a site at time t, expressed in ECI.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> enu_axes(const GeodeticSite<Scalar>& site, Scalar t,
                                     const GravityModel<Scalar>& g) {
  using std::cos;
  using std::sin;
  const Scalar theta = site.longitude + g.earth_rotation_rate * t;
  const Scalar cl = cos(site.latitude), sl = sin(site.latitude);
  const Scalar ct = cos(theta), st = sin(theta);
  Eigen::Matrix<Scalar, 3, 3> m;
  m.col(0) << -st, ct, Scalar(0);
  m.col(1) << -sl * ct, -sl * st, cl;
  m.col(2) << cl * ct, cl * st, sl;
  return m;
}

/// Ephemeris-derived track: samples the Kepler propagator on a uniform grid
/// spanning [-T/2, T/2] around the element epoch.
template <typename Scalar>
MeasurementTrack measurement_track(const KeplerianElements<Scalar>& el,
                                   const GeodeticSite<Scalar>& site, Scalar cpi, Scalar dt,
                                   const GravityModel<Scalar>& g) {
  using std::llround;
  if (!(dt > Scalar(0)) || !(cpi > Scalar(0)))
    throw GeometryError("track length and spacing must be positive");
  const long long half_steps = llround(double(cpi / (2 * dt)));
  MeasurementTrack track;
  track.spacing = double(dt);
  for (long long k = -half_steps; k <= half_steps; ++k) {
    const Scalar offset = Scalar(k) * dt;
    const StateDerivatives<Scalar> target = elements_to_state(propagate_kepler(el, offset, g), g);
    const SensorState<Scalar> sensor = site_to_sensor_state(site, el.epoch + offset, g);
    const Vector3<Scalar> rho_vec = target.r - sensor.q;
    const TopocentricDirection<Scalar> dir = topocentric_direction(rho_vec);
    const Scalar rho = rho_vec.norm();
    track.t.push_back(double(el.epoch + offset));
    track.alpha.push_back(double(dir.alpha));
    track.delta.push_back(double(dir.delta));
    track.rho.push_back(double(rho));
    track.rhod.push_back(double(rho_vec.dot(target.v - sensor.qd) / rho));
  }
  return track;
}

/// Filter-side prediction of the same quantities from a single state: range
/// and range-rate come from the cubic slant series, angles from the cubic
/// Taylor expansion of r(t) minus the exact sensor position.
template <typename Scalar>
MeasurementTrack predicted_track(const StateDerivatives<Scalar>& target,
                                 const GeodeticSite<Scalar>& site, Scalar cpi, Scalar dt,
                                 const GravityModel<Scalar>& g) {
  using std::llround;
  if (!(dt > Scalar(0)) || !(cpi > Scalar(0)))
    throw GeometryError("track length and spacing must be positive");
  const SensorState<Scalar> centre = site_to_sensor_state(site, target.epoch, g);
  const SlantSeries<Scalar> series = slant_series(target, centre, cpi);
  const long long half_steps = llround(double(cpi / (2 * dt)));
  MeasurementTrack track;
  track.spacing = double(dt);
  for (long long k = -half_steps; k <= half_steps; ++k) {
    const Scalar t = Scalar(k) * dt;
    const Vector3<Scalar> r =
        target.r + t * (target.v + t * (target.acc / 2 + t * target.jerk / 6));
    const Vector3<Scalar> q = site_to_sensor_state(site, target.epoch + t, g).q;
    const TopocentricDirection<Scalar> dir = topocentric_direction<Scalar>(r - q);
    const SlantSample<Scalar> range = eval_track(series, t);
    track.t.push_back(double(target.epoch + t));
    track.alpha.push_back(double(dir.alpha));
    track.delta.push_back(double(dir.delta));
    track.rho.push_back(double(range.rho));
    track.rhod.push_back(double(range.rhod));
  }
  return track;
}

/// Range-rate of a Kepler orbit relative to a site at absolute time t.
template <typename Scalar>
Scalar range_rate_at(const KeplerianElements<Scalar>& el, const GeodeticSite<Scalar>& site, Scalar t,
                     const GravityModel<Scalar>& g) {
  const StateDerivatives<Scalar> target = elements_to_state(propagate_kepler(el, t - el.epoch, g), g);
  const SensorState<Scalar> sensor = site_to_sensor_state(site, t, g);
  const Vector3<Scalar> p = target.r - sensor.q;
  return p.dot(target.v - sensor.qd) / p.norm();
}

/// Time of closest approach (zero range-rate) nearest the element epoch,
/// located by bisection within +-half_window seconds.
template <typename Scalar>
Scalar time_of_closest_approach(const KeplerianElements<Scalar>& el, const GeodeticSite<Scalar>& site,
                                const GravityModel<Scalar>& g, Scalar half_window = Scalar(600)) {
  Scalar lo = el.epoch - half_window;
  Scalar hi = el.epoch + half_window;
  Scalar f_lo = range_rate_at(el, site, lo, g);
  const Scalar f_hi = range_rate_at(el, site, hi, g);
  if (!(f_lo < Scalar(0) && f_hi > Scalar(0)))
    throw GeometryError("no closest approach inside the search window");
  for (int it = 0; it < 200 && hi - lo > Scalar(1e-10); ++it) {
    const Scalar mid = (lo + hi) / 2;
    const Scalar f_mid = range_rate_at(el, site, mid, g);
    if ((f_mid < Scalar(0)) == (f_lo < Scalar(0))) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

}  // namespace odbd
