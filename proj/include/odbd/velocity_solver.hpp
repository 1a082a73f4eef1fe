// Velocity-space solver: intersects the vis-viva speed sphere with the
// r.v = +-D planes and a third plane (RAAN or Doppler) to recover the finite
// set of orbital velocities consistent with a hypothesised position.
#pragma once

#include "odbd/orbits.hpp"
#include "odbd/sensor_geometry.hpp"

#include <optional>
#include <vector>

namespace odbd {

using Vector3d = Eigen::Vector3d;

struct PeriapsisLimits {
  double rp_min = 0;
  double rp_max = 0;
};

/// Closed interval [lo, hi]; empty when lo > hi.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool empty() const { return !(lo <= hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

struct OrbitShapeHypothesis {
  Vector3d r = Vector3d::Zero();
  double e = 0;
  double a = 0;
  double raan = 0;
};

struct DopplerConstraint {
  Vector3d rho_vec = Vector3d::Zero();
  Vector3d sensor_vel = Vector3d::Zero();
  double doppler_hz = 0;
  double lambda = 0;
};

struct Plane {
  Vector3d normal = Vector3d::Zero();
  double offset = 0;  // plane is {v : normal . v = offset}
};

struct VelocitySolution {
  Vector3d v = Vector3d::Zero();
  KeplerianElements<> elements;
  int rdotv_sign = 0;  // +1, -1, or 0 when the two r.v planes collapse
};

struct VelocitySolutionSet {
  std::vector<VelocitySolution> solutions;
  bool degenerate = false;  // parallel planes or a degenerate third plane
  double rdotv = 0;         // D, the magnitude of r.v on each plane

  std::size_t size() const { return solutions.size(); }
  bool empty() const { return solutions.empty(); }
};

struct SolverOptions {
  // Force the single r.v = 0 plane (perigee/apogee assumption).
  bool assume_perigee = false;
  // Within this relative distance of zero the r.v radicand is clamped.
  double tangency_tolerance = 1e-6;
};

Interval semi_major_bounds(double r_mag, double e, const PeriapsisLimits& limits);

/// +-D for r.v; empty when the shape cannot pass through r_mag.
std::optional<double> rdotv_magnitude(double r_mag, double a, double e, const GravityModel<>& g,
                                      double tangency_tolerance = 1e-6);

/// Normal of the plane r x v must be orthogonal to for a given RAAN,
/// i.e. node_hat x r. Zero when r lies on the node line.
Vector3d raan_plane_normal(const Vector3d& r, double raan);

Plane doppler_plane(const DopplerConstraint& c);

/// RAAN mode: sphere, +-D planes and the RAAN plane. Up to four solutions.
VelocitySolutionSet solve_velocities(const OrbitShapeHypothesis& h, const GravityModel<>& g,
                                     const SolverOptions& opts = {});

/// Generic form: given an eccentricity/semi-major axis and any third plane.
VelocitySolutionSet solve_velocities(const Vector3d& r, double a, double e, const Plane& third,
                                     const GravityModel<>& g, const SolverOptions& opts = {});

/// Circular orbit at a chosen Doppler: a = |r|, r.v = 0 and the Doppler
/// plane. At most two solutions.
VelocitySolutionSet circular_zero_doppler(const Vector3d& r, const SensorState<>& sensor,
                                          double doppler_hz, double lambda, const GravityModel<>& g);

}  // namespace odbd
