#include "odbd/velocity_solver.hpp"

#include <algorithm>
#include <cmath>

namespace odbd {

namespace {

constexpr double kParallelTolerance = 1e-10;
constexpr double kDiscriminantTolerance = 1e-9;
constexpr double kCollapsedPlaneTolerance = 1e-6;

// Intersection of the sphere |v| = speed with two planes. Appends zero, one
// or two points. Returns false if the planes are parallel.
bool intersect_sphere_two_planes(double speed, const Plane& p1, const Plane& p2,
                                 std::vector<Vector3d>& out) {
  const double n1_len = p1.normal.norm();
  const double n2_len = p2.normal.norm();
  const Vector3d n1 = p1.normal / n1_len;
  const Vector3d n2 = p2.normal / n2_len;
  const double c1 = p1.offset / n1_len;
  const double c2 = p2.offset / n2_len;
  const double v2 = speed * speed;

  const Vector3d cross = n1.cross(n2);
  const double sin_angle = cross.norm();
  if (sin_angle < kParallelTolerance) {
    // Same plane (up to orientation) tangent to the sphere: one point.
    const double k = n1.dot(n2) > 0 ? 1.0 : -1.0;
    if (std::abs(c1 - k * c2) <= kParallelTolerance * std::max(1.0, speed) &&
        std::abs(c1 * c1 - v2) <= kDiscriminantTolerance * v2) {
      out.push_back(c1 * n1);
    }
    return false;
  }

  const double k = n1.dot(n2);
  const double denom = 1.0 - k * k;
  const Vector3d p0 = ((c1 - c2 * k) * n1 + (c2 - c1 * k) * n2) / denom;
  const Vector3d d = cross / sin_angle;
  const double disc = v2 - p0.squaredNorm();
  if (disc < -kDiscriminantTolerance * v2) return true;
  if (disc <= 0.0) {
    out.push_back(p0);
    return true;
  }
  const double t = std::sqrt(disc);
  out.push_back(p0 + t * d);
  out.push_back(p0 - t * d);
  return true;
}

}  // namespace

Interval semi_major_bounds(double r_mag, double e, const PeriapsisLimits& limits) {
  const double lo = std::max(r_mag / (1.0 + e), limits.rp_min / (1.0 - e));
  const double hi = std::min(r_mag / (1.0 - e), limits.rp_max / (1.0 - e));
  return {lo, hi};
}

std::optional<double> rdotv_magnitude(double r_mag, double a, double e, const GravityModel<>& g,
                                      double tangency_tolerance) {
  const double speed_sq = g.mu * (2.0 / r_mag - 1.0 / a);
  if (speed_sq < 0.0) return std::nullopt;
  const double radicand = r_mag * r_mag * speed_sq - g.mu * a * (1.0 - e * e);
  const double scale = r_mag * r_mag * speed_sq;
  if (radicand >= 0.0) return std::sqrt(radicand);
  if (radicand >= -tangency_tolerance * scale) return 0.0;
  return std::nullopt;
}

Vector3d raan_plane_normal(const Vector3d& r, double raan) {
  const double s = std::sin(raan), c = std::cos(raan);
  return {r.z() * s, -r.z() * c, r.y() * c - r.x() * s};
}

Plane doppler_plane(const DopplerConstraint& c) {
  const double rho = c.rho_vec.norm();
  if (!(rho > 0.0) || !(c.lambda > 0.0))
    throw GeometryError("Doppler constraint needs a nonzero line of sight and wavelength");
  return {c.rho_vec / rho, -c.lambda * c.doppler_hz / 2.0 + c.rho_vec.dot(c.sensor_vel) / rho};
}

VelocitySolutionSet solve_velocities(const Vector3d& r, double a, double e, const Plane& third,
                                     const GravityModel<>& g, const SolverOptions& opts) {
  VelocitySolutionSet set;
  const double r_mag = r.norm();
  if (!(r_mag > 0.0)) throw OrbitError("hypothesised position is zero");

  const double speed_sq = g.mu * (2.0 / r_mag - 1.0 / a);
  if (!(speed_sq > 0.0)) return set;
  const double speed = std::sqrt(speed_sq);

  const std::optional<double> d = rdotv_magnitude(r_mag, a, e, g, opts.tangency_tolerance);
  if (!d) return set;
  set.rdotv = *d;

  if (!(third.normal.norm() > 0.0)) {
    set.degenerate = true;
    return set;
  }

  std::vector<int> signs;
  if (opts.assume_perigee || *d < kCollapsedPlaneTolerance * r_mag * speed) {
    set.rdotv = 0.0;
    signs = {0};
  } else {
    signs = {+1, -1};
  }

  for (const int sign : signs) {
    const Plane momentum_plane{r, sign * set.rdotv};
    std::vector<Vector3d> points;
    if (!intersect_sphere_two_planes(speed, momentum_plane, third, points)) set.degenerate = true;
    for (const Vector3d& v : points) {
      VelocitySolution sol;
      sol.v = v;
      sol.rdotv_sign = sign;
      sol.elements = state_to_elements(make_state<double>(r, v, g), g);
      set.solutions.push_back(sol);
    }
  }
  return set;
}

VelocitySolutionSet solve_velocities(const OrbitShapeHypothesis& h, const GravityModel<>& g,
                                     const SolverOptions& opts) {
  const Vector3d normal = raan_plane_normal(h.r, h.raan);
  if (normal.norm() <= kParallelTolerance * h.r.norm()) {
    VelocitySolutionSet set;
    set.degenerate = true;
    return set;
  }
  return solve_velocities(h.r, h.a, h.e, Plane{normal, 0.0}, g, opts);
}

VelocitySolutionSet circular_zero_doppler(const Vector3d& r, const SensorState<>& sensor,
                                          double doppler_hz, double lambda, const GravityModel<>& g) {
  if (!(r.norm() > g.earth_radius)) throw GeometryError("hypothesised position below the surface");
  const Plane plane = doppler_plane({r - sensor.q, sensor.qd, doppler_hz, lambda});
  SolverOptions opts;
  opts.assume_perigee = true;
  VelocitySolutionSet set = solve_velocities(r, r.norm(), 0.0, plane, g, opts);
  for (VelocitySolution& s : set.solutions) {
    // The circular hypothesis is exact; report it rather than rounding noise.
    s.elements.e = 0.0;
    s.elements.a = r.norm();
  }
  return set;
}

}  // namespace odbd
