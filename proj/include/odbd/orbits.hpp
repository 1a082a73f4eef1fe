// Two-body Keplerian mechanics: element/state conversion, gravity derivatives
// and two independent propagators (Kepler equation and fixed-step RK4).
//
// Everything here is templated on the scalar type so the same code can be
// evaluated in long double when a higher precision reference is needed.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace odbd {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

class OrbitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Scalar = double>
struct GravityModel {
  Scalar mu = Scalar(3.986004418e14);           // m^3/s^2
  Scalar earth_radius = Scalar(6378137.0);      // m
  Scalar earth_rotation_rate = Scalar(7.2921159e-5);  // rad/s

  template <typename Other>
  GravityModel<Other> cast() const {
    return {Other(mu), Other(earth_radius), Other(earth_rotation_rate)};
  }
};

/// Classical elements at an epoch. Angles in radians, a in metres.
template <typename Scalar = double>
struct KeplerianElements {
  Scalar a = 0;
  Scalar e = 0;
  Scalar i = 0;
  Scalar raan = 0;
  Scalar argp = 0;
  Scalar nu = 0;
  Scalar epoch = 0;

  template <typename Other>
  KeplerianElements<Other> cast() const {
    return {Other(a), Other(e), Other(i), Other(raan), Other(argp), Other(nu), Other(epoch)};
  }
};

template <typename Scalar = double>
struct PerifocalBasis {
  Vector3<Scalar> P;
  Vector3<Scalar> Q;
  Vector3<Scalar> W;
};

/// Position and its first three time derivatives in ECI.
template <typename Scalar = double>
struct StateDerivatives {
  Vector3<Scalar> r = Vector3<Scalar>::Zero();
  Vector3<Scalar> v = Vector3<Scalar>::Zero();
  Vector3<Scalar> acc = Vector3<Scalar>::Zero();
  Vector3<Scalar> jerk = Vector3<Scalar>::Zero();
  Scalar epoch = 0;
};

struct KeplerSolverOptions {
  double e_max = 0.95;
  int max_iterations = 50;
  double tolerance = 1e-12;
};

// Thresholds below which an angle is undefined and folded into its neighbour.
inline constexpr double kCircularEccentricity = 1e-9;
inline constexpr double kEquatorialInclination = 1e-9;

template <typename Scalar>
Scalar wrap_two_pi(Scalar angle) {
  using std::fmod;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar wrapped = fmod(angle, two_pi);
  if (wrapped < Scalar(0)) wrapped += two_pi;
  if (wrapped >= two_pi) wrapped -= two_pi;
  return wrapped;
}

/// Signed difference a - b folded into [-pi, pi).
template <typename Scalar>
Scalar angle_difference(Scalar a, Scalar b) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return wrap_two_pi(a - b + pi) - pi;
}

template <typename Scalar>
PerifocalBasis<Scalar> perifocal_basis(Scalar raan, Scalar inc, Scalar argp) {
  using std::cos;
  using std::sin;
  const Scalar cO = cos(raan), sO = sin(raan);
  const Scalar ci = cos(inc), si = sin(inc);
  const Scalar cw = cos(argp), sw = sin(argp);
  PerifocalBasis<Scalar> b;
  b.P << cO * cw - sO * ci * sw, sO * cw + cO * ci * sw, si * sw;
  b.Q << -cO * sw - sO * ci * cw, -sO * sw + cO * ci * cw, si * cw;
  b.W << si * sO, -si * cO, ci;
  return b;
}

template <typename Scalar>
void validate_elements(const KeplerianElements<Scalar>& el, const GravityModel<Scalar>& g) {
  using std::isfinite;
  if (!(el.a > Scalar(0)) || !isfinite(el.a)) throw OrbitError("semi-major axis must be positive");
  if (!(el.e >= Scalar(0)) || !(el.e < Scalar(1)))
    throw OrbitError("eccentricity must lie in [0, 1) for a closed orbit");
  if (!(g.mu > Scalar(0))) throw OrbitError("gravitational parameter must be positive");
}

template <typename Scalar>
Vector3<Scalar> gravity_accel(const Vector3<Scalar>& r, const GravityModel<Scalar>& g) {
  const Scalar rn = r.norm();
  if (!(rn > Scalar(0))) throw OrbitError("gravity evaluated at the origin");
  return -(g.mu / (rn * rn * rn)) * r;
}

template <typename Scalar>
Vector3<Scalar> gravity_jerk(const Vector3<Scalar>& r, const Vector3<Scalar>& v,
                             const GravityModel<Scalar>& g) {
  const Scalar rn = r.norm();
  if (!(rn > Scalar(0))) throw OrbitError("gravity evaluated at the origin");
  const Scalar r3 = rn * rn * rn;
  const Scalar r5 = r3 * rn * rn;
  return (Scalar(3) * g.mu * r.dot(v) / r5) * r - (g.mu / r3) * v;
}

/// Fills acceleration and jerk for a given position/velocity.
template <typename Scalar>
StateDerivatives<Scalar> make_state(const Vector3<Scalar>& r, const Vector3<Scalar>& v,
                                    const GravityModel<Scalar>& g, Scalar epoch = Scalar(0)) {
  StateDerivatives<Scalar> s;
  s.r = r;
  s.v = v;
  s.acc = gravity_accel(r, g);
  s.jerk = gravity_jerk(r, v, g);
  s.epoch = epoch;
  return s;
}

template <typename Scalar>
StateDerivatives<Scalar> elements_to_state(const KeplerianElements<Scalar>& el,
                                           const GravityModel<Scalar>& g) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  validate_elements(el, g);
  const PerifocalBasis<Scalar> b = perifocal_basis(el.raan, el.i, el.argp);
  const Scalar p = el.a * (Scalar(1) - el.e * el.e);
  const Scalar cn = cos(el.nu), sn = sin(el.nu);
  const Scalar radius = p / (Scalar(1) + el.e * cn);
  const Vector3<Scalar> r = radius * (cn * b.P + sn * b.Q);
  const Vector3<Scalar> v = sqrt(g.mu / p) * (-sn * b.P + (el.e + cn) * b.Q);
  return make_state(r, v, g, el.epoch);
}

template <typename Scalar>
KeplerianElements<Scalar> state_to_elements(const StateDerivatives<Scalar>& s,
                                            const GravityModel<Scalar>& g) {
  using std::atan2;
  using std::sqrt;
  const Vector3<Scalar>& r = s.r;
  const Vector3<Scalar>& v = s.v;
  const Scalar rn = r.norm();
  if (!(rn > Scalar(0))) throw OrbitError("state position is zero");

  const Scalar energy = v.squaredNorm() / Scalar(2) - g.mu / rn;
  if (!(energy < Scalar(0))) throw OrbitError("state is not a bound orbit");

  const Vector3<Scalar> h = r.cross(v);
  const Scalar hn = h.norm();
  if (!(hn > Scalar(0))) throw OrbitError("rectilinear state has no orbital plane");
  const Vector3<Scalar> w = h / hn;

  KeplerianElements<Scalar> el;
  el.epoch = s.epoch;
  el.a = -g.mu / (Scalar(2) * energy);

  const Vector3<Scalar> r_hat = r / rn;
  const Vector3<Scalar> e_vec = v.cross(h) / g.mu - r_hat;
  el.e = e_vec.norm();

  el.i = atan2(sqrt(h.x() * h.x() + h.y() * h.y()), h.z());

  // Reference direction in the orbital plane: the ascending node, or the I
  // axis for equatorial orbits.
  Vector3<Scalar> node(-h.y(), h.x(), Scalar(0));
  const bool equatorial = el.i < Scalar(kEquatorialInclination) ||
                          el.i > std::numbers::pi_v<Scalar> - Scalar(kEquatorialInclination);
  if (equatorial) {
    el.raan = 0;
    node = Vector3<Scalar>::UnitX();
  } else {
    node.normalize();
    el.raan = wrap_two_pi(atan2(node.y(), node.x()));
  }
  const Vector3<Scalar> node_perp = w.cross(node);

  const Scalar arg_latitude = atan2(r_hat.dot(node_perp), r_hat.dot(node));
  if (el.e < Scalar(kCircularEccentricity)) {
    el.argp = 0;
    el.nu = wrap_two_pi(arg_latitude);
  } else {
    el.argp = wrap_two_pi(atan2(e_vec.dot(node_perp), e_vec.dot(node)));
    const Vector3<Scalar> e_hat = e_vec / el.e;
    el.nu = wrap_two_pi(atan2(w.cross(e_hat).dot(r_hat), e_hat.dot(r_hat)));
  }
  return el;
}

template <typename Scalar>
Scalar orbital_period(Scalar a, const GravityModel<Scalar>& g) {
  using std::sqrt;
  return Scalar(2) * std::numbers::pi_v<Scalar> * sqrt(a * a * a / g.mu);
}

template <typename Scalar>
Scalar true_to_eccentric_anomaly(Scalar nu, Scalar e) {
  using std::atan2;
  using std::cos;
  using std::sin;
  using std::sqrt;
  return atan2(sqrt(Scalar(1) - e * e) * sin(nu), e + cos(nu));
}

template <typename Scalar>
Scalar eccentric_to_true_anomaly(Scalar E, Scalar e) {
  using std::atan2;
  using std::cos;
  using std::sin;
  using std::sqrt;
  return atan2(sqrt(Scalar(1) - e * e) * sin(E), cos(E) - e);
}

/// Newton iteration on Kepler's equation M = E - e sin E.
template <typename Scalar>
Scalar solve_kepler(Scalar mean_anomaly, Scalar e, const KeplerSolverOptions& opts = {}) {
  using std::abs;
  using std::cos;
  using std::sin;
  const Scalar M = angle_difference(mean_anomaly, Scalar(0));
  Scalar E = M + e * sin(M);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Scalar residual = E - e * sin(E) - M;
    if (abs(residual) < Scalar(opts.tolerance)) return E;
    E -= residual / (Scalar(1) - e * cos(E));
  }
  if (abs(E - e * sin(E) - M) < Scalar(opts.tolerance)) return E;
  throw OrbitError("Kepler equation did not converge (e = " + std::to_string(double(e)) + ")");
}

template <typename Scalar>
KeplerianElements<Scalar> propagate_kepler(const KeplerianElements<Scalar>& el, Scalar dt,
                                           const GravityModel<Scalar>& g,
                                           const KeplerSolverOptions& opts = {}) {
  using std::sin;
  using std::sqrt;
  validate_elements(el, g);
  if (el.e > Scalar(opts.e_max))
    throw OrbitError("eccentricity above the configured Kepler solver limit");
  const Scalar n = sqrt(g.mu / (el.a * el.a * el.a));
  const Scalar E0 = true_to_eccentric_anomaly(el.nu, el.e);
  const Scalar M0 = E0 - el.e * sin(E0);
  const Scalar E = solve_kepler(M0 + n * dt, el.e, opts);
  KeplerianElements<Scalar> out = el;
  out.nu = wrap_two_pi(eccentric_to_true_anomaly(E, el.e));
  out.epoch = el.epoch + dt;
  return out;
}

/// Fixed-step classical RK4 on r'' = -mu r / |r|^3. The final step is
/// shortened so the integration lands exactly on dt.
template <typename Scalar>
StateDerivatives<Scalar> propagate_numeric(const StateDerivatives<Scalar>& s, Scalar dt, Scalar step,
                                           const GravityModel<Scalar>& g) {
  using std::abs;
  if (!(step > Scalar(0))) throw OrbitError("integration step must be positive");
  Vector3<Scalar> r = s.r;
  Vector3<Scalar> v = s.v;
  const Scalar direction = dt < Scalar(0) ? Scalar(-1) : Scalar(1);
  const Scalar total = abs(dt);
  const long long full_steps = static_cast<long long>(total / step);
  auto rk4 = [&](Scalar h) {
    const Vector3<Scalar> k1v = gravity_accel(r, g);
    const Vector3<Scalar> k1r = v;
    const Vector3<Scalar> k2v = gravity_accel<Scalar>(r + h / 2 * k1r, g);
    const Vector3<Scalar> k2r = v + h / 2 * k1v;
    const Vector3<Scalar> k3v = gravity_accel<Scalar>(r + h / 2 * k2r, g);
    const Vector3<Scalar> k3r = v + h / 2 * k2v;
    const Vector3<Scalar> k4v = gravity_accel<Scalar>(r + h * k3r, g);
    const Vector3<Scalar> k4r = v + h * k3v;
    r += h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  };
  for (long long k = 0; k < full_steps; ++k) rk4(direction * step);
  const Scalar remainder = total - Scalar(full_steps) * step;
  if (remainder > Scalar(0)) rk4(direction * remainder);
  return make_state(r, v, g, s.epoch + dt);
}

template <typename Scalar>
Scalar vis_viva_speed(Scalar r_mag, Scalar a, const GravityModel<Scalar>& g) {
  using std::sqrt;
  if (!(r_mag > Scalar(0))) throw OrbitError("radius must be positive");
  const Scalar radicand = g.mu * (Scalar(2) / r_mag - Scalar(1) / a);
  if (radicand < Scalar(0))
    throw OrbitError("no orbit with this semi-major axis reaches the given radius");
  return sqrt(radicand);
}

/// Builds elements whose orbit passes through r with the given eccentricity,
/// inclination and true anomaly at r. `ascending` selects the pass moving
/// northward through r. Throws when |declination of r| exceeds the
/// inclination's reach.
template <typename Scalar>
KeplerianElements<Scalar> elements_through_position(const Vector3<Scalar>& r, Scalar e, Scalar inc,
                                                    Scalar nu, bool ascending,
                                                    Scalar epoch = Scalar(0)) {
  using std::asin;
  using std::atan2;
  using std::cos;
  using std::sin;
  using std::sqrt;
  using std::tan;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar rxy = sqrt(r.x() * r.x() + r.y() * r.y());
  const Scalar sin_i = sin(inc);
  if (!(rxy > Scalar(0)) || !(sin_i > Scalar(kEquatorialInclination)))
    throw OrbitError("orbit plane through this position is not determined");
  const Scalar x = -r.z() / (rxy * tan(inc));
  if (x < Scalar(-1) || x > Scalar(1))
    throw OrbitError("inclination too small to reach this declination");
  const Scalar phi = atan2(r.y(), r.x());
  const Scalar candidates[2] = {phi + asin(x), phi + pi - asin(x)};

  KeplerianElements<Scalar> el;
  el.e = e;
  el.i = inc;
  el.nu = wrap_two_pi(nu);
  el.epoch = epoch;
  el.a = r.norm() * (Scalar(1) + e * cos(nu)) / (Scalar(1) - e * e);
  for (const Scalar raan : candidates) {
    const Vector3<Scalar> node(cos(raan), sin(raan), Scalar(0));
    const Vector3<Scalar> w(sin_i * sin(raan), -sin_i * cos(raan), cos(inc));
    const Scalar u = atan2(r.dot(w.cross(node)), r.dot(node));
    if ((cos(u) > Scalar(0)) == ascending) {
      el.raan = wrap_two_pi(raan);
      el.argp = wrap_two_pi(u - nu);
      return el;
    }
  }
  throw OrbitError("no pass with the requested direction through this position");
}

}  // namespace odbd
