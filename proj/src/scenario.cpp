#include "odbd/scenario.hpp"

#include "odbd/ephemeris.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace odbd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Typed access to one JSON object; finish() rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ScenarioError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ScenarioError(where_ + ": missing '" + key + "'");
    return j_.at(key);
  }

  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ScenarioError(where_ + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ScenarioError(where_ + "." + key + ": not finite");
    return x;
  }
  double number(const char* key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

  bool boolean(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ScenarioError(where_ + "." + key + ": expected true or false");
    return v.get<bool>();
  }

  std::uint64_t integer(const char* key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ScenarioError(where_ + "." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ScenarioError(where_ + "." + key + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) {
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) throw ScenarioError(where_ + "." + key + ": expected a non-empty array");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) throw ScenarioError(where_ + "." + key + ": expected numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ScenarioError(where_ + ": unknown field '" + key + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

GeodeticSite<> parse_site(const json& j, const std::string& where) {
  Fields f(j, where);
  GeodeticSite<> site{f.number("lat_deg") * kDeg, f.number("lon_deg") * kDeg, f.number("alt_m", 0.0)};
  f.finish();
  try {
    validate_site(site);
  } catch (const GeometryError& e) {
    throw ScenarioError(where + ": " + e.what());
  }
  return site;
}

KeplerianElements<> parse_elements(const json& j, const std::string& where, const GravityModel<>& g) {
  Fields f(j, where);
  KeplerianElements<> el;
  if (f.has("a_km") == f.has("a_m")) throw ScenarioError(where + ": give exactly one of a_km, a_m");
  el.a = f.has("a_km") ? f.number("a_km") * 1e3 : f.number("a_m");
  el.e = f.number("e");
  el.i = f.number("i_deg") * kDeg;
  el.raan = f.number("raan_deg") * kDeg;
  el.argp = f.number("argp_deg") * kDeg;
  el.nu = f.number("nu_deg") * kDeg;
  el.epoch = f.number("epoch_s", 0.0);
  f.finish();
  try {
    validate_elements(el, g);
  } catch (const OrbitError& e) {
    throw ScenarioError(where + ": " + e.what());
  }
  return el;
}

KeplerianElements<> parse_target_orbit(Fields& f, const std::string& where, const GeodeticSite<>& site,
                                       const GravityModel<>& g) {
  if (f.has("elements") == f.has("pass")) throw ScenarioError(where + ": give exactly one of 'elements', 'pass'");
  if (f.has("elements")) return parse_elements(f.raw("elements"), where + ".elements", g);

  Fields p(f.raw("pass"), where + ".pass");
  const double altitude = p.number("altitude_km") * 1e3;
  const double e = p.number("e", 0.0);
  const double inc = p.number("i_deg") * kDeg;
  const bool ascending = p.boolean("ascending", true);
  const double east = p.number("east_km", 0.0) * 1e3;
  const double north = p.number("north_km", 0.0) * 1e3;
  const double nu = p.number("nu_deg", 0.0) * kDeg;
  p.finish();
  try {
    return pass_elements(site, altitude, e, inc, ascending, east, north, nu, g);
  } catch (const std::domain_error& err) {
    throw ScenarioError(where + ".pass: " + err.what());
  }
}

void parse_scene_into(Fields& f, Scenario& s) {
  if (f.has("gravity")) {
    Fields g(f.raw("gravity"), "gravity");
    s.gravity.mu = g.number("mu_m3_s2", s.gravity.mu);
    s.gravity.earth_radius = g.number("earth_radius_m", s.gravity.earth_radius);
    s.gravity.earth_rotation_rate = g.number("earth_rotation_rad_s", s.gravity.earth_rotation_rate);
    g.finish();
    if (!(s.gravity.mu > 0) || !(s.gravity.earth_radius > 0)) throw ScenarioError("gravity: values must be positive");
  }
  s.receiver = parse_site(f.raw("receiver"), "receiver");
  if (f.has("transmitter")) s.radar.transmitter = parse_site(f.raw("transmitter"), "transmitter");

  if (f.has("radar")) {
    Fields r(f.raw("radar"), "radar");
    s.radar.carrier_freq = r.number("carrier_freq_hz", s.radar.carrier_freq);
    s.radar.sample_rate = r.number("sample_rate_hz", s.radar.sample_rate);
    s.radar.bandwidth = r.number("bandwidth_hz", s.radar.bandwidth);
    s.radar.cpi = r.number("cpi_s", s.radar.cpi);
    s.radar.max_path = r.number("max_path_km", s.radar.max_path / 1e3) * 1e3;
    r.finish();
  }
  try {
    s.radar.validate();
  } catch (const SignalError& e) {
    throw ScenarioError(std::string("radar: ") + e.what());
  }

  if (f.has("array")) {
    Fields a(f.raw("array"), "array");
    const json& elems = a.raw("elements_enu_m");
    if (!elems.is_array() || elems.empty()) throw ScenarioError("array.elements_enu_m: expected a non-empty array");
    s.array_enu.clear();
    for (const json& p : elems) {
      if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number())
        throw ScenarioError("array.elements_enu_m: each element is [east, north, up]");
      s.array_enu.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    a.finish();
  }
}

}  // namespace

json default_scenario_json() {
  return json::parse(R"({
  "receiver": {"lat_deg": -26.703319, "lon_deg": 116.670815, "alt_m": 377.0},
  "transmitter": {"lat_deg": -31.952712, "lon_deg": 115.861320, "alt_m": 20.0},
  "radar": {
    "carrier_freq_hz": 100000000.0,
    "sample_rate_hz": 200000.0,
    "bandwidth_hz": 100000.0,
    "cpi_s": 10.0,
    "max_path_km": 6000.0
  },
  "signal": {"noise_power": 1.0, "reference_seed": 1, "noise_seed": 2},
  "tracks": {"window_s": 20.0, "spacing_s": 0.1},
  "targets": [
    {"pass": {"altitude_km": 700.0, "e": 0.0007, "i_deg": 98.0, "ascending": false,
              "east_km": 350.0, "north_km": 0.0, "nu_deg": 90.0},
     "amplitude": 0.01}
  ]
})");
}

KeplerianElements<> pass_elements(const GeodeticSite<>& site, double altitude, double e, double inc,
                                  bool ascending, double east, double north, double nu,
                                  const GravityModel<>& g) {
  if (!(altitude > 0)) throw GeometryError("pass altitude must be positive");
  const Eigen::Matrix3d enu = enu_axes(site, 0.0, g);
  const Vector3d ground = site_position(site, 0.0, g) + east * enu.col(0) + north * enu.col(1);
  const Vector3d r = ground.normalized() * (g.earth_radius + altitude);
  KeplerianElements<> el = elements_through_position<double>(r, e, inc, nu, ascending, 0.0);
  validate_elements(el, g);
  for (int it = 0; it < 10; ++it) {
    const double tca = time_of_closest_approach(el, site, g);
    el.epoch -= tca;
    if (std::abs(tca) < 1e-9) break;
  }
  return propagate_kepler(el, -el.epoch, g);
}

Scenario parse_scenario(const json& doc) {
  Fields f(doc, "scenario");
  Scenario s;
  parse_scene_into(f, s);

  double default_amplitude = 0.01;
  if (f.has("signal")) {
    Fields sig(f.raw("signal"), "signal");
    default_amplitude = sig.number("amplitude", default_amplitude);
    s.noise_power = sig.number("noise_power", s.noise_power);
    s.reference_seed = sig.integer("reference_seed", s.reference_seed);
    s.noise_seed = sig.integer("noise_seed", s.noise_seed);
    sig.finish();
    if (s.noise_power < 0) throw ScenarioError("signal.noise_power: must be non-negative");
  }
  if (f.has("tracks")) {
    Fields t(f.raw("tracks"), "tracks");
    s.track_window = t.number("window_s", s.track_window);
    s.track_spacing = t.number("spacing_s", s.track_spacing);
    t.finish();
    if (!(s.track_window > 0) || !(s.track_spacing > 0)) throw ScenarioError("tracks: values must be positive");
  }
  if (f.has("targets")) {
    const json& targets = f.raw("targets");
    if (!targets.is_array()) throw ScenarioError("targets: expected an array");
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const std::string where = "targets[" + std::to_string(k) + "]";
      Fields t(targets[k], where);
      TargetSpec spec;
      spec.elements = parse_target_orbit(t, where, s.receiver, s.gravity);
      spec.amplitude = t.number("amplitude", default_amplitude);
      t.finish();
      s.targets.push_back(spec);
    }
  }
  f.finish();
  return s;
}

Scenario scenario_from_reference(const json& ref, const fs::path& base_dir) {
  if (ref.is_string()) {
    const fs::path p = base_dir / ref.get<std::string>();
    try {
      return parse_scenario(read_json(p));
    } catch (const FormatError& e) {
      throw ScenarioError(e.what());
    }
  }
  return parse_scenario(ref);
}

Simulation simulate(const Scenario& s) {
  Simulation sim;
  sim.reference = synthesize_reference(s.radar, s.reference_seed);
  const FractionalDelayLine line(sim.reference);
  const ArrayGeometry geom = s.array();
  const double half = s.radar.cpi / 2.0 + 1.0;

  std::vector<EphemerisTrack> tracks;
  for (const TargetSpec& t : s.targets) tracks.emplace_back(t.elements, -half, half, 0.01, s.gravity);

  const std::vector<std::uint64_t> seeds = element_seeds(s.noise_seed, geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) {
    SignalBuffer buf = make_cpi_buffer(s.radar);
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      const PathFunction path = truth_path(tracks[k], s.receiver, s.radar.transmitter, s.gravity);
      const DirectionFunction dir = truth_direction(tracks[k], s.receiver, s.gravity);
      add_echo(buf, line, path, s.radar, s.targets[k].amplitude, &dir, geom.positions[n]);
    }
    add_noise(buf, s.noise_power, seeds[n]);
    sim.surveillance.push_back(std::move(buf));
  }

  for (const TargetSpec& t : s.targets) {
    const KeplerianElements<> at_zero = propagate_kepler(t.elements, -t.elements.epoch, s.gravity);
    sim.truth_tracks.push_back(measurement_track(at_zero, s.receiver, s.track_window, s.track_spacing, s.gravity));
  }
  return sim;
}

void write_simulation(const Simulation& sim, const Scenario& s, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());

  json manifest;
  write_iq(dir / "reference.cf32", sim.reference, s.radar.carrier_freq);
  manifest["reference"] = "reference.cf32";
  manifest["surveillance"] = json::array();
  for (std::size_t n = 0; n < sim.surveillance.size(); ++n) {
    const std::string name = "surveillance_" + std::to_string(n) + ".cf32";
    write_iq(dir / name, sim.surveillance[n], s.radar.carrier_freq);
    manifest["surveillance"].push_back(name);
  }
  manifest["truth_tracks"] = json::array();
  for (std::size_t k = 0; k < sim.truth_tracks.size(); ++k) {
    const std::string name = "truth_" + std::to_string(k) + ".csv";
    json header{{"kind", "truth"},
                {"carrier_freq_hz", s.radar.carrier_freq},
                {"cpi_s", s.radar.cpi},
                {"sample_rate_hz", s.radar.sample_rate}};
    write_track(dir / name, to_track_file(sim.truth_tracks[k], header));
    manifest["truth_tracks"].push_back(name);
  }
  write_json(dir / "manifest.json", manifest);
}

TracksConfig parse_tracks_config(const json& doc, const fs::path& base_dir) {
  Fields f(doc, "tracks");
  TracksConfig cfg;
  if (f.has("scenario")) {
    json scene = f.raw("scenario");
    if (scene.is_string()) {
      try {
        scene = read_json(base_dir / scene.get<std::string>());
      } catch (const FormatError& e) {
        throw ScenarioError(e.what());
      }
    }
    Fields sf(scene, "scenario");
    parse_scene_into(sf, cfg.scene);
  } else {
    cfg.scene.receiver = parse_site(f.raw("receiver"), "receiver");
  }

  Fields t(f.raw("target"), "target");
  const KeplerianElements<> el = parse_target_orbit(t, "target", cfg.scene.receiver, cfg.scene.gravity);
  t.finish();
  cfg.target = propagate_kepler(el, -el.epoch, cfg.scene.gravity);

  const std::string mode = f.text("mode", "circular");
  if (mode == "circular") cfg.mode = TrackMode::circular;
  else if (mode == "shape") cfg.mode = TrackMode::shape;
  else if (mode == "exact") cfg.mode = TrackMode::exact;
  else throw ScenarioError("tracks.mode: expected circular, shape or exact");

  cfg.truth_window = f.number("truth_window_s", cfg.truth_window);
  cfg.simulated_window = f.number("simulated_window_s", cfg.simulated_window);
  cfg.spacing = f.number("spacing_s", cfg.spacing);
  f.finish();
  if (!(cfg.truth_window > 0) || !(cfg.simulated_window > 0) || !(cfg.spacing > 0))
    throw ScenarioError("tracks: windows and spacing must be positive");
  return cfg;
}

StateDerivatives<> simulated_state(const KeplerianElements<>& truth, const GeodeticSite<>& site,
                                   TrackMode mode, const GravityModel<>& g, double lambda) {
  const StateDerivatives<> s = elements_to_state(truth, g);
  if (mode == TrackMode::exact) return s;

  VelocitySolutionSet set;
  if (mode == TrackMode::circular) {
    const SensorState<> sensor = site_to_sensor_state(site, truth.epoch, g);
    const Vector3d rho = s.r - sensor.q;
    const double doppler = -2.0 * rho.dot(s.v - sensor.qd) / rho.norm() / lambda;
    set = circular_zero_doppler(s.r, sensor, doppler, lambda, g);
  } else {
    set = solve_velocities(OrbitShapeHypothesis{s.r, truth.e, truth.a, truth.raan}, g);
  }
  if (set.empty())
    throw InfeasibleError(set.degenerate ? "constraint planes are degenerate at this position"
                                         : "no velocity satisfies the constraints at this position");
  const VelocitySolution* best = &set.solutions.front();
  for (const VelocitySolution& sol : set.solutions)
    if ((sol.v - s.v).norm() < (best->v - s.v).norm()) best = &sol;
  return make_state(s.r, best->v, g, truth.epoch);
}

TrackPair make_tracks(const TracksConfig& cfg) {
  const GravityModel<>& g = cfg.scene.gravity;
  TrackPair out;
  out.truth = measurement_track(cfg.target, cfg.scene.receiver, cfg.truth_window, cfg.spacing, g);
  const StateDerivatives<> sim =
      simulated_state(cfg.target, cfg.scene.receiver, cfg.mode, g, cfg.scene.radar.wavelength());
  out.simulated = predicted_track(sim, cfg.scene.receiver, cfg.simulated_window, cfg.spacing, g);
  return out;
}

SearchConfig parse_search_config(const json& doc, const fs::path& base_dir) {
  Fields f(doc, "search");
  SearchConfig cfg;
  {
    json scene = f.raw("scenario");
    if (scene.is_string()) {
      try {
        scene = read_json(base_dir / scene.get<std::string>());
      } catch (const FormatError& e) {
        throw ScenarioError(e.what());
      }
    }
    // Targets and signal settings in a shared scenario file are ignored.
    Fields sf(scene, "scenario");
    parse_scene_into(sf, cfg.scene);
  }
  const GravityModel<>& g = cfg.scene.gravity;

  Fields v(f.raw("volume"), "volume");
  if (v.has("centre_az_deg")) {
    const double az = v.number("centre_az_deg") * kDeg, el = v.number("centre_el_deg") * kDeg;
    const Vector3d local(std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el));
    cfg.volume.centre = topocentric_direction<double>(enu_axes(cfg.scene.receiver, 0.0, g) * local);
  } else {
    cfg.volume.centre = {v.number("centre_ra_deg") * kDeg, v.number("centre_dec_deg") * kDeg};
  }
  cfg.volume.half_angle = v.number("half_angle_deg") * kDeg;
  cfg.volume.angular_step = v.number("angular_step_deg") * kDeg;
  const std::vector<double> range = v.numbers("range_km");
  if (range.size() != 2) throw ScenarioError("volume.range_km: expected [min, max]");
  cfg.volume.range_min = range[0] * 1e3;
  cfg.volume.range_max = range[1] * 1e3;
  cfg.volume.range_step = v.number("range_step_m", cfg.scene.radar.c / (2.0 * cfg.scene.radar.bandwidth));
  v.finish();
  if (!(cfg.volume.angular_step > 0) || !(cfg.volume.range_step > 0) || !(cfg.volume.half_angle >= 0) ||
      !(cfg.volume.range_min > 0) || !(cfg.volume.range_max >= cfg.volume.range_min))
    throw ScenarioError("volume: malformed search volume");

  const std::string mode = f.text("mode", "circular_zero_doppler");
  if (mode == "circular_zero_doppler") {
    CircularMode m;
    if (f.has("doppler_hz")) m.doppler_hz = f.numbers("doppler_hz");
    cfg.mode = m;
  } else if (mode == "shape") {
    Fields s(f.raw("shape"), "shape");
    ShapeMode m;
    m.e = s.numbers("e");
    for (double a : s.numbers("a_km")) m.a.push_back(a * 1e3);
    for (double o : s.numbers("raan_deg")) m.raan.push_back(o * kDeg);
    s.finish();
    cfg.mode = m;
  } else {
    throw ScenarioError("search.mode: expected circular_zero_doppler or shape");
  }

  std::vector<double> perigee{150.0, 2000.0};
  if (f.has("perigee_altitude_km")) perigee = f.numbers("perigee_altitude_km");
  if (perigee.size() != 2 || !(perigee[1] >= perigee[0]))
    throw ScenarioError("search.perigee_altitude_km: expected [min, max]");
  cfg.limits = {g.earth_radius + perigee[0] * 1e3, g.earth_radius + perigee[1] * 1e3};

  cfg.options.threshold_db = f.number("threshold_db", cfg.options.threshold_db);
  cfg.options.threads = static_cast<unsigned>(f.integer("threads", 0));
  cfg.enumeration.max_candidates = f.integer("max_hypotheses", cfg.enumeration.max_candidates);
  f.finish();
  return cfg;
}

namespace {

struct Accumulator {
  double max_abs = 0;
  double sum_sq = 0;
  void add(double x) {
    max_abs = std::max(max_abs, std::abs(x));
    sum_sq += x * x;
  }
  ResidualStats stats(std::size_t n) const { return {max_abs, n ? std::sqrt(sum_sq / double(n)) : 0.0}; }
};

double interpolate(const std::vector<double>& t, const std::vector<double>& y, double x, std::size_t& k) {
  while (k + 2 < t.size() && t[k + 1] <= x) ++k;
  if (x == t[k]) return y[k];
  if (k + 1 >= t.size()) return y[k];
  if (x == t[k + 1]) return y[k + 1];
  const double w = (x - t[k]) / (t[k + 1] - t[k]);
  return y[k] + w * (y[k + 1] - y[k]);
}

double unwrap_near(double value, double reference) {
  return reference + angle_difference(value, reference);
}

}  // namespace

TrackResiduals compare_tracks(const MeasurementTrack& a, const MeasurementTrack& b, const CompareSettings& settings) {
  if (a.size() == 0 || b.size() == 0) throw FormatError("empty track");
  const double eps = 1e-9 * std::max(1.0, std::abs(b.t.back()));
  TrackResiduals r;
  Accumulator alpha, delta, angle, rho, rhod;
  std::size_t k = 0;
  bool first = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.t[i];
    if (t < b.t.front() - eps || t > b.t.back() + eps) continue;
    const double tc = std::clamp(t, b.t.front(), b.t.back());
    const double db = interpolate(b.t, b.delta, tc, k);
    const double rb = interpolate(b.t, b.rho, tc, k);
    const double vb = interpolate(b.t, b.rhod, tc, k);
    // Right ascension is interpolated on an unwrapped pair (0/2pi seam).
    double ab = b.alpha[k];
    if (k + 1 < b.size() && tc > b.t[k]) {
      const double a1 = unwrap_near(b.alpha[k + 1], ab);
      ab += (tc - b.t[k]) / (b.t[k + 1] - b.t[k]) * (a1 - ab);
    }

    alpha.add(angle_difference(ab, a.alpha[i]));
    delta.add(db - a.delta[i]);
    const Vector3d ua = direction_unit_vector(TopocentricDirection<>{a.alpha[i], a.delta[i]});
    const Vector3d ub = direction_unit_vector(TopocentricDirection<>{ab, db});
    angle.add(std::atan2(ua.cross(ub).norm(), ua.dot(ub)));
    rho.add(rb - a.rho[i]);
    rhod.add(vb - a.rhod[i]);
    if (first) r.t_begin = t;
    first = false;
    r.t_end = t;
    ++r.count;
  }
  if (r.count == 0) throw FormatError("tracks have disjoint time supports");
  r.alpha = alpha.stats(r.count);
  r.delta = delta.stats(r.count);
  r.angle = angle.stats(r.count);
  r.rho = rho.stats(r.count);
  r.rhod = rhod.stats(r.count);
  const double doppler_scale = 2.0 / settings.wavelength * settings.cpi;
  r.doppler_bins = {r.rhod.max_abs * doppler_scale, r.rhod.rms * doppler_scale};
  r.range_bins = {r.rho.max_abs / settings.range_bin, r.rho.rms / settings.range_bin};
  return r;
}

json residuals_to_json(const TrackResiduals& r, const CompareSettings& settings) {
  auto stats = [](const ResidualStats& s, double scale = 1.0) {
    return json{{"max_abs", s.max_abs * scale}, {"rms", s.rms * scale}};
  };
  const double deg = 1.0 / kDeg;
  json j;
  j["overlap"] = {{"n_samples", r.count}, {"t_begin_s", r.t_begin}, {"t_end_s", r.t_end}};
  j["alpha_deg"] = stats(r.alpha, deg);
  j["delta_deg"] = stats(r.delta, deg);
  j["angle_deg"] = stats(r.angle, deg);
  j["rho_m"] = stats(r.rho);
  j["rhodot_mps"] = stats(r.rhod);
  j["doppler_bins"] = stats(r.doppler_bins);
  j["range_bins"] = stats(r.range_bins);
  j["settings"] = {{"wavelength_m", settings.wavelength},
                   {"cpi_s", settings.cpi},
                   {"range_bin_m", settings.range_bin}};
  return j;
}

}  // namespace odbd
