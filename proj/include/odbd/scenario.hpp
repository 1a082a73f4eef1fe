// Scenario, track and search configuration documents, scene simulation,
// simulated-versus-truth tracks and track comparison. JSON field names carry
// their units (a_km, i_deg, ...).
#pragma once

#include "odbd/io.hpp"

#include <filesystem>
#include <stdexcept>

namespace odbd {

/// Invalid configuration document.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The constraint set admits no orbit.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetSpec {
  KeplerianElements<> elements;
  double amplitude = 0;
};

struct Scenario {
  GravityModel<> gravity;
  GeodeticSite<> receiver;
  RadarConfig radar;
  std::vector<Vector3d> array_enu{Vector3d::Zero()};
  std::vector<TargetSpec> targets;
  double noise_power = 1.0;
  std::uint64_t reference_seed = 1;
  std::uint64_t noise_seed = 2;
  double track_window = 20.0;  // s
  double track_spacing = 0.1;  // s

  ArrayGeometry array() const { return ArrayGeometry::from_enu(array_enu, receiver, 0.0, gravity); }
};

/// Receiver near the MWA, transmitter in Perth, 100 MHz, 10 s CPI and one
/// near-circular LEO pass at closest approach.
nlohmann::json default_scenario_json();

Scenario parse_scenario(const nlohmann::json& doc);
/// A string value names a scenario file relative to `base_dir`.
Scenario scenario_from_reference(const nlohmann::json& ref, const std::filesystem::path& base_dir);

/// Orbit at `altitude` over the ground point offset (east, north) [m] from
/// the site, with the epoch shifted so the receiver's closest approach falls
/// at t = 0.
KeplerianElements<> pass_elements(const GeodeticSite<>& site, double altitude, double e, double inc,
                                  bool ascending, double east, double north, double nu,
                                  const GravityModel<>& g);

struct Simulation {
  SignalBuffer reference;
  std::vector<SignalBuffer> surveillance;  // one per array element
  std::vector<MeasurementTrack> truth_tracks;
};

Simulation simulate(const Scenario& s);

/// reference.cf32, surveillance_<n>.cf32, truth_<k>.csv and manifest.json.
void write_simulation(const Simulation& sim, const Scenario& s, const std::filesystem::path& dir);

enum class TrackMode { exact, circular, shape };

struct TracksConfig {
  Scenario scene;
  KeplerianElements<> target;  // epoch 0
  TrackMode mode = TrackMode::circular;
  double truth_window = 20.0;
  double simulated_window = 10.0;
  double spacing = 0.1;
};

TracksConfig parse_tracks_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// State the filter would hypothesise at t = 0: the true position with a
/// velocity from the constraint solver (closest of its solutions to truth).
StateDerivatives<> simulated_state(const KeplerianElements<>& truth, const GeodeticSite<>& site,
                                   TrackMode mode, const GravityModel<>& g, double lambda);

struct TrackPair {
  MeasurementTrack truth;
  MeasurementTrack simulated;
};

TrackPair make_tracks(const TracksConfig& cfg);

struct SearchConfig {
  Scenario scene;
  SearchVolume volume;
  SearchMode mode = CircularMode{};
  PeriapsisLimits limits;
  SearchOptions options;
  EnumerationOptions enumeration;
};

SearchConfig parse_search_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct CompareSettings {
  double wavelength = kSpeedOfLight / 100e6;
  double cpi = 10.0;
  double range_bin = kSpeedOfLight / (2 * 200e3);
};

struct ResidualStats {
  double max_abs = 0;
  double rms = 0;
};

struct TrackResiduals {
  std::size_t count = 0;
  double t_begin = 0;
  double t_end = 0;
  ResidualStats alpha;    // rad
  ResidualStats delta;    // rad
  ResidualStats angle;    // rad, great-circle separation
  ResidualStats rho;      // m
  ResidualStats rhod;     // m/s
  ResidualStats doppler_bins;
  ResidualStats range_bins;
};

/// Residuals of b against a, evaluated at a's samples inside b's span
/// (b linearly interpolated between its samples).
TrackResiduals compare_tracks(const MeasurementTrack& a, const MeasurementTrack& b,
                              const CompareSettings& settings);
nlohmann::json residuals_to_json(const TrackResiduals& r, const CompareSettings& settings);

}  // namespace odbd
