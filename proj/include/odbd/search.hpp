// Uncued search: enumerate constrained orbit hypotheses over a volume, run
// the matched-filter bank, threshold, and report single-detection orbits.
#pragma once

#include "odbd/matched_filter.hpp"
#include "odbd/velocity_solver.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace odbd {

class SearchCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Direction cone around a topocentric centre times a receiver range
/// interval, gridded with a tangent-plane angular step and a range step.
struct SearchVolume {
  TopocentricDirection<> centre;
  double half_angle = 0;     // rad
  double range_min = 0;      // m
  double range_max = 0;      // m
  double angular_step = 0;   // rad
  double range_step = 0;     // m
};

struct CircularMode {
  std::vector<double> doppler_hz{0.0};
};

struct ShapeMode {
  std::vector<double> e;
  std::vector<double> a;     // m
  std::vector<double> raan;  // rad
};

using SearchMode = std::variant<CircularMode, ShapeMode>;

enum class HypothesisKind { circular_zero_doppler, shape };

std::string to_string(HypothesisKind kind);

struct OrbitHypothesis {
  Vector3d r = Vector3d::Zero();
  HypothesisKind kind = HypothesisKind::circular_zero_doppler;
  double doppler_hz = 0;  // circular mode
  double e = 0;           // shape mode (0 in circular mode)
  double a = 0;
  double raan = 0;
  VelocitySolutionSet candidates;
};

struct EnumerationOptions {
  std::size_t max_candidates = 1'000'000;
};

/// Deterministic order: range, then tangent-plane rows, then columns, then
/// mode parameters. Positions with no valid velocity are skipped.
std::vector<OrbitHypothesis> enumerate_hypotheses(const SearchVolume& vol, const SearchMode& mode,
                                                  const SensorState<>& sensor,
                                                  const PeriapsisLimits& limits, const GravityModel<>& g,
                                                  double lambda, const EnumerationOptions& opts = {});

std::size_t candidate_count(std::span<const OrbitHypothesis> hypotheses);

/// Search-volume grid positions in enumeration order (before feasibility).
std::vector<Vector3d> volume_positions(const SearchVolume& vol, const Vector3d& sensor_position);

struct Detection {
  double statistic = 0;    // |chi|^2
  double noise_floor = 0;  // estimated mean noise |chi|^2
  double snr_db = 0;
  Vector3d r = Vector3d::Zero();
  Vector3d v = Vector3d::Zero();
  KeplerianElements<> elements;
  double epoch = 0;
  HypothesisKind kind = HypothesisKind::circular_zero_doppler;
  std::size_t candidate_index = 0;
};

struct SearchScene {
  RadarConfig radar;
  GeodeticSite<> receiver;
  GravityModel<> gravity;
  ArrayGeometry array = ArrayGeometry::single_element();
};

struct SearchOptions {
  double threshold_db = 13.0;
  unsigned threads = 0;  // 0: ODBD_THREADS or hardware concurrency
  std::size_t min_floor_samples = 100;
};

struct SearchResult {
  std::vector<Detection> detections;  // SNR descending
  std::vector<double> statistics;     // per candidate, enumeration order (NaN if skipped)
  double noise_floor = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t floor_probes = 0;
};

/// Median of |chi|^2 divided by ln 2: the mean of an exponential
/// distribution recovered from its median.
double estimate_noise_floor(std::span<const double> statistics);

/// Path polynomial and line of sight for a hypothesised (r, v) at the CPI
/// centre (scenario time 0).
PathPolynomial hypothesis_path(const Vector3d& r, const Vector3d& v, const SearchScene& scene);

SearchResult run_search(std::span<const SignalBuffer> elements, const FractionalDelayLine& ref,
                        std::span<const OrbitHypothesis> hypotheses, const SearchScene& scene,
                        const SearchOptions& opts = {});

KeplerianElements<> iod_from_detection(const Detection& d, const GravityModel<>& g);

unsigned resolve_thread_count(unsigned requested);

}  // namespace odbd
