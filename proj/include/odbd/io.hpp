// File formats: interleaved float32 IQ with a JSON sidecar, track CSV with a
// JSON sidecar, and the detection list.
#pragma once

#include "odbd/search.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace odbd {

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output path cannot be created or written.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IqHeader {
  double sample_rate_hz = 0;
  double carrier_freq_hz = 0;
  double epoch_s = 0;
  std::uint64_t n_samples = 0;
};

/// "<data>.json"
std::filesystem::path sidecar_path(const std::filesystem::path& data);

/// Little-endian (I, Q) float32 pairs plus the sidecar. Samples are rounded
/// to single precision; a read/write cycle of a file is byte-identical.
void write_iq(const std::filesystem::path& data, const SignalBuffer& buf, double carrier_freq_hz);
SignalBuffer read_iq(const std::filesystem::path& data, IqHeader* header = nullptr);

/// Track rows as stored on disk (degrees), so rewriting never re-rounds.
struct TrackFile {
  std::vector<double> t_s;
  std::vector<double> alpha_deg;
  std::vector<double> delta_deg;
  std::vector<double> rho_m;
  std::vector<double> rhodot_mps;
  nlohmann::json header = nlohmann::json::object();

  std::size_t size() const { return t_s.size(); }
};

TrackFile to_track_file(const MeasurementTrack& track, nlohmann::json header = nlohmann::json::object());
MeasurementTrack from_track_file(const TrackFile& file);

/// Throws FormatError unless t is strictly increasing and uniformly spaced.
void validate_track(const TrackFile& file);

void write_track(const std::filesystem::path& csv, const TrackFile& file);
TrackFile read_track(const std::filesystem::path& csv);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

nlohmann::json detection_to_json(const Detection& d);
nlohmann::json detections_to_json(std::span<const Detection> detections);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace odbd
