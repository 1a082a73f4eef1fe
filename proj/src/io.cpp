#include "odbd/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace odbd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr const char* kTrackColumns = "t_s,alpha_deg,delta_deg,rho_m,rhodot_mps";

void put_le32(std::uint32_t v, char* out) {
  for (int b = 0; b < 4; ++b) out[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
}

std::uint32_t get_le32(const unsigned char* in) {
  return std::uint32_t(in[0]) | std::uint32_t(in[1]) << 8 | std::uint32_t(in[2]) << 16 |
         std::uint32_t(in[3]) << 24;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path.string());
  return out;
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw FormatError("bad number '" + std::string(text) + "' in " + what);
  return value;
}

template <typename T>
T header_field(const json& h, const char* key, const fs::path& file) {
  if (!h.contains(key)) throw FormatError(file.string() + ": missing '" + key + "'");
  try {
    return h.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(file.string() + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

fs::path sidecar_path(const fs::path& data) { return fs::path(data.string() + ".json"); }

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw OutputError("cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_iq(const fs::path& data, const SignalBuffer& buf, double carrier_freq_hz) {
  std::string bytes(std::size_t(buf.size()) * 8, '\0');
  for (Eigen::Index n = 0; n < buf.size(); ++n) {
    const auto i = static_cast<float>(buf.samples(n).real());
    const auto q = static_cast<float>(buf.samples(n).imag());
    put_le32(std::bit_cast<std::uint32_t>(i), &bytes[std::size_t(n) * 8]);
    put_le32(std::bit_cast<std::uint32_t>(q), &bytes[std::size_t(n) * 8 + 4]);
  }
  auto out = open_out(data, std::ios::binary);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw OutputError("cannot write " + data.string());

  json side;
  side["sample_rate_hz"] = buf.sample_rate;
  side["carrier_freq_hz"] = carrier_freq_hz;
  side["epoch_s"] = buf.epoch;
  side["n_samples"] = std::uint64_t(buf.size());
  write_json(sidecar_path(data), side);
}

SignalBuffer read_iq(const fs::path& data, IqHeader* header) {
  const json side = read_json(sidecar_path(data));
  IqHeader h;
  h.sample_rate_hz = header_field<double>(side, "sample_rate_hz", data);
  h.carrier_freq_hz = header_field<double>(side, "carrier_freq_hz", data);
  h.epoch_s = header_field<double>(side, "epoch_s", data);
  h.n_samples = header_field<std::uint64_t>(side, "n_samples", data);
  if (!(h.sample_rate_hz > 0)) throw FormatError(data.string() + ": sample rate must be positive");

  std::ifstream in(data, std::ios::binary);
  if (!in) throw FormatError("cannot open " + data.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != h.n_samples * 8)
    throw FormatError(data.string() + ": size " + std::to_string(bytes.size()) + " bytes, sidecar says " +
                      std::to_string(h.n_samples) + " samples");

  SignalBuffer buf;
  buf.sample_rate = h.sample_rate_hz;
  buf.epoch = h.epoch_s;
  buf.samples.resize(Eigen::Index(h.n_samples));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::uint64_t n = 0; n < h.n_samples; ++n) {
    const float i = std::bit_cast<float>(get_le32(p + n * 8));
    const float q = std::bit_cast<float>(get_le32(p + n * 8 + 4));
    buf.samples(Eigen::Index(n)) = cdouble(i, q);
  }
  if (header) *header = h;
  return buf;
}

TrackFile to_track_file(const MeasurementTrack& track, json header) {
  TrackFile f;
  for (std::size_t k = 0; k < track.size(); ++k) {
    f.t_s.push_back(track.t[k]);
    f.alpha_deg.push_back(track.alpha[k] * kDeg);
    f.delta_deg.push_back(track.delta[k] * kDeg);
    f.rho_m.push_back(track.rho[k]);
    f.rhodot_mps.push_back(track.rhod[k]);
  }
  header["spacing_s"] = track.spacing;
  f.header = std::move(header);
  return f;
}

MeasurementTrack from_track_file(const TrackFile& f) {
  MeasurementTrack t;
  t.t = f.t_s;
  for (std::size_t k = 0; k < f.size(); ++k) {
    t.alpha.push_back(f.alpha_deg[k] / kDeg);
    t.delta.push_back(f.delta_deg[k] / kDeg);
  }
  t.rho = f.rho_m;
  t.rhod = f.rhodot_mps;
  t.spacing = f.size() > 1 ? (f.t_s.back() - f.t_s.front()) / double(f.size() - 1) : 0.0;
  return t;
}

void validate_track(const TrackFile& f) {
  const std::size_t n = f.size();
  if (f.alpha_deg.size() != n || f.delta_deg.size() != n || f.rho_m.size() != n || f.rhodot_mps.size() != n)
    throw FormatError("track columns have different lengths");
  if (n < 2) return;
  const double step = (f.t_s.back() - f.t_s.front()) / double(n - 1);
  if (!(step > 0)) throw FormatError("track time is not increasing");
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = f.t_s[k] - f.t_s[k - 1];
    if (!(dt > 0)) throw FormatError("track time is not strictly increasing");
    if (std::abs(dt - step) > 1e-6 * step) throw FormatError("track time is not uniformly spaced");
  }
}

void write_track(const fs::path& csv, const TrackFile& f) {
  validate_track(f);
  std::string text = std::string(kTrackColumns) + "\n";
  for (std::size_t k = 0; k < f.size(); ++k) {
    text += format_double(f.t_s[k]) + ',' + format_double(f.alpha_deg[k]) + ',' +
            format_double(f.delta_deg[k]) + ',' + format_double(f.rho_m[k]) + ',' +
            format_double(f.rhodot_mps[k]) + '\n';
  }
  auto out = open_out(csv, std::ios::binary);
  out << text;
  if (!out) throw OutputError("cannot write " + csv.string());

  json header = f.header;
  header["columns"] = {"t_s", "alpha_deg", "delta_deg", "rho_m", "rhodot_mps"};
  header["n_rows"] = f.size();
  write_json(sidecar_path(csv), header);
}

TrackFile read_track(const fs::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw FormatError("cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line != kTrackColumns)
    throw FormatError(csv.string() + ": expected header '" + kTrackColumns + "'");

  TrackFile f;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::array<double, 5> v{};
    std::size_t start = 0;
    for (int c = 0; c < 5; ++c) {
      const std::size_t end = c < 4 ? line.find(',', start) : line.size();
      if (end == std::string::npos) throw FormatError(csv.string() + ": too few columns on row " + std::to_string(row));
      v[c] = parse_double(std::string_view(line).substr(start, end - start), csv.string());
      start = end + 1;
    }
    f.t_s.push_back(v[0]);
    f.alpha_deg.push_back(v[1]);
    f.delta_deg.push_back(v[2]);
    f.rho_m.push_back(v[3]);
    f.rhodot_mps.push_back(v[4]);
  }
  validate_track(f);

  const fs::path side = sidecar_path(csv);
  if (fs::exists(side)) {
    f.header = read_json(side);
    f.header.erase("columns");
    f.header.erase("n_rows");
  }
  return f;
}

json detection_to_json(const Detection& d) {
  json j;
  j["snr_db"] = d.snr_db;
  j["r_eci_m"] = {d.r.x(), d.r.y(), d.r.z()};
  j["v_eci_mps"] = {d.v.x(), d.v.y(), d.v.z()};
  j["elements"] = {{"a_m", d.elements.a},       {"e", d.elements.e},
                   {"i_rad", d.elements.i},     {"raan_rad", d.elements.raan},
                   {"argp_rad", d.elements.argp}, {"nu_rad", d.elements.nu}};
  j["epoch_s"] = d.epoch;
  j["mode"] = to_string(d.kind);
  return j;
}

json detections_to_json(std::span<const Detection> detections) {
  json arr = json::array();
  for (const Detection& d : detections) arr.push_back(detection_to_json(d));
  return arr;
}

}  // namespace odbd
