// odbd: scene simulation, track generation, uncued search and track comparison.
#include "odbd/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace odbd;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInputError = 2, kResourceGuard = 3 };

int cmd_simulate(const std::string& config, const fs::path& out_dir) {
  const Scenario s = config.empty() ? parse_scenario(default_scenario_json()) : parse_scenario(read_json(config));
  const Simulation sim = simulate(s);
  write_simulation(sim, s, out_dir);
  std::cerr << "wrote " << sim.surveillance.size() << " surveillance channel(s), " << sim.truth_tracks.size()
            << " truth track(s) to " << out_dir.string() << "\n";
  return kOk;
}

int cmd_tracks(const fs::path& config, const fs::path& out_dir) {
  const TracksConfig cfg = parse_tracks_config(read_json(config), config.parent_path());
  TrackPair tracks;
  try {
    tracks = make_tracks(cfg);
  } catch (const InfeasibleError& e) {
    std::cout << json{{"error", "infeasible_constraints"}, {"reason", e.what()}}.dump() << "\n";
    return kInputError;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw OutputError("cannot create output directory " + out_dir.string());

  const char* mode = cfg.mode == TrackMode::circular ? "circular" : cfg.mode == TrackMode::shape ? "shape" : "exact";
  json base{{"carrier_freq_hz", cfg.scene.radar.carrier_freq},
            {"cpi_s", cfg.scene.radar.cpi},
            {"sample_rate_hz", cfg.scene.radar.sample_rate}};
  json truth = base, simulated = base;
  truth["kind"] = "truth";
  simulated["kind"] = "simulated";
  simulated["mode"] = mode;
  write_track(out_dir / "truth.csv", to_track_file(tracks.truth, truth));
  write_track(out_dir / "simulated.csv", to_track_file(tracks.simulated, simulated));
  return kOk;
}

int cmd_search(const fs::path& config, const fs::path& in_dir, const fs::path& out) {
  const SearchConfig cfg = parse_search_config(read_json(config), config.parent_path());
  const json manifest = read_json(in_dir / "manifest.json");
  if (!manifest.contains("reference") || !manifest.contains("surveillance") || !manifest["surveillance"].is_array())
    throw FormatError("manifest.json: missing reference or surveillance entries");

  const SignalBuffer ref = read_iq(in_dir / manifest["reference"].get<std::string>());
  std::vector<SignalBuffer> surv;
  for (const json& name : manifest["surveillance"]) surv.push_back(read_iq(in_dir / name.get<std::string>()));

  const ArrayGeometry geom = cfg.scene.array();
  if (surv.size() != geom.size())
    throw FormatError("found " + std::to_string(surv.size()) + " surveillance channels for a " +
                      std::to_string(geom.size()) + "-element array");
  for (const SignalBuffer& s : surv) {
    if (s.sample_rate != cfg.scene.radar.sample_rate || ref.sample_rate != s.sample_rate)
      throw FormatError("IQ sample rate does not match the search configuration");
    if (std::size_t(s.size()) != cfg.scene.radar.cpi_samples() || s.epoch != surv[0].epoch)
      throw FormatError("surveillance channels do not span the configured CPI");
  }
  if (std::abs(surv[0].epoch + cfg.scene.radar.cpi / 2) > 1e-9)
    throw FormatError("surveillance must start half a CPI before t = 0");

  const auto sensor = site_to_sensor_state(cfg.scene.receiver, 0.0, cfg.scene.gravity);
  const auto t0 = std::chrono::steady_clock::now();
  const auto hyps = enumerate_hypotheses(cfg.volume, cfg.mode, sensor, cfg.limits, cfg.scene.gravity,
                                         cfg.scene.radar.wavelength(), cfg.enumeration);
  const FractionalDelayLine line(ref);
  const SearchScene scene{cfg.scene.radar, cfg.scene.receiver, cfg.scene.gravity, geom};
  const SearchResult result = run_search(surv, line, hyps, scene, cfg.options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_json(out, detections_to_json(result.detections));
  std::cerr << hyps.size() << " positions, " << candidate_count(hyps) << " hypotheses, " << result.evaluated
            << " evaluated, " << result.skipped << " skipped, " << result.detections.size() << " detection(s), "
            << seconds << " s\n";
  return kOk;
}

int cmd_compare(const fs::path& a_path, const fs::path& b_path, const fs::path& out, double carrier,
                double cpi, double sample_rate) {
  const TrackFile a = read_track(a_path);
  const TrackFile b = read_track(b_path);
  auto setting = [&](const char* key, double flag) {
    if (flag > 0) return flag;
    if (a.header.contains(key) && a.header[key].is_number()) return a.header[key].get<double>();
    return -1.0;
  };
  CompareSettings settings;
  if (const double f = setting("carrier_freq_hz", carrier); f > 0) settings.wavelength = kSpeedOfLight / f;
  if (const double t = setting("cpi_s", cpi); t > 0) settings.cpi = t;
  if (const double fs_hz = setting("sample_rate_hz", sample_rate); fs_hz > 0)
    settings.range_bin = kSpeedOfLight / (2 * fs_hz);
  const TrackResiduals r = compare_tracks(from_track_file(a), from_track_file(b), settings);
  write_json(out, residuals_to_json(r, settings));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbit-determination-before-detect radar toolkit"};
  app.require_subcommand(1);

  std::string sim_config, sim_out;
  auto* simulate = app.add_subcommand("simulate", "Synthesize reference/surveillance IQ and truth tracks");
  simulate->add_option("-c,--config", sim_config, "Scenario JSON (built-in default when omitted)");
  simulate->add_option("-o,--out", sim_out, "Output directory")->required();

  std::string tracks_config, tracks_out;
  auto* tracks = app.add_subcommand("tracks", "Truth and constraint-derived simulated tracks");
  tracks->add_option("-c,--config", tracks_config, "Tracks JSON")->required();
  tracks->add_option("-o,--out", tracks_out, "Output directory")->required();

  std::string search_config, search_in, search_out;
  auto* search = app.add_subcommand("search", "Uncued orbit-hypothesis search");
  search->add_option("-c,--config", search_config, "Search JSON")->required();
  search->add_option("-i,--input", search_in, "Directory written by simulate")->required();
  search->add_option("-o,--out", search_out, "Detections JSON")->required();

  std::string track_a, track_b, compare_out;
  double carrier = -1, cpi = -1, sample_rate = -1;
  auto* compare = app.add_subcommand("compare", "Residuals between two track files");
  compare->add_option("a", track_a, "Reference track CSV")->required();
  compare->add_option("b", track_b, "Track CSV to compare")->required();
  compare->add_option("-o,--out", compare_out, "Residual report JSON")->required();
  compare->add_option("--carrier-freq-hz", carrier, "Overrides the sidecar carrier frequency");
  compare->add_option("--cpi-s", cpi, "Overrides the sidecar CPI");
  compare->add_option("--sample-rate-hz", sample_rate, "Overrides the sidecar sample rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_config, sim_out);
    if (*tracks) return cmd_tracks(tracks_config, tracks_out);
    if (*search) return cmd_search(search_config, search_in, search_out);
    if (*compare) return cmd_compare(track_a, track_b, compare_out, carrier, cpi, sample_rate);
  } catch (const SearchCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResourceGuard;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const OutputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
