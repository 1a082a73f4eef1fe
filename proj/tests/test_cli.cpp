#include "odbd/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWork = fs::temp_directory_path() / "odbd_test_cli";
const fs::path kScenarios = ODBD_SCENARIO_DIR;

struct Run {
  int code = -1;
  std::string out;
};

Run odbd(const std::string& args, const std::string& env = "") {
  const fs::path out = kWork / "stdout.txt";
  const std::string cmd = env + " '" + std::string(ODBD_EXE) + "' " + args + " > '" + out.string() + "' 2> /dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2) << "\n"; }

json small_scenario() {
  json s = odbd::read_json(kScenarios / "circular_pass.json");
  s["radar"]["cpi_s"] = 0.05;
  return s;
}

struct Fixture {
  Fixture() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Fixture() { fs::remove_all(kWork); }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "simulate is deterministic") {
  write(kWork / "scene.json", small_scenario());
  REQUIRE(odbd("simulate -c " + (kWork / "scene.json").string() + " -o " + (kWork / "a").string()).code == 0);
  REQUIRE(odbd("simulate -c " + (kWork / "scene.json").string() + " -o " + (kWork / "b").string()).code == 0);
  for (const char* name : {"reference.cf32", "reference.cf32.json", "surveillance_0.cf32", "surveillance_3.cf32",
                           "truth_0.csv", "truth_0.csv.json", "manifest.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(kWork / "a" / name));
    CHECK(slurp(kWork / "a" / name) == slurp(kWork / "b" / name));
  }
  const json manifest = odbd::read_json(kWork / "a" / "manifest.json");
  CHECK(manifest["surveillance"].size() == 4);
}

TEST_CASE_FIXTURE(Fixture, "search, thread count and the hypothesis cap") {
  write(kWork / "scene.json", small_scenario());
  REQUIRE(odbd("simulate -c " + (kWork / "scene.json").string() + " -o " + (kWork / "sim").string()).code == 0);

  json search = odbd::read_json(kScenarios / "circular_search.json");
  search["scenario"] = (kWork / "scene.json").string();
  search["volume"]["half_angle_deg"] = 0.1;
  write(kWork / "search.json", search);
  const std::string args = "search -c " + (kWork / "search.json").string() + " -i " + (kWork / "sim").string();

  REQUIRE(odbd(args + " -o " + (kWork / "d1.json").string(), "ODBD_THREADS=1").code == 0);
  REQUIRE(odbd(args + " -o " + (kWork / "d3.json").string(), "ODBD_THREADS=3").code == 0);
  CHECK(slurp(kWork / "d1.json") == slurp(kWork / "d3.json"));
  const json det = odbd::read_json(kWork / "d1.json");
  REQUIRE(det.is_array());
  if (!det.empty()) CHECK(det[0]["mode"] == "circular_zero_doppler");

  search["max_hypotheses"] = 10;
  write(kWork / "capped.json", search);
  CHECK(odbd("search -c " + (kWork / "capped.json").string() + " -i " + (kWork / "sim").string() + " -o " +
             (kWork / "capped_out.json").string())
            .code == 3);
  CHECK(!fs::exists(kWork / "capped_out.json"));

  // Input that does not match the configuration.
  CHECK(odbd("search -c " + (kScenarios / "circular_search.json").string() + " -i " + (kWork / "sim").string() +
             " -o " + (kWork / "x.json").string())
            .code == 2);
  CHECK(odbd(args + " -o " + (kWork / "no" / "dir" / "x.json").string()).code == 2);
}

TEST_CASE_FIXTURE(Fixture, "tracks and compare") {
  json cfg = odbd::read_json(kScenarios / "eccentricity_mismatch_tracks.json");
  cfg["scenario"] = (kScenarios / "default.json").string();
  write(kWork / "tracks.json", cfg);
  REQUIRE(odbd("tracks -c " + (kWork / "tracks.json").string() + " -o " + (kWork / "tr").string()).code == 0);
  const odbd::TrackFile truth = odbd::read_track(kWork / "tr" / "truth.csv");
  const odbd::TrackFile sim = odbd::read_track(kWork / "tr" / "simulated.csv");
  CHECK(truth.size() == 201);
  CHECK(sim.size() == 101);

  const std::string truth_csv = (kWork / "tr" / "truth.csv").string();
  REQUIRE(odbd("compare " + truth_csv + " " + truth_csv + " -o " + (kWork / "self.json").string()).code == 0);
  const json self = odbd::read_json(kWork / "self.json");
  CHECK(self["rho_m"]["max_abs"] == 0.0);
  REQUIRE(odbd("compare " + truth_csv + " " + (kWork / "tr" / "simulated.csv").string() + " -o " +
               (kWork / "res.json").string())
              .code == 0);
  const json res = odbd::read_json(kWork / "res.json");
  CHECK(res["doppler_bins"]["max_abs"].get<double>() < 2.0);

  // Circular constraint cannot reproduce a strongly eccentric orbit off closest approach.
  cfg["target"] = {{"elements",
                    {{"a_km", 8944.8984065934055},
                     {"e", 0.3},
                     {"i_deg", 98.0},
                     {"raan_deg", 300.72471460856326},
                     {"argp_deg", 146.9869130153553},
                     {"nu_deg", 58.686829889639135},
                     {"epoch_s", -30.0}}}};
  write(kWork / "infeasible.json", cfg);
  const Run r = odbd("tracks -c " + (kWork / "infeasible.json").string() + " -o " + (kWork / "inf").string());
  CHECK(r.code == 2);
  CHECK(json::parse(r.out)["error"] == "infeasible_constraints");
  CHECK(!fs::exists(kWork / "inf" / "truth.csv"));
}

TEST_CASE_FIXTURE(Fixture, "input errors exit with 2") {
  CHECK(odbd("").code == 2);
  CHECK(odbd("frobnicate").code == 2);
  CHECK(odbd("tracks -o x").code == 2);
  CHECK(odbd("tracks -c " + (kWork / "missing.json").string() + " -o " + (kWork / "x").string()).code == 2);
  std::ofstream(kWork / "garbage.json") << "{";
  CHECK(odbd("simulate -c " + (kWork / "garbage.json").string() + " -o " + (kWork / "x").string()).code == 2);
  json s = small_scenario();
  s["radar"]["cpi_seconds"] = 1;
  write(kWork / "typo.json", s);
  CHECK(odbd("simulate -c " + (kWork / "typo.json").string() + " -o " + (kWork / "x").string()).code == 2);
  std::ofstream(kWork / "bad.csv") << "t_s,alpha_deg,delta_deg,rho_m,rhodot_mps\n0,1,2,3\n";
  CHECK(odbd("compare " + (kWork / "bad.csv").string() + " " + (kWork / "bad.csv").string() + " -o " +
             (kWork / "r.json").string())
            .code == 2);
}
