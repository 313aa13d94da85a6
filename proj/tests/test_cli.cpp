#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using wavepalm::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

json sea_json() {
  return {{"hs", 11.5},   {"tp", 12.25},   {"gamma", 1.0},   {"sigma_a", 0.07},
          {"sigma_b", 0.09}, {"omega_c", 1.25}, {"theta", 3.141592653589793}};
}

// Scratch directory, removed at the end of the test case.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("wavepalm_cli_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::vector<std::vector<double>> read_csv(const std::string& path, std::vector<std::string>* header = nullptr) {
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  if (header) {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("moments") {
  Scratch s;
  const auto cfg = s.write("sea.json", sea_json().dump());
  const auto r = call({"moments", "--config", cfg});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["mean_velocity"].get<double>() > 0.0);

  auto doubled = sea_json();
  doubled["hs"] = 23.0;
  const auto r2 = call({"moments", "--config", s.write("big.json", doubled.dump())});
  REQUIRE(r2.code == 0);
  CHECK(json::parse(r2.out)["lambda00"].get<double>() ==
        doctest::Approx(4.0 * j["lambda00"].get<double>()).epsilon(1e-12));
}

TEST_CASE("configuration errors exit with 2") {
  Scratch s;
  auto missing = sea_json();
  missing.erase("tp");
  const auto r = call({"moments", "--config", s.write("missing.json", missing.dump())});
  CHECK(r.code == 2);
  CHECK(r.err.find("tp") != std::string::npos);
  CHECK(call({"moments", "--config", s.write("broken.json", "{ hs: ")}).code == 2);
  CHECK(call({"moments", "--config", s.path("absent.json")}).code == 2);
  CHECK(call({"moments"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"simulate-compare", "--config", s.write("corrupt.json", "[1, 2")}).code == 2);
}

TEST_CASE("degenerate models exit with 3") {
  Scratch s;
  auto across = sea_json();
  across["theta"] = 1.5707963267948966;
  const auto cfg = s.write("across.json", across.dump());
  CHECK(call({"slope", "--config", cfg}).code == 3);
  CHECK(call({"velocity", "--config", cfg}).code == 3);
}

TEST_CASE("slope tables") {
  Scratch s;
  const auto cfg = s.write("sea.json", sea_json().dump());
  const auto out = s.path("slope.csv");
  REQUIRE(call({"slope", "--config", cfg, "--speed", "7", "--speed", "13,16", "--out", out}).code == 0);
  std::vector<std::string> header;
  const auto rows = read_csv(out, &header);
  CHECK(header == std::vector<std::string>{"w", "spatial", "v=7", "v=13", "v=16"});
  CHECK(rows.size() == 512);
  for (const auto& row : rows) {
    if (row[0] >= 0.0)
      for (std::size_t c = 1; c < row.size(); ++c) CHECK(row[c] == 1.0);
    CHECK(row[2] >= row[3]);
    CHECK(row[3] >= row[4]);
  }
  CHECK(fs::exists(out + ".manifest.json"));

  const auto digest = wavepalm::cli::file_digest(out);
  REQUIRE(call({"slope", "--config", cfg, "--speed", "7,13,16", "--out", out}).code == 0);
  CHECK(wavepalm::cli::file_digest(out) == digest);
}

TEST_CASE("manifests replay to identical outputs") {
  Scratch s;
  const auto cfg = s.write("sea.json", sea_json().dump());
  const auto out = s.path("velocity.csv");
  REQUIRE(call({"velocity", "--config", cfg, "--out", out}).code == 0);
  const auto manifest = out + ".manifest.json";
  json m = json::parse(std::ifstream(manifest));
  CHECK(m["outputs"][out].get<std::string>() == wavepalm::cli::file_digest(out));
  CHECK(m.contains("version"));
  CHECK(m.contains("seeds"));
  const auto r = call({"replay", manifest});
  CHECK(r.code == 0);
  CHECK(r.out.find("replay identical") != std::string::npos);

  m["outputs"][out] = "0000000000000000";
  const auto tampered = s.write("tampered.json", m.dump());
  CHECK(call({"replay", tampered}).code == 1);
}

TEST_CASE("environment overrides") {
  Scratch s;
  const auto cfg = s.write("sea.json", sea_json().dump());
  ::setenv("WAVEPALM_CONFIG", cfg.c_str(), 1);
  const auto r = call({"moments"});
  ::unsetenv("WAVEPALM_CONFIG");
  CHECK(r.code == 0);
}

TEST_CASE("joint density on a tiny grid") {
  Scratch s;
  const auto cfg = s.write("sea.json", sea_json().dump());
  const auto prefix = s.path("joint");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = call({"joint", "--config", cfg, "--out", prefix, "--grid-spec",
                       "r=log:5:60:2,s=log:5:60:2,u=mid:0:8:2,w=mid:-8:0:2,n=24"});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.code == 0);
  CHECK(seconds < 60.0);
  const auto grid = read_csv(prefix + ".grid.csv");
  CHECK(grid.size() == 16);
  for (const auto& row : grid) {
    CHECK(row[4] >= 0.0);
    CHECK(row[6] == 1.0);
  }
  const json m = json::parse(std::ifstream(prefix + ".manifest.json"));
  CHECK(m["details"]["marginal_mass"].get<double>() ==
        doctest::Approx(m["details"]["total_mass"].get<double>()).epsilon(1e-12));
  double marginal = 0.0;
  for (const auto& row : read_csv(prefix + ".marginal.csv")) marginal += row[4];
  CHECK(marginal == doctest::Approx(m["details"]["total_mass"].get<double>()).epsilon(1e-9));

  CHECK(call({"joint", "--config", cfg}).code == 2);  // --out is required
}

TEST_CASE("time budgets") {
  Scratch s;
  const auto cfg = s.write("sea.json", sea_json().dump());
  const auto r = call({"joint", "--config", cfg, "--out", s.path("partial"), "--budget-seconds", "0.5"});
  CHECK(r.code == 4);
  CHECK(fs::exists(s.path("partial") + ".grid.csv"));

  const auto c = call({"simulate-compare", "--config", cfg, "--centers", "1000000", "--budget-seconds", "1"});
  CHECK(c.code == 5);
  CHECK(c.err.find("insufficient") != std::string::npos);
}
