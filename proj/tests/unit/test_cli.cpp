#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

using namespace amflat;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "amflat_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

// Short copy of the bundled scenario so the test stays quick.
fs::path short_scenario(const fs::path& dir) {
  const fs::path p = dir / "short.json";
  write(p, R"({"params_file": ")" + test::config_path("planar_two_link.json") + R"(",
    "timing": {"duration": 0.05, "output_stride": 10},
    "reference": {"segments": [{"t0": 0, "t1": 1, "pe": [{"kind": "bump", "peak": 1.0}, 0, 0],
                                "psi": 0, "eta": [1.5707963267948966, 0]}]},
    "disturbance": {"pe": [0.1, 0, 0]}})");
  return p;
}

}  // namespace

TEST_CASE("care prints a converged P") {
  const Run r = run({"care", "--k", "2"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("P (15x15):") != std::string::npos);
  const auto pos = r.out.find("residual ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(r.out.substr(pos + 9)) < 1e-8);
}

TEST_CASE("care with a custom Q") {
  const fs::path q = scratch_dir() / "q.json";
  write(q, "[2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2]");
  CHECK(run({"care", "--k", "1", "--q", q.string()}).code == cli::kOk);
  write(q, "[1, 2]");
  CHECK(run({"care", "--k", "1", "--q", q.string()}).code == cli::kUsage);
}

TEST_CASE("verify reports per-check residuals") {
  const fs::path json = scratch_dir() / "verify.json";
  const Run r = run({"verify", "--suite", "oracle", "--samples", "10", "--json", json.string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("PASS oracle/accel_equivalence residual=") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(read(json).find("\"passed\": true") != std::string::npos);
}

TEST_CASE("simulate writes a CSV with a full header") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "run.csv";
  const Run r = run({"simulate", "--config", short_scenario(dir).string(), "--out", out.string()});
  CHECK(r.code == cli::kOk);
  const std::string csv = read(out);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header.rfind("t,p_x,p_y,p_z,l_x,l_y,l_z,phi,theta,psi,eta_1,eta_2", 0) == 0);
  CHECK(header.find("sigma_d_pe_x") != std::string::npos);
  CHECK(header.find(",V,Vdot,") != std::string::npos);

  const fs::path summary = dir / "run.json";
  CHECK(run({"simulate", "--config", short_scenario(dir).string(), "--out", summary.string(),
             "--format", "json"})
            .code == cli::kOk);
  CHECK(read(summary).find("\"completed\": true") != std::string::npos);
}

TEST_CASE("flatness maps a reference to states and inputs") {
  const fs::path dir = scratch_dir();
  const fs::path ref = dir / "ref.json";
  write(ref, R"({"segments": [{"t0": 0, "t1": 1, "pe": [{"kind": "bump", "peak": 1.0}, 0, 0],
                               "psi": 0.2, "eta": [1.0, 0.5]}]})");
  const fs::path out = dir / "flat.csv";
  const Run r = run({"flatness", "--trajectory", ref.string(), "--params",
                     test::config_path("planar_two_link.json"), "--out", out.string(), "--dt", "0.1"});
  CHECK(r.code == cli::kOk);
  const std::string csv = read(out);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
  CHECK(csv.rfind("t,p_x", 0) == 0);
  CHECK(csv.find("margin_thrust") != std::string::npos);
}

TEST_CASE("bad input exits non-zero") {
  CHECK(run({}).code != cli::kOk);
  CHECK(run({"bogus"}).code != cli::kOk);
  CHECK(run({"simulate", "--config", "/nonexistent.json", "--out", "/tmp/x.csv"}).code == cli::kUsage);
  const fs::path bad = scratch_dir() / "bad.json";
  write(bad, "{\"params_file\": 3}");
  const Run r = run({"simulate", "--config", bad.string(), "--out", (scratch_dir() / "y.csv").string()});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(run({"verify", "--suite", "nope"}).code == cli::kUsage);
  CHECK(run({"care"}).code == cli::kUsage);
}
