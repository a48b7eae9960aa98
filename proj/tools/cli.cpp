#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "amflat/care.hpp"
#include "amflat/controller.hpp"
#include "amflat/flatness.hpp"
#include "amflat/scenario.hpp"
#include "amflat/simulator.hpp"
#include "amflat/verify.hpp"

namespace amflat::cli {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write file: " + path);
  return f;
}

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

MatX read_q(const std::string& path, int n) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Q file: ") + e.what());
  }
  if (j.is_object()) j = j.at("Q");
  if (!j.is_array() || j.empty()) throw ConfigError("Q must be an array");
  MatX q;
  if (j[0].is_array()) {
    q.resize(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
      if (j[r].size() != j[0].size()) throw ConfigError("Q rows differ in length");
      for (std::size_t c = 0; c < j[r].size(); ++c) q(r, c) = j[r][c].get<double>();
    }
  } else {
    VecX d(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) d[i] = j[i].get<double>();
    q = d.asDiagonal();
  }
  if (q.rows() != n || q.cols() != n) {
    throw ConfigError("Q must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  return q;
}

int cmd_simulate(const std::string& config, const std::string& out_path, const std::string& format,
                 std::ostream& out, std::ostream& err) {
  const Scenario scenario = load_scenario(config);
  const Trajectory traj = simulate_closed_loop(scenario);
  std::ofstream f = open_out(out_path);
  if (format == "csv") {
    write_csv(traj, f);
  } else {
    write_json_summary(traj, f);
  }
  if (!traj.completed) {
    err << "simulation aborted: " << traj.diagnostic << "\n";
    return kAborted;
  }
  out << "wrote " << out_path << " (" << traj.samples.size() << " samples, "
      << traj.control.size() << " control steps)\n";
  return kOk;
}

int cmd_flatness(const std::string& trajectory, const std::string& params_path,
                 const std::string& out_path, double dt, std::ostream& out) {
  const AMParams params = load_params(params_path);
  const ReferenceTrajectory ref = reference_from_json_text(read_text(trajectory));
  if (ref.k() != params.k()) throw ConfigError("trajectory joint count does not match params");
  if (!(dt > 0.0)) throw ConfigError("--dt must be positive");
  const int k = params.k();

  const auto names = csv_header(k);
  std::vector<std::string> header(names.begin(), names.begin() + 1 + (11 + 2 * k) + (4 + k));
  header.insert(header.end(), {"margin_attitude", "margin_thrust"});

  std::ofstream f = open_out(out_path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n";
  const long steps = std::lround((ref.end() - ref.start()) / dt);
  for (long i = 0; i <= steps; ++i) {
    const double t = std::min(ref.start() + static_cast<double>(i) * dt, ref.end());
    const FlatSignal sigma = ref.evaluate(t);
    const ExtendedState q = state_from_flat(params, sigma);
    const FlatInputs u = inputs_from_flat(params, sigma);
    const SingularityMargins m = singularity_check(params, sigma);
    std::string line = number(t);
    const VecX qv = q.to_vector(), uv = u.extended.to_vector();
    for (Eigen::Index j = 0; j < qv.size(); ++j) line += "," + number(qv[j]);
    for (Eigen::Index j = 0; j < uv.size(); ++j) line += "," + number(uv[j]);
    line += "," + number(m.attitude) + "," + number(m.thrust);
    f << line << "\n";
  }
  out << "wrote " << out_path << " (" << steps + 1 << " rows)\n";
  return kOk;
}

int cmd_verify(const std::string& suite, const std::string& params_path, int samples,
               std::uint64_t seed, const std::string& json_path, std::ostream& out) {
  const AMParams params = params_path.empty() ? planar_two_link_model() : load_params(params_path);
  VerifyOptions options;
  options.samples = samples;
  options.seed = seed;
  const VerifyReport report = run_verify(suite, params, options);
  report.write_text(out);
  if (!json_path.empty()) {
    std::ofstream f = open_out(json_path);
    report.write_json(f);
  }
  return report.passed() ? kOk : kCheckFailed;
}

int cmd_care(int k, const std::string& q_path, std::ostream& out) {
  if (k < 1) throw ConfigError("--k must be >= 1");
  const int n = 11 + 2 * k;
  std::optional<MatX> q;
  if (!q_path.empty()) q = read_q(q_path, n);
  const Clf clf = Clf::build(k, q);
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n");
  out << "P (" << n << "x" << n << "):\n" << clf.P.format(fmt) << "\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "lambda %.17g\nresidual %.3e\ncondition %.6g\n", clf.lambda,
                clf.care_residual, clf.condition());
  out << buf;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aerial manipulator dynamics, flatness and CLF-QP tracking", "amflat"};
  app.require_subcommand(1);

  std::string config, out_path, format = "csv";
  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  sim->add_option("--config", config, "Scenario JSON")->required();
  sim->add_option("--out", out_path, "Output file")->required();
  sim->add_option("--format", format, "csv (time series) or json (summary)")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string trajectory, params_path, flat_out;
  double dt = 0.01;
  auto* flat = app.add_subcommand("flatness", "Map a flat reference to states and inputs");
  flat->add_option("--trajectory", trajectory, "Reference JSON ({\"segments\": [...]})")->required();
  flat->add_option("--params", params_path, "Model JSON")->required();
  flat->add_option("--out", flat_out, "Output CSV")->required();
  flat->add_option("--dt", dt, "Sampling step, s");

  std::string suite = "all", verify_params, json_path;
  int samples = 100;
  std::uint64_t seed = VerifyOptions{}.seed;
  auto* ver = app.add_subcommand("verify", "Run the oracle and consistency checks");
  ver->add_option("--suite", suite, "all, oracle, flatness or controller")
      ->check(CLI::IsMember({"all", "oracle", "flatness", "controller"}));
  ver->add_option("--params", verify_params, "Model JSON (default: bundled planar model)");
  ver->add_option("--samples", samples, "Random samples per check")->check(CLI::PositiveNumber);
  ver->add_option("--seed", seed, "RNG seed");
  ver->add_option("--json", json_path, "Also write a JSON report here");

  int k = 2;
  std::string q_path;
  auto* care = app.add_subcommand("care", "Solve the CLF Riccati equation");
  care->add_option("--k", k, "Number of arm joints")->required();
  care->add_option("--q", q_path, "JSON file with Q (matrix or diagonal)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config, out_path, format, out, err);
    if (flat->parsed()) return cmd_flatness(trajectory, params_path, flat_out, dt, out);
    if (ver->parsed()) return cmd_verify(suite, verify_params, samples, seed, json_path, out);
    if (care->parsed()) return cmd_care(k, q_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace amflat::cli
