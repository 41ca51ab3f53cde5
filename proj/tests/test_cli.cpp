#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "armada/solution_io.hpp"

using namespace armada;
namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("ARMADA_CLI");
  REQUIRE_MESSAGE(p != nullptr, "ARMADA_CLI must point at the built binary");
  return p;
}

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string log = "cli_run.log";
  const int raw = std::system((cli() + " " + args + " > " + log + " 2>&1").c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char c = line[0];
    if (c != '-' && (c < '0' || c > '9')) continue;  // comment or header row
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

double json_number(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j.at(key).get<double>();
}

}  // namespace

TEST_CASE("plan writes its outputs and the samples round-trip through reload") {
  fs::remove_all("cli_out/hover");
  const RunResult r =
      run("plan --scenario scenarios/hover.json --out cli_out/hover --rate 50");
  INFO(r.output);
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists("cli_out/hover/solution.csv"));
  REQUIRE(fs::exists("cli_out/hover/solution.json"));
  REQUIRE(fs::exists("cli_out/hover/report.json"));
  REQUIRE(fs::exists("cli_out/hover/phases.csv"));

  const auto rows = read_csv("cli_out/hover/solution.csv");
  REQUIRE(rows.size() > 100);

  // The CSV reloads into splines that re-evaluate to the written samples.
  const OcpSolution from_csv = load_solution_csv("cli_out/hover/solution.csv");
  // The JSON reloads into the exact spline representation.
  const OcpSolution from_json = load_solution_json("cli_out/hover/solution.json");
  double worst_csv = 0.0, worst_json = 0.0;
  for (const auto& row : rows) {
    const double t = row[0];
    auto probe = [&](const OcpSolution& s, double& worst) {
      const Eigen::Vector3d d = s.base_position(t), e = s.base_rpy(t), u = s.thruster_body(t);
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(d[i] - row[1 + i]));
        worst = std::max(worst, std::abs(e[i] - row[4 + i]));
        worst = std::max(worst, std::abs(u[i] - row[7 + i]));
      }
      for (int a = 0; a < s.arm_count(); ++a) {
        const Eigen::Vector3d p = s.ee_position(a, t), f = s.contact_force(a, t);
        for (int i = 0; i < 3; ++i) {
          worst = std::max(worst, std::abs(p[i] - row[10 + 7 * a + i]));
          worst = std::max(worst, std::abs(f[i] - row[13 + 7 * a + i]));
        }
      }
    };
    probe(from_csv, worst_csv);
    probe(from_json, worst_json);
  }
  CHECK(worst_csv < 1e-9);
  CHECK(worst_json < 1e-9);
}

TEST_CASE("tracking a hover plan with the joint pd controller is near exact") {
  REQUIRE(fs::exists("cli_out/hover/solution.json"));  // planned above
  const RunResult r = run(
      "track --scenario scenarios/hover.json --out cli_out/hover --controller pd");
  INFO(r.output);
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists("cli_out/hover/tracking_report.json"));
  CHECK(json_number("cli_out/hover/tracking_report.json", "mean_base_error") < 5e-3);
  CHECK(r.output.find("reference") != std::string::npos);
}

TEST_CASE("tracking without a prior plan is a config error") {
  fs::remove_all("cli_out/empty");
  const RunResult r =
      run("track --scenario scenarios/hover.json --out cli_out/empty --controller diffik");
  CHECK(r.code == 3);
}

TEST_CASE("a missing scenario file is a config error") {
  const RunResult r = run("plan --scenario scenarios/no_such_file.json --out cli_out/x");
  CHECK(r.code == 3);
}

TEST_CASE("a malformed scenario is a config error") {
  fs::create_directories("cli_tmp");
  {
    std::ofstream bad("cli_tmp/bad.json");
    bad << "{\"name\":\"bad\",\"model\":\"../models/default_robot.json\","
           "\"start\":{\"position\":[0,0,0.63]},\"goal\":{\"position\":[1,0,0.63]},"
           "\"duration\":-5.0}";
  }
  const RunResult r = run("plan --scenario cli_tmp/bad.json --out cli_out/x");
  CHECK(r.code == 3);

  const RunResult r2 = run("track --scenario scenarios/hover.json --out cli_out/hover "
                           "--controller bogus");
  CHECK(r2.code == 3);
}

TEST_CASE("disabling thrusters zeroes the thruster channel") {
  fs::remove_all("cli_out/hover_nt");
  const RunResult r = run(
      "plan --scenario scenarios/hover.json --out cli_out/hover_nt --no-thrusters --rate 50");
  INFO(r.output);
  REQUIRE(r.code == 0);
  const auto rows = read_csv("cli_out/hover_nt/solution.csv");
  double peak = 0.0;
  for (const auto& row : rows)
    for (int i = 0; i < 3; ++i) peak = std::max(peak, std::abs(row[7 + i]));
  CHECK(peak == 0.0);
}

TEST_CASE("single-variant ablation reproduces the plain plan") {
  fs::remove_all("cli_out/ab");
  const RunResult p =
      run("plan --scenario scenarios/hover.json --out cli_out/ab --polys 2");
  REQUIRE(p.code == 0);
  const double plan_cost = json_number("cli_out/ab/report.json", "cost");

  const RunResult r =
      run("ablate --scenario scenarios/hover.json --out cli_out/ab --polys 2");
  INFO(r.output);
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists("cli_out/ab/ablation.csv"));
  std::ifstream in("cli_out/ab/ablation.csv");
  std::string header, line;
  std::getline(in, header);
  REQUIRE(std::getline(in, line));
  std::stringstream ss(line);
  std::string label, conv, cost;
  std::getline(ss, label, ',');
  std::getline(ss, conv, ',');
  std::getline(ss, cost, ',');
  CHECK(label == "polys=2");
  CHECK(conv == "1");
  CHECK(std::stod(cost) == doctest::Approx(plan_cost).epsilon(1e-9));
}

TEST_CASE("envcheck passes and repeats bit-exact under one seed") {
  const RunResult a = run("envcheck --scenario scenarios/hover.json --steps 2000 --seed 4");
  INFO(a.output);
  CHECK(a.code == 0);
  CHECK(a.output.find("all checks passed") != std::string::npos);
  CHECK(a.output.find("FAIL") == std::string::npos);

  const RunResult b = run("envcheck --scenario scenarios/hover.json --steps 2000 --seed 4");
  auto hash_line = [](const std::string& s) {
    const auto pos = s.find("transcript_hash");
    return s.substr(pos, s.find('\n', pos) - pos);
  };
  REQUIRE(a.output.find("transcript_hash") != std::string::npos);
  REQUIRE(b.output.find("transcript_hash") != std::string::npos);
  CHECK(hash_line(a.output) == hash_line(b.output));
}
