#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  const std::string command = std::string(BORNLAB_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/bornlab_cli_test_") + name;
}

int count_data_rows(const std::string& csv) {
  int rows = 0;
  std::istringstream stream(csv);
  std::string line;
  bool seen_header = false;
  while (std::getline(stream, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      seen_header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("isometry-scan emits one row per grid cell with the p=2 jump", "[cli]") {
  const std::string out = temp_path("scan.csv");
  const auto result =
      run_cli("isometry-scan --n 2,3 --p 1.5,2,3 --seed 7 --out " + out);
  INFO(result.output);
  REQUIRE(result.exit_code == 0);
  const std::string csv = read_file(out);
  REQUIRE(count_data_rows(csv) == 6);
  REQUIRE(csv.find("# config:") != std::string::npos);

  std::istringstream stream(csv);
  std::string line;
  while (std::getline(stream, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("n,", 0) == 0) continue;
    std::istringstream fields(line);
    std::string n_text, p_text, dim_text;
    std::getline(fields, n_text, ',');
    std::getline(fields, p_text, ',');
    std::getline(fields, dim_text, ',');
    const int n = std::stoi(n_text);
    const int dim = std::stoi(dim_text);
    if (p_text == "2") {
      REQUIRE(dim == n * n);
    } else {
      REQUIRE(dim == n);
    }
  }
}

TEST_CASE("drift reports vanishing 2-norm drift", "[cli]") {
  const std::string out = temp_path("drift.csv");
  const auto result = run_cli("drift --n 2 --p 2 --seed 7 --out " + out);
  INFO(result.output);
  REQUIRE(result.exit_code == 0);
  const std::string csv = read_file(out);
  std::istringstream stream(csv);
  std::string line;
  double drift = 1.0;
  while (std::getline(stream, line)) {
    if (line.rfind("2,2,", 0) == 0) {
      std::istringstream fields(line);
      std::string skip, drift_text;
      std::getline(fields, skip, ',');
      std::getline(fields, skip, ',');
      std::getline(fields, skip, ',');
      std::getline(fields, drift_text, ',');
      drift = std::stod(drift_text);
    }
  }
  REQUIRE(drift <= 1e-10);
}

TEST_CASE("born-test passes the chi-square bar at the documented flags", "[cli]") {
  const std::string out = temp_path("born.json");
  const auto result = run_cli(
      "born-test --amps 0.3,0.7 --p 2 --trials 100000 --seed 7 --format json --out " +
      out);
  INFO(result.output);
  REQUIRE(result.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(read_file(out));
  REQUIRE(report["version"].get<std::string>() == "0.1.0");
  REQUIRE(report["config"]["seed"].get<std::uint64_t>() == 7);
  const auto& cell = report["results"][0];
  REQUIRE(cell["p"].get<double>() == 2.0);
  REQUIRE(cell["report"]["p_value"].get<double>() > 0.01);
  const double freq0 =
      cell["report"]["counts"]["r1:0"].get<double>() / 100000.0;
  REQUIRE(std::abs(freq0 - 0.3) <= 0.0043);
}

TEST_CASE("reports are byte-identical across reruns; timestamps stay in the sidecar",
          "[cli]") {
  const std::string out_a = temp_path("rerun_a.csv");
  const std::string out_b = temp_path("rerun_b.csv");
  // Identical flags except the output path, which is excluded from the body
  // comparison by comparing bodies only after stripping the config line
  // (the config embeds the resolved output path).
  REQUIRE(run_cli("cauchy-check --p 2,3 --pairs 200 --seed 11 --out " + out_a).exit_code == 0);
  REQUIRE(run_cli("cauchy-check --p 2,3 --pairs 200 --seed 11 --out " + out_a).exit_code == 0);
  const std::string first = read_file(out_a);
  REQUIRE(run_cli("cauchy-check --p 2,3 --pairs 200 --seed 11 --out " + out_b).exit_code == 0);
  const std::string second = read_file(out_a);
  REQUIRE(first == second);

  REQUIRE(first.find("created_utc") == std::string::npos);
  const std::string sidecar = read_file(out_a + ".meta.json");
  REQUIRE(sidecar.find("created_utc") != std::string::npos);
}

TEST_CASE("validation failures exit with status 2", "[cli]") {
  REQUIRE(run_cli("drift --n 1 --p 2").exit_code == 2);
  REQUIRE(run_cli("drift --n 2 --p 0").exit_code == 2);
  REQUIRE(run_cli("drift --n 2 --p -1").exit_code == 2);
  REQUIRE(run_cli("no-such-command").exit_code == 2);
  REQUIRE(run_cli("born-test --amps 0.3,0.7 --trials 10").exit_code == 2);
  REQUIRE(run_cli("simulate --amps 0.5").exit_code == 2);
  REQUIRE(run_cli("drift --n 2 --p 2 --out /nonexistent-dir/x/y.csv").exit_code == 2);
}

TEST_CASE("an ambiguous rank estimate exits with status 3", "[cli]") {
  // A spectral-gap requirement beyond any finite gap forces the ambiguity path.
  const auto result =
      run_cli("isometry-scan --n 2 --p 2 --seed 7 --min-gap 1e30 --out " +
              temp_path("ambiguous.csv"));
  INFO(result.output);
  REQUIRE(result.exit_code == 3);
}

TEST_CASE("simulate and fit-exponent smoke runs", "[cli]") {
  const std::string sim_out = temp_path("sim.json");
  const auto sim = run_cli(
      "simulate --amps 0.3,0.7 --steps record,record --p 2 --seed 5 --format json --out " +
      sim_out);
  INFO(sim.output);
  REQUIRE(sim.exit_code == 0);
  const nlohmann::json sim_report = nlohmann::json::parse(read_file(sim_out));
  const auto& records = sim_report["results"][0]["trajectory"]["records"];
  REQUIRE(records.size() == 2);
  // A repeated record confirms the first outcome with weight one.
  REQUIRE(records[1]["outcome_index"] == records[0]["outcome_index"]);
  REQUIRE(records[1]["weight"].get<double>() == 1.0);

  const std::string fit_out = temp_path("fit.csv");
  const auto fit = run_cli("fit-exponent --p 2 --samples 100 --seed 5 --out " + fit_out);
  INFO(fit.output);
  REQUIRE(fit.exit_code == 0);
  REQUIRE(fit.output.find("fitted exponent") != std::string::npos);
}
