// Command-line driver for the weight-exponent experiments: isometry scans,
// functional-equation checks, exponent fits, drift measurements, trajectory
// simulation, and outcome-frequency tests. Every run is seeded, every report
// embeds its full resolved configuration, and report bodies are byte-stable
// across reruns (timestamps live in a .meta.json sidecar).

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "bornlab/cauchy.hpp"
#include "bornlab/isometry.hpp"
#include "bornlab/process.hpp"
#include "bornlab/random.hpp"
#include "bornlab/serialize.hpp"
#include "bornlab/version.hpp"

namespace {

using namespace bornlab;

struct ReportContent {
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  std::vector<std::string> summaries;
};

std::string fmt(double v) { return format_double(v); }

void validate_dimensions(const std::vector<int>& n_values) {
  for (int n : n_values) {
    if (n < 2) throw std::invalid_argument("dimension values must satisfy n >= 2");
  }
}

void validate_exponents(const std::vector<double>& p_values) {
  for (double p : p_values) {
    if (!(std::isfinite(p) && p > 0.0)) {
      throw std::invalid_argument("exponent values must satisfy p > 0");
    }
  }
}

std::string iso_timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output path: " + path);
  out << body;
  if (!out.good()) throw std::runtime_error("failed writing output path: " + path);
}

void emit_report(const std::string& command, const nlohmann::ordered_json& config,
                 const ReportContent& content, const std::string& out_path,
                 const std::string& format) {
  std::string body;
  if (format == "csv") {
    body += "# ";
    body += kToolName;
    body += ' ';
    body += kVersionString;
    body += '\n';
    body += "# command: " + command + '\n';
    body += "# config: " + config.dump() + '\n';
    body += csv_row(content.csv_header);
    for (const auto& row : content.csv_rows) body += csv_row(row);
  } else {
    nlohmann::ordered_json envelope;
    envelope["version"] = kVersionString;
    envelope["command"] = command;
    envelope["config"] = config;
    envelope["results"] = content.results;
    body = envelope.dump(2) + '\n';
  }
  write_file(out_path, body);

  nlohmann::ordered_json meta;
  meta["created_utc"] = iso_timestamp_utc();
  meta["report"] = out_path;
  write_file(out_path + ".meta.json", meta.dump(2) + '\n');

  for (const auto& line : content.summaries) std::cout << line << '\n';
  std::cout << "report written to " << out_path << '\n';
}

// ---------------------------------------------------------------------------
// isometry-scan

ReportContent run_isometry_scan(const std::vector<int>& n_values,
                                const std::vector<double>& p_values,
                                Eigen::Index samples, double rank_tol, double min_gap,
                                double floor, std::uint64_t seed) {
  validate_dimensions(n_values);
  validate_exponents(p_values);
  ReportContent content;
  content.csv_header = {"n", "p", "estimated_dimension", "rank_gap", "seed"};
  std::uint64_t cell = 0;
  for (int n : n_values) {
    for (double p : p_values) {
      Rng rng(seed, cell++);
      const Eigen::Index m = samples > 0 ? samples : 20 * static_cast<Eigen::Index>(n) * n;
      const auto sys = build_constraint_system(n, p, m, rng, floor);
      const IsometryScanResult result = estimate_generator_dimension(sys, rank_tol, min_gap);
      content.csv_rows.push_back({std::to_string(n), fmt(p),
                                  std::to_string(result.estimated_dimension),
                                  fmt(result.rank_gap), std::to_string(seed)});
      content.results.push_back(nlohmann::ordered_json(result));
      content.summaries.push_back("n=" + std::to_string(n) + " p=" + fmt(p) +
                                  ": generator dimension " +
                                  std::to_string(result.estimated_dimension) +
                                  " (rank gap " + fmt(result.rank_gap) + ")");
    }
  }
  return content;
}

// ---------------------------------------------------------------------------
// cauchy-check

ReportContent run_cauchy_check(const std::vector<double>& p_values, int num_pairs,
                               std::uint64_t seed) {
  validate_exponents(p_values);
  if (num_pairs < 1) throw std::invalid_argument("--pairs must be >= 1");
  ReportContent content;
  content.csv_header = {"p", "equation", "max_residual", "mean_residual",
                        "num_samples", "seed"};
  std::uint64_t cell = 0;
  for (double p : p_values) {
    Rng rng(seed, cell++);
    std::vector<MagnitudePair> mult_pairs;
    mult_pairs.reserve(static_cast<std::size_t>(num_pairs));
    for (int i = 0; i < num_pairs; ++i) {
      mult_pairs.emplace_back(log_uniform(rng, 0.1, 10.0), log_uniform(rng, 0.1, 10.0));
    }
    const auto mult_report = check_multiplicative_equation(
        [p](double x) { return std::pow(x, p); },
        std::span<const MagnitudePair>(mult_pairs));

    std::vector<AdditivePair> add_pairs;
    add_pairs.reserve(static_cast<std::size_t>(num_pairs));
    for (int i = 0; i < num_pairs; ++i) {
      add_pairs.emplace_back(Amplitude{uniform_range(rng, 0.25, 2.0), 0.0},
                             Amplitude{uniform_range(rng, 0.25, 2.0), 0.0});
    }
    const auto add_report = check_additive_equation(
        [p](Amplitude a) { return Amplitude{std::pow(std::abs(a), p), 0.0}; },
        std::span<const AdditivePair>(add_pairs));

    content.csv_rows.push_back({fmt(p), "multiplicative", fmt(mult_report.max_residual),
                                fmt(mult_report.mean_residual),
                                std::to_string(mult_report.num_samples),
                                std::to_string(seed)});
    content.csv_rows.push_back({fmt(p), "additive", fmt(add_report.max_residual),
                                fmt(add_report.mean_residual),
                                std::to_string(add_report.num_samples),
                                std::to_string(seed)});
    nlohmann::ordered_json entry;
    entry["p"] = p;
    entry["multiplicative"] = mult_report;
    entry["additive"] = add_report;
    content.results.push_back(entry);
    content.summaries.push_back(
        "p=" + fmt(p) + ": multiplicative max residual " + fmt(mult_report.max_residual) +
        ", additive max residual " + fmt(add_report.max_residual));
  }
  return content;
}

// ---------------------------------------------------------------------------
// fit-exponent

ReportContent run_fit_exponent(const std::vector<double>& p_values, int num_samples,
                               double noise, std::uint64_t seed) {
  validate_exponents(p_values);
  if (num_samples < 2) throw std::invalid_argument("--samples must be >= 2");
  if (noise < 0.0 || noise >= 1.0) {
    throw std::invalid_argument("--noise must be in [0, 1)");
  }
  ReportContent content;
  content.csv_header = {"p", "p_hat", "residual_rms", "sample_min", "sample_max",
                        "num_samples", "seed"};
  std::uint64_t cell = 0;
  for (double p : p_values) {
    Rng rng(seed, cell++);
    std::vector<std::pair<double, double>> samples;
    samples.reserve(static_cast<std::size_t>(num_samples));
    for (int i = 0; i < num_samples; ++i) {
      const double x = log_uniform(rng, 0.1, 10.0);
      const double factor = noise > 0.0 ? uniform_range(rng, 1.0 - noise, 1.0 + noise) : 1.0;
      samples.emplace_back(x, std::pow(x, p) * factor);
    }
    const ExponentFit fit = fit_power_exponent(samples);
    content.csv_rows.push_back({fmt(p), fmt(fit.p_hat), fmt(fit.residual_rms),
                                fmt(fit.sample_range.first), fmt(fit.sample_range.second),
                                std::to_string(num_samples), std::to_string(seed)});
    nlohmann::ordered_json entry;
    entry["p"] = p;
    entry["fit"] = fit;
    content.results.push_back(entry);
    content.summaries.push_back("p=" + fmt(p) + ": fitted exponent " + fmt(fit.p_hat) +
                                " (log-domain rms " + fmt(fit.residual_rms) + ")");
  }
  return content;
}

// ---------------------------------------------------------------------------
// drift

ReportContent run_drift(const std::vector<int>& n_values,
                        const std::vector<double>& p_values, int num_unitaries,
                        std::uint64_t seed) {
  validate_dimensions(n_values);
  validate_exponents(p_values);
  if (num_unitaries < 1) throw std::invalid_argument("--unitaries must be >= 1");
  ReportContent content;
  content.csv_header = {"n", "p", "num_unitaries", "max_drift", "seed"};
  std::uint64_t cell = 0;
  for (int n : n_values) {
    for (double p : p_values) {
      Rng rng(seed, cell++);
      const double drift = total_weight_drift(n, p, num_unitaries, rng);
      content.csv_rows.push_back({std::to_string(n), fmt(p),
                                  std::to_string(num_unitaries), fmt(drift),
                                  std::to_string(seed)});
      nlohmann::ordered_json entry;
      entry["n"] = n;
      entry["p"] = p;
      entry["num_unitaries"] = num_unitaries;
      entry["max_drift"] = drift;
      content.results.push_back(entry);
      content.summaries.push_back("n=" + std::to_string(n) + " p=" + fmt(p) +
                                  ": max relative drift " + fmt(drift) + " over " +
                                  std::to_string(num_unitaries) + " unitaries");
    }
  }
  return content;
}

// ---------------------------------------------------------------------------
// schedules shared by simulate and born-test

Configuration configuration_from_flags(const std::vector<double>& amps,
                                       const std::vector<double>& phases) {
  if (amps.size() < 2) {
    throw std::invalid_argument("--amps needs at least two squared magnitudes (n >= 2)");
  }
  if (!phases.empty() && phases.size() != amps.size()) {
    throw std::invalid_argument("--phases must match --amps in length");
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(amps.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (!(amps[i] >= 0.0) || !std::isfinite(amps[i])) {
      throw std::invalid_argument("--amps entries must be finite and >= 0");
    }
    total += amps[i];
    const double mag = std::sqrt(amps[i]);
    const double phi = phases.empty() ? 0.0 : phases[i];
    v[static_cast<Eigen::Index>(i)] = Amplitude{mag * std::cos(phi), mag * std::sin(phi)};
  }
  if (!(total > 0.0)) throw std::invalid_argument("--amps must not be all zero");
  return Configuration(v);
}

ProcessSchedule build_schedule(const Configuration& initial,
                               const std::vector<std::string>& tokens, Rng& rng) {
  const Eigen::Index n = initial.dim();
  std::vector<ProcessStep> steps;
  int record_counter = 0;
  for (const std::string& token : tokens) {
    if (token == "record") {
      ++record_counter;
      steps.push_back(RecordEvent{identity_unitary(n),
                                  "r" + std::to_string(record_counter)});
    } else if (token == "haar") {
      steps.push_back(ReversibleStep{haar_unitary(n, rng)});
    } else if (token == "fourier") {
      steps.push_back(ReversibleStep{fourier_unitary(n)});
    } else if (token == "phase") {
      std::vector<double> phases(static_cast<std::size_t>(n));
      for (double& phi : phases) phi = uniform_range(rng, 0.0, 2.0 * std::numbers::pi);
      steps.push_back(ReversibleStep{diagonal_phase_unitary(phases)});
    } else {
      throw std::invalid_argument("unknown schedule step '" + token +
                                  "' (expected record|haar|fourier|phase)");
    }
  }
  return ProcessSchedule(initial, std::move(steps));
}

std::string schedule_id(const std::vector<std::string>& tokens) {
  std::string id;
  for (const auto& token : tokens) {
    if (!id.empty()) id += '+';
    id += token;
  }
  return id;
}

// ---------------------------------------------------------------------------
// simulate

ReportContent run_simulate(const std::vector<double>& amps,
                           const std::vector<double>& phases,
                           const std::vector<std::string>& steps, double p,
                           std::uint64_t seed) {
  validate_exponents({p});
  ReportContent content;
  content.csv_header = {"record_index", "stage_label", "outcome_index", "weight",
                        "joint_weight", "seed"};
  Rng schedule_rng(seed, 1000000);
  const ProcessSchedule schedule =
      build_schedule(configuration_from_flags(amps, phases), steps, schedule_rng);
  Rng rng(seed, 0);
  const TrajectoryResult trajectory = run_trajectory(schedule, p, rng);
  for (std::size_t i = 0; i < trajectory.records.size(); ++i) {
    const Record& r = trajectory.records[i];
    content.csv_rows.push_back({std::to_string(i), r.stage_label,
                                std::to_string(r.outcome_index), fmt(r.weight),
                                fmt(trajectory.joint_weight), std::to_string(seed)});
  }
  nlohmann::ordered_json entry;
  entry["schedule_id"] = schedule_id(steps);
  entry["p"] = p;
  entry["trajectory"] = trajectory;
  content.results.push_back(entry);
  content.summaries.push_back("schedule " + schedule_id(steps) + " p=" + fmt(p) +
                              ": outcome sequence '" + outcome_key(trajectory.records) +
                              "', joint weight " + fmt(trajectory.joint_weight));
  return content;
}

// ---------------------------------------------------------------------------
// born-test

ReportContent run_born_test(const std::vector<double>& amps,
                            const std::vector<double>& phases,
                            const std::vector<std::string>& steps,
                            const std::vector<double>& p_values, std::int64_t trials,
                            std::uint64_t seed) {
  validate_exponents(p_values);
  ReportContent content;
  content.csv_header = {"schedule_id", "p", "trials", "outcome_sequence", "count",
                        "expected_weight", "seed"};
  Rng schedule_rng(seed, 1000000);
  const ProcessSchedule schedule =
      build_schedule(configuration_from_flags(amps, phases), steps, schedule_rng);
  const std::string id = schedule_id(steps);
  std::uint64_t cell = 0;
  for (double p : p_values) {
    Rng rng(seed, cell++);
    const FrequencyReport report = born_frequency_test(schedule, p, trials, rng);
    for (const auto& [sequence, count] : report.counts) {
      content.csv_rows.push_back({id, fmt(p), std::to_string(trials), sequence,
                                  std::to_string(count),
                                  fmt(report.expected.at(sequence)),
                                  std::to_string(seed)});
    }
    nlohmann::ordered_json entry;
    entry["schedule_id"] = id;
    entry["p"] = p;
    entry["report"] = report;
    content.results.push_back(entry);
    content.summaries.push_back(
        "schedule " + id + " p=" + fmt(p) + ": chi_square " + fmt(report.chi_square) +
        " (df " + std::to_string(report.degrees_of_freedom) + "), p_value " +
        fmt(report.p_value) + ", trials " + std::to_string(trials));
  }
  return content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments on outcome-weight exponents"};
  app.require_subcommand(1);

  // Common options, duplicated per subcommand so each --help is complete.
  struct CommonOpts {
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
  };
  auto add_common = [](CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "RNG seed (embedded in the report)")
        ->capture_default_str();
    cmd->add_option("--out", opts.out,
                    "output path (default <command>-report.<format>)");
    cmd->add_option("--format", opts.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };

  // isometry-scan
  auto* scan_cmd = app.add_subcommand(
      "isometry-scan", "estimate the continuous p-norm isometry dimension over an (n, p) grid");
  std::vector<int> scan_n = {2, 3, 4};
  std::vector<double> scan_p = {1.0, 1.5, 2.0, 3.0, 4.0};
  Eigen::Index scan_samples = 0;
  double scan_rank_tol = 1e-8;
  double scan_min_gap = 10.0;
  double scan_floor = 1e-3;
  CommonOpts scan_opts;
  scan_cmd->add_option("--n", scan_n, "dimensions")->delimiter(',')->capture_default_str();
  scan_cmd->add_option("--p", scan_p, "exponents")->delimiter(',')->capture_default_str();
  scan_cmd->add_option("--samples", scan_samples,
                       "constraint rows per cell (0 = 20 n^2)")->capture_default_str();
  scan_cmd->add_option("--rank-tol", scan_rank_tol, "relative singular value threshold")
      ->capture_default_str();
  scan_cmd->add_option("--min-gap", scan_min_gap, "required spectral gap factor")
      ->capture_default_str();
  scan_cmd->add_option("--floor", scan_floor, "minimum sample component magnitude")
      ->capture_default_str();
  add_common(scan_cmd, scan_opts);

  // cauchy-check
  auto* cauchy_cmd = app.add_subcommand(
      "cauchy-check", "residuals of |a|^p against both functional equations");
  std::vector<double> cauchy_p = {1.0, 1.5, 2.0, 3.0, 4.0};
  int cauchy_pairs = 1000;
  CommonOpts cauchy_opts;
  cauchy_cmd->add_option("--p", cauchy_p, "exponents")->delimiter(',')->capture_default_str();
  cauchy_cmd->add_option("--pairs", cauchy_pairs, "sample pairs per equation")
      ->capture_default_str();
  add_common(cauchy_cmd, cauchy_opts);

  // fit-exponent
  auto* fit_cmd = app.add_subcommand(
      "fit-exponent", "recover the exponent of synthetic |a|^p samples by log-log fit");
  std::vector<double> fit_p = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  int fit_samples = 200;
  double fit_noise = 0.0;
  CommonOpts fit_opts;
  fit_cmd->add_option("--p", fit_p, "true exponents")->delimiter(',')->capture_default_str();
  fit_cmd->add_option("--samples", fit_samples, "samples per fit")->capture_default_str();
  fit_cmd->add_option("--noise", fit_noise,
                      "multiplicative noise half-width, e.g. 0.01 for [0.99, 1.01]")
      ->capture_default_str();
  add_common(fit_cmd, fit_opts);

  // drift
  auto* drift_cmd = app.add_subcommand(
      "drift", "max total-weight drift under random reversible steps");
  std::vector<int> drift_n = {2, 3, 4};
  std::vector<double> drift_p = {1.0, 1.5, 2.0, 3.0, 4.0};
  int drift_unitaries = 100;
  CommonOpts drift_opts;
  drift_cmd->add_option("--n", drift_n, "dimensions")->delimiter(',')->capture_default_str();
  drift_cmd->add_option("--p", drift_p, "exponents")->delimiter(',')->capture_default_str();
  drift_cmd->add_option("--unitaries", drift_unitaries, "Haar unitaries per cell")
      ->capture_default_str();
  add_common(drift_cmd, drift_opts);

  // simulate
  auto* sim_cmd = app.add_subcommand(
      "simulate", "run one seeded trajectory through a schedule");
  std::vector<double> sim_amps;
  std::vector<double> sim_phases;
  std::vector<std::string> sim_steps = {"record"};
  double sim_p = 2.0;
  CommonOpts sim_opts;
  sim_cmd->add_option("--amps", sim_amps, "initial squared magnitudes")
      ->delimiter(',')
      ->required();
  sim_cmd->add_option("--phases", sim_phases, "initial phases in radians")->delimiter(',');
  sim_cmd->add_option("--steps", sim_steps,
                      "schedule tokens: record|haar|fourier|phase")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--p", sim_p, "weight exponent")->capture_default_str();
  add_common(sim_cmd, sim_opts);

  // born-test
  auto* born_cmd = app.add_subcommand(
      "born-test", "outcome-frequency test against analytic path weights");
  std::vector<double> born_amps;
  std::vector<double> born_phases;
  std::vector<std::string> born_steps = {"record"};
  std::vector<double> born_p = {2.0};
  std::int64_t born_trials = 100000;
  CommonOpts born_opts;
  born_cmd->add_option("--amps", born_amps, "initial squared magnitudes")
      ->delimiter(',')
      ->required();
  born_cmd->add_option("--phases", born_phases, "initial phases in radians")->delimiter(',');
  born_cmd->add_option("--steps", born_steps,
                       "schedule tokens: record|haar|fourier|phase")
      ->delimiter(',')
      ->capture_default_str();
  born_cmd->add_option("--p", born_p, "weight exponents")->delimiter(',')->capture_default_str();
  born_cmd->add_option("--trials", born_trials, "trajectories per exponent")
      ->capture_default_str();
  add_common(born_cmd, born_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::string command;
    nlohmann::ordered_json config;
    ReportContent content;
    CommonOpts* opts = nullptr;

    if (scan_cmd->parsed()) {
      command = "isometry-scan";
      opts = &scan_opts;
      config["command"] = command;
      config["n"] = scan_n;
      config["p"] = scan_p;
      config["samples"] = scan_samples;
      config["rank_tol"] = scan_rank_tol;
      config["min_gap"] = scan_min_gap;
      config["floor"] = scan_floor;
      content = run_isometry_scan(scan_n, scan_p, scan_samples, scan_rank_tol,
                                  scan_min_gap, scan_floor, scan_opts.seed);
    } else if (cauchy_cmd->parsed()) {
      command = "cauchy-check";
      opts = &cauchy_opts;
      config["command"] = command;
      config["p"] = cauchy_p;
      config["pairs"] = cauchy_pairs;
      content = run_cauchy_check(cauchy_p, cauchy_pairs, cauchy_opts.seed);
    } else if (fit_cmd->parsed()) {
      command = "fit-exponent";
      opts = &fit_opts;
      config["command"] = command;
      config["p"] = fit_p;
      config["samples"] = fit_samples;
      config["noise"] = fit_noise;
      content = run_fit_exponent(fit_p, fit_samples, fit_noise, fit_opts.seed);
    } else if (drift_cmd->parsed()) {
      command = "drift";
      opts = &drift_opts;
      config["command"] = command;
      config["n"] = drift_n;
      config["p"] = drift_p;
      config["unitaries"] = drift_unitaries;
      content = run_drift(drift_n, drift_p, drift_unitaries, drift_opts.seed);
    } else if (sim_cmd->parsed()) {
      command = "simulate";
      opts = &sim_opts;
      config["command"] = command;
      config["amps"] = sim_amps;
      config["phases"] = sim_phases;
      config["steps"] = sim_steps;
      config["p"] = sim_p;
      content = run_simulate(sim_amps, sim_phases, sim_steps, sim_p, sim_opts.seed);
    } else if (born_cmd->parsed()) {
      command = "born-test";
      opts = &born_opts;
      config["command"] = command;
      config["amps"] = born_amps;
      config["phases"] = born_phases;
      config["steps"] = born_steps;
      config["p"] = born_p;
      config["trials"] = born_trials;
      content = run_born_test(born_amps, born_phases, born_steps, born_p, born_trials,
                              born_opts.seed);
    }

    config["seed"] = opts->seed;
    config["format"] = opts->format;
    if (opts->out.empty()) opts->out = command + "-report." + opts->format;
    config["out"] = opts->out;
    emit_report(command, config, content, opts->out, opts->format);
    return 0;
  } catch (const AmbiguousRankError& e) {
    std::cerr << "ambiguous rank: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
