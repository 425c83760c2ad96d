#pragma once

/// Simulator for processes that alternate reversible evolution with
/// irreversible record formation, under a candidate weight exponent p.
/// One outcome is sampled per record event; evolution continues from the
/// selected basis column. For p != 2 the per-event weights are still
/// normalized so sampling stays well-defined; the non-conservation that
/// rules those exponents out is surfaced separately by total_weight_drift.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bornlab/amplitude.hpp"
#include "bornlab/random.hpp"
#include "bornlab/stats.hpp"

namespace bornlab {

struct ReversibleStep {
  Unitary u;
};

/// Record formation in the basis given by the unitary's columns.
struct RecordEvent {
  Unitary basis;
  std::string stage_label;
};

using ProcessStep = std::variant<ReversibleStep, RecordEvent>;

struct ProcessSchedule {
  Configuration initial;
  std::vector<ProcessStep> steps;

  ProcessSchedule(Configuration init, std::vector<ProcessStep> process_steps)
      : initial(std::move(init)), steps(std::move(process_steps)) {
    for (const ProcessStep& step : steps) {
      const Eigen::Index dim = std::holds_alternative<ReversibleStep>(step)
                                   ? std::get<ReversibleStep>(step).u.dim()
                                   : std::get<RecordEvent>(step).basis.dim();
      if (dim != initial.dim()) {
        throw std::invalid_argument("ProcessSchedule: step dimension mismatch");
      }
    }
  }

  std::size_t record_count() const {
    std::size_t count = 0;
    for (const ProcessStep& step : steps) {
      if (std::holds_alternative<RecordEvent>(step)) ++count;
    }
    return count;
  }
};

struct Record {
  int outcome_index = 0;
  std::string stage_label;
  double weight = 0.0;
};

struct TrajectoryResult {
  std::vector<Record> records;
  double joint_weight = 1.0;
};

struct FrequencyReport {
  std::map<std::string, std::int64_t> counts;
  std::int64_t trials = 0;
  std::map<std::string, double> expected;
  double chi_square = 0.0;
  double p_value = 1.0;
  std::vector<std::string> pooled_cells;  // cells merged below the expected-count floor
  int degrees_of_freedom = 0;
};

/// Normalized outcome weights for a record event: with beta = basis^dagger
/// amplitudes, w_i = |beta_i|^p / sum_j |beta_j|^p.
inline Eigen::VectorXd record_weights(const Configuration& c, const RecordEvent& e,
                                      double p) {
  if (e.basis.dim() != c.dim()) {
    throw std::invalid_argument("record_weights: dimension mismatch");
  }
  if (!(std::isfinite(p) && p > 0.0)) {
    throw std::invalid_argument("record_weights: p must be finite and > 0");
  }
  const Eigen::VectorXcd beta = e.basis.matrix().adjoint() * c.amplitudes;
  Eigen::VectorXd w(beta.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    w[i] = p == 2.0 ? std::norm(beta[i]) : std::pow(std::abs(beta[i]), p);
    total += w[i];
  }
  if (!(std::isfinite(total) && total > 0.0)) {
    throw std::domain_error("record_weights: zero total weight");
  }
  return w / total;
}

namespace detail {

inline int sample_index(const Eigen::VectorXd& weights, Rng& rng) {
  const double u = uniform_unit(rng);
  double cumulative = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = static_cast<int>(i);
    cumulative += weights[i];
    if (u < cumulative && weights[i] > 0.0) return static_cast<int>(i);
  }
  return last_positive;  // roundoff in the cumulative sum
}

/// Generic fold over the schedule; Picker chooses the outcome index given
/// the normalized weights of each record event.
template <typename Picker>
TrajectoryResult run_trajectory_impl(const ProcessSchedule& s, double p,
                                     Picker&& pick) {
  TrajectoryResult result;
  Configuration current = s.initial;
  for (const ProcessStep& step : s.steps) {
    if (std::holds_alternative<ReversibleStep>(step)) {
      current = apply_unitary(std::get<ReversibleStep>(step).u, current);
    } else {
      const RecordEvent& event = std::get<RecordEvent>(step);
      const Eigen::VectorXd w = record_weights(current, event, p);
      const int idx = pick(w);
      result.records.push_back({idx, event.stage_label, w[idx]});
      result.joint_weight *= w[idx];
      current = Configuration::unchecked(event.basis.matrix().col(idx),
                                         std::move(current.labels));
    }
  }
  return result;
}

}  // namespace detail

/// Samples one outcome per record event; the post-record configuration is
/// the selected basis column.
inline std::pair<Record, Configuration> form_record(const Configuration& c,
                                                    const RecordEvent& e, double p,
                                                    Rng& rng) {
  const Eigen::VectorXd w = record_weights(c, e, p);
  const int idx = detail::sample_index(w, rng);
  return {Record{idx, e.stage_label, w[idx]},
          Configuration::unchecked(e.basis.matrix().col(idx), c.labels)};
}

inline TrajectoryResult run_trajectory(const ProcessSchedule& s, double p, Rng& rng) {
  return detail::run_trajectory_impl(
      s, p, [&rng](const Eigen::VectorXd& w) { return detail::sample_index(w, rng); });
}

/// Deterministic replay of one outcome path through the same fold code.
inline TrajectoryResult run_trajectory_forced(const ProcessSchedule& s, double p,
                                              std::span<const int> outcomes) {
  if (outcomes.size() != s.record_count()) {
    throw std::invalid_argument("run_trajectory_forced: outcome count mismatch");
  }
  std::size_t next = 0;
  return detail::run_trajectory_impl(s, p, [&](const Eigen::VectorXd& w) {
    const int idx = outcomes[next++];
    if (idx < 0 || idx >= static_cast<int>(w.size())) {
      throw std::invalid_argument("run_trajectory_forced: outcome index out of range");
    }
    return idx;
  });
}

inline std::string outcome_key(const std::vector<Record>& records) {
  std::string key;
  for (const Record& r : records) {
    if (!key.empty()) key += ';';
    key += r.stage_label;
    key += ':';
    key += std::to_string(r.outcome_index);
  }
  return key;
}

/// Analytic weight of every full outcome sequence, by path enumeration.
inline std::map<std::string, double> enumerate_paths(const ProcessSchedule& s, double p) {
  struct Branch {
    std::vector<Record> records;
    Configuration config;
    double weight;
  };
  std::vector<Branch> branches;
  branches.push_back({{}, s.initial, 1.0});
  for (const ProcessStep& step : s.steps) {
    if (std::holds_alternative<ReversibleStep>(step)) {
      const Unitary& u = std::get<ReversibleStep>(step).u;
      for (Branch& b : branches) b.config = apply_unitary(u, b.config);
    } else {
      const RecordEvent& event = std::get<RecordEvent>(step);
      std::vector<Branch> refined;
      refined.reserve(branches.size() * static_cast<std::size_t>(s.initial.dim()));
      for (const Branch& b : branches) {
        const Eigen::VectorXd w = record_weights(b.config, event, p);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          Branch child = b;
          child.records.push_back(
              {static_cast<int>(i), event.stage_label, w[i]});
          child.weight *= w[i];
          child.config = Configuration::unchecked(event.basis.matrix().col(i),
                                                  b.config.labels);
          refined.push_back(std::move(child));
        }
      }
      branches = std::move(refined);
    }
  }
  std::map<std::string, double> expected;
  for (const Branch& b : branches) expected[outcome_key(b.records)] += b.weight;
  return expected;
}

/// Max over the outcome grid of |analytic two-stage weight - simulator
/// joint weight| for a schedule with exactly two record events. The residual
/// stays at roundoff for EVERY p: sequential refinement is multiplicative by
/// construction, so it cannot single out p = 2 on its own. Conservation
/// under reversible steps (total_weight_drift) is what does.
inline double refinement_consistency(const ProcessSchedule& s, double p) {
  std::vector<std::size_t> record_positions;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    if (std::holds_alternative<RecordEvent>(s.steps[i])) record_positions.push_back(i);
  }
  if (record_positions.size() != 2) {
    throw std::invalid_argument("refinement_consistency: schedule must have exactly two record events");
  }

  // Analytic route: straight-line conditional computation, no fold.
  const RecordEvent& first = std::get<RecordEvent>(s.steps[record_positions[0]]);
  const RecordEvent& second = std::get<RecordEvent>(s.steps[record_positions[1]]);
  Configuration before_first = s.initial;
  for (std::size_t i = 0; i < record_positions[0]; ++i) {
    before_first = apply_unitary(std::get<ReversibleStep>(s.steps[i]).u, before_first);
  }
  const Eigen::VectorXd stage1 = record_weights(before_first, first, p);

  const Eigen::Index n = s.initial.dim();
  double max_residual = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Configuration after_first = Configuration::unchecked(
        first.basis.matrix().col(i), s.initial.labels);
    for (std::size_t k = record_positions[0] + 1; k < record_positions[1]; ++k) {
      after_first = apply_unitary(std::get<ReversibleStep>(s.steps[k]).u, after_first);
    }
    const Eigen::VectorXd stage2 = record_weights(after_first, second, p);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double direct = stage1[i] * stage2[j];
      const std::vector<int> path = {static_cast<int>(i), static_cast<int>(j)};
      const double simulated = run_trajectory_forced(s, p, path).joint_weight;
      max_residual = std::max(max_residual, std::abs(direct - simulated));
    }
  }
  return max_residual;
}

/// Relative change of the total p-weight under one explicit reversible step.
inline double weight_drift(const Unitary& u, const Configuration& c, double p) {
  const WeightFunction wf(p);
  const double before = total_weight(wf, c);
  const double after = total_weight(wf, apply_unitary(u, c));
  return std::abs(after - before) / before;
}

/// Max relative drift of the total p-weight over random Haar unitaries
/// applied to random configurations. Vanishes (to roundoff) iff p = 2.
inline double total_weight_drift(int n, double p, int num_unitaries, Rng& rng) {
  if (n < 2) throw std::invalid_argument("total_weight_drift: n must be >= 2");
  if (num_unitaries < 1) {
    throw std::invalid_argument("total_weight_drift: need at least one unitary");
  }
  double max_drift = 0.0;
  for (int k = 0; k < num_unitaries; ++k) {
    const Unitary u = haar_unitary(n, rng);
    const Configuration c = random_configuration(n, rng);
    max_drift = std::max(max_drift, weight_drift(u, c, p));
  }
  return max_drift;
}

namespace detail {

struct ChiSquareCell {
  std::string key;
  double expected_count = 0.0;
  double observed = 0.0;
};

}  // namespace detail

/// Runs `trials` independent trajectories (one RNG substream per trial
/// index, so the outcome is invariant under any worker partitioning),
/// tallies full outcome sequences, and tests them against the analytic path
/// weights with a chi-square statistic. Cells with expected count below 5
/// are pooled and listed in the report rather than silently skewing the
/// test.
inline FrequencyReport born_frequency_test(const ProcessSchedule& s, double p,
                                           std::int64_t trials, Rng& rng) {
  if (trials < 1000) {
    throw std::invalid_argument("born_frequency_test: need at least 1000 trials");
  }
  if (s.record_count() < 1) {
    throw std::invalid_argument("born_frequency_test: schedule has no record event");
  }

  FrequencyReport report;
  report.trials = trials;
  report.expected = enumerate_paths(s, p);
  for (const auto& [key, w] : report.expected) report.counts[key] = 0;

  const std::uint64_t base_seed = rng();
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    Rng substream(base_seed, static_cast<std::uint64_t>(trial));
    const TrajectoryResult t = run_trajectory(s, p, substream);
    report.counts[outcome_key(t.records)] += 1;
  }

  // Pool low-expectation cells (Cochran floor of 5 expected counts).
  std::vector<detail::ChiSquareCell> cells;
  detail::ChiSquareCell pooled{"(pooled)", 0.0, 0.0};
  bool impossible_observed = false;
  for (const auto& [key, count] : report.counts) {
    const auto it = report.expected.find(key);
    const double expected_weight = it != report.expected.end() ? it->second : 0.0;
    const double expected_count = expected_weight * static_cast<double>(trials);
    if (expected_count == 0.0) {
      if (count > 0) impossible_observed = true;
      continue;  // no information when both are zero
    }
    if (expected_count < 5.0) {
      pooled.expected_count += expected_count;
      pooled.observed += static_cast<double>(count);
      report.pooled_cells.push_back(key);
    } else {
      cells.push_back({key, expected_count, static_cast<double>(count)});
    }
  }
  if (!report.pooled_cells.empty()) {
    if (pooled.expected_count < 5.0 && !cells.empty()) {
      // Fold the still-starved pooled cell into the smallest regular cell.
      auto smallest = std::min_element(cells.begin(), cells.end(),
                                       [](const auto& a, const auto& b) {
                                         return a.expected_count < b.expected_count;
                                       });
      smallest->expected_count += pooled.expected_count;
      smallest->observed += pooled.observed;
    } else {
      cells.push_back(pooled);
    }
  }

  if (impossible_observed) {
    report.chi_square = std::numeric_limits<double>::infinity();
    report.p_value = 0.0;
    report.degrees_of_freedom = static_cast<int>(cells.size());
    return report;
  }

  double chi_square = 0.0;
  for (const auto& cell : cells) {
    const double diff = cell.observed - cell.expected_count;
    chi_square += diff * diff / cell.expected_count;
  }
  report.chi_square = chi_square;
  report.degrees_of_freedom = std::max(0, static_cast<int>(cells.size()) - 1);
  report.p_value = chi_square_p_value(chi_square, report.degrees_of_freedom);
  return report;
}

}  // namespace bornlab
