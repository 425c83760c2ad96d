#pragma once

/// JSON and CSV emission for the report types. Doubles go through
/// shortest-round-trip formatting so identical inputs always serialize to
/// identical bytes. The to_json overloads are templated on the json type so
/// both nlohmann::json and nlohmann::ordered_json work.

#include <charconv>
#include <complex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nlohmann {

template <>
struct adl_serializer<std::complex<double>> {
  template <typename BasicJsonType>
  static void to_json(BasicJsonType& j, const std::complex<double>& z) {
    j = BasicJsonType{{"re", z.real()}, {"im", z.imag()}};
  }
  template <typename BasicJsonType>
  static void from_json(const BasicJsonType& j, std::complex<double>& z) {
    z = {j.at("re").template get<double>(), j.at("im").template get<double>()};
  }
};

}  // namespace nlohmann

#include "bornlab/cauchy.hpp"
#include "bornlab/isometry.hpp"
#include "bornlab/process.hpp"

namespace bornlab {

/// Shortest decimal text that round-trips the exact double.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

template <typename BasicJsonType, typename Sample>
void to_json(BasicJsonType& j, const ResidualReport<Sample>& r) {
  j = BasicJsonType{{"max_residual", r.max_residual},
                    {"mean_residual", r.mean_residual},
                    {"num_samples", r.num_samples},
                    {"worst_case_inputs", BasicJsonType::array()}};
  for (const auto& [first, second] : r.worst_case_inputs) {
    BasicJsonType pair = BasicJsonType::array();
    pair.push_back(first);
    pair.push_back(second);
    j["worst_case_inputs"].push_back(std::move(pair));
  }
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const ExponentFit& f) {
  j = BasicJsonType{
      {"p_hat", f.p_hat},
      {"residual_rms", f.residual_rms},
      {"sample_range", BasicJsonType::array({f.sample_range.first, f.sample_range.second})}};
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const IsometryScanResult& r) {
  j = BasicJsonType{{"n", r.n},
                    {"p", r.p},
                    {"estimated_dimension", r.estimated_dimension},
                    {"singular_values", r.singular_values},
                    {"rank_gap", r.rank_gap}};
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const Record& r) {
  j = BasicJsonType{{"outcome_index", r.outcome_index},
                    {"stage_label", r.stage_label},
                    {"weight", r.weight}};
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const TrajectoryResult& t) {
  j = BasicJsonType{{"records", t.records}, {"joint_weight", t.joint_weight}};
}

template <typename BasicJsonType>
void to_json(BasicJsonType& j, const FrequencyReport& r) {
  j = BasicJsonType{{"counts", r.counts},
                    {"trials", r.trials},
                    {"expected", r.expected},
                    {"chi_square", r.chi_square},
                    {"p_value", r.p_value},
                    {"pooled_cells", r.pooled_cells},
                    {"degrees_of_freedom", r.degrees_of_freedom}};
}

/// Minimal CSV quoting: only fields containing a comma, quote, or newline
/// get wrapped.
inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) row += ',';
    row += csv_escape(fields[i]);
  }
  row += '\n';
  return row;
}

}  // namespace bornlab
