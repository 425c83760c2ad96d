#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bornlab/cauchy.hpp"
#include "bornlab/random.hpp"

using namespace bornlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<MagnitudePair> random_magnitude_pairs(std::size_t count, Rng& rng,
                                                  double lo = 0.1, double hi = 10.0) {
  std::vector<MagnitudePair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    pairs.emplace_back(log_uniform(rng, lo, hi), log_uniform(rng, lo, hi));
  }
  return pairs;
}

std::vector<AdditivePair> random_real_pairs(std::size_t count, Rng& rng,
                                            double lo = 0.25, double hi = 2.0) {
  std::vector<AdditivePair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    pairs.emplace_back(Amplitude{uniform_range(rng, lo, hi), 0.0},
                       Amplitude{uniform_range(rng, lo, hi), 0.0});
  }
  return pairs;
}

}  // namespace

TEST_CASE("additive checker on the exponential identity", "[cauchy]") {
  const std::vector<AdditivePair> pairs = {{Amplitude{1.0, 0.0}, Amplitude{2.0, 0.0}}};
  const auto report = check_additive_equation(
      [](Amplitude a) { return std::exp(a); }, std::span<const AdditivePair>(pairs));
  REQUIRE(report.num_samples == 1);
  REQUIRE(report.max_residual <= 1e-12);
}

TEST_CASE("additive checker quantifies the squared-magnitude failure", "[cauchy]") {
  // f(2) = 4 vs f(1) f(1) = 1: residual |4 - 1| / 4 = 0.75.
  const std::vector<AdditivePair> pairs = {{Amplitude{1.0, 0.0}, Amplitude{1.0, 0.0}}};
  const auto report = check_additive_equation(
      [](Amplitude a) { return Amplitude{std::norm(a), 0.0}; },
      std::span<const AdditivePair>(pairs));
  REQUIRE_THAT(report.max_residual, WithinAbs(0.75, 1e-15));
  REQUIRE(report.worst_case_inputs.size() == 1);
}

TEST_CASE("additive checker accepts the constant-one solution", "[cauchy]") {
  Rng rng(3);
  const auto pairs = random_real_pairs(100, rng);
  const auto report = check_additive_equation(
      [](Amplitude) { return Amplitude{1.0, 0.0}; }, std::span<const AdditivePair>(pairs));
  REQUIRE(report.max_residual == 0.0);
  REQUIRE(report.mean_residual == 0.0);
}

TEST_CASE("additive checker input validation", "[cauchy]") {
  const std::vector<AdditivePair> empty;
  REQUIRE_THROWS_AS(check_additive_equation([](Amplitude a) { return a; },
                                            std::span<const AdditivePair>(empty)),
                    std::invalid_argument);
  const std::vector<AdditivePair> pairs = {{Amplitude{700.0, 0.0}, Amplitude{700.0, 0.0}}};
  REQUIRE_THROWS_AS(check_additive_equation([](Amplitude a) { return std::exp(a); },
                                            std::span<const AdditivePair>(pairs)),
                    std::domain_error);
}

TEST_CASE("multiplicative checker on power laws", "[cauchy]") {
  SECTION("x^2 on a single pair") {
    const std::vector<MagnitudePair> pairs = {{2.0, 3.0}};
    const auto report = check_multiplicative_equation(
        [](double x) { return x * x; }, std::span<const MagnitudePair>(pairs));
    REQUIRE(report.max_residual == 0.0);
  }
  SECTION("x^p over random pairs for the whole exponent grid") {
    Rng rng(41);
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
      const auto pairs = random_magnitude_pairs(1000, rng);
      const auto report = check_multiplicative_equation(
          [p](double x) { return std::pow(x, p); },
          std::span<const MagnitudePair>(pairs));
      REQUIRE(report.max_residual <= 1e-10);
    }
  }
}

TEST_CASE("multiplicative checker quantifies the shifted power law failure", "[cauchy]") {
  // f(4) = 17 vs f(2) f(2) = 25: residual 8/17.
  const std::vector<MagnitudePair> pairs = {{2.0, 2.0}};
  const auto report = check_multiplicative_equation(
      [](double x) { return x * x + 1.0; }, std::span<const MagnitudePair>(pairs));
  REQUIRE_THAT(report.max_residual, WithinAbs(0.47058823529411764, 1e-15));
}

TEST_CASE("multiplicative checker input validation", "[cauchy]") {
  const std::vector<MagnitudePair> empty;
  REQUIRE_THROWS_AS(check_multiplicative_equation([](double x) { return x; },
                                                  std::span<const MagnitudePair>(empty)),
                    std::invalid_argument);
  const std::vector<MagnitudePair> bad = {{-1.0, 2.0}};
  REQUIRE_THROWS_AS(check_multiplicative_equation([](double x) { return x; },
                                                  std::span<const MagnitudePair>(bad)),
                    std::invalid_argument);
  const std::vector<MagnitudePair> pairs = {{2.0, 2.0}};
  REQUIRE_THROWS_AS(check_multiplicative_equation([](double) { return std::nan(""); },
                                                  std::span<const MagnitudePair>(pairs)),
                    std::domain_error);
}

TEST_CASE("report invariants hold on generic data", "[cauchy][property]") {
  Rng rng(8);
  const auto pairs = random_magnitude_pairs(500, rng);
  const auto report = check_multiplicative_equation(
      [](double x) { return x * x + 0.1 * x; }, std::span<const MagnitudePair>(pairs));
  REQUIRE(report.num_samples == 500);
  REQUIRE(report.mean_residual <= report.max_residual);
  REQUIRE_FALSE(report.worst_case_inputs.empty());
  for (const auto& [x1, x2] : report.worst_case_inputs) {
    const double combined = x1 * x2 * (x1 * x2) + 0.1 * (x1 * x2);
    const double split = (x1 * x1 + 0.1 * x1) * (x2 * x2 + 0.1 * x2);
    const double residual = std::abs(combined - split) / std::max(1.0, std::abs(combined));
    REQUIRE_THAT(residual, WithinRel(report.max_residual, 1e-12));
  }
}

TEST_CASE("fit_power_exponent recovers exact power laws", "[cauchy]") {
  SECTION("x^2 on a fixed grid") {
    const std::vector<std::pair<double, double>> samples = {
        {0.5, 0.25}, {1.0, 1.0}, {2.0, 4.0}, {4.0, 16.0}};
    const ExponentFit fit = fit_power_exponent(samples);
    REQUIRE_THAT(fit.p_hat, WithinAbs(2.0, 1e-10));
    REQUIRE(fit.residual_rms <= 1e-10);
    REQUIRE(fit.sample_range.first == 0.5);
    REQUIRE(fit.sample_range.second == 4.0);
  }
  SECTION("x^3 on random abscissae") {
    Rng rng(12);
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 100; ++i) {
      const double x = log_uniform(rng, 0.1, 10.0);
      samples.emplace_back(x, std::pow(x, 3.0));
    }
    const ExponentFit fit = fit_power_exponent(samples);
    REQUIRE_THAT(fit.p_hat, WithinAbs(3.0, 1e-10));
  }
  SECTION("whole exponent grid within 1e-8") {
    Rng rng(13);
    for (double p : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
      std::vector<std::pair<double, double>> samples;
      for (int i = 0; i < 50; ++i) {
        const double x = log_uniform(rng, 0.1, 10.0);
        samples.emplace_back(x, std::pow(x, p));
      }
      const ExponentFit fit = fit_power_exponent(samples);
      REQUIRE_THAT(fit.p_hat, WithinAbs(p, 1e-8));
    }
  }
}

TEST_CASE("fit_power_exponent tolerates small multiplicative noise", "[cauchy]") {
  Rng rng(77);
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i < 100; ++i) {
    const double x = log_uniform(rng, 0.1, 10.0);
    const double noise = uniform_range(rng, 0.99, 1.01);
    samples.emplace_back(x, x * x * noise);
  }
  const ExponentFit fit = fit_power_exponent(samples);
  REQUIRE(std::abs(fit.p_hat - 2.0) <= 0.05);
}

TEST_CASE("fit_power_exponent input validation", "[cauchy]") {
  const std::vector<std::pair<double, double>> one = {{2.0, 4.0}};
  REQUIRE_THROWS_AS(fit_power_exponent(one), std::invalid_argument);
  const std::vector<std::pair<double, double>> identical = {{2.0, 4.0}, {2.0, 4.1}};
  REQUIRE_THROWS_AS(fit_power_exponent(identical), std::invalid_argument);
  const std::vector<std::pair<double, double>> nonpositive = {{1.0, 1.0}, {2.0, -4.0}};
  REQUIRE_THROWS_AS(fit_power_exponent(nonpositive), std::invalid_argument);
}

TEST_CASE("power-law closure across the exponent grid", "[cauchy][property]") {
  Rng rng(1001);
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0, 4.0}) {
    const auto pairs = random_magnitude_pairs(10000, rng);
    const auto report = check_multiplicative_equation(
        [p](double x) { return std::pow(x, p); }, std::span<const MagnitudePair>(pairs));
    REQUIRE(report.max_residual <= 1e-10);
  }
}

TEST_CASE("exponential closure across a rate grid", "[cauchy][property]") {
  Rng rng(1002);
  for (double lambda : {-2.0, -0.5, 0.0, 0.3, 1.0, 2.0}) {
    const auto pairs = random_real_pairs(1000, rng, -1.5, 1.5);
    const auto report = check_additive_equation(
        [lambda](Amplitude a) { return std::exp(lambda * a); },
        std::span<const AdditivePair>(pairs));
    REQUIRE(report.max_residual <= 1e-10);
  }
}

TEST_CASE("the two functional equations discriminate |alpha|^2", "[cauchy][property]") {
  Rng rng(1003);

  // Passes the multiplicative-argument equation...
  const auto mag_pairs = random_magnitude_pairs(2000, rng);
  const auto mult_report = check_multiplicative_equation(
      [](double x) { return x * x; }, std::span<const MagnitudePair>(mag_pairs));
  REQUIRE(mult_report.max_residual <= 1e-10);

  // ...and fails the additive-argument equation on generic real pairs.
  const auto add_pairs = random_real_pairs(2000, rng);
  const auto add_report = check_additive_equation(
      [](Amplitude a) { return Amplitude{std::norm(a), 0.0}; },
      std::span<const AdditivePair>(add_pairs));
  REQUIRE(add_report.max_residual > 0.1);
}
