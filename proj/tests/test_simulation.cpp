#include <doctest.h>

#include <cmath>

#include "hhnet/independence.hpp"
#include "hhnet/model_selection.hpp"
#include "hhnet/simulation.hpp"
#include "oracles.hpp"

using namespace hhnet;

TEST_CASE("point-mass truths give fixed reports") {
  Rng rng(1);
  const RespondentFrequency freq{{3, 2, 4, 1}};
  for (const auto& obs : simulate_sample(ProbabilityVector::point_mass(63), 10, freq, rng)) CHECK(obs.pattern() == 7);
  for (const auto& obs : simulate_sample(ProbabilityVector::point_mass(0), 10, freq, rng)) CHECK(obs.pattern() == 0);
}

TEST_CASE("respondent roles follow the frequencies exactly") {
  Rng rng(2);
  const RespondentFrequency freq{{6, 17, 4, 3}};
  for (int rep = 0; rep < 5; ++rep) {
    std::array<int, 4> seen{};
    for (const auto& obs : simulate_sample(ProbabilityVector::uniform(), 30, freq, rng)) ++seen[to_int(obs.respondent())];
    CHECK(seen == freq.count);
  }
  CHECK_THROWS_AS(simulate_sample(ProbabilityVector::uniform(), 31, freq, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_sample(ProbabilityVector{}, 30, freq, rng), std::invalid_argument);
}

TEST_CASE("report frequencies converge to the truth") {
  const auto truth = dependent_scenario();
  const int per_role = 25000;
  Rng rng(3);
  const auto sample = simulate_sample(truth, 4 * per_role, {{per_role, per_role, per_role, per_role}}, rng);
  const auto counts = ConfigurationCounts::from(sample);
  for (const auto& obs : all_configurations()) {
    const double q = oracle::report_mass(truth, obs);
    const double expected = per_role * q;
    const double se = std::sqrt(per_role * q * (1 - q));
    CAPTURE(obs.configuration());
    CHECK(std::abs(counts.count[obs.configuration()] - expected) <= 3 * se + 1e-9);
  }
}

TEST_CASE("dependent scenario") {
  const auto p = dependent_scenario();
  CHECK(p.is_valid(1e-12));
  CHECK(p[63] == 0.65);
  CHECK(p[kElderChildIsolate] == 0.12);
  CHECK(index_to_vector(NetworkIndex(kElderChildIsolate)) == DyadVector{0, 1, 1, 0, 0, 1});
}

TEST_CASE("a perfect estimator has no error") {
  StudyConfig cfg;
  cfg.p_true = dependent_scenario();
  cfg.samples = 10;
  cfg.grid = {0.0, 5.0};
  const auto metrics =
      run_study(cfg, [](std::span<const PartialObservation>, double, const StudyConfig& c) { return c.p_true; });
  for (const auto& pt : metrics.points) {
    CHECK(pt.mse == 0.0);
    CHECK(pt.variance == 0.0);
    CHECK(pt.mean_sq_bias == 0.0);
    CHECK(pt.signed_bias == 0.0);
    CHECK(pt.failures == 0);
  }
}

TEST_CASE("a constant estimator has only bias") {
  StudyConfig cfg;
  cfg.p_true = dependent_scenario();
  cfg.samples = 4;
  cfg.grid = {1.0};
  const auto metrics = run_study(
      cfg, [](std::span<const PartialObservation>, double, const StudyConfig&) { return ProbabilityVector::uniform(); });
  double bias2 = 0.0;
  for (int k = 0; k < kNetworks; ++k) bias2 += std::pow(1.0 / 64 - cfg.p_true[k], 2) / 64;
  CHECK(metrics.points[0].variance == doctest::Approx(0.0));
  CHECK(metrics.points[0].mean_sq_bias == doctest::Approx(bias2).epsilon(1e-12));
  CHECK(metrics.points[0].mse == doctest::Approx(bias2).epsilon(1e-12));
}

TEST_CASE("failed fits are counted and skipped") {
  StudyConfig cfg;
  cfg.p_true = dependent_scenario();
  cfg.samples = 6;
  cfg.grid = {0.0, 1.0};
  const auto metrics = run_study(cfg, [](std::span<const PartialObservation>, double lambda, const StudyConfig& c) {
    if (lambda > 0.5) throw std::runtime_error("boom");
    return c.p_true;
  });
  CHECK(metrics.points[0].failures == 0);
  CHECK(metrics.points[1].failures == 6);
}

TEST_CASE("real study: decomposition and smoothing") {
  StudyConfig cfg;
  cfg.p_true = product_distribution(std::array<double, 6>{0.85, 0.9, 0.9, 0.8, 0.8, 0.9});
  cfg.samples = 12;
  cfg.grid = {0.0, 5.0, 50.0, 1e5};
  cfg.seed = 5;
  const auto metrics = run_study(cfg);
  REQUIRE(metrics.points.size() == 4);
  for (const auto& pt : metrics.points) {
    CHECK(std::abs(pt.mse - (pt.mean_sq_bias + pt.variance)) <= 1e-10);
    CHECK(std::abs(pt.signed_bias) <= 1e-14);
    CHECK(pt.failures == 0);
  }
  CHECK(metrics.points[2].variance <= metrics.points[0].variance);
  CHECK(max_abs_difference(metrics.points[3].mean_estimate, metrics.mean_independence) <= 5e-3);

  cfg.jobs = 3;
  const auto again = run_study(cfg);
  for (std::size_t g = 0; g < metrics.points.size(); ++g) {
    CHECK(again.points[g].mse == metrics.points[g].mse);
    CHECK(again.points[g].mean_estimate == metrics.points[g].mean_estimate);
  }
}

TEST_CASE("paper-sized configuration is valid") {
  StudyConfig cfg;
  cfg.p_true = dependent_scenario();
  cfg.grid = make_grid(0, 50, 0.5);
  CHECK(cfg.samples == 200);
  CHECK(cfg.n == 30);
  CHECK(cfg.freq.count == std::array<int, 4>{6, 17, 4, 3});
  CHECK_NOTHROW(cfg.validate());
  cfg.grid = {1.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.grid = {1.0};
  cfg.freq = {{6, 17, 4, 2}};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
