#pragma once

// File formats: observation files, exclusion reports, the three-way estimate
// table, cross-validation and simulation CSVs. Every machine-readable file
// starts with a block of '#' lines naming the tool version, a hash of the run
// configuration and the seed.

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hhnet/independence.hpp"
#include "hhnet/ingestion.hpp"
#include "hhnet/model_selection.hpp"
#include "hhnet/network.hpp"
#include "hhnet/probability.hpp"
#include "hhnet/simulation.hpp"

namespace hhnet {

inline constexpr std::string_view kToolVersion = "1.0.0";

std::uint64_t fnv1a64(std::string_view text);

struct RunMetadata {
  std::string command;
  // Canonical text of every setting that affects the output; hashed.
  std::string config;
  std::uint64_t seed = 0;
};

void write_metadata(std::ostream& out, const RunMetadata& meta);

// Shortest text that reads back to the same double.
std::string format_double(double x);

// Rows look like "C1,0:1;1:1;2:0": the respondent's role, then
// dyad_id:value for the three incident dyads in ascending dyad order.
void write_observations(std::ostream& out, std::span<const PartialObservation> data,
                        const RunMetadata& meta);
// Throws InputError naming the offending line.
std::vector<PartialObservation> read_observations(std::istream& in);
std::vector<PartialObservation> load_observations(const std::filesystem::path& path);

// CSV with columns respondent_id, reason, detail.
void write_report_entries(std::ostream& out, const std::vector<ReportEntry>& entries,
                          const RunMetadata& meta);

enum class Estimator { mle = 0, penalized = 1, independence = 2 };
inline constexpr int kEstimators = 3;
std::string_view estimator_name(Estimator e);

struct EstimateRow {
  int network = 0;
  std::array<double, kEstimators> estimate{};
  // Empty when no interval is available (e.g. singular information).
  std::array<std::optional<Interval>, kEstimators> ci{};
};

struct EstimateReport {
  std::vector<EstimateRow> rows;  // all 64 networks, sorted by dyad pattern
  double lambda = 0.0;
  double level = 0.95;
  double display_threshold = 0.02;

  // A row is hidden only when every estimate is strictly below the threshold.
  bool displayed(const EstimateRow& row) const;
};

// Sort key for dyad patterns: the c1-c2 column is the most significant bit.
int pattern_order(int network);

// Symmetric p +- z se interval clipped to [0, 1].
Interval normal_interval(double p, double se, double level);

EstimateReport make_estimate_report(const ProbabilityVector& mle,
                                    const std::array<std::optional<Interval>, kNetworks>& mle_ci,
                                    const ProbabilityVector& penalized,
                                    const std::array<std::optional<Interval>, kNetworks>& penalized_ci,
                                    const ProbabilityVector& independence,
                                    const std::array<std::optional<Interval>, kNetworks>& independence_ci,
                                    double lambda, double level);

// Fixed-width text table, probabilities rounded to two decimals.
void write_estimate_table(std::ostream& out, const EstimateReport& report);
// Full precision, all 64 networks.
void write_estimate_csv(std::ostream& out, const EstimateReport& report, const RunMetadata& meta);

// Columns lambda, mean_heldout, failed_folds.
void write_cv_csv(std::ostream& out, const CvCurve& curve, const RunMetadata& meta);

// Columns lambda, mse, mean_sq_bias, signed_bias, variance, p_mean_0..p_mean_63.
// Throws NumericalError if a row breaks mse = mean_sq_bias + variance by more
// than 1e-10.
void write_study_csv(std::ostream& out, const StudyMetrics& metrics, const RunMetadata& meta);

// Reads a probability vector from a CSV with a header row, a `network`
// column (0..63) and the named value column, e.g. an estimates file. Throws
// InputError unless all 64 networks are present and the values form a
// probability vector within 1e-6 (they are then renormalized).
ProbabilityVector read_probability_csv(std::istream& in, std::string_view column);

}  // namespace hhnet
