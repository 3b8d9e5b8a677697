// hhnet: estimate household contact-network distributions from egocentric
// survey data.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hhnet/errors.hpp"
#include "hhnet/independence.hpp"
#include "hhnet/ingestion.hpp"
#include "hhnet/model_selection.hpp"
#include "hhnet/optimizer.hpp"
#include "hhnet/report.hpp"
#include "hhnet/simulation.hpp"

namespace fs = std::filesystem;
using namespace hhnet;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInternal = 1;

struct Common {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out_dir = ".";
  OptimizerOptions optimizer;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
  cmd->add_option("--gradient-tolerance", c.optimizer.gradient_tolerance, "Optimizer gradient tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--objective-tolerance", c.optimizer.objective_tolerance,
                  "Optimizer relative objective-change tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iterations", c.optimizer.max_iterations, "Optimizer iteration cap per start")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", c.optimizer.restarts, "Optimizer start points")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

std::string optimizer_config(const OptimizerOptions& o) {
  return "gtol=" + format_double(o.gradient_tolerance) + ";ftol=" + format_double(o.objective_tolerance) +
         ";max_iter=" + std::to_string(o.max_iterations) + ";restarts=" + std::to_string(o.restarts) +
         ";opt_seed=" + std::to_string(o.seed) + ";";
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir);
  return fs::path(dir);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

// "start:stop:step", a comma-separated list, or a single value.
std::vector<double> parse_grid(const std::string& text) {
  const char sep = text.find(',') != std::string::npos ? ',' : ':';
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw InputError("grid must be start:stop:step or a comma list, got '" + text + "'");
    }
  }
  if (parts.size() == 1 || sep == ',') return parts;
  if (parts.size() != 3) throw InputError("grid must be start:stop:step or a comma list, got '" + text + "'");
  try {
    return make_grid(parts[0], parts[1], parts[2]);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::string default_grid(PenaltyType p) { return p == PenaltyType::adjacency ? "0:10:0.25" : "0:50:0.5"; }

const std::map<std::string, PenaltyType> kPenaltyNames{{"independence", PenaltyType::independence},
                                                       {"adjacency", PenaltyType::adjacency},
                                                       {"exchangeability", PenaltyType::exchangeability}};

std::string grid_config(const std::vector<double>& grid) {
  std::string s = "grid=";
  for (double g : grid) s += format_double(g) + " ";
  return s + ";";
}

// ---- ingest ----

struct IngestArgs {
  std::string contacts, households, composition = "type1";
  int age_tolerance = 0;
};

int run_ingest(const IngestArgs& a, const Common& c) {
  const auto composition = parse_composition(a.composition);
  if (!composition) throw InputError("unknown composition '" + a.composition + "' (expected type1..type6)");
  const auto dir = prepare_out_dir(c.out_dir);
  const Survey survey = load_survey(a.contacts, a.households);
  const IngestResult result = build_observations(survey, {*composition, a.age_tolerance});
  if (result.observations.empty()) throw InputError("zero qualifying households");

  const RunMetadata meta{"ingest",
                         "contacts=" + file_digest(a.contacts) + ";households=" + file_digest(a.households) +
                             ";composition=" + composition_label(*composition) +
                             ";age_tolerance=" + std::to_string(a.age_tolerance) + ";",
                         c.seed};
  auto obs = open_output(dir / "observations.csv");
  write_observations(obs, result.observations, meta);
  auto excl = open_output(dir / "exclusions.csv");
  write_report_entries(excl, result.exclusions, meta);
  auto notes = open_output(dir / "ingest_notes.csv");
  write_report_entries(notes, result.notes, meta);

  std::cout << "households: " << survey.household_rows << "\nobservations: " << result.observations.size()
            << "\nexcluded: " << result.exclusions.size() << "\nnotes: " << result.notes.size() << '\n';
  return 0;
}

// ---- cv ----

struct ModelArgs {
  std::string observations;
  PenaltyType penalty = PenaltyType::independence;
  std::string grid;
  std::optional<double> lambda;
  double level = 0.95;
  int bootstrap_b = kDefaultBootstrapResamples;
  bool likelihood_scoring = false;
};

std::vector<double> grid_for(const ModelArgs& a) {
  return parse_grid(a.grid.empty() ? default_grid(a.penalty) : a.grid);
}

struct CvOutcome {
  CvCurve curve;
  double selected = 0.0;
};

CvOutcome cross_validate(const std::vector<PartialObservation>& data, const ModelArgs& a, const Common& c,
                         const std::vector<double>& grid) {
  CvOptions opts;
  opts.optimizer = c.optimizer;
  opts.jobs = c.jobs;
  opts.scoring = a.likelihood_scoring ? CvScoring::likelihood : CvScoring::log_likelihood;
  CvOutcome out{loo_cross_validate(data, grid, a.penalty, opts), 0.0};
  out.selected = select_lambda(out.curve);
  return out;
}

std::string model_config(const ModelArgs& a, const Common& c) {
  return "observations=" + file_digest(a.observations) + ";penalty=" + std::string(penalty_name(a.penalty)) +
         ";scoring=" + (a.likelihood_scoring ? "likelihood" : "log_likelihood") + ";" + optimizer_config(c.optimizer);
}

int run_cv(const ModelArgs& a, const Common& c) {
  const auto dir = prepare_out_dir(c.out_dir);
  const auto data = load_observations(a.observations);
  const auto grid = grid_for(a);
  const auto cv = cross_validate(data, a, c, grid);
  const RunMetadata meta{"cv", model_config(a, c) + grid_config(grid), c.seed};
  auto out = open_output(dir / "cv.csv");
  write_cv_csv(out, cv.curve, meta);
  auto sel = open_output(dir / "cv_selected.txt");
  sel << format_double(cv.selected) << '\n';
  std::cout << "selected lambda: " << format_double(cv.selected) << '\n';
  return 0;
}

// ---- estimate ----

int run_estimate(const ModelArgs& a, const Common& c) {
  if (!(a.level > 0.0 && a.level < 1.0)) throw InputError("--level must lie in (0, 1)");
  const auto dir = prepare_out_dir(c.out_dir);
  const auto data = load_observations(a.observations);
  const auto counts = ConfigurationCounts::from(data);
  std::string config = model_config(a, c) + "level=" + format_double(a.level) +
                       ";bootstrap_B=" + std::to_string(a.bootstrap_b) + ";";

  double lambda = 0.0;
  if (a.lambda) {
    lambda = *a.lambda;
    if (!(lambda >= 0.0)) throw InputError("--lambda must be nonnegative");
    config += "lambda=" + format_double(lambda) + ";";
  } else {
    const auto grid = grid_for(a);
    const auto cv = cross_validate(data, a, c, grid);
    lambda = cv.selected;
    config += grid_config(grid);
    const RunMetadata cv_meta{"estimate", config, c.seed};
    auto out = open_output(dir / "cv.csv");
    write_cv_csv(out, cv.curve, cv_meta);
    std::cout << "selected lambda: " << format_double(lambda) << '\n';
  }
  const RunMetadata meta{"estimate", config, c.seed};

  // Independence fit with conservative product intervals.
  const auto ind_fit = independence_mle(counts);
  const auto ind_p = product_distribution(ind_fit);
  const auto ind_intervals = independence_intervals(ind_fit, a.level);
  std::array<std::optional<Interval>, kNetworks> ind_ci;
  for (int k = 0; k < kNetworks; ++k) ind_ci[k] = ind_intervals.network[k];

  // Unpenalized MLE with bootstrap intervals.
  const auto mle = fit_penalized(counts, 0.0, a.penalty, c.optimizer);
  BootstrapOptions bopts{c.optimizer, c.jobs, c.seed};
  const auto boot = bootstrap(data, a.bootstrap_b, 0.0, a.penalty, bopts);
  std::array<std::optional<Interval>, kNetworks> mle_ci;
  for (int k = 0; k < kNetworks; ++k) mle_ci[k] = normal_interval(mle.p_hat[k], boot.standard_errors[k], a.level);

  // Penalized MLE with Fisher intervals.
  const auto pen = fit_penalized(counts, lambda, a.penalty, c.optimizer);
  std::array<std::optional<Interval>, kNetworks> pen_ci;
  if (pen.converged) {
    const PenalizedObjectiveSpec spec{data, lambda, penalty_for(counts, lambda, a.penalty)};
    const auto unc = fisher_standard_errors(pen, spec);
    if (!unc.invertible)
      std::cerr << "warning: observed information is singular (rank " << unc.info_matrix_rank
                << "); penalized intervals unavailable\n";
    for (int k = 0; k < kNetworks; ++k)
      if (unc.standard_errors[k]) pen_ci[k] = normal_interval(pen.p_hat[k], *unc.standard_errors[k], a.level);
  } else {
    std::cerr << "warning: penalized fit stopped early (" << stop_reason_name(pen.stop)
              << "); penalized intervals unavailable\n";
  }

  const auto report = make_estimate_report(mle.p_hat, mle_ci, pen.p_hat, pen_ci, ind_p, ind_ci, lambda, a.level);
  auto csv = open_output(dir / "estimates.csv");
  write_estimate_csv(csv, report, meta);
  std::ostringstream table;
  write_estimate_table(table, report);
  auto txt = open_output(dir / "estimates.txt");
  txt << table.str();
  std::cout << table.str();
  return 0;
}

// ---- bootstrap ----

int run_bootstrap(const ModelArgs& a, const Common& c) {
  if (!a.lambda) throw InputError("--lambda is required");
  const auto dir = prepare_out_dir(c.out_dir);
  const auto data = load_observations(a.observations);
  const RunMetadata meta{"bootstrap",
                         model_config(a, c) + "lambda=" + format_double(*a.lambda) +
                             ";bootstrap_B=" + std::to_string(a.bootstrap_b) + ";",
                         c.seed};
  const auto boot = bootstrap(data, a.bootstrap_b, *a.lambda, a.penalty, {c.optimizer, c.jobs, c.seed});
  auto out = open_output(dir / "bootstrap.csv");
  write_metadata(out, meta);
  out << "network,mean,standard_error\n";
  for (int k = 0; k < kNetworks; ++k)
    out << k << ',' << format_double(boot.mean[k]) << ',' << format_double(boot.standard_errors[k]) << '\n';
  std::cout << "resamples: " << boot.resamples << "\nfailed: " << boot.failed.size() << '\n';
  return 0;
}

// ---- simulate ----

struct SimulateArgs {
  std::string p_true, p_true_column = "penalized", scenario;
  int n = 30;
  std::vector<int> freq{6, 17, 4, 3};
  int samples = 200;
  PenaltyType penalty = PenaltyType::independence;
  std::string grid;
};

int run_simulate(const SimulateArgs& a, const Common& c) {
  const auto dir = prepare_out_dir(c.out_dir);
  StudyConfig cfg;
  std::string source;
  if (!a.p_true.empty() == !a.scenario.empty()) throw InputError("give exactly one of --p-true and --scenario");
  if (!a.p_true.empty()) {
    std::ifstream in(a.p_true);
    if (!in) throw InputError("cannot read " + a.p_true);
    cfg.p_true = read_probability_csv(in, a.p_true_column);
    source = "p_true=" + file_digest(a.p_true) + ":" + a.p_true_column;
  } else if (a.scenario == "dependent") {
    cfg.p_true = dependent_scenario();
    source = "scenario=dependent";
  } else {
    throw InputError("unknown scenario '" + a.scenario + "' (expected dependent)");
  }
  if (a.freq.size() != kRoles) throw InputError("--freq needs four counts (C1,C2,A1,A2)");
  for (int r = 0; r < kRoles; ++r) cfg.freq.count[r] = a.freq[static_cast<std::size_t>(r)];
  cfg.n = a.n;
  cfg.samples = a.samples;
  cfg.penalty = a.penalty;
  cfg.grid = parse_grid(a.grid.empty() ? default_grid(a.penalty) : a.grid);
  cfg.seed = c.seed;
  cfg.optimizer = c.optimizer;
  cfg.jobs = c.jobs;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  std::string freq;
  for (int f : a.freq) freq += std::to_string(f) + " ";
  const RunMetadata meta{"simulate",
                         source + ";n=" + std::to_string(a.n) + ";freq=" + freq + ";samples=" +
                             std::to_string(a.samples) + ";penalty=" + std::string(penalty_name(a.penalty)) + ";" +
                             grid_config(cfg.grid) + optimizer_config(c.optimizer),
                         c.seed};
  const auto metrics = run_study(cfg);
  auto out = open_output(dir / "study.csv");
  write_study_csv(out, metrics, meta);
  int failures = 0;
  for (const auto& pt : metrics.points) failures += pt.failures;
  std::cout << "grid points: " << metrics.points.size() << "\nfailed fits: " << failures << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Household contact-network estimation from egocentric survey data"};
  app.require_subcommand(1);
  Common common;

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Turn contact diaries and household rosters into observations");
  ingest_cmd->add_option("--contacts", ingest.contacts, "Contacts diary CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--households", ingest.households, "Household roster CSV")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--composition", ingest.composition, "Household composition type1..type6")
      ->capture_default_str();
  ingest_cmd->add_option("--age-tolerance", ingest.age_tolerance, "Years of slack when matching contact ages")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_common(ingest_cmd, common);

  ModelArgs model;
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--observations", model.observations, "Observation file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--penalty", model.penalty, "independence, adjacency or exchangeability")
        ->transform(CLI::CheckedTransformer(kPenaltyNames, CLI::ignore_case));
    cmd->add_option("--grid", model.grid, "Lambda grid: start:stop:step, a comma list, or one value");
    cmd->add_flag("--likelihood-scoring", model.likelihood_scoring,
                  "Score held-out observations by likelihood instead of log-likelihood");
    add_common(cmd, common);
  };
  auto* estimate_cmd = app.add_subcommand("estimate", "Fit the MLE, penalized MLE and independence model");
  add_model(estimate_cmd);
  estimate_cmd->add_option("--lambda", model.lambda, "Penalty weight; cross-validated over --grid when omitted");
  estimate_cmd->add_option("--level", model.level, "Confidence level")->capture_default_str();
  estimate_cmd->add_option("--bootstrap-B", model.bootstrap_b, "Bootstrap resamples for MLE intervals")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* cv_cmd = app.add_subcommand("cv", "Leave-one-out cross-validation over a lambda grid");
  add_model(cv_cmd);

  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap standard errors at a fixed lambda");
  add_model(boot_cmd);
  boot_cmd->add_option("--lambda", model.lambda, "Penalty weight")->required();
  boot_cmd->add_option("--bootstrap-B", model.bootstrap_b, "Bootstrap resamples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo bias/variance study over a lambda grid");
  sim_cmd->add_option("--p-true", sim.p_true, "CSV with a network column and a probability column")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--p-true-column", sim.p_true_column, "Probability column in --p-true")
      ->capture_default_str();
  sim_cmd->add_option("--scenario", sim.scenario, "Built-in truth instead of --p-true: dependent");
  sim_cmd->add_option("--n", sim.n, "Households per sample")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--freq", sim.freq, "Respondents per role C1 C2 A1 A2 (sum to n)")
      ->delimiter(',')
      ->expected(4);
  sim_cmd->add_option("--samples", sim.samples, "Simulated samples")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--penalty", sim.penalty, "independence, adjacency or exchangeability")
      ->transform(CLI::CheckedTransformer(kPenaltyNames, CLI::ignore_case));
  sim_cmd->add_option("--grid", sim.grid, "Lambda grid: start:stop:step or a comma list");
  add_common(sim_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest, common);
    if (*estimate_cmd) return run_estimate(model, common);
    if (*cv_cmd) return run_cv(model, common);
    if (*boot_cmd) return run_bootstrap(model, common);
    if (*sim_cmd) return run_simulate(sim, common);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
