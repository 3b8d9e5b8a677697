#include "hhnet/report.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "hhnet/errors.hpp"

namespace hhnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool skip_line(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  // Avoid printing "-0.00".
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

std::string optional_double(const std::optional<double>& x) { return x ? format_double(*x) : "NA"; }

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_metadata(std::ostream& out, const RunMetadata& meta) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(meta.config)));
  out << "# tool: hhnet " << kToolVersion << '\n'
      << "# command: " << meta.command << '\n'
      << "# config_hash: " << hash << '\n'
      << "# seed: " << meta.seed << '\n';
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_observations(std::ostream& out, std::span<const PartialObservation> data,
                        const RunMetadata& meta) {
  write_metadata(out, meta);
  out << "respondent_role,reports\n";
  for (const auto& obs : data) {
    out << role_name(obs.respondent()) << ',';
    const auto dyads = incident_dyads(obs.respondent());
    for (std::size_t j = 0; j < dyads.size(); ++j) {
      if (j > 0) out << ';';
      out << to_int(dyads[j]) << ':' << (*obs.report(dyads[j]) ? 1 : 0);
    }
    out << '\n';
  }
}

std::vector<PartialObservation> read_observations(std::istream& in) {
  std::vector<PartialObservation> data;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto where = "observation file line " + std::to_string(line_no) + ": ";
    const auto cells = split(line, ',');
    if (!header) {
      if (cells.size() != 2 || cells[0] != "respondent_role" || cells[1] != "reports")
        throw InputError(where + "expected header 'respondent_role,reports'");
      header = true;
      continue;
    }
    if (cells.size() != 2) throw InputError(where + "expected two fields");
    const auto role = parse_role(cells[0]);
    if (!role) throw InputError(where + "unknown role '" + std::string(cells[0]) + "'");
    std::vector<PartialObservation::Report> reports;
    for (auto item : split(cells[1], ';')) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw InputError(where + "report must be dyad:value");
      const auto d = trim(item.substr(0, colon));
      const auto v = trim(item.substr(colon + 1));
      if (d.size() != 1 || d[0] < '0' || d[0] >= '0' + kDyads)
        throw InputError(where + "dyad id must be 0-5");
      if (v != "0" && v != "1") throw InputError(where + "report value must be 0 or 1");
      reports.push_back({kAllDyads[static_cast<std::size_t>(d[0] - '0')], v == "1"});
    }
    try {
      data.emplace_back(*role, reports);
    } catch (const std::invalid_argument& e) {
      throw InputError(where + e.what());
    }
  }
  if (!header) throw InputError("observation file has no header");
  return data;
}

std::vector<PartialObservation> load_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read observation file " + path.string());
  return read_observations(in);
}

void write_report_entries(std::ostream& out, const std::vector<ReportEntry>& entries,
                          const RunMetadata& meta) {
  write_metadata(out, meta);
  out << "respondent_id,reason,detail\n";
  for (const auto& e : entries)
    out << csv_field(e.respondent_id) << ',' << csv_field(e.reason) << ',' << csv_field(e.detail) << '\n';
}

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::mle: return "mle";
    case Estimator::penalized: return "penalized";
    case Estimator::independence: return "independence";
  }
  return "?";
}

bool EstimateReport::displayed(const EstimateRow& row) const {
  return std::any_of(row.estimate.begin(), row.estimate.end(),
                     [&](double x) { return !(x < display_threshold); });
}

int pattern_order(int network) {
  int key = 0;
  for (int j = 0; j < kDyads; ++j) key = (key << 1) | ((network >> j) & 1);
  return key;
}

Interval normal_interval(double p, double se, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (!(se >= 0.0)) throw std::invalid_argument("standard error must be nonnegative");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  return {std::clamp(p - z * se, 0.0, 1.0), std::clamp(p + z * se, 0.0, 1.0)};
}

EstimateReport make_estimate_report(const ProbabilityVector& mle,
                                    const std::array<std::optional<Interval>, kNetworks>& mle_ci,
                                    const ProbabilityVector& penalized,
                                    const std::array<std::optional<Interval>, kNetworks>& penalized_ci,
                                    const ProbabilityVector& independence,
                                    const std::array<std::optional<Interval>, kNetworks>& independence_ci,
                                    double lambda, double level) {
  EstimateReport report;
  report.lambda = lambda;
  report.level = level;
  std::array<int, kNetworks> order;
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [](int a, int b) { return pattern_order(a) < pattern_order(b); });
  for (int k : order) {
    EstimateRow row;
    row.network = k;
    row.estimate = {mle[k], penalized[k], independence[k]};
    row.ci = {mle_ci[k], penalized_ci[k], independence_ci[k]};
    report.rows.push_back(row);
  }
  return report;
}

void write_estimate_table(std::ostream& out, const EstimateReport& report) {
  auto interval = [](const std::optional<Interval>& ci) {
    return ci ? "[" + fixed2(ci->low) + ", " + fixed2(ci->high) + "]" : std::string("NA");
  };
  char buf[256];
  std::snprintf(buf, sizeof buf, "Penalized lambda = %s; %g%% intervals; rows with every estimate < %g omitted\n",
                format_double(report.lambda).c_str(), report.level * 100.0, report.display_threshold);
  out << buf;
  for (Dyad d : kAllDyads) {
    std::snprintf(buf, sizeof buf, "%-6s", std::string(dyad_label(d)).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%8s %8s %8s  %-14s %-14s %-14s\n", "MLE", "pen.MLE", "indep.", "MLE CI",
                "pen.MLE CI", "indep. CI");
  out << buf;
  for (const auto& row : report.rows) {
    if (!report.displayed(row)) continue;
    for (int j = 0; j < kDyads; ++j) {
      std::snprintf(buf, sizeof buf, "%-6d", (row.network >> j) & 1);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%8s %8s %8s  %-14s %-14s %-14s\n", fixed2(row.estimate[0]).c_str(),
                  fixed2(row.estimate[1]).c_str(), fixed2(row.estimate[2]).c_str(), interval(row.ci[0]).c_str(),
                  interval(row.ci[1]).c_str(), interval(row.ci[2]).c_str());
    out << buf;
  }
}

void write_estimate_csv(std::ostream& out, const EstimateReport& report, const RunMetadata& meta) {
  write_metadata(out, meta);
  out << "network";
  for (Dyad d : kAllDyads) out << ',' << dyad_label(d);
  for (int e = 0; e < kEstimators; ++e) {
    const auto name = estimator_name(static_cast<Estimator>(e));
    out << ',' << name << ',' << name << "_low," << name << "_high";
  }
  out << '\n';
  for (const auto& row : report.rows) {
    out << row.network;
    for (int j = 0; j < kDyads; ++j) out << ',' << ((row.network >> j) & 1);
    for (int e = 0; e < kEstimators; ++e) {
      const auto& ci = row.ci[static_cast<std::size_t>(e)];
      out << ',' << format_double(row.estimate[static_cast<std::size_t>(e)]) << ','
          << optional_double(ci ? std::optional(ci->low) : std::nullopt) << ','
          << optional_double(ci ? std::optional(ci->high) : std::nullopt);
    }
    out << '\n';
  }
}

void write_cv_csv(std::ostream& out, const CvCurve& curve, const RunMetadata& meta) {
  write_metadata(out, meta);
  out << "lambda,mean_heldout,failed_folds\n";
  for (std::size_t g = 0; g < curve.grid.size(); ++g)
    out << format_double(curve.grid[g]) << ',' << format_double(curve.mean_heldout[g]) << ','
        << curve.failed_folds[g] << '\n';
}

void write_study_csv(std::ostream& out, const StudyMetrics& metrics, const RunMetadata& meta) {
  for (const auto& pt : metrics.points)
    if (std::abs(pt.mse - (pt.mean_sq_bias + pt.variance)) > 1e-10)
      throw NumericalError("mse does not equal squared bias plus variance at lambda " +
                           format_double(pt.lambda));
  write_metadata(out, meta);
  out << "lambda,mse,mean_sq_bias,signed_bias,variance";
  for (int k = 0; k < kNetworks; ++k) out << ",p_mean_" << k;
  out << '\n';
  for (const auto& pt : metrics.points) {
    out << format_double(pt.lambda) << ',' << format_double(pt.mse) << ',' << format_double(pt.mean_sq_bias)
        << ',' << format_double(pt.signed_bias) << ',' << format_double(pt.variance);
    for (int k = 0; k < kNetworks; ++k) out << ',' << format_double(pt.mean_estimate[k]);
    out << '\n';
  }
}

ProbabilityVector read_probability_csv(std::istream& in, std::string_view column) {
  std::string line;
  std::vector<std::string_view> header;
  std::string header_text;
  while (std::getline(in, line))
    if (!skip_line(line)) {
      header_text = line;
      header = split(header_text, ',');
      break;
    }
  const auto find = [&](std::string_view name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError("probability file has no '" + std::string(name) + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t net_col = find("network");
  const std::size_t val_col = find(column);

  std::array<bool, kNetworks> seen{};
  ProbabilityVector p;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto cells = split(line, ',');
    const auto where = "probability file line " + std::to_string(line_no) + ": ";
    if (cells.size() <= std::max(net_col, val_col)) throw InputError(where + "too few fields");
    int k = -1;
    const auto net = cells[net_col];
    if (std::from_chars(net.data(), net.data() + net.size(), k).ptr != net.data() + net.size() || k < 0 ||
        k >= kNetworks)
      throw InputError(where + "network must be an integer 0-63");
    if (seen[k]) throw InputError(where + "network " + std::to_string(k) + " listed twice");
    double v = 0.0;
    const auto val = cells[val_col];
    if (std::from_chars(val.data(), val.data() + val.size(), v).ptr != val.data() + val.size() ||
        !std::isfinite(v) || v < 0.0)
      throw InputError(where + "probability must be a nonnegative number");
    seen[k] = true;
    p.p[k] = v;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    throw InputError("probability file must list all 64 networks");
  const double total = p.sum();
  if (std::abs(total - 1.0) > 1e-6)
    throw InputError("probabilities in column '" + std::string(column) + "' sum to " + format_double(total));
  for (double& x : p.p) x /= total;
  return p;
}

}  // namespace hhnet
