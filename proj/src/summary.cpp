#include "epifilter/summary.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "epifilter/errors.hpp"
#include "epifilter/model.hpp"

namespace epifilter {

const char* const kSummaryQuantityNames[kSummaryQuantityCount] = {
    "c", "e", "i", "r", "d", "alpha", "beta", "lambda", "gamma", "phi_f", "r0"};

namespace {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ValidationError("summary: malformed number '" + cell + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= line.size(); ++k) {
    if (k == line.size() || line[k] == ',') {
      cells.push_back(line.substr(start, k - start));
      start = k + 1;
    }
  }
  return cells;
}

}  // namespace

double weighted_mean(const std::vector<double>& values, const std::vector<double>& weights) {
  double mean = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) mean += weights[k] * values[k];
  return mean;
}

double weighted_quantile(const std::vector<double>& values, const std::vector<double>& weights,
                         double prob) {
  if (values.empty()) throw ValidationError("weighted_quantile: empty input");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double acc = 0.0;
  for (const std::size_t idx : order) {
    acc += weights[idx];
    if (acc >= prob) return values[idx];
  }
  return values[order.back()];  // rounding left the total just below prob
}

SummaryRow summarize_ensemble(const ParticleEnsemble& ensemble, bool observed,
                              const std::vector<double>& quantile_probs,
                              std::uint64_t population) {
  if (ensemble.particles.empty()) throw ValidationError("summarize: empty ensemble");
  const std::size_t n = ensemble.particles.size();
  const double scale = static_cast<double>(population);

  std::vector<double> weights(n);
  for (std::size_t k = 0; k < n; ++k) weights[k] = ensemble.particles[k].weight;

  SummaryRow row;
  row.day_index = ensemble.day_index;
  row.observed = observed;
  row.stats.resize(kSummaryQuantityCount);

  std::vector<double> values(n);
  for (int q = 0; q < kSummaryQuantityCount; ++q) {
    for (std::size_t k = 0; k < n; ++k) {
      const Particle& p = ensemble.particles[k];
      switch (q) {
        case 0: values[k] = p.state.c; break;
        case 1: values[k] = scale * p.state.e; break;
        case 2: values[k] = scale * p.state.i; break;
        case 3: values[k] = scale * p.state.r; break;
        case 4: values[k] = scale * p.state.d; break;
        case 5: values[k] = p.params.alpha; break;
        case 6: values[k] = p.params.beta; break;
        case 7: values[k] = p.params.lambda; break;
        case 8: values[k] = p.params.gamma; break;
        case 9: values[k] = p.params.phi_f; break;
        default: values[k] = r0(p.state, p.params); break;
      }
    }
    QuantityStats& stats = row.stats[static_cast<std::size_t>(q)];
    stats.mean = weighted_mean(values, weights);
    stats.median = weighted_quantile(values, weights, 0.5);
    stats.quantiles.reserve(quantile_probs.size());
    for (const double prob : quantile_probs) {
      stats.quantiles.push_back(weighted_quantile(values, weights, prob));
    }
  }
  return row;
}

TrajectorySummary summarize(const std::vector<ParticleEnsemble>& ensembles,
                            const std::vector<double>& quantile_probs,
                            std::uint64_t population) {
  if (ensembles.empty()) throw ValidationError("summarize: no ensembles");
  TrajectorySummary summary;
  summary.quantile_probs = quantile_probs;
  summary.rows.reserve(ensembles.size());
  for (const auto& ensemble : ensembles) {
    summary.rows.push_back(summarize_ensemble(ensemble, true, quantile_probs, population));
  }
  return summary;
}

SummaryAccumulator::SummaryAccumulator(std::vector<double> quantile_probs,
                                       std::uint64_t population)
    : population_(population) {
  summary_.quantile_probs = std::move(quantile_probs);
}

void SummaryAccumulator::add_day(long day_index, bool observed, const ParticleEnsemble& ensemble) {
  SummaryRow row = summarize_ensemble(ensemble, observed, summary_.quantile_probs, population_);
  row.day_index = day_index;
  summary_.rows.push_back(std::move(row));
}

TrajectorySummary SummaryAccumulator::take() { return std::move(summary_); }

std::string summary_to_csv(const TrajectorySummary& summary) {
  std::ostringstream out;
  out << "day,observed";
  for (const char* name : kSummaryQuantityNames) {
    out << ',' << name << "_mean," << name << "_median";
    for (const double prob : summary.quantile_probs) {
      out << ',' << name << "_q" << format_double(prob);
    }
  }
  out << '\n';
  for (const auto& row : summary.rows) {
    out << row.day_index << ',' << (row.observed ? "true" : "false");
    for (const auto& stats : row.stats) {
      out << ',' << format_double(stats.mean) << ',' << format_double(stats.median);
      for (const double q : stats.quantiles) out << ',' << format_double(q);
    }
    out << '\n';
  }
  return out.str();
}

TrajectorySummary summary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("summary csv: empty input");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "day" || header[1] != "observed") {
    throw ValidationError("summary csv: unexpected header");
  }

  TrajectorySummary summary;
  summary.quantile_probs.clear();
  const std::string q_prefix = std::string(kSummaryQuantityNames[0]) + "_q";
  for (std::size_t k = 2; k < header.size(); ++k) {
    if (header[k].rfind(q_prefix, 0) == 0) {
      summary.quantile_probs.push_back(parse_double(header[k].substr(q_prefix.size())));
    }
  }
  const std::size_t per_quantity = 2 + summary.quantile_probs.size();
  if (header.size() != 2 + per_quantity * kSummaryQuantityCount) {
    throw ValidationError("summary csv: column count does not match the documented layout");
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) throw ValidationError("summary csv: ragged row");
    SummaryRow row;
    row.day_index = static_cast<long>(parse_double(cells[0]));
    row.observed = cells[1] == "true";
    row.stats.resize(kSummaryQuantityCount);
    std::size_t col = 2;
    for (auto& stats : row.stats) {
      stats.mean = parse_double(cells[col++]);
      stats.median = parse_double(cells[col++]);
      stats.quantiles.resize(summary.quantile_probs.size());
      for (double& q : stats.quantiles) q = parse_double(cells[col++]);
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::string summary_to_json(const TrajectorySummary& summary) {
  nlohmann::json root;
  root["quantiles"] = summary.quantile_probs;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : summary.rows) {
    nlohmann::json jrow;
    jrow["day"] = row.day_index;
    jrow["observed"] = row.observed;
    for (int q = 0; q < kSummaryQuantityCount; ++q) {
      nlohmann::json stats;
      stats["mean"] = row.stats[static_cast<std::size_t>(q)].mean;
      stats["median"] = row.stats[static_cast<std::size_t>(q)].median;
      stats["q"] = row.stats[static_cast<std::size_t>(q)].quantiles;
      jrow[kSummaryQuantityNames[q]] = std::move(stats);
    }
    rows.push_back(std::move(jrow));
  }
  root["rows"] = std::move(rows);
  return root.dump(2) + "\n";
}

TrajectorySummary summary_from_json(const std::string& text) {
  const nlohmann::json root = nlohmann::json::parse(text);
  TrajectorySummary summary;
  summary.quantile_probs = root.at("quantiles").get<std::vector<double>>();
  for (const auto& jrow : root.at("rows")) {
    SummaryRow row;
    row.day_index = jrow.at("day").get<long>();
    row.observed = jrow.at("observed").get<bool>();
    row.stats.resize(kSummaryQuantityCount);
    for (int q = 0; q < kSummaryQuantityCount; ++q) {
      const auto& stats = jrow.at(kSummaryQuantityNames[q]);
      row.stats[static_cast<std::size_t>(q)].mean = stats.at("mean").get<double>();
      row.stats[static_cast<std::size_t>(q)].median = stats.at("median").get<double>();
      row.stats[static_cast<std::size_t>(q)].quantiles =
          stats.at("q").get<std::vector<double>>();
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::string summary_slice_to_csv(const TrajectorySummary& summary,
                                 const std::vector<int>& quantity_indices) {
  std::ostringstream out;
  out << "day,observed";
  for (const int q : quantity_indices) {
    const char* name = kSummaryQuantityNames[q];
    out << ',' << name << "_mean," << name << "_median";
    for (const double prob : summary.quantile_probs) {
      out << ',' << name << "_q" << format_double(prob);
    }
  }
  out << '\n';
  for (const auto& row : summary.rows) {
    out << row.day_index << ',' << (row.observed ? "true" : "false");
    for (const int q : quantity_indices) {
      const auto& stats = row.stats[static_cast<std::size_t>(q)];
      out << ',' << format_double(stats.mean) << ',' << format_double(stats.median);
      for (const double value : stats.quantiles) out << ',' << format_double(value);
    }
    out << '\n';
  }
  return out.str();
}

void save_snapshots_csv(const std::vector<ParticleEnsemble>& snapshots, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << "day,generation,particle,weight,c,e,i,r,d,alpha,beta,lambda,gamma,phi_f\n";
  for (const auto& ensemble : snapshots) {
    for (std::size_t k = 0; k < ensemble.particles.size(); ++k) {
      const Particle& p = ensemble.particles[k];
      out << ensemble.day_index << ',' << ensemble.generation << ',' << k << ','
          << format_double(p.weight) << ',' << format_double(p.state.c) << ','
          << format_double(p.state.e) << ',' << format_double(p.state.i) << ','
          << format_double(p.state.r) << ',' << format_double(p.state.d) << ','
          << format_double(p.params.alpha) << ',' << format_double(p.params.beta) << ','
          << format_double(p.params.lambda) << ',' << format_double(p.params.gamma) << ','
          << format_double(p.params.phi_f) << '\n';
    }
  }
  if (!out.good()) throw ValidationError("failed writing '" + path + "'");
}

std::vector<ParticleEnsemble> load_snapshots_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) ||
      line != "day,generation,particle,weight,c,e,i,r,d,alpha,beta,lambda,gamma,phi_f") {
    throw ValidationError(path + ": unexpected snapshots header");
  }
  std::vector<ParticleEnsemble> snapshots;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 14) throw ValidationError(path + ": ragged snapshot row");
    const long day = static_cast<long>(parse_double(cells[0]));
    if (snapshots.empty() || snapshots.back().day_index != day) {
      snapshots.emplace_back();
      snapshots.back().day_index = day;
      snapshots.back().generation = static_cast<long>(parse_double(cells[1]));
    }
    Particle p;
    p.weight = parse_double(cells[3]);
    p.state = {parse_double(cells[4]), parse_double(cells[5]), parse_double(cells[6]),
               parse_double(cells[7]), parse_double(cells[8])};
    p.params = {parse_double(cells[9]), parse_double(cells[10]), parse_double(cells[11]),
                parse_double(cells[12]), parse_double(cells[13])};
    snapshots.back().particles.push_back(p);
  }
  if (snapshots.empty()) throw ValidationError(path + ": no snapshot rows");
  return snapshots;
}

void export_summary(const TrajectorySummary& summary, SummaryFormat format,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << (format == SummaryFormat::csv ? summary_to_csv(summary) : summary_to_json(summary));
  if (!out.good()) throw ValidationError("failed writing '" + path + "'");
}

TrajectorySummary import_summary(SummaryFormat format, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return format == SummaryFormat::csv ? summary_from_csv(buf.str())
                                      : summary_from_json(buf.str());
}

}  // namespace epifilter
