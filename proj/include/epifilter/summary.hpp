#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epifilter/kdpf.hpp"

namespace epifilter {

// Weighted mean of values (weights normalized).
double weighted_mean(const std::vector<double>& values, const std::vector<double>& weights);

// Lower weighted quantile: the smallest value whose cumulative weight reaches
// prob.  Matches an exhaustive sort-and-scan oracle.
double weighted_quantile(const std::vector<double>& values, const std::vector<double>& weights,
                         double prob);

// Names and column order of the summarized quantities.  States other than c
// are carried as person counts (fractions scaled by the population).
inline constexpr int kSummaryQuantityCount = 11;
extern const char* const kSummaryQuantityNames[kSummaryQuantityCount];

struct QuantityStats {
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> quantiles;  // one per requested prob

  bool operator==(const QuantityStats&) const = default;
};

struct SummaryRow {
  long day_index = 0;
  bool observed = false;
  // Order: c, E, I, R, D, alpha, beta, lambda, gamma, phi_f, r0.
  std::vector<QuantityStats> stats;

  bool operator==(const SummaryRow&) const = default;
};

// Per-day posterior summaries.  R0 is summarized from per-particle
// c*beta/gamma draws, never assembled from summary means.
struct TrajectorySummary {
  std::vector<double> quantile_probs{0.05, 0.95};
  std::vector<SummaryRow> rows;

  bool operator==(const TrajectorySummary&) const = default;
};

// Summarizes one ensemble into a row.
SummaryRow summarize_ensemble(const ParticleEnsemble& ensemble, bool observed,
                              const std::vector<double>& quantile_probs,
                              std::uint64_t population);

// Summarizes a sequence of per-day snapshots (all treated as observed).
TrajectorySummary summarize(const std::vector<ParticleEnsemble>& ensembles,
                            const std::vector<double>& quantile_probs,
                            std::uint64_t population);

// Streaming builder fed from the filter's day callback.
class SummaryAccumulator {
 public:
  SummaryAccumulator(std::vector<double> quantile_probs, std::uint64_t population);

  void add_day(long day_index, bool observed, const ParticleEnsemble& ensemble);
  TrajectorySummary take();

 private:
  TrajectorySummary summary_;
  std::uint64_t population_;
};

enum class SummaryFormat { csv, json };

// Deterministic export: fixed column order, shortest round-trip number
// formatting; re-import reproduces the summary exactly.
void export_summary(const TrajectorySummary& summary, SummaryFormat format,
                    const std::string& path);
TrajectorySummary import_summary(SummaryFormat format, const std::string& path);

std::string summary_to_csv(const TrajectorySummary& summary);
TrajectorySummary summary_from_csv(const std::string& text);
std::string summary_to_json(const TrajectorySummary& summary);
TrajectorySummary summary_from_json(const std::string& text);

// A column slice of the full summary (used for the per-topic trajectory
// files the CLI writes).  Indices refer to kSummaryQuantityNames.
std::string summary_slice_to_csv(const TrajectorySummary& summary,
                                 const std::vector<int>& quantity_indices);

// Report-day particle snapshots, exchanged as CSV with round-trip-exact
// number formatting so re-summarizing a saved run reproduces it bit for bit.
void save_snapshots_csv(const std::vector<ParticleEnsemble>& snapshots, const std::string& path);
std::vector<ParticleEnsemble> load_snapshots_csv(const std::string& path);

}  // namespace epifilter
