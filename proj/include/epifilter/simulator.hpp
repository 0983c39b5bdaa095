#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "epifilter/data_io.hpp"
#include "epifilter/kdpf.hpp"
#include "epifilter/observation.hpp"
#include "epifilter/state.hpp"

namespace epifilter {

// A synthetic outbreak: the ground truth behind a generated report file.
struct SyntheticRun {
  ParamVector true_params;
  std::vector<CompartmentState> latent;  // one state per day, 0..horizon
  ReportDataset reports;
  std::uint64_t seed = 0;
  std::uint64_t population = 0;
};

struct SimulateOptions {
  std::chrono::year_month_day epoch{std::chrono::year{2014}, std::chrono::month{3},
                                    std::chrono::day{23}};
  std::uint64_t population = 1000000;
  // Scales both process and observation noise; 0 gives the deterministic
  // trajectory and exactly the rounded link means.
  double noise_scale = 1.0;
  int rejection_cap = 1000;
};

// Draws a latent trajectory from the process model and noisy cumulative
// reports from the observation law at the requested report days.  Counts are
// floored at half a person, rounded, forced cumulative-monotone by a running
// maximum, and deaths are capped at cases so the output is a valid dataset.
SyntheticRun simulate(const ParamVector& true_params, const CompartmentState& x0,
                      int horizon_days, const std::vector<long>& report_days,
                      const ObservationLink& link, std::uint64_t seed,
                      const SimulateOptions& options = {});

// Irregular report calendar: day 0, then seeded gaps uniform on {1,...,max_gap},
// truncated at the horizon (which is always included).
std::vector<long> irregular_report_days(int horizon_days, std::uint64_t seed, int max_gap = 7);

// How well a filter run recovered the synthetic truth.
struct RecoveryReport {
  // Relative error of the final-day posterior means, in parameter order
  // (alpha, beta, lambda, gamma, phi_f).
  std::array<double, 5> param_rel_error{};
  // Truth inside the final-day [lo, hi] credible interval, per parameter.
  std::array<bool, 5> param_covered{};
  // RMSE of the posterior-mean R0 against the true c*beta/gamma trajectory,
  // over the report days.
  double r0_rmse = 0.0;
};

RecoveryReport recovery_report(const SyntheticRun& run, const FilterResult& filter_output,
                               double interval_lo = 0.05, double interval_hi = 0.95);

}  // namespace epifilter
