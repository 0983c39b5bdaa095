#include "epifilter/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "epifilter/errors.hpp"
#include "epifilter/model.hpp"
#include "epifilter/rng.hpp"
#include "epifilter/summary.hpp"

namespace epifilter {

namespace {

long long noisy_count(double log_mean, double sigma, double noise_scale, RngStream& rng) {
  const double draw = std::exp(log_mean + noise_scale * sigma * rng.normal());
  return std::llround(std::fmax(draw, 0.5));
}

}  // namespace

std::vector<long> irregular_report_days(int horizon_days, std::uint64_t seed, int max_gap) {
  if (horizon_days < 0) throw ValidationError("irregular_report_days: negative horizon");
  if (max_gap < 1) throw ValidationError("irregular_report_days: max_gap must be >= 1");
  RngStream rng(seed, substream(0, DrawPurpose::scenario, 0xFFFFFFFFu));
  std::vector<long> days{0};
  long day = 0;
  while (day < horizon_days) {
    day += 1 + static_cast<long>(rng.uniform() * max_gap);
    days.push_back(std::min(day, static_cast<long>(horizon_days)));
  }
  if (days.size() < 2 && horizon_days > 0) days.push_back(horizon_days);
  return days;
}

SyntheticRun simulate(const ParamVector& true_params, const CompartmentState& x0,
                      int horizon_days, const std::vector<long>& report_days,
                      const ObservationLink& link, std::uint64_t seed,
                      const SimulateOptions& options) {
  if (horizon_days < 0) throw ValidationError("simulate: negative horizon");
  if (!StateRegion::contains(x0)) throw ValidationError("simulate: x0 outside the state region");
  for (std::size_t k = 0; k < report_days.size(); ++k) {
    if (report_days[k] < 0 || report_days[k] > horizon_days) {
      throw ValidationError("simulate: report day outside [0, horizon]");
    }
    if (k > 0 && report_days[k] <= report_days[k - 1]) {
      throw ValidationError("simulate: report days must be strictly increasing");
    }
  }

  SyntheticRun run;
  run.true_params = true_params;
  run.seed = seed;
  run.population = options.population;
  run.latent.reserve(static_cast<std::size_t>(horizon_days) + 1);
  run.latent.push_back(x0);

  // The population enters the process noise as 1/P; emulate a noise scale by
  // inflating the population used for sampling.
  for (int day = 1; day <= horizon_days; ++day) {
    RngStream rng(seed, substream(static_cast<std::uint32_t>(day), DrawPurpose::scenario, 0));
    CompartmentState next;
    if (options.noise_scale <= 0.0) {
      next = StateRegion::project(deterministic_step(run.latent.back(), true_params));
    } else {
      const double inflated =
          static_cast<double>(options.population) / options.noise_scale;
      next = sample_next_state(run.latent.back(), true_params,
                               static_cast<std::uint64_t>(std::llround(inflated)), rng,
                               options.rejection_cap);
    }
    run.latent.push_back(next);
  }

  run.reports.epoch = options.epoch;
  long long floor_cases = 0;
  long long floor_deaths = 0;
  for (const long day : report_days) {
    const Eigen::Vector2d mu = predicted_log_mean(run.latent[static_cast<std::size_t>(day)], link);
    RngStream rng(seed, substream(static_cast<std::uint32_t>(day), DrawPurpose::obs_noise, 0));
    long long cases = noisy_count(mu[0], link.sigma_i, options.noise_scale, rng);
    long long deaths = noisy_count(mu[1], link.sigma_d, options.noise_scale, rng);
    // Real cumulative reports never decrease and never show deaths > cases;
    // force both so the output round-trips through the ingest validator.
    cases = std::max(cases, floor_cases);
    deaths = std::min(std::max(deaths, floor_deaths), cases);
    floor_cases = cases;
    floor_deaths = deaths;

    Observation obs;
    obs.day_index = day;
    obs.date = std::chrono::year_month_day(std::chrono::sys_days(options.epoch) +
                                           std::chrono::days(day));
    obs.cum_cases = cases;
    obs.cum_deaths = deaths;
    run.reports.records.push_back(obs);
  }
  run.reports.horizon = run.reports.records.empty() ? 0 : run.reports.records.back().day_index;
  return run;
}

RecoveryReport recovery_report(const SyntheticRun& run, const FilterResult& filter_output,
                               double interval_lo, double interval_hi) {
  if (filter_output.snapshots.empty()) {
    throw ValidationError("recovery_report: empty filter output");
  }
  for (std::size_t k = 0; k < filter_output.snapshots.size(); ++k) {
    if (k >= run.reports.records.size() ||
        filter_output.snapshots[k].day_index != run.reports.records[k].day_index) {
      throw ValidationError("recovery_report: filter snapshots do not match the report calendar");
    }
  }

  RecoveryReport report;
  const ParticleEnsemble& final_ens = filter_output.snapshots.back();
  const Vector5 truth = run.true_params.to_vector();

  for (int k = 0; k < 5; ++k) {
    std::vector<double> values(final_ens.particles.size());
    std::vector<double> weights(final_ens.particles.size());
    for (std::size_t i = 0; i < final_ens.particles.size(); ++i) {
      values[i] = final_ens.particles[i].params.to_vector()[k];
      weights[i] = final_ens.particles[i].weight;
    }
    const double mean = weighted_mean(values, weights);
    report.param_rel_error[static_cast<std::size_t>(k)] =
        std::abs(mean - truth[k]) / std::abs(truth[k]);
    const double lo = weighted_quantile(values, weights, interval_lo);
    const double hi = weighted_quantile(values, weights, interval_hi);
    report.param_covered[static_cast<std::size_t>(k)] = truth[k] >= lo && truth[k] <= hi;
  }

  double sq_sum = 0.0;
  for (const auto& snapshot : filter_output.snapshots) {
    const CompartmentState& latent = run.latent[static_cast<std::size_t>(snapshot.day_index)];
    const double true_r0 = r0(latent, run.true_params);
    double mean_r0 = 0.0;
    for (const auto& p : snapshot.particles) mean_r0 += p.weight * r0(p.state, p.params);
    sq_sum += (mean_r0 - true_r0) * (mean_r0 - true_r0);
  }
  report.r0_rmse = std::sqrt(sq_sum / static_cast<double>(filter_output.snapshots.size()));
  return report;
}

}  // namespace epifilter
