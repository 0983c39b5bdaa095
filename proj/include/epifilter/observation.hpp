#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <vector>

#include "epifilter/state.hpp"

namespace epifilter {

// How the power-law link pairs with the log-scale observation noise.
//
// log_log (default): mean of log(count) = log(b) + zeta * log(latent count),
// with latent count = population * fraction.  This is the standard reading of
// a regression-calibrated power law and the only scale-coherent one.
//
// literal: the link mean is b * fraction^zeta verbatim, kept for fidelity
// experiments; it mixes count and fraction scales and is not recommended.
enum class LinkMode { log_log, literal };

// Constants of the observation channel: multiplicative constants b, power-law
// exponents zeta, and log-scale standard deviations sigma for the cases (I+R)
// and deaths (D) channels.
struct ObservationLink {
  double b_i = 0.88;
  double b_d = 0.54;
  double zeta_i = 0.88;
  double zeta_d = 0.68;
  double sigma_i = 1.25;
  double sigma_d = 0.85;
  std::uint64_t population = 1000000;
  LinkMode mode = LinkMode::log_log;

  bool valid() const {
    return b_i > 0.0 && b_d > 0.0 && zeta_i > 0.0 && zeta_d > 0.0 && sigma_i > 0.0 &&
           sigma_d > 0.0 && population >= 1;
  }

  bool operator==(const ObservationLink&) const = default;
};

// One WHO-style report: cumulative cases and deaths on a calendar date.
struct Observation {
  std::chrono::year_month_day date{};
  long day_index = 0;
  long long cum_cases = 0;
  long long cum_deaths = 0;
};

// A point of the latent trajectory expressed as person counts, used to
// calibrate the link by regression.
struct LatentPoint {
  long day_index = 0;
  double latent_cases = 0.0;   // population * (I + R)
  double latent_deaths = 0.0;  // population * D
};

// Mean of the log-observations [cases, deaths] for a state.  In log_log mode
// latent counts are floored at 0.5 persons so early-outbreak states keep the
// likelihood finite.
Eigen::Vector2d predicted_log_mean(const CompartmentState& x, const ObservationLink& link);

// Log-density of one report under the two independent log-normal channels.
// Counts entering a log must be >= 1; otherwise a domain error is thrown.
double log_likelihood(const CompartmentState& x, const ObservationLink& link,
                      const Observation& obs);

// The channel-density core: the same likelihood evaluated at a precomputed
// link mean.
double log_likelihood_at_mean(const Eigen::Vector2d& log_mean, const ObservationLink& link,
                              const Observation& obs);

// Ordinary least squares of log(count) on log(latent count) per channel.
// Returns `base` with (b, zeta, sigma) replaced by the fitted values; sigma is
// the residual standard deviation (floored just above zero so the link stays
// valid on noiseless data).
ObservationLink calibrate_link(const std::vector<Observation>& observations,
                               const std::vector<LatentPoint>& latent,
                               const ObservationLink& base = ObservationLink{});

}  // namespace epifilter
