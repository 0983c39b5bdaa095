#include "epifilter/kdpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epifilter/errors.hpp"
#include "epifilter/model.hpp"
#include "epifilter/parallel.hpp"
#include "epifilter/samplers.hpp"

namespace epifilter {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalizes log-weights with max-subtraction.  Throws DegeneracyError when
// every entry is -inf (total likelihood underflow).
std::vector<double> normalize_log_weights(const std::vector<double>& log_w, long day_index,
                                          const char* stage) {
  const double m = *std::max_element(log_w.begin(), log_w.end());
  if (!(m > kNegInf)) {
    throw DegeneracyError(std::string("filter degeneracy (") + stage + ") at day index " +
                              std::to_string(day_index),
                          day_index);
  }
  std::vector<double> w(log_w.size());
  for (std::size_t k = 0; k < log_w.size(); ++k) w[k] = std::exp(log_w[k] - m);
  const double total = kahan_sum(w);
  for (double& v : w) v /= total;
  return w;
}

// Inverse-CDF lookup table for ancestor selection.
std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> cdf(w.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    cdf[k] = acc;
  }
  cdf.back() = 1.0;  // guard against rounding at the top
  return cdf;
}

std::size_t pick_index(const std::vector<double>& cdf, double u) {
  return static_cast<std::size_t>(
      std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

CompartmentState iterate_drift(const CompartmentState& x, const ParamVector& theta, int days) {
  CompartmentState cur = x;
  for (int day = 0; day < days; ++day) cur = deterministic_step(cur, theta);
  return cur;
}

}  // namespace

void FilterConfig::validate() const {
  if (num_particles < 2) throw ValidationError("filter.num_particles: must be >= 2");
  if (!(discount > 1.0 / 3.0) || !(discount < 1.0)) {
    throw ValidationError("filter.discount: must lie in (1/3, 1)");
  }
  if (population < 1) throw ValidationError("filter.population: must be >= 1");
  if (rejection_cap < 1) throw ValidationError("filter.rejection_cap: must be >= 1");
  if (workers < 1) throw ValidationError("filter.workers: must be >= 1");
}

ShrinkageCoefficients shrinkage_coefficients(double phi_d, ShrinkagePairing pairing) {
  if (!(phi_d > 1.0 / 3.0) || !(phi_d < 1.0)) {
    throw std::domain_error("shrinkage_coefficients: discount must lie in (1/3, 1)");
  }
  const double ratio = (3.0 * phi_d - 1.0) / (2.0 * phi_d);
  if (pairing == ShrinkagePairing::paper) {
    const double h = 1.0 - ratio * ratio;
    return {1.0 - h * h, h};
  }
  return {ratio, std::sqrt(1.0 - ratio * ratio)};
}

ParamVector shrink_means(const ParamVector& params_i, const ParamVector& weighted_mean, double a) {
  return ParamVector::from_vector(a * params_i.to_vector() +
                                  (1.0 - a) * weighted_mean.to_vector());
}

ParamVector weighted_param_mean(const ParticleEnsemble& ensemble) {
  Vector5 mean = Vector5::Zero();
  for (const auto& p : ensemble.particles) mean += p.weight * p.params.to_vector();
  return ParamVector::from_vector(mean);
}

Matrix5 kernel_covariance(const ParticleEnsemble& ensemble, double h) {
  const Vector5 mean = weighted_param_mean(ensemble).to_vector();
  Matrix5 cov = Matrix5::Zero();
  for (const auto& p : ensemble.particles) {
    const Vector5 dev = p.params.to_vector() - mean;
    cov += p.weight * (dev * dev.transpose());
  }
  cov = 0.5 * (cov + cov.transpose());  // exact symmetry
  return h * h * cov;
}

double effective_sample_size(const ParticleEnsemble& ensemble) {
  double sum_sq = 0.0;
  for (const auto& p : ensemble.particles) sum_sq += p.weight * p.weight;
  return 1.0 / sum_sq;
}

std::vector<std::size_t> resample_indices(const std::vector<double>& normalized_weights,
                                          std::size_t count, ResamplingScheme scheme,
                                          std::uint64_t seed, long generation, int workers) {
  const std::vector<double> cdf = cumulative(normalized_weights);
  const auto gen_u32 = static_cast<std::uint32_t>(generation);
  std::vector<std::size_t> indices(count);
  // Selection uniforms live in (0,1] so an ancestor is chosen with
  // probability exactly its weight, zero-weight entries included.
  if (scheme == ResamplingScheme::multinomial) {
    parallel_for(count, workers, [&](std::size_t i) {
      RngStream rng(seed, substream(gen_u32, DrawPurpose::resample,
                                    static_cast<std::uint32_t>(i)));
      indices[i] = pick_index(cdf, rng.uniform_pos());
    });
  } else {
    RngStream rng(seed, substream(gen_u32, DrawPurpose::resample, 0));
    const double u0 = rng.uniform_pos();
    const double step = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
      indices[i] = pick_index(cdf, (static_cast<double>(i) + u0) * step);
    }
  }
  return indices;
}

ParticleEnsemble filter_step(const ParticleEnsemble& ensemble, const Observation& obs,
                             int gap_days, const ObservationLink& link,
                             const FilterConfig& config, const Box& param_support,
                             StepDiagnostics* diag, StepTrace* trace) {
  const std::size_t j_count = ensemble.particles.size();
  if (j_count < 2) throw ValidationError("filter_step: ensemble needs at least 2 particles");
  if (gap_days < 1 || obs.day_index != ensemble.day_index + gap_days) {
    throw ValidationError("filter_step: observation day must follow the ensemble day by gap_days");
  }
  const long generation = ensemble.generation + 1;
  const auto gen_u32 = static_cast<std::uint32_t>(generation);
  const auto [a, h] = shrinkage_coefficients(config.discount, config.shrinkage);

  // Step 1: kernel locations.
  const ParamVector theta_bar = weighted_param_mean(ensemble);
  std::vector<ParamVector> kernel_mean(j_count);
  for (std::size_t i = 0; i < j_count; ++i) {
    kernel_mean[i] = shrink_means(ensemble.particles[i].params, theta_bar, a);
  }

  const Matrix5 kernel_cov = kernel_covariance(ensemble, h);
  const bool collapsed = kernel_cov.isZero(0.0);
  const Eigen::MatrixXd kernel_factor = psd_sqrt(kernel_cov);

  // Step 2: predicted means over the gap (noise has zero mean, so iterating
  // the drift gives the exact conditional expectation).
  std::vector<double> loglik_pred(j_count);
  parallel_for(j_count, config.workers, [&](std::size_t i) {
    const CompartmentState mu =
        iterate_drift(ensemble.particles[i].state, ensemble.particles[i].params, gap_days);
    loglik_pred[i] = log_likelihood(mu, link, obs);
  });

  // Step 3: auxiliary weights.
  std::vector<double> log_g(j_count);
  for (std::size_t i = 0; i < j_count; ++i) {
    log_g[i] = std::log(ensemble.particles[i].weight) + loglik_pred[i];
  }
  const std::vector<double> g = normalize_log_weights(log_g, obs.day_index, "auxiliary weights");

  // Step 4: ancestor selection.
  const std::vector<std::size_t> ancestor =
      resample_indices(g, j_count, config.resampling, config.seed, generation, config.workers);

  // Steps 5-6: regenerate parameters around the ancestors' kernel locations,
  // then propagate the ancestors' states under the new parameters.
  ParticleEnsemble out;
  out.particles.resize(j_count);
  out.day_index = obs.day_index;
  out.generation = generation;

  std::vector<long> param_fallbacks(j_count, 0);
  std::vector<long> state_fallbacks(j_count, 0);
  std::vector<double> log_w(j_count);

  parallel_for(j_count, config.workers, [&](std::size_t i) {
    const std::size_t j = ancestor[i];

    RngStream param_rng(config.seed, substream(gen_u32, DrawPurpose::param_kernel,
                                               static_cast<std::uint32_t>(i)));
    const Eigen::VectorXd theta_draw =
        truncated_normal_sample(kernel_mean[j].to_vector(), kernel_factor, param_support,
                                param_rng, config.rejection_cap, &param_fallbacks[i]);
    const ParamVector theta = ParamVector::from_vector(theta_draw);

    RngStream state_rng(config.seed, substream(gen_u32, DrawPurpose::state_noise,
                                               static_cast<std::uint32_t>(i)));
    const CompartmentState x =
        propagate_gap(ensemble.particles[j].state, theta, gap_days, config.population, state_rng,
                      config.rejection_cap, &state_fallbacks[i]);

    // Steps 7-8: likelihood ratio against the ancestor's predictive density.
    log_w[i] = log_likelihood(x, link, obs) - loglik_pred[j];

    out.particles[i].state = x;
    out.particles[i].params = theta;
  });

  const std::vector<double> w = normalize_log_weights(log_w, obs.day_index, "final weights");
  for (std::size_t i = 0; i < j_count; ++i) out.particles[i].weight = w[i];

  if (diag != nullptr) {
    diag->day_index = obs.day_index;
    diag->generation = generation;
    diag->ess = effective_sample_size(out);
    diag->kernel_collapsed = collapsed;
    diag->param_fallbacks = 0;
    diag->state_fallbacks = 0;
    for (std::size_t i = 0; i < j_count; ++i) {
      diag->param_fallbacks += param_fallbacks[i];
      diag->state_fallbacks += state_fallbacks[i];
    }
  }
  if (trace != nullptr) {
    trace->aux_weights = g;
    trace->ancestors = ancestor;
    trace->kernel_means = kernel_mean;
    trace->kernel_cov = kernel_cov;
  }
  return out;
}

FilterResult run_filter(const std::vector<Observation>& observations, const PriorSpec& priors,
                        const ObservationLink& link, const FilterConfig& config,
                        const DayCallback& on_day) {
  if (observations.empty()) throw ValidationError("run_filter: need at least one observation");
  config.validate();
  priors.validate();

  const std::size_t j_count = config.num_particles;
  const Box support = priors.param_support_box();

  ParticleEnsemble ensemble;
  ensemble.particles.resize(j_count);
  ensemble.day_index = observations.front().day_index;
  ensemble.generation = 0;
  const double w0 = 1.0 / static_cast<double>(j_count);
  parallel_for(j_count, config.workers, [&](std::size_t i) {
    RngStream rng(config.seed, substream(0, DrawPurpose::init, static_cast<std::uint32_t>(i)));
    auto [x, theta] = sample_initial(priors, rng);
    ensemble.particles[i] = {x, theta, w0};
  });

  FilterResult result;
  result.snapshots.push_back(ensemble);
  if (on_day) on_day(ensemble.day_index, true, ensemble);

  for (std::size_t k = 1; k < observations.size(); ++k) {
    const Observation& obs = observations[k];
    const long gap = obs.day_index - ensemble.day_index;
    if (gap < 1) throw ValidationError("run_filter: observations must be strictly increasing in day");

    // Prior-predictive bridge for unreported days (display only; the filter
    // itself bridges the gap inside filter_step).
    if (on_day && gap > 1) {
      ParticleEnsemble display = ensemble;
      for (long day = ensemble.day_index + 1; day < obs.day_index; ++day) {
        parallel_for(j_count, config.workers, [&](std::size_t i) {
          RngStream rng(config.seed, substream(static_cast<std::uint32_t>(day),
                                               DrawPurpose::display,
                                               static_cast<std::uint32_t>(i)));
          display.particles[i].state =
              sample_next_state(display.particles[i].state, display.particles[i].params,
                                config.population, rng, config.rejection_cap);
        });
        display.day_index = day;
        on_day(day, false, display);
      }
    }

    StepDiagnostics diag;
    ensemble = filter_step(ensemble, obs, static_cast<int>(gap), link, config, support, &diag);
    result.snapshots.push_back(ensemble);
    result.diagnostics.push_back(diag);
    if (on_day) on_day(ensemble.day_index, true, ensemble);
  }
  return result;
}

}  // namespace epifilter
