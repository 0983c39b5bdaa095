#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "epifilter/observation.hpp"
#include "epifilter/priors.hpp"
#include "epifilter/state.hpp"

namespace epifilter {

// One weighted hypothesis: a state vector plus a parameter vector.
struct Particle {
  CompartmentState state;
  ParamVector params;
  double weight = 0.0;
};

struct ParticleEnsemble {
  std::vector<Particle> particles;
  long day_index = 0;
  long generation = 0;  // filter step counter; randomness is keyed by it
};

enum class ResamplingScheme { multinomial, systematic };

// How (a, h) are derived from the discount factor.  `paper` uses
// a = 1 - h^2 with h = 1 - ((3*phi - 1) / (2*phi))^2; `liu_west` uses the
// conventional variance-preserving pairing a = (3*phi - 1) / (2*phi),
// h^2 = 1 - a^2.
enum class ShrinkagePairing { paper, liu_west };

struct FilterConfig {
  std::uint32_t num_particles = 5000;
  double discount = 0.95;
  std::uint64_t seed = 20140323;
  std::uint64_t population = 1000000;
  int rejection_cap = 1000;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
  ShrinkagePairing shrinkage = ShrinkagePairing::paper;
  int workers = 1;

  void validate() const;  // throws ValidationError naming the offending field
  bool operator==(const FilterConfig&) const = default;
};

struct ShrinkageCoefficients {
  double a = 0.0;
  double h = 0.0;
};

// Kernel smoothing coefficients from the discount factor.  Requires
// 1/3 < phi_d < 1, which keeps h inside (0, 1).
ShrinkageCoefficients shrinkage_coefficients(double phi_d,
                                             ShrinkagePairing pairing = ShrinkagePairing::paper);

// Step-1 kernel locations: componentwise a*theta_i + (1-a)*weighted mean.
ParamVector shrink_means(const ParamVector& params_i, const ParamVector& weighted_mean, double a);

// Weighted mean of the particle parameter vectors (weights must be normalized).
ParamVector weighted_param_mean(const ParticleEnsemble& ensemble);

// Kernel covariance for parameter regeneration: h^2 times the weighted
// empirical covariance of the parameters.  Zero when all particles agree.
Matrix5 kernel_covariance(const ParticleEnsemble& ensemble, double h);

// 1 / sum(w^2); lies in [1, J] for normalized weights.
double effective_sample_size(const ParticleEnsemble& ensemble);

struct StepDiagnostics {
  long day_index = 0;
  long generation = 0;
  double ess = 0.0;
  long state_fallbacks = 0;   // truncation rejection cap exhausted during propagation
  long param_fallbacks = 0;   // same, for kernel parameter draws
  bool kernel_collapsed = false;  // kernel covariance was exactly zero
};

// Intermediate step quantities, exposed for diagnostics and verification.
struct StepTrace {
  std::vector<double> aux_weights;       // normalized g
  std::vector<std::size_t> ancestors;    // selected index j per particle
  std::vector<ParamVector> kernel_means; // the m_i of step 1
  Matrix5 kernel_cov = Matrix5::Zero();
};

// Ancestor selection: `count` indices into `normalized_weights`.  Multinomial
// draws one uniform per output slot from (seed, generation, particle);
// systematic uses a single stratified uniform.
std::vector<std::size_t> resample_indices(const std::vector<double>& normalized_weights,
                                          std::size_t count, ResamplingScheme scheme,
                                          std::uint64_t seed, long generation, int workers = 1);

// One assimilation step (the eight-step kernel density update).  gap_days is
// the number of days between the ensemble's day and the report being
// assimilated; unreported days in between are bridged by the process model.
// Randomness is derived from (config.seed, generation, particle index), so
// the result is independent of worker count.
ParticleEnsemble filter_step(const ParticleEnsemble& ensemble, const Observation& obs,
                             int gap_days, const ObservationLink& link,
                             const FilterConfig& config, const Box& param_support,
                             StepDiagnostics* diag = nullptr, StepTrace* trace = nullptr);

struct FilterResult {
  std::vector<ParticleEnsemble> snapshots;   // one per report day, day 0 included
  std::vector<StepDiagnostics> diagnostics;  // one per assimilation step
};

// Called once per calendar day with the current ensemble.  `observed` marks
// report days (filtered posteriors); other days carry prior-predictive
// propagation of the last posterior, for display only.
using DayCallback =
    std::function<void(long day_index, bool observed, const ParticleEnsemble& ensemble)>;

// Full run over an irregular report calendar: initializes J particles from
// the priors with uniform weights at the first report day, then assimilates
// each later report with the appropriate day gap.
FilterResult run_filter(const std::vector<Observation>& observations, const PriorSpec& priors,
                        const ObservationLink& link, const FilterConfig& config,
                        const DayCallback& on_day = {});

}  // namespace epifilter
