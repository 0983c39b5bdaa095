#pragma once

#include <cstdint>

#include "epifilter/rng.hpp"
#include "epifilter/state.hpp"

namespace epifilter {

// One day of the deterministic drift g(x, theta):
//   c' = c - alpha*c
//   E' = E + beta*c*I - lambda*E
//   I' = I + lambda*E - gamma*I
//   R' = R + gamma*I
//   D' = phi_f*R + phi_f*gamma*I        (D is slaved to R: D' = phi_f * R')
// The output is not projected into the admissible region; projection belongs
// to the stochastic sampler only.
CompartmentState deterministic_step(const CompartmentState& x, const ParamVector& theta);

// Per-step process covariance Q(theta)/P^2.  Symmetric by construction and
// positive semidefinite: it is the Gram matrix of four independent noise
// channels (alpha, beta, lambda, gamma), with the D row inheriting phi_f
// times the R noise so that D = phi_f * R survives the fluctuations.
Matrix5 process_covariance(const ParamVector& theta, std::uint64_t population);

// Exact square root of process_covariance: a 5x4 factor A with A A^T = Q.
// Drawing x' = g(x,theta) + A z with z ~ N(0, I_4) samples the process law
// without any per-call matrix decomposition.
Eigen::Matrix<double, 5, 4> process_noise_factor(const ParamVector& theta,
                                                 std::uint64_t population);

// One stochastic step: a draw from N(g(x,theta), Q(theta)) truncated to the
// admissible region.  Rejection sampling with `rejection_cap` attempts; on
// exhaustion the last unconstrained draw is projected componentwise and
// `fallbacks`, when given, is incremented.
CompartmentState sample_next_state(const CompartmentState& x, const ParamVector& theta,
                                   std::uint64_t population, RngStream& rng,
                                   int rejection_cap = 1000, long* fallbacks = nullptr);

// Advances the state through `n_days` unreported days with theta held fixed.
CompartmentState propagate_gap(const CompartmentState& x, const ParamVector& theta,
                               int n_days, std::uint64_t population, RngStream& rng,
                               int rejection_cap = 1000, long* fallbacks = nullptr);

// Time-varying basic reproductive ratio, c * beta / gamma.
double r0(const CompartmentState& x, const ParamVector& theta);

}  // namespace epifilter
