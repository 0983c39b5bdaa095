#include "epifilter/model.hpp"

#include <cmath>
#include <stdexcept>

namespace epifilter {

CompartmentState deterministic_step(const CompartmentState& x, const ParamVector& theta) {
  if (!x.finite() || !theta.finite()) {
    throw std::invalid_argument("deterministic_step: non-finite input");
  }
  CompartmentState out;
  out.c = x.c - theta.alpha * x.c;
  out.e = x.e + theta.beta * x.c * x.i - theta.lambda * x.e;
  out.i = x.i + theta.lambda * x.e - theta.gamma * x.i;
  out.r = x.r + theta.gamma * x.i;
  out.d = theta.phi_f * x.r + theta.phi_f * theta.gamma * x.i;
  return out;
}

Matrix5 process_covariance(const ParamVector& theta, std::uint64_t population) {
  if (population == 0) throw std::invalid_argument("process_covariance: population must be >= 1");
  const double p2 = static_cast<double>(population) * static_cast<double>(population);
  const double a = theta.alpha / p2;
  const double b = theta.beta / p2;
  const double l = theta.lambda / p2;
  const double g = theta.gamma / p2;
  const double f = theta.phi_f;
  Matrix5 q;
  // clang-format off
  q <<  a,    0.0,   0.0,    0.0,     0.0,
        0.0,  l + b, -l,     0.0,     0.0,
        0.0, -l,      l + g, -g,     -g * f,
        0.0,  0.0,   -g,      g,      g * f,
        0.0,  0.0,   -g * f,  g * f,  g * f * f;
  // clang-format on
  return q;
}

Eigen::Matrix<double, 5, 4> process_noise_factor(const ParamVector& theta,
                                                 std::uint64_t population) {
  if (population == 0) throw std::invalid_argument("process_noise_factor: population must be >= 1");
  const double p = static_cast<double>(population);
  const double sa = std::sqrt(theta.alpha) / p;
  const double sb = std::sqrt(theta.beta) / p;
  const double sl = std::sqrt(theta.lambda) / p;
  const double sg = std::sqrt(theta.gamma) / p;
  const double f = theta.phi_f;
  Eigen::Matrix<double, 5, 4> n;
  // Columns are the alpha, beta, lambda, gamma noise channels.
  // clang-format off
  n << sa,  0.0, 0.0,  0.0,
       0.0, -sb, sl,   0.0,
       0.0, 0.0, -sl,  sg,
       0.0, 0.0, 0.0, -sg,
       0.0, 0.0, 0.0, -sg * f;
  // clang-format on
  return n;
}

CompartmentState sample_next_state(const CompartmentState& x, const ParamVector& theta,
                                   std::uint64_t population, RngStream& rng,
                                   int rejection_cap, long* fallbacks) {
  const CompartmentState mean = deterministic_step(x, theta);
  const Eigen::Matrix<double, 5, 4> factor = process_noise_factor(theta, population);
  const Vector5 mu = mean.to_vector();

  if (rejection_cap < 1) rejection_cap = 1;
  CompartmentState candidate;
  for (int attempt = 0; attempt < rejection_cap; ++attempt) {
    Eigen::Matrix<double, 4, 1> z;
    for (int k = 0; k < 4; ++k) z[k] = rng.normal();
    candidate = CompartmentState::from_vector(mu + factor * z);
    if (StateRegion::contains(candidate)) return candidate;
  }
  if (fallbacks != nullptr) ++*fallbacks;
  return StateRegion::project(candidate);
}

CompartmentState propagate_gap(const CompartmentState& x, const ParamVector& theta,
                               int n_days, std::uint64_t population, RngStream& rng,
                               int rejection_cap, long* fallbacks) {
  if (n_days < 0) throw std::invalid_argument("propagate_gap: n_days must be >= 0");
  CompartmentState cur = x;
  for (int day = 0; day < n_days; ++day) {
    cur = sample_next_state(cur, theta, population, rng, rejection_cap, fallbacks);
  }
  return cur;
}

double r0(const CompartmentState& x, const ParamVector& theta) {
  if (!(theta.gamma > 0.0)) throw std::domain_error("r0: gamma must be positive");
  return x.c * theta.beta / theta.gamma;
}

}  // namespace epifilter
