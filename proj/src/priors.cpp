#include "epifilter/priors.hpp"

#include <cmath>
#include <limits>

#include "epifilter/errors.hpp"

namespace epifilter {

double Prior::sample(RngStream& rng) const {
  if (kind == Kind::uniform) return a + rng.uniform() * (b - a);
  return beta_sample(a, b, rng);
}

double Prior::mean() const {
  if (kind == Kind::uniform) return 0.5 * (a + b);
  return a / (a + b);
}

void Prior::validate(const std::string& key, double range_lo, double range_hi) const {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError("prior '" + key + "': non-finite hyperparameters");
  }
  if (kind == Kind::uniform) {
    if (!(a < b)) throw ValidationError("prior '" + key + "': uniform needs lo < hi");
    if (a < range_lo || b > range_hi) {
      throw ValidationError("prior '" + key + "': support [" + std::to_string(a) + ", " +
                            std::to_string(b) + "] leaves the valid range");
    }
  } else {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw ValidationError("prior '" + key + "': beta shapes must be positive");
    }
    if (range_lo > 0.0 || range_hi < 1.0) {
      throw ValidationError("prior '" + key + "': beta support (0,1) leaves the valid range");
    }
  }
}

void PriorSpec::validate() const {
  alpha.validate("priors.parameters.alpha", 0.0, 1.0);
  beta.validate("priors.parameters.beta", 0.0, std::numeric_limits<double>::infinity());
  lambda.validate("priors.parameters.lambda", 0.0, std::numeric_limits<double>::infinity());
  gamma.validate("priors.parameters.gamma", 0.0, std::numeric_limits<double>::infinity());
  phi_f.validate("priors.parameters.phi_f", 0.0, 1.0);

  c.validate("priors.states.c", 0.0, 1.0);
  e.validate("priors.states.e", 0.0, 1.0);
  i.validate("priors.states.i", 0.0, 1.0);
  r.validate("priors.states.r", 0.0, 1.0);
  d.validate("priors.states.d", 0.0, 1.0);
  if (e.support_hi() + i.support_hi() + r.support_hi() > 1.0) {
    throw ValidationError("priors.states: E+I+R supports must sum to at most 1");
  }
}

ParamVector PriorSpec::mean_params() const {
  return {alpha.mean(), beta.mean(), lambda.mean(), gamma.mean(), phi_f.mean()};
}

CompartmentState PriorSpec::mean_state() const {
  return {c.mean(), e.mean(), i.mean(), r.mean(), d.mean()};
}

Box PriorSpec::param_support_box() const {
  Box box;
  box.lo = Eigen::VectorXd::Zero(5);
  box.hi = Eigen::VectorXd(5);
  box.hi << 10.0 * alpha.support_hi(), 10.0 * beta.support_hi(), 10.0 * lambda.support_hi(),
      10.0 * gamma.support_hi(), 1.0;
  return box;
}

std::pair<CompartmentState, ParamVector> sample_initial(const PriorSpec& priors, RngStream& rng) {
  CompartmentState x;
  x.c = priors.c.sample(rng);
  x.e = priors.e.sample(rng);
  x.i = priors.i.sample(rng);
  x.r = priors.r.sample(rng);
  x.d = priors.d.sample(rng);
  ParamVector theta;
  theta.alpha = priors.alpha.sample(rng);
  theta.beta = priors.beta.sample(rng);
  theta.lambda = priors.lambda.sample(rng);
  theta.gamma = priors.gamma.sample(rng);
  theta.phi_f = priors.phi_f.sample(rng);
  return {x, theta};
}

}  // namespace epifilter
