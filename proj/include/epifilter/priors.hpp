#pragma once

#include <string>

#include "epifilter/rng.hpp"
#include "epifilter/samplers.hpp"
#include "epifilter/state.hpp"

namespace epifilter {

// One univariate prior: Uniform(lo, hi) or Beta(shape1, shape2).
struct Prior {
  enum class Kind { uniform, beta };
  Kind kind = Kind::uniform;
  double a = 0.0;  // lo or shape1
  double b = 1.0;  // hi or shape2

  static Prior uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static Prior beta(double shape1, double shape2) { return {Kind::beta, shape1, shape2}; }

  double sample(RngStream& rng) const;
  double mean() const;
  double support_lo() const { return kind == Kind::uniform ? a : 0.0; }
  double support_hi() const { return kind == Kind::uniform ? b : 1.0; }

  // Throws ValidationError naming `key` if the hyperparameters are malformed
  // or the support leaves [range_lo, range_hi].
  void validate(const std::string& key, double range_lo, double range_hi) const;

  bool operator==(const Prior&) const = default;
};

// Priors for the five parameters and the five initial state components.
// Defaults are the 2014 Guinea Ebola elicitation this project ships with.
struct PriorSpec {
  Prior alpha = Prior::uniform(0.0059, 0.00593);
  Prior beta = Prior::uniform(0.259, 0.379);
  Prior lambda = Prior::beta(78.0, 577.0);
  Prior gamma = Prior::beta(21.0, 246.0);
  Prior phi_f = Prior::beta(37.0, 15.0);

  Prior c = Prior::uniform(0.36, 0.40);
  Prior e = Prior::uniform(0.000128, 0.000141);
  Prior i = Prior::uniform(0.000050, 0.000061);
  Prior r = Prior::uniform(0.000042, 0.000058);
  Prior d = Prior::uniform(0.000029, 0.000030);

  // Config-time validation: every support must sit inside the target type's
  // invariant region, so sampled draws are valid by construction.
  void validate() const;

  ParamVector mean_params() const;
  CompartmentState mean_state() const;

  // Parameter support box for kernel regeneration: rates truncated above at
  // 10x the upper end of their prior support, fatality proportion at [0, 1].
  Box param_support_box() const;

  bool operator==(const PriorSpec&) const = default;
};

// One joint draw of (initial state, parameters) from the priors.
std::pair<CompartmentState, ParamVector> sample_initial(const PriorSpec& priors, RngStream& rng);

}  // namespace epifilter
