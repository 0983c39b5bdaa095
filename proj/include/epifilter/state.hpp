#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace epifilter {

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

// Hidden epidemic state as population fractions: mixing factor c plus the
// exposed/infected/removed/dead compartments.  S is eliminated by the
// large-population approximation (S ~ 1) and carries no field.
struct CompartmentState {
  double c = 0.0;
  double e = 0.0;
  double i = 0.0;
  double r = 0.0;
  double d = 0.0;

  Vector5 to_vector() const {
    Vector5 v;
    v << c, e, i, r, d;
    return v;
  }
  static CompartmentState from_vector(const Vector5& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }

  bool finite() const {
    return std::isfinite(c) && std::isfinite(e) && std::isfinite(i) && std::isfinite(r) &&
           std::isfinite(d);
  }
};

// Model parameters: mitigation, transmission, latency, recovery rates (1/day)
// and the fatality proportion.  The fatality proportion is named phi_f to keep
// it apart from the filter's discount factor.
struct ParamVector {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double phi_f = 0.0;

  Vector5 to_vector() const {
    Vector5 v;
    v << alpha, beta, lambda, gamma, phi_f;
    return v;
  }
  static ParamVector from_vector(const Vector5& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }

  bool finite() const {
    return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(lambda) &&
           std::isfinite(gamma) && std::isfinite(phi_f);
  }
  bool valid() const {
    return finite() && alpha >= 0.0 && beta >= 0.0 && lambda >= 0.0 && gamma >= 0.0 &&
           phi_f >= 0.0 && phi_f <= 1.0;
  }
};

// The admissible state set: every component nonnegative, E+I+R <= 1, and the
// mixing factor capped at 1 (it is a percentage-like factor).
struct StateRegion {
  static bool contains(const CompartmentState& x) {
    return x.c >= 0.0 && x.c <= 1.0 && x.e >= 0.0 && x.i >= 0.0 && x.r >= 0.0 && x.d >= 0.0 &&
           x.e + x.i + x.r <= 1.0;
  }

  // Componentwise projection: clip negatives, cap c at 1, then rescale the
  // epidemic compartments if their sum exceeds 1.
  static CompartmentState project(const CompartmentState& x) {
    CompartmentState y = x;
    y.c = std::fmin(std::fmax(y.c, 0.0), 1.0);
    y.e = std::fmax(y.e, 0.0);
    y.i = std::fmax(y.i, 0.0);
    y.r = std::fmax(y.r, 0.0);
    y.d = std::fmax(y.d, 0.0);
    const double sum = y.e + y.i + y.r;
    if (sum > 1.0) {
      y.e /= sum;
      y.i /= sum;
      y.r /= sum;
    }
    return y;
  }
};

}  // namespace epifilter
