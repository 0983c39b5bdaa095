#pragma once

#include <Eigen/Dense>

#include "epifilter/rng.hpp"
#include "epifilter/state.hpp"

namespace epifilter {

// Axis-aligned box in any dimension; the parameter support region for kernel
// regeneration is the 5-dimensional instance.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  bool contains(const Eigen::VectorXd& v) const {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (v[k] < lo[k] || v[k] > hi[k]) return false;
    }
    return true;
  }
  Eigen::VectorXd project(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      out[k] = std::fmin(std::fmax(v[k], lo[k]), hi[k]);
    }
    return out;
  }
};

// Beta(shape1, shape2) variate.  Uses Johnk's algorithm when both shapes are
// <= 1 and Cheng's BB/BC rejection algorithms otherwise, so draws do not
// depend on any platform library's Beta implementation.
double beta_sample(double shape1, double shape2, RngStream& rng);

// Square-root factor of a symmetric PSD matrix via eigendecomposition;
// eigenvalues below zero are clamped.  Works for singular covariances.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

// Truncated multivariate normal draw over an axis-aligned box: rejection with
// a cap, then componentwise projection of the last unconstrained draw.  The
// same cap-and-project policy the state sampler uses.  `factor` is a
// square-root of the covariance (see psd_sqrt).
Eigen::VectorXd truncated_normal_sample(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& factor, const Box& region,
                                        RngStream& rng, int rejection_cap = 1000,
                                        long* fallbacks = nullptr);

}  // namespace epifilter
