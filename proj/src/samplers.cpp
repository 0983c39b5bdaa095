#include "epifilter/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace epifilter {

namespace {

constexpr double kLn4 = 1.3862943611198906;
constexpr double kExpMax = 709.0;  // log(DBL_MAX), overflow guard for a*exp(v)

double safe_scaled_exp(double a, double v) {
  return (v <= kExpMax) ? a * std::exp(v) : std::numeric_limits<double>::max() / 4.0;
}

// Johnk's acceptance method, adequate when both shapes are <= 1.
double beta_johnk(double a, double b, RngStream& rng) {
  for (;;) {
    const double x = std::pow(rng.uniform_pos(), 1.0 / a);
    const double y = std::pow(rng.uniform_pos(), 1.0 / b);
    const double s = x + y;
    if (s <= 1.0 && s > 0.0) return x / s;
  }
}

// Cheng (1978) algorithm BB, for min(shape1, shape2) > 1.
double beta_cheng_bb(double aa, double bb, RngStream& rng) {
  const double a = std::fmin(aa, bb);
  const double b = std::fmax(aa, bb);
  const double alpha = a + b;
  const double beta = std::sqrt((alpha - 2.0) / (2.0 * a * b - alpha));
  const double gamma = a + 1.0 / beta;

  double w = 0.0;
  for (;;) {
    const double u1 = rng.uniform_pos();
    const double u2 = rng.uniform_pos();
    if (u1 >= 1.0) continue;  // log(u1/(1-u1)) needs u1 in (0,1)
    const double v = beta * std::log(u1 / (1.0 - u1));
    w = safe_scaled_exp(a, v);
    const double z = u1 * u1 * u2;
    const double r = gamma * v - kLn4;
    const double s = a + r - w;
    if (s + 2.609437912434100 >= 5.0 * z) break;
    const double t = std::log(z);
    if (s >= t) break;
    if (r + alpha * std::log(alpha / (b + w)) >= t) break;
  }
  return (a == aa) ? w / (b + w) : b / (b + w);
}

// Cheng (1978) algorithm BC, for max(shape1, shape2) > 1 >= min.
double beta_cheng_bc(double aa, double bb, RngStream& rng) {
  const double a = std::fmax(aa, bb);
  const double b = std::fmin(aa, bb);
  const double alpha = a + b;
  const double beta = 1.0 / b;
  const double delta = 1.0 + a - b;
  const double k1 = delta * (1.0 / 72.0 + b / 24.0) / (a * beta - 7.0 / 9.0);
  const double k2 = 0.25 + (0.5 + 0.25 / delta) * b;

  double w = 0.0;
  for (;;) {
    const double u1 = rng.uniform_pos();
    const double u2 = rng.uniform_pos();
    double z;
    if (u1 < 0.5) {
      const double y = u1 * u2;
      z = u1 * y;
      if (0.25 * u2 + z - y >= k1) continue;
    } else {
      z = u1 * u1 * u2;
      if (z <= 0.25) {
        if (u1 >= 1.0) continue;
        w = safe_scaled_exp(a, beta * std::log(u1 / (1.0 - u1)));
        break;
      }
      if (z >= k2) continue;
    }
    if (u1 >= 1.0) continue;
    const double v = beta * std::log(u1 / (1.0 - u1));
    w = safe_scaled_exp(a, v);
    if (alpha * (std::log(alpha / (b + w)) + v) - kLn4 >= std::log(z)) break;
  }
  return (a == aa) ? w / (b + w) : b / (b + w);
}

}  // namespace

double beta_sample(double shape1, double shape2, RngStream& rng) {
  if (!(shape1 > 0.0) || !(shape2 > 0.0)) {
    throw std::invalid_argument("beta_sample: shapes must be positive");
  }
  if (shape1 <= 1.0 && shape2 <= 1.0) return beta_johnk(shape1, shape2, rng);
  if (shape1 > 1.0 && shape2 > 1.0) return beta_cheng_bb(shape1, shape2, rng);
  return beta_cheng_bc(shape1, shape2, rng);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  Eigen::VectorXd eig = solver.eigenvalues();
  for (Eigen::Index k = 0; k < eig.size(); ++k) eig[k] = std::sqrt(std::fmax(eig[k], 0.0));
  return solver.eigenvectors() * eig.asDiagonal();
}

Eigen::VectorXd truncated_normal_sample(const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& factor, const Box& region,
                                        RngStream& rng, int rejection_cap, long* fallbacks) {
  if (rejection_cap < 1) rejection_cap = 1;
  const Eigen::Index dim = mean.size();
  Eigen::VectorXd draw(dim);
  Eigen::VectorXd z(factor.cols());
  for (int attempt = 0; attempt < rejection_cap; ++attempt) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
    draw = mean + factor * z;
    if (region.contains(draw)) return draw;
  }
  if (fallbacks != nullptr) ++*fallbacks;
  return region.project(draw);
}

}  // namespace epifilter
