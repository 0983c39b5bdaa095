#include "epifilter/observation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "epifilter/errors.hpp"

namespace epifilter {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2
constexpr double kCountFloor = 0.5;                 // persons; keeps logs finite
constexpr double kSigmaFloor = 1e-8;

double normal_logpdf(double value, double mean, double sd) {
  const double z = (value - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

struct ChannelFit {
  double b;
  double zeta;
  double sigma;
};

// OLS of log(count) on log(latent count) for one channel.
ChannelFit fit_channel(const std::vector<double>& latent, const std::vector<double>& counts,
                       const char* name) {
  const std::size_t n = latent.size();
  if (n < 3) {
    throw ValidationError(std::string("calibrate_link: need >= 3 paired positive points for the ") +
                          name + " channel");
  }
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = std::log(latent[k]);
    ys[k] = std::log(counts[k]);
    sx += xs[k];
    sy += ys[k];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx <= 0.0) {
    throw ValidationError(std::string("calibrate_link: degenerate design (constant regressor) in ") +
                          name + " channel");
  }
  const double zeta = sxy / sxx;
  const double intercept = my - zeta * mx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double resid = ys[k] - (intercept + zeta * xs[k]);
    ssr += resid * resid;
  }
  const double dof = static_cast<double>(n) - 2.0;
  const double sigma = std::sqrt(ssr / dof);
  return {std::exp(intercept), zeta, std::fmax(sigma, kSigmaFloor)};
}

}  // namespace

Eigen::Vector2d predicted_log_mean(const CompartmentState& x, const ObservationLink& link) {
  Eigen::Vector2d mu;
  const double frac_cases = std::fmax(x.i + x.r, 0.0);
  const double frac_deaths = std::fmax(x.d, 0.0);
  if (link.mode == LinkMode::log_log) {
    const double p = static_cast<double>(link.population);
    const double u_cases = std::fmax(p * frac_cases, kCountFloor);
    const double u_deaths = std::fmax(p * frac_deaths, kCountFloor);
    mu << std::log(link.b_i) + link.zeta_i * std::log(u_cases),
        std::log(link.b_d) + link.zeta_d * std::log(u_deaths);
  } else {
    mu << link.b_i * std::pow(frac_cases, link.zeta_i),
        link.b_d * std::pow(frac_deaths, link.zeta_d);
  }
  return mu;
}

double log_likelihood_at_mean(const Eigen::Vector2d& log_mean, const ObservationLink& link,
                              const Observation& obs) {
  if (obs.cum_cases < 1 || obs.cum_deaths < 1) {
    throw std::domain_error("log_likelihood: counts entering a log must be >= 1");
  }
  const double ly_cases = std::log(static_cast<double>(obs.cum_cases));
  const double ly_deaths = std::log(static_cast<double>(obs.cum_deaths));
  return normal_logpdf(ly_cases, log_mean[0], link.sigma_i) +
         normal_logpdf(ly_deaths, log_mean[1], link.sigma_d);
}

double log_likelihood(const CompartmentState& x, const ObservationLink& link,
                      const Observation& obs) {
  return log_likelihood_at_mean(predicted_log_mean(x, link), link, obs);
}

ObservationLink calibrate_link(const std::vector<Observation>& observations,
                               const std::vector<LatentPoint>& latent,
                               const ObservationLink& base) {
  std::map<long, const LatentPoint*> by_day;
  for (const auto& point : latent) by_day[point.day_index] = &point;

  std::vector<double> u_cases, y_cases, u_deaths, y_deaths;
  for (const auto& obs : observations) {
    const auto it = by_day.find(obs.day_index);
    if (it == by_day.end()) continue;
    if (obs.cum_cases >= 1 && it->second->latent_cases > 0.0) {
      u_cases.push_back(it->second->latent_cases);
      y_cases.push_back(static_cast<double>(obs.cum_cases));
    }
    if (obs.cum_deaths >= 1 && it->second->latent_deaths > 0.0) {
      u_deaths.push_back(it->second->latent_deaths);
      y_deaths.push_back(static_cast<double>(obs.cum_deaths));
    }
  }

  const ChannelFit cases = fit_channel(u_cases, y_cases, "cases");
  const ChannelFit deaths = fit_channel(u_deaths, y_deaths, "deaths");

  ObservationLink link = base;
  link.b_i = cases.b;
  link.zeta_i = cases.zeta;
  link.sigma_i = cases.sigma;
  link.b_d = deaths.b;
  link.zeta_d = deaths.zeta;
  link.sigma_d = deaths.sigma;
  if (!link.valid()) throw ValidationError("calibrate_link: fitted link violates invariants");
  return link;
}

}  // namespace epifilter
