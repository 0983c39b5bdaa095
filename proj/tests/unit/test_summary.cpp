#include "epifilter/summary.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epifilter/errors.hpp"
#include "epifilter/model.hpp"
#include "epifilter/rng.hpp"

using namespace epifilter;

namespace {

// Exhaustive oracle: scan every (value, cumulative weight) pair in sorted
// order and return the first value reaching the target mass.
double quantile_oracle(std::vector<std::pair<double, double>> pairs, double prob) {
  std::sort(pairs.begin(), pairs.end());
  double acc = 0.0;
  for (const auto& [value, weight] : pairs) {
    acc += weight;
    if (acc >= prob) return value;
  }
  return pairs.back().first;
}

Particle particle(double c, double beta, double gamma, double weight) {
  Particle p;
  p.state = {c, 1e-4, 5e-5, 5e-5, 3e-5};
  p.params = {0.006, beta, 0.12, gamma, 0.7};
  p.weight = weight;
  return p;
}

}  // namespace

TEST_CASE("weighted quantiles match the exhaustive oracle on a 5-particle case") {
  const std::vector<double> values{3.0, 1.0, 4.0, 1.5, 2.0};
  const std::vector<double> weights{0.1, 0.3, 0.15, 0.25, 0.2};
  for (const double prob : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t k = 0; k < values.size(); ++k) pairs.emplace_back(values[k], weights[k]);
    CHECK(weighted_quantile(values, weights, prob) == quantile_oracle(pairs, prob));
  }
}

TEST_CASE("identical particles collapse every statistic to the common value") {
  ParticleEnsemble ens;
  ens.day_index = 2;
  ens.particles.assign(6, particle(0.38, 0.3, 0.08, 1.0 / 6.0));
  const SummaryRow row = summarize_ensemble(ens, true, {0.05, 0.95}, 1000000);
  const double expected_r0 = 0.38 * 0.3 / 0.08;
  const QuantityStats& stats = row.stats[10];
  CHECK(stats.mean == doctest::Approx(expected_r0).epsilon(1e-12));
  CHECK(stats.median == doctest::Approx(expected_r0).epsilon(1e-12));
  CHECK(stats.quantiles[0] == stats.median);
  CHECK(stats.quantiles[1] == stats.median);
}

TEST_CASE("two equally weighted reproduction ratios average to the midpoint") {
  ParticleEnsemble ens;
  // r0 of 1.0 and 2.0.
  ens.particles = {particle(0.4, 0.2, 0.08, 0.5), particle(0.4, 0.4, 0.08, 0.5)};
  const SummaryRow row = summarize_ensemble(ens, true, {0.05, 0.95}, 1000000);
  CHECK(row.stats[10].mean == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("r0 is summarized per particle, not from summary means") {
  ParticleEnsemble ens;
  ens.particles = {particle(0.30, 0.36, 0.06, 0.5), particle(0.45, 0.24, 0.12, 0.5)};
  const SummaryRow row = summarize_ensemble(ens, true, {0.05, 0.95}, 1000000);
  const double per_particle =
      0.5 * (0.30 * 0.36 / 0.06) + 0.5 * (0.45 * 0.24 / 0.12);
  const double of_means = (0.5 * (0.30 + 0.45)) * (0.5 * (0.36 + 0.24)) / (0.5 * (0.06 + 0.12));
  CHECK(row.stats[10].mean == doctest::Approx(per_particle).epsilon(1e-12));
  CHECK(row.stats[10].mean != doctest::Approx(of_means).epsilon(1e-6));
}

TEST_CASE("quantiles bracket the median on random ensembles") {
  RngStream rng(17, 0);
  ParticleEnsemble ens;
  double total = 0.0;
  for (int k = 0; k < 50; ++k) {
    Particle p = particle(0.3 + 0.1 * rng.uniform(), 0.2 + 0.2 * rng.uniform(),
                          0.05 + 0.05 * rng.uniform(), rng.uniform_pos());
    total += p.weight;
    ens.particles.push_back(p);
  }
  for (auto& p : ens.particles) p.weight /= total;
  const SummaryRow row = summarize_ensemble(ens, true, {0.05, 0.95}, 1000000);
  for (const auto& stats : row.stats) {
    CHECK(stats.quantiles[0] <= stats.median);
    CHECK(stats.median <= stats.quantiles[1]);
  }
  // Reproduction-ratio summaries are strictly positive.
  CHECK(row.stats[10].quantiles[0] > 0.0);
  CHECK(row.stats[10].mean > 0.0);
}

TEST_CASE("state counts are scaled by the population") {
  ParticleEnsemble ens;
  ens.particles = {particle(0.38, 0.3, 0.08, 1.0)};
  const SummaryRow row = summarize_ensemble(ens, true, {0.5}, 1000000);
  CHECK(row.stats[0].mean == doctest::Approx(0.38).epsilon(1e-12));     // c unscaled
  CHECK(row.stats[2].mean == doctest::Approx(50.0).epsilon(1e-12));     // I in persons
  CHECK(row.stats[4].mean == doctest::Approx(30.0).epsilon(1e-12));     // D in persons
}

TEST_CASE("csv and json round-trips are exact") {
  RngStream rng(23, 0);
  TrajectorySummary summary;
  summary.quantile_probs = {0.05, 0.95};
  for (int day = 0; day < 4; ++day) {
    SummaryRow row;
    row.day_index = day * 3;
    row.observed = day % 2 == 0;
    row.stats.resize(kSummaryQuantityCount);
    for (auto& stats : row.stats) {
      stats.mean = rng.normal() * std::pow(10.0, 6.0 * rng.uniform() - 3.0);
      stats.median = stats.mean * 0.99;
      stats.quantiles = {stats.mean - rng.uniform_pos(), stats.mean + rng.uniform_pos()};
    }
    summary.rows.push_back(row);
  }

  CHECK(summary_from_csv(summary_to_csv(summary)) == summary);
  CHECK(summary_from_json(summary_to_json(summary)) == summary);
}

TEST_CASE("empty summary exports a header-only csv") {
  TrajectorySummary summary;
  const std::string text = summary_to_csv(summary);
  CHECK(text.find('\n') == text.size() - 1);
  CHECK(text.rfind("day,observed,c_mean,c_median,c_q0.05,c_q0.95,", 0) == 0);
  CHECK(summary_from_csv(text) == summary);
}

TEST_CASE("slice export keeps only the requested quantities") {
  ParticleEnsemble ens;
  ens.particles = {particle(0.38, 0.3, 0.08, 1.0)};
  TrajectorySummary summary;
  summary.rows.push_back(summarize_ensemble(ens, true, {0.05, 0.95}, 1000000));
  const std::string text = summary_slice_to_csv(summary, {10});
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header == "day,observed,r0_mean,r0_median,r0_q0.05,r0_q0.95");
}

TEST_CASE("snapshots save/load round-trip") {
  RngStream rng(5, 0);
  std::vector<ParticleEnsemble> snapshots;
  for (int s = 0; s < 3; ++s) {
    ParticleEnsemble ens;
    ens.day_index = s * 4;
    ens.generation = s;
    for (int k = 0; k < 5; ++k) {
      ens.particles.push_back(particle(0.3 + 0.1 * rng.uniform(), 0.2 + 0.2 * rng.uniform(),
                                       0.05 + 0.05 * rng.uniform(), 0.2));
    }
    snapshots.push_back(ens);
  }
  const std::string path = "/tmp/epifilter_test_snapshots.csv";
  save_snapshots_csv(snapshots, path);
  const std::vector<ParticleEnsemble> loaded = load_snapshots_csv(path);
  REQUIRE(loaded.size() == snapshots.size());
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    CHECK(loaded[s].day_index == snapshots[s].day_index);
    CHECK(loaded[s].generation == snapshots[s].generation);
    REQUIRE(loaded[s].particles.size() == snapshots[s].particles.size());
    for (std::size_t k = 0; k < snapshots[s].particles.size(); ++k) {
      CHECK(loaded[s].particles[k].weight == snapshots[s].particles[k].weight);
      CHECK(loaded[s].particles[k].state.to_vector() ==
            snapshots[s].particles[k].state.to_vector());
      CHECK(loaded[s].particles[k].params.to_vector() ==
            snapshots[s].particles[k].params.to_vector());
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("golden export of a pinned seeded run") {
  // A 10-particle, 3-day filter run with everything pinned; the exported csv
  // must match the frozen golden file byte for byte.
  std::vector<Observation> observations;
  for (int day = 0; day < 3; ++day) {
    Observation obs;
    obs.day_index = day;
    obs.cum_cases = 60 + 8 * day;
    obs.cum_deaths = 30 + 3 * day;
    observations.push_back(obs);
  }
  FilterConfig config;
  config.num_particles = 10;
  config.seed = 20140323;
  ObservationLink link;
  link.sigma_i = 0.4;
  link.sigma_d = 0.3;

  SummaryAccumulator accumulator({0.05, 0.95}, config.population);
  run_filter(observations, PriorSpec{}, link, config,
             [&](long day, bool observed, const ParticleEnsemble& ens) {
               accumulator.add_day(day, observed, ens);
             });
  const std::string text = summary_to_csv(accumulator.take());

  const std::string golden_path = std::string(EPIFILTER_TEST_DIR) + "/golden/summary_10p_3d.csv";
  std::ifstream golden(golden_path, std::ios::binary);
  REQUIRE_MESSAGE(golden.good(), "missing golden file ", golden_path);
  std::ostringstream expected;
  expected << golden.rdbuf();
  CHECK(text == expected.str());
}

TEST_CASE("summarize rejects empty input") {
  CHECK_THROWS_AS(summarize({}, {0.05, 0.95}, 1000000), ValidationError);
  ParticleEnsemble empty;
  CHECK_THROWS_AS(summarize_ensemble(empty, true, {0.5}, 1000000), ValidationError);
}
