#include "epifilter/model.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

#include "epifilter/priors.hpp"
#include "epifilter/rng.hpp"

using namespace epifilter;

namespace {

// Independent oracle: the stochastic difference equations evaluated directly,
// with no shared code with the implementation.
void oracle_step(const double in[5], double alpha, double beta, double lambda, double gamma,
                 double phi, double out[5]) {
  const double c = in[0], e = in[1], i = in[2], r = in[3];
  out[0] = c - alpha * c;
  out[1] = e + beta * c * i - lambda * e;
  out[2] = i + lambda * e - gamma * i;
  out[3] = r + gamma * i;
  out[4] = phi * r + phi * gamma * i;
}

const CompartmentState kX{0.38, 1.35e-4, 5.5e-5, 5e-5, 2.95e-5};
const ParamVector kTheta{0.0059, 0.3, 0.119, 0.0787, 0.71};

}  // namespace

TEST_CASE("deterministic_step: zero rates freeze the dynamics") {
  const ParamVector zeros{};
  const CompartmentState out = deterministic_step(kX, zeros);
  CHECK(out.c == kX.c);
  CHECK(out.e == kX.e);
  CHECK(out.i == kX.i);
  CHECK(out.r == kX.r);
  CHECK(out.d == 0.0);  // D is slaved to phi_f * R, and phi_f = 0 here
}

TEST_CASE("deterministic_step matches direct evaluation of the difference equations") {
  const double in[5] = {kX.c, kX.e, kX.i, kX.r, kX.d};
  double expected[5];
  oracle_step(in, kTheta.alpha, kTheta.beta, kTheta.lambda, kTheta.gamma, kTheta.phi_f, expected);

  const CompartmentState out = deterministic_step(kX, kTheta);
  CHECK(out.c == doctest::Approx(expected[0]).epsilon(1e-15));
  CHECK(out.c == doctest::Approx(0.377758).epsilon(1e-12));  // frozen from the oracle
  CHECK(out.e == doctest::Approx(expected[1]).epsilon(1e-15));
  CHECK(out.i == doctest::Approx(expected[2]).epsilon(1e-15));
  CHECK(out.r == doctest::Approx(expected[3]).epsilon(1e-15));
  CHECK(out.d == doctest::Approx(expected[4]).epsilon(1e-15));
}

TEST_CASE("deterministic_step: no infection pressure when E = I = 0") {
  CompartmentState x = kX;
  x.e = 0.0;
  x.i = 0.0;
  const CompartmentState out = deterministic_step(x, kTheta);
  CHECK(out.e == 0.0);
  CHECK(out.i == 0.0);
  CHECK(out.r == x.r);
  CHECK(out.d == kTheta.phi_f * x.r);
}

TEST_CASE("deterministic_step rejects non-finite input") {
  CompartmentState bad = kX;
  bad.e = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(deterministic_step(bad, kTheta), std::invalid_argument);
  ParamVector bad_theta = kTheta;
  bad_theta.beta = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(deterministic_step(kX, bad_theta), std::invalid_argument);
}

TEST_CASE("deterministic_step: alpha=0 freezes c; beta=lambda=gamma=0 freeze E,I,R") {
  ParamVector theta = kTheta;
  theta.alpha = 0.0;
  CHECK(deterministic_step(kX, theta).c == kX.c);

  theta = ParamVector{0.01, 0.0, 0.0, 0.0, 0.5};
  const CompartmentState out = deterministic_step(kX, theta);
  CHECK(out.e == kX.e);
  CHECK(out.i == kX.i);
  CHECK(out.r == kX.r);
}

TEST_CASE("noiseless invariant: D stays phi_f * R when started consistent") {
  CompartmentState x = kX;
  x.d = kTheta.phi_f * x.r;
  for (int t = 0; t < 50; ++t) {
    x = deterministic_step(x, kTheta);
    CHECK(x.d == doctest::Approx(kTheta.phi_f * x.r).epsilon(1e-14));
  }
}

TEST_CASE("process_covariance: zero parameters give the zero matrix") {
  CHECK(process_covariance(ParamVector{}, 1000).isZero(0.0));
}

TEST_CASE("process_covariance matches the noise-channel construction entrywise") {
  const std::uint64_t p = 1000000;
  const double p2 = 1e12;
  const Matrix5 q = process_covariance(kTheta, p);

  const double a = kTheta.alpha, b = kTheta.beta, l = kTheta.lambda, g = kTheta.gamma,
               f = kTheta.phi_f;
  // Independent entry-by-entry transcription.
  double expected[5][5] = {{a, 0, 0, 0, 0},
                           {0, l + b, -l, 0, 0},
                           {0, -l, l + g, -g, -g * f},
                           {0, 0, -g, g, g * f},
                           {0, 0, -g * f, g * f, g * f * f}};
  for (int row = 0; row < 5; ++row) {
    for (int col = 0; col < 5; ++col) {
      CHECK(q(row, col) == doctest::Approx(expected[row][col] / p2).epsilon(1e-15));
    }
  }
  CHECK(q == q.transpose());
  CHECK_THROWS_AS(process_covariance(kTheta, 0), std::invalid_argument);
}

TEST_CASE("process_covariance is PSD for prior parameter draws") {
  PriorSpec priors;
  for (int k = 0; k < 200; ++k) {
    RngStream rng(99, substream(0, DrawPurpose::init, static_cast<std::uint32_t>(k)));
    const auto [x, theta] = sample_initial(priors, rng);
    const Matrix5 q = process_covariance(theta, 1000000);
    CHECK(q == q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix5> solver(q);
    CHECK(solver.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("process_noise_factor is an exact square root of the covariance") {
  const auto factor = process_noise_factor(kTheta, 12345);
  const Matrix5 q = process_covariance(kTheta, 12345);
  CHECK(((factor * factor.transpose()) - q).cwiseAbs().maxCoeff() <
        1e-14 * q.cwiseAbs().maxCoeff());
}

TEST_CASE("sample_next_state: fixed seed reproduces identical draws") {
  RngStream a(11, substream(2, DrawPurpose::state_noise, 5));
  RngStream b(11, substream(2, DrawPurpose::state_noise, 5));
  const CompartmentState sa = sample_next_state(kX, kTheta, 1000000, a);
  const CompartmentState sb = sample_next_state(kX, kTheta, 1000000, b);
  CHECK(sa.c == sb.c);
  CHECK(sa.e == sb.e);
  CHECK(sa.i == sb.i);
  CHECK(sa.r == sb.r);
  CHECK(sa.d == sb.d);
}

TEST_CASE("sample_next_state: huge population collapses to the deterministic step") {
  RngStream rng(1, substream(0, DrawPurpose::state_noise, 0));
  const CompartmentState draw = sample_next_state(kX, kTheta, 1000000000000000ull, rng);
  const CompartmentState mean = deterministic_step(kX, kTheta);
  CHECK(draw.c == doctest::Approx(mean.c).epsilon(1e-10));
  CHECK(draw.e == doctest::Approx(mean.e).epsilon(1e-6));
  CHECK(draw.i == doctest::Approx(mean.i).epsilon(1e-6));
}

TEST_CASE("sample_next_state: draws stay in the state region and match the mean") {
  const int n = 100000;
  const std::uint64_t population = 1000000;
  const CompartmentState mean = deterministic_step(kX, kTheta);
  const Matrix5 q = process_covariance(kTheta, population);

  Vector5 sum = Vector5::Zero();
  for (int k = 0; k < n; ++k) {
    RngStream rng(77, substream(1, DrawPurpose::state_noise, static_cast<std::uint32_t>(k)));
    const CompartmentState draw = sample_next_state(kX, kTheta, population, rng);
    CHECK(StateRegion::contains(draw));
    sum += draw.to_vector();
  }
  const Vector5 empirical = sum / n;
  const Vector5 mu = mean.to_vector();
  for (int k = 0; k < 5; ++k) {
    const double se = std::sqrt(q(k, k) / n);
    CHECK(std::abs(empirical[k] - mu[k]) <= 3.0 * se + 1e-18);
  }
}

TEST_CASE("propagate_gap: zero days is the identity, one day is one sample") {
  RngStream rng(3, substream(0, DrawPurpose::state_noise, 0));
  const CompartmentState same = propagate_gap(kX, kTheta, 0, 1000000, rng);
  CHECK(same.c == kX.c);
  CHECK(same.e == kX.e);

  RngStream r1(3, substream(4, DrawPurpose::state_noise, 9));
  RngStream r2(3, substream(4, DrawPurpose::state_noise, 9));
  const CompartmentState one = propagate_gap(kX, kTheta, 1, 1000000, r1);
  const CompartmentState direct = sample_next_state(kX, kTheta, 1000000, r2);
  CHECK(one.c == direct.c);
  CHECK(one.e == direct.e);
  CHECK(one.i == direct.i);
}

TEST_CASE("propagate_gap: vanishing covariance gives the iterated drift") {
  RngStream rng(8, substream(0, DrawPurpose::state_noise, 1));
  const CompartmentState out = propagate_gap(kX, kTheta, 3, 1000000000000000ull, rng);
  // Oracle: three hand iterations of the difference equations.
  double cur[5] = {kX.c, kX.e, kX.i, kX.r, kX.d};
  for (int t = 0; t < 3; ++t) {
    double next[5];
    oracle_step(cur, kTheta.alpha, kTheta.beta, kTheta.lambda, kTheta.gamma, kTheta.phi_f, next);
    for (int k = 0; k < 5; ++k) cur[k] = next[k];
  }
  CHECK(out.c == doctest::Approx(cur[0]).epsilon(1e-9));
  CHECK(out.e == doctest::Approx(cur[1]).epsilon(1e-6));
  CHECK(out.i == doctest::Approx(cur[2]).epsilon(1e-6));
  CHECK(out.r == doctest::Approx(cur[3]).epsilon(1e-6));
  CHECK(out.d == doctest::Approx(cur[4]).epsilon(1e-6));
}

TEST_CASE("r0: closed form, cancellation, homogeneity, domain error") {
  ParamVector theta = kTheta;
  theta.beta = theta.gamma = 0.25;
  CHECK(r0(kX, theta) == doctest::Approx(kX.c).epsilon(1e-15));

  CHECK(r0(kX, kTheta) == doctest::Approx(0.38 * 0.3 / 0.0787).epsilon(1e-14));

  ParamVector scaled = kTheta;
  scaled.beta *= 3.7;
  scaled.gamma *= 3.7;
  CHECK(r0(kX, scaled) == doctest::Approx(r0(kX, kTheta)).epsilon(1e-14));

  ParamVector zero_gamma = kTheta;
  zero_gamma.gamma = 0.0;
  CHECK_THROWS_AS(r0(kX, zero_gamma), std::domain_error);
}
