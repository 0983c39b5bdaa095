#include "epifilter/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "test_util.hpp"

using namespace epifilter;

TEST_CASE("philox4x32-10 matches the published known-answer vectors") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  CHECK(philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu}) ==
        std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      {0xa4093822u, 0x299f31d0u}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, substream(3, DrawPurpose::state_noise, 17));
  RngStream b(42, substream(3, DrawPurpose::state_noise, 17));
  for (int k = 0; k < 100; ++k) CHECK(a.next_u32() == b.next_u32());

  RngStream c(42, substream(3, DrawPurpose::state_noise, 18));
  RngStream d(42, substream(3, DrawPurpose::param_kernel, 17));
  RngStream e(43, substream(3, DrawPurpose::state_noise, 17));
  RngStream base(42, substream(3, DrawPurpose::state_noise, 17));
  const std::uint32_t first = base.next_u32();
  CHECK(c.next_u32() != first);
  CHECK(d.next_u32() != first);
  CHECK(e.next_u32() != first);
}

TEST_CASE("substream packs generation, purpose and particle disjointly") {
  std::set<std::uint64_t> ids;
  for (std::uint32_t gen : {0u, 1u, 77u}) {
    for (auto purpose : {DrawPurpose::init, DrawPurpose::resample, DrawPurpose::display}) {
      for (std::uint32_t particle : {0u, 1u, 4999u}) {
        ids.insert(substream(gen, purpose, particle));
      }
    }
  }
  CHECK(ids.size() == 27);
}

TEST_CASE("uniform stays in [0,1), uniform_pos in (0,1]") {
  RngStream rng(7, 0);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("uniform and normal draws pass KS at the 1% level") {
  const std::size_t n = 100000;
  RngStream rng(2024, substream(0, DrawPurpose::init, 0));
  std::vector<double> uniforms(n), normals(n);
  for (auto& u : uniforms) u = rng.uniform();
  for (auto& z : normals) z = rng.normal();

  CHECK(test::ks_statistic(uniforms, [](double x) { return x; }) < test::ks_critical_1pct(n));
  CHECK(test::ks_statistic(normals, test::normal_cdf) < test::ks_critical_1pct(n));
}

TEST_CASE("normal moments are standard") {
  const std::size_t n = 100000;
  RngStream rng(5, substream(1, DrawPurpose::init, 0));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}
