#pragma once

#include <array>
#include <cstdint>

namespace epifilter {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3", SC'11).  Chosen because substreams are
// addressed by a (seed, stream id) pair with no sequential seeding step, so
// per-particle randomness depends only on its key and never on which worker
// draws it.  The block function is pinned here; golden outputs rely on it.
std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key);

// What a draw is for.  Separating purposes keeps e.g. display-only
// propagation from consuming the numbers the filter itself uses.
enum class DrawPurpose : std::uint32_t {
  init = 0,         // prior draws for particle initialization
  resample = 1,     // ancestor selection uniforms
  param_kernel = 2, // kernel-shrinkage parameter regeneration
  state_noise = 3,  // stochastic state propagation inside the filter
  display = 4,      // prior-predictive propagation for unobserved days
  obs_noise = 5,    // synthetic observation noise (simulator)
  scenario = 6      // simulator latent trajectories
};

// Builds the 64-bit substream id from (time index, purpose, particle index).
// Layout: [gen:24 | purpose:8 | particle:32].
std::uint64_t substream(std::uint32_t generation, DrawPurpose purpose, std::uint32_t particle);

// One independent random stream: a Philox key/counter pair plus small
// buffers for blockwise generation and the Box-Muller spare.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0,1), 53-bit resolution.
  double uniform();
  // Uniform on (0,1]; safe to feed into log().
  double uniform_pos();
  // Standard normal via Box-Muller (pinned transform, no std:: distributions).
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_words_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace epifilter
