#include "epifilter/rng.hpp"

#include <cmath>

namespace epifilter {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t* lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *lo = static_cast<std::uint32_t>(p);
  return static_cast<std::uint32_t>(p >> 32);
}

inline std::array<std::uint32_t, 4> philox_round(const std::array<std::uint32_t, 4>& ctr,
                                                 const std::array<std::uint32_t, 2>& key) {
  std::uint32_t lo0, lo1;
  const std::uint32_t hi0 = mulhi(kPhiloxM0, ctr[0], &lo0);
  const std::uint32_t hi1 = mulhi(kPhiloxM1, ctr[2], &lo1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(const std::array<std::uint32_t, 4>& counter,
                                           const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> ctr = counter;
  std::array<std::uint32_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    ctr = philox_round(ctr, k);
  }
  return ctr;
}

std::uint64_t substream(std::uint32_t generation, DrawPurpose purpose, std::uint32_t particle) {
  return (static_cast<std::uint64_t>(generation & 0xFFFFFFu) << 40) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(purpose) & 0xFFu) << 32) |
         static_cast<std::uint64_t>(particle);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_words_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> counter = {static_cast<std::uint32_t>(block_),
                                                static_cast<std::uint32_t>(block_ >> 32),
                                                stream_words_[0], stream_words_[1]};
  buf_ = philox4x32_10(counter, key_);
  ++block_;
  pos_ = 0;
}

std::uint32_t RngStream::next_u32() {
  if (pos_ >= 4) refill();
  return buf_[pos_++];
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

}  // namespace epifilter
