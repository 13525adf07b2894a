#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace trc {

// Stream identifiers for the counter RNG. Every random draw in the project
// is keyed by (master seed, stream, block index), so results never depend on
// evaluation order or worker count.
enum class Stream : std::uint64_t {
  Message1 = 1,
  Message2,
  Dither1,
  Dither2,
  RelayNoise,
  Down1Noise,
  Down2Noise,
  Codebook,
  SecondMoment,
  RowSeed,
  Generic,
};

namespace detail {
// SplitMix64 finalizer (Steele/Lea/Flood mixing constants).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator: a SplitMix64 sequence whose starting state is a
// hash of (seed, stream, block). Output is identical on every platform for a
// given key, which is what makes parallel sweeps reproducible bit-for-bit.
// Gaussians use Box-Muller rather than std::normal_distribution because the
// stdlib algorithm is implementation-defined.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t block)
      : CounterRng(seed, static_cast<std::uint64_t>(stream), block) {}

  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
    state_ = detail::mix64(seed + 0x9e3779b97f4a7c15ull);
    state_ = detail::mix64(state_ ^ (stream * 0xbf58476d1ce4e5b9ull + 1));
    state_ = detail::mix64(state_ ^ (block * 0x94d049bb133111ebull + 1));
    stream_ = stream;
    block_ = block;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return detail::mix64(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_unit_open()));
    const double theta = 2.0 * std::numbers::pi * next_unit();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform integer in [0, bound) via the Lemire multiply-shift reduction.
  std::uint64_t next_index(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t block() const { return block_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable 64-bit hash of a byte string; used to derive per-row sweep seeds
// from configuration content so reordering a grid never changes a row.
inline std::uint64_t hash_bytes(const void* data, std::size_t len,
                                std::uint64_t seed = 0) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = detail::mix64(seed ^ (0x9e3779b97f4a7c15ull + len));
  for (std::size_t i = 0; i < len; ++i) {
    h = detail::mix64((h + p[i]) * 0xbf58476d1ce4e5b9ull);
  }
  return h;
}

}  // namespace trc
