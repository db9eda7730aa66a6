#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace corrlab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// One Philox4x32-10 block: 10 rounds over `counter` under the 64-bit `key`.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

//---------------------------------------------------------------------------//
/*!
 * Counter-based random stream (Philox4x32-10).
 *
 * The key is the 64-bit seed; the 128-bit counter is (position, stream_index).
 * Two streams with equal (seed, stream_index) produce the same sequence, and
 * substreams are derived by hashing a block index into a fresh stream index,
 * so every work block draws from its own independent sequence no matter which
 * thread runs it.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index) noexcept
      : seed_(seed), stream_index_(stream_index) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  /// Independent child stream for work block `block`.
  RngStream substream(std::uint64_t block) const noexcept {
    return RngStream(seed_, splitmix64(splitmix64(stream_index_) ^ (block + 0x632BE59BD9B4E019ULL)));
  }

  /// Independent named stream for a separate purpose (kept apart from the
  /// block substreams of the same root).
  RngStream child(std::uint64_t tag) const noexcept {
    return RngStream(seed_, splitmix64(splitmix64(stream_index_ + 0xD1B54A32D192ED03ULL) ^ splitmix64(tag)));
  }

  std::uint32_t next_u32() noexcept {
    if (buffered_ == 0) refill();
    return buffer_[4 - buffered_--];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  double exponential() noexcept { return -std::log(uniform()); }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace corrlab
