#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace slowheat::rng {

// splitmix64 finalizer; used to derive substream ids.
std::uint64_t mix64(std::uint64_t z);

// Deterministic substream id from a (task, replica) pair.  Collision-free in
// practice for the stream counts used here; the id lands in the counter block
// of the generator, never in the key.
std::uint64_t substream(std::uint64_t task, std::uint64_t replica);

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline void philox_round(std::array<std::uint32_t, 4>& x,
                         const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t m0 = std::uint64_t(kMul0) * x[0];
  const std::uint64_t m1 = std::uint64_t(kMul1) * x[2];
  const std::uint32_t hi0 = std::uint32_t(m0 >> 32), lo0 = std::uint32_t(m0);
  const std::uint32_t hi1 = std::uint32_t(m1 >> 32), lo1 = std::uint32_t(m1);
  x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

// (0,1) double from 64 random bits: 53-bit mantissa, offset so 0 is excluded.
inline double to_unit(std::uint32_t lo, std::uint32_t hi) {
  const std::uint64_t u = std::uint64_t(lo) | (std::uint64_t(hi) << 32);
  return double(u >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace detail

// Philox 4x32, 10 rounds.  Counter-based: the output block is a pure function
// of (counter, key), so parallel replicas can carve up the counter space
// without any shared state.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    detail::philox_round(ctr, key);
    key[0] += detail::kWeyl0;
    key[1] += detail::kWeyl1;
  }
  return ctr;
}

// Stream of standard normals.  Key carries the master seed; counter words 2-3
// carry the stream id, words 0-1 a block index bumped once per Box-Muller
// pair.  Distinct (master, stream) pairs give independent streams, and the
// n-th draw of a stream never depends on scheduling.
class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint64_t stream)
      : key_{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32)},
        stream_lo_(std::uint32_t(stream)),
        stream_hi_(std::uint32_t(stream >> 32)) {}

  double next() {
    if (avail_ == 0) refill();
    return pair_[2 - avail_--];
  }

  void fill(double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = next();
  }

 private:
  void refill() {
    const auto block = philox4x32({std::uint32_t(block_),
                                   std::uint32_t(block_ >> 32), stream_lo_,
                                   stream_hi_},
                                  key_);
    ++block_;
    const double u1 = detail::to_unit(block[0], block[1]);
    const double u2 = detail::to_unit(block[2], block[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    pair_[0] = r * std::cos(detail::kTwoPi * u2);
    pair_[1] = r * std::sin(detail::kTwoPi * u2);
    avail_ = 2;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t block_ = 0;
  double pair_[2] = {0.0, 0.0};
  int avail_ = 0;
};

}  // namespace slowheat::rng
