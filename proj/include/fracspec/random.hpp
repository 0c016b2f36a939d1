#ifndef FRACSPEC_RANDOM_HPP
#define FRACSPEC_RANDOM_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace fracspec {

/**
 * Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
 * numbers: as easy as 1, 2, 3", SC'11).
 *
 * A block is the bijection philox(counter, key) of a 128-bit counter under a
 * 64-bit key. Seeding is documented and scheduling independent:
 *
 *   key     = (seed & 0xffffffff, seed >> 32)
 *   counter = (block & 0xffffffff, block >> 32, stream & 0xffffffff, stream >> 32)
 *
 * The engine walks `block` = 0, 1, 2, ... and emits the four 32-bit words of
 * each block in order, so (seed, stream) fully determines the sequence.
 * Satisfies UniformRandomBitGenerator and may feed any <random> distribution.
 */
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 4) {
      buffer_ = generate({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)},
                         key_);
      ++block_;
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// The raw ten-round bijection.
  static Block generate(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int pos_ = 4;
};

/// Standard normal draws from a (seed, stream) pair.
class NormalSource {
 public:
  NormalSource(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  double operator()() { return dist_(engine_); }

  template <class It>
  void fill(It first, It last) {
    for (; first != last; ++first) *first = dist_(engine_);
  }

 private:
  Philox4x32 engine_;
  std::normal_distribution<double> dist_;
};

}  // namespace fracspec

#endif  // FRACSPEC_RANDOM_HPP
