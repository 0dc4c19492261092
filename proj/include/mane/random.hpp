#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace mane {

/// Philox4x32-10 counter-based generator. A stream is fully determined by
/// (seed, stream id), so paths can be generated in any order or thread.
class Philox {
 public:
  using result_type = std::uint32_t;

  Philox(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      block_ = round(ctr_, key_);
      if (++ctr_[0] == 0) ++ctr_[1];
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform on (0, 1), never exactly 0 or 1.
  double uniform() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block round(Block c, Key k) {
    constexpr std::uint32_t kM0 = 0xD2511F53;
    constexpr std::uint32_t kM1 = 0xCD9E8D57;
    constexpr std::uint32_t kW0 = 0x9E3779B9;
    constexpr std::uint32_t kW1 = 0xBB67AE85;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kW0;
      k[1] += kW1;
    }
    return c;
  }

  Key key_;
  Block ctr_;
  Block block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mane
