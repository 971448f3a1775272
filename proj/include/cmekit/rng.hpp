#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace cmekit {

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// One Philox4x32 block: ten rounds over `counter` under the 64-bit key.
PhiloxBlock philox4x32_10(PhiloxBlock counter, std::array<std::uint32_t, 2> key);

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). The 64-bit seed is the key; the stream
/// index occupies the high half of the 128-bit counter, so streams with
/// different indices never overlap.
///
/// Satisfies UniformRandomBitGenerator with 32-bit output.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in (0, 1]; safe for -log.
  double uniform_pos() { return 1.0 - uniform(); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  static constexpr const char* algorithm() { return "philox4x32-10"; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<result_type, 4> buffer_{};
  int pos_ = 4;
};

}  // namespace cmekit
