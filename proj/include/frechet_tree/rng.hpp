#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace frechet_tree {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based stream: the key is the 64-bit seed, the counter carries the
/// 64-bit stream id and a 64-bit block index. Streams with different ids are
/// independent, so per-trial streams can be consumed in any order.
///
/// Each call to uniform() consumes one 64-bit word (half a Philox block).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t words_consumed() const noexcept { return words_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t words_ = 0;
  std::array<std::uint32_t, 4> block_{};
};

}  // namespace frechet_tree
