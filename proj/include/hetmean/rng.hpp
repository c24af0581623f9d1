#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hetmean {

//! SplitMix64 finalizer; used to derive stream keys.
constexpr std::uint64_t
mix64(std::uint64_t z) noexcept
{
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

//! Key of the independent substream for (master_seed, stream_index).
constexpr std::uint64_t
substream_key(std::uint64_t master_seed, std::uint64_t stream_index) noexcept
{
  return mix64(mix64(master_seed) ^ mix64(stream_index + 0x632BE59BD9B4E019ULL));
}

/**
 * Philox4x32-10 counter-based generator.
 *
 * The output is a pure function of (key, counter), so every substream is
 * reproducible on its own. Satisfies UniformRandomBitGenerator.
 */
class Philox
{
public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key) noexcept
    : key_{ static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32) }
  {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  //! Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;

  //! Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  double gaussian() noexcept;

  //! Unit-variance Laplace draw.
  double laplace() noexcept;

  //! One Philox block: 10 rounds applied to `counter` under `key`.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace hetmean
