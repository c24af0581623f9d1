#include "hetmean/rng.hpp"

#include <cmath>
#include <numbers>

namespace hetmean {

namespace {

constexpr std::uint32_t mul0 = 0xD2511F53U;
constexpr std::uint32_t mul1 = 0xCD9E8D57U;
constexpr std::uint32_t weyl0 = 0x9E3779B9U;
constexpr std::uint32_t weyl1 = 0xBB67AE85U;

} // namespace

std::array<std::uint32_t, 4>
Philox::block(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept
{
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += weyl0;
      key[1] += weyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(mul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(mul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = { hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0 };
  }
  return ctr;
}

void
Philox::refill() noexcept
{
  buffer_ = block({ static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32), 0U, 0U },
                  key_);
  ++counter_;
  used_ = 0;
}

Philox::result_type
Philox::operator()() noexcept
{
  if (used_ > 2)
    refill();
  const std::uint64_t hi = buffer_[used_];
  const std::uint64_t lo = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double
Philox::uniform() noexcept
{
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t
Philox::below(std::uint64_t bound) noexcept
{
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r = (*this)();
  while (r >= limit)
    r = (*this)();
  return r % bound;
}

double
Philox::gaussian() noexcept
{
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double
Philox::laplace() noexcept
{
  const double u = uniform() - 0.5;
  const double magnitude = -std::log1p(-2.0 * std::abs(u)) / std::numbers::sqrt2;
  return u < 0.0 ? -magnitude : magnitude;
}

} // namespace hetmean
