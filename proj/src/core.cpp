#include "hetmean/core.hpp"

#include <algorithm>

namespace hetmean {

Sample
Sample::ingest(std::span<const double> values)
{
  if (values.empty())
    throw Error("empty sample");
  for (double v : values) {
    if (!std::isfinite(v))
      throw Error("non-finite observation");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return Sample(std::move(sorted));
}

double
Sample::order_statistic(std::size_t k) const
{
  if (k < 1 || k > sorted_.size())
    throw Error("order statistic index out of range");
  return sorted_[k - 1];
}

std::size_t
Sample::count_between(double lo, double hi) const noexcept
{
  if (!(lo <= hi))
    return 0;
  auto first = std::lower_bound(sorted_.begin(), sorted_.end(), lo);
  auto last = std::upper_bound(first, sorted_.end(), hi);
  return static_cast<std::size_t>(last - first);
}

Interval::Interval(double lo, double hi)
  : lo(lo)
  , hi(hi)
{
  if (!(lo <= hi))
    throw Error("invalid interval: lo > hi");
}

Interval
Interval::around(double center, double radius)
{
  if (!(radius >= 0.0))
    throw Error("interval radius must be non-negative");
  return Interval(center - radius, center + radius);
}

std::optional<Interval>
intersect(const Interval& a, const Interval& b) noexcept
{
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  if (lo > hi)
    return std::nullopt;
  Interval out;
  out.lo = lo;
  out.hi = hi;
  return out;
}

void
Constants::validate() const
{
  if (!(delta > 0.0 && delta < 1.0))
    throw Error("delta must lie in (0, 1)");
  if (!(kappa > 0.0))
    throw Error("kappa must be positive");
  if (!(eta > 0.0))
    throw Error("eta must be positive");
  if (!(xi > 0.0))
    throw Error("xi must be positive");
  if (!(beta > 0.0))
    throw Error("beta must be positive");
}

} // namespace hetmean
