#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace hetmean {

//! Raised for invalid arguments and violated preconditions.
class Error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! Observations held in non-decreasing order.
class Sample
{
public:
  //! Sorts a copy of `values` (stable). Throws on empty or non-finite input.
  static Sample ingest(std::span<const double> values);

  std::size_t size() const noexcept { return sorted_.size(); }
  std::span<const double> sorted() const noexcept { return sorted_; }

  //! k-th smallest value, 1-based.
  double order_statistic(std::size_t k) const;

  //! Number of observations in the closed interval [lo, hi].
  std::size_t count_between(double lo, double hi) const noexcept;

private:
  explicit Sample(std::vector<double> sorted)
    : sorted_(std::move(sorted))
  {}

  std::vector<double> sorted_;
};

//! Closed interval [lo, hi].
struct Interval
{
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo, double hi);

  double length() const noexcept { return hi - lo; }
  double midpoint() const noexcept { return std::midpoint(lo, hi); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const noexcept
  {
    return lo <= other.lo && other.hi <= hi;
  }

  //! [center - radius, center + radius]
  static Interval around(double center, double radius);

  friend bool operator==(const Interval&, const Interval&) = default;
};

//! Empty optional when the intervals are disjoint.
std::optional<Interval> intersect(const Interval& a, const Interval& b) noexcept;

//! Numerical constants of the acceptance and admissibility tests.
//! Defaults are rounded outputs of calibrate_constants at delta = 0.1.
struct Constants
{
  double delta = 0.1;
  double kappa = 8.0;
  double eta = 2.0;
  double xi = 4.0;
  double beta = 0.7978845608028654; // sqrt(2/pi)

  //! Throws if any field is out of range.
  void validate() const;
};

} // namespace hetmean
