#include "hetmean/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace hetmean {

namespace {

// Window [i, j] (0-based) fits inside an interval of half-length s centred at
// its own midpoint.
bool
fits(std::span<const double> x, std::size_t i, std::size_t j, double s)
{
  const double c = std::midpoint(x[i], x[j]);
  return c - s <= x[i] && x[j] <= c + s;
}

// For each left index i, the largest j with window [i, j] fitting.
std::vector<std::size_t>
right_reach(std::span<const double> x, double s)
{
  const std::size_t n = x.size();
  std::vector<std::size_t> reach(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    j = std::max(j, i);
    while (j + 1 < n && fits(x, i, j + 1, s))
      ++j;
    reach[i] = j;
  }
  return reach;
}

void
require_length(double s)
{
  if (!(s >= 0.0) || !std::isfinite(s))
    throw Error("interval half-length must be finite and non-negative");
}

} // namespace

GridMode
parse_grid_mode(std::string_view name)
{
  if (name == "dyadic")
    return GridMode::dyadic;
  if (name == "pairwise")
    return GridMode::pairwise;
  throw Error("unknown grid mode '" + std::string(name) + "'");
}

std::string_view
to_string(GridMode mode)
{
  return mode == GridMode::dyadic ? "dyadic" : "pairwise";
}

double
sample_mean(const Sample& sample)
{
  const auto x = sample.sorted();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double
weighted_mean_oracle(std::span<const double> values, std::span<const double> sigmas)
{
  if (values.size() != sigmas.size())
    throw Error("values and sigmas differ in length");
  if (values.empty())
    throw Error("empty sample");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(sigmas[i] > 0.0))
      throw Error("sigma must be positive");
    const double w = 1.0 / (sigmas[i] * sigmas[i]);
    num += w * values[i];
    den += w;
  }
  return num / den;
}

double
sample_median(const Sample& sample)
{
  const std::size_t n = sample.size();
  return sample.order_statistic(n % 2 == 0 ? n / 2 : (n + 1) / 2);
}

double
median_interval_alpha(double delta)
{
  if (!(delta > 0.0 && delta < 1.0))
    throw Error("delta must lie in (0, 1)");
  return std::sqrt(2.0 * std::log(6.0 / delta));
}

Interval
median_interval(const Sample& sample, double alpha)
{
  if (!(alpha > 0.0))
    throw Error("alpha must be positive");
  const std::size_t n = sample.size();
  const double k_real = std::ceil(alpha * std::sqrt(static_cast<double>(n)));
  const std::size_t k = k_real >= static_cast<double>(n) ? n : static_cast<std::size_t>(k_real);
  const std::size_t c = n / 2;
  const std::size_t lo = c > k ? c - k : 1;
  const std::size_t hi = std::min(n, c + k);
  return Interval(sample.order_statistic(std::max<std::size_t>(lo, 1)),
                  sample.order_statistic(hi));
}

std::size_t
count_in(const Sample& sample, double x, double s)
{
  require_length(s);
  return sample.count_between(x - s, x + s);
}

ModalResult
modal_interval(const Sample& sample, double s)
{
  require_length(s);
  const auto x = sample.sorted();
  const std::size_t n = x.size();
  const auto reach = right_reach(x, s);

  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i)
    best = std::max(best, reach[i] - i + 1);

  ModalResult out;
  out.count = best;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + best <= n; ++i) {
    const std::size_t j = i + best - 1;
    if (reach[i] < j)
      continue;
    const double width = x[j] - x[i];
    if (width < best_width) {
      best_width = width;
      out.window_lo_index = i + 1;
      out.window_hi_index = j + 1;
      out.center = std::midpoint(x[i], x[j]);
    }
  }
  return out;
}

std::size_t
max_count_excluding(const Sample& sample, double s, double center, double exclusion_radius)
{
  require_length(s);
  if (!(exclusion_radius >= 0.0))
    throw Error("exclusion radius must be non-negative");
  const auto x = sample.sorted();
  const std::size_t n = x.size();
  const auto reach = right_reach(x, s);

  // A window [i, j] can be centred anywhere in [x_j - s, x_i + s].
  const double left_edge = center - exclusion_radius;
  const double right_edge = center + exclusion_radius;
  // Windows ending before index left_end admit a centre <= left_edge.
  const auto past = std::upper_bound(x.begin(), x.end(), left_edge + s);
  const std::size_t left_end = static_cast<std::size_t>(past - x.begin());

  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] + s >= right_edge) {
      best = std::max(best, reach[i] - i + 1);
      continue;
    }
    if (i < left_end) {
      const std::size_t j = std::min(reach[i], left_end - 1);
      best = std::max(best, j - i + 1);
    }
  }
  return best;
}

AcceptDecision
accept(const Sample& sample, double s, const Constants& constants)
{
  constants.validate();
  AcceptDecision out;
  out.modal = modal_interval(sample, s);
  const double log_term =
    std::log(2.0 * static_cast<double>(sample.size()) / constants.delta);
  const double count = static_cast<double>(out.modal.count);
  out.far_count = max_count_excluding(sample, s, out.modal.center, 8.0 * s);
  const double margin = constants.eta * (std::sqrt(count * log_term) + log_term);
  out.accepted = count >= constants.xi * log_term &&
                 static_cast<double>(out.far_count) <= count - margin;
  return out;
}

std::vector<double>
candidate_lengths(const Interval& median_iv, GridMode mode, const Sample& sample)
{
  const double len = median_iv.length();
  std::vector<double> out;
  if (mode == GridMode::dyadic) {
    if (len == 0.0) {
      out.push_back(0.0);
      return out;
    }
    for (int i = 0; i <= 40; ++i)
      out.push_back(std::ldexp(len, -i));
    return out;
  }

  const auto x = sample.sorted();
  if (x.size() > pairwise_max_n)
    throw Error("pairwise grid limited to n <= " + std::to_string(pairwise_max_n));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double half = (x[j] - x[i]) / 2.0;
      if (half > len)
        break;
      out.push_back(half);
    }
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AdaptiveReport
adaptive_estimate(const Sample& sample, const Constants& constants, GridMode mode)
{
  constants.validate();
  AdaptiveReport report;
  report.alpha = median_interval_alpha(constants.delta);
  report.median_interval = median_interval(sample, report.alpha);
  const double max_len = report.median_interval.length();

  std::optional<Interval> running;
  bool emptied = false;
  for (double s : candidate_lengths(report.median_interval, mode, sample)) {
    if (s > max_len)
      continue;
    const auto decision = accept(sample, s, constants);
    if (!decision.accepted)
      continue;
    report.accepted_lengths.push_back(s);
    report.finest_modal = decision.modal;
    report.finest_length = s;
    if (emptied)
      continue;
    const auto band = Interval::around(decision.modal.center, 8.0 * s);
    running = running ? intersect(*running, band) : std::optional<Interval>(band);
    if (!running)
      emptied = true;
  }

  std::optional<Interval> final_iv;
  if (running)
    final_iv = intersect(*running, report.median_interval);
  if (final_iv) {
    report.final_interval = *final_iv;
    report.fallback_used = false;
  } else {
    report.final_interval = report.median_interval;
    report.fallback_used = true;
  }
  report.estimate = report.final_interval.midpoint();
  return report;
}

double
modal_mean(const Sample& sample, const Interval& interval)
{
  const auto x = sample.sorted();
  auto first = std::lower_bound(x.begin(), x.end(), interval.lo);
  auto last = std::upper_bound(first, x.end(), interval.hi);
  if (first == last)
    throw Error("empty modal interval");
  return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

} // namespace hetmean
