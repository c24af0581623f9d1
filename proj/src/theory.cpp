#include "hetmean/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hetmean {

namespace {

void
require_delta(double delta)
{
  if (!(delta > 0.0 && delta < 1.0))
    throw Error("delta must lie in (0, 1)");
}

double
admissibility_log(std::size_t n, double delta)
{
  return std::log(2.0 * static_cast<double>(n) / delta);
}

bool
admissible_threshold(std::size_t m, double mass, double log_term, double kappa)
{
  return static_cast<double>(m) >= kappa * (std::sqrt(mass * log_term) + log_term);
}

// max over 1 <= j <= k of (k + 1 - j) / sum_{i >= j} 1/sigma_i.
double
harmonic_tail_ratio(std::span<const double> sigmas, std::size_t k)
{
  const std::size_t n = sigmas.size();
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;)
    suffix[i] = suffix[i + 1] + 1.0 / sigmas[i];
  double best = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
    best = std::max(best, static_cast<double>(k + 1 - j) / suffix[j - 1]);
  return best;
}

std::size_t
median_bound_index(std::size_t n, double delta)
{
  const double alpha = std::sqrt(2.0 * std::log(6.0 / delta));
  const double k = std::ceil(8.0 * alpha * std::sqrt(static_cast<double>(n)));
  return k >= static_cast<double>(n) ? n : static_cast<std::size_t>(k);
}

void
require_median_precondition(std::size_t n, double delta)
{
  require_delta(delta);
  if (128.0 * std::log(6.0 / delta) > static_cast<double>(n))
    throw Error("proposition precondition violated");
}

// Candidate endpoints for the interval supremum: data points, their
// floating-point neighbours and +-infinity.
struct IntervalCandidates
{
  std::vector<double> los;
  std::vector<double> his;
  std::vector<std::size_t> first; // index of first point >= los[a]
  std::vector<std::size_t> last;  // one past the last point <= his[b]

  explicit IntervalCandidates(std::span<const double> values)
  {
    if (values.size() > deviation_oracle_max_n)
      throw Error("oracle limited to small n");
    if (values.empty())
      throw Error("empty sample");
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    constexpr double inf = std::numeric_limits<double>::infinity();

    los.push_back(-inf);
    his.push_back(inf);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i > 0 && x[i] == x[i - 1])
        continue;
      los.push_back(x[i]);
      los.push_back(std::nextafter(x[i], inf));
      his.push_back(x[i]);
      his.push_back(std::nextafter(x[i], -inf));
    }
    for (double lo : los)
      first.push_back(static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), lo) - x.begin()));
    for (double hi : his)
      last.push_back(static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), hi) - x.begin()));
  }

  // visit(count, a, b) for every valid pair lo[a] <= hi[b].
  template <class Visit>
  void for_each(Visit&& visit) const
  {
    for (std::size_t a = 0; a < los.size(); ++a) {
      for (std::size_t b = 0; b < his.size(); ++b) {
        if (los[a] > his[b])
          continue;
        const double count = last[b] > first[a] ? static_cast<double>(last[b] - first[a]) : 0.0;
        visit(count, a, b);
      }
    }
  }
};

struct RatioAccumulator
{
  double complexity;
  DeviationRatios out;

  void add(double count, double mass)
  {
    const double dev = std::abs(count - mass);
    out.deviation = std::max(out.deviation, dev);
    out.expected_ratio =
      std::max(out.expected_ratio, dev / (std::sqrt(std::max(mass, 0.0) * complexity) + complexity));
    out.observed_ratio = std::max(out.observed_ratio, dev / (std::sqrt(count * complexity) + complexity));
  }
};

void
require_complexity(double complexity)
{
  if (!(complexity > 0.0))
    throw Error("complexity term must be positive");
}

} // namespace

SigmaProfile::SigmaProfile(std::vector<double> sigmas, std::string label)
  : sigmas_(std::move(sigmas))
  , label_(std::move(label))
{
  if (sigmas_.empty())
    throw Error("sigma profile must be non-empty");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i]))
      throw Error("sigma values must be finite and positive");
    if (i > 0 && sigmas_[i] < sigmas_[i - 1])
      throw Error("sigma profile must be non-decreasing");
  }
}

SigmaProfile
SigmaProfile::scaled(double factor) const
{
  std::vector<double> out(sigmas_);
  for (double& s : out)
    s *= factor;
  return SigmaProfile(std::move(out), label_);
}

Family
Family::gaussian()
{
  return { FamilyKind::gaussian, 1.0 / std::sqrt(2.0 * std::numbers::pi), std::sqrt(2.0 / std::numbers::pi) };
}

Family
Family::laplace()
{
  return { FamilyKind::laplace, 1.0 / std::numbers::sqrt2, std::numbers::sqrt2 };
}

Family
Family::parse(std::string_view name)
{
  if (name == "gaussian")
    return gaussian();
  if (name == "laplace")
    return laplace();
  throw Error("unknown family '" + std::string(name) + "'");
}

std::string_view
Family::name() const noexcept
{
  return kind == FamilyKind::gaussian ? "gaussian" : "laplace";
}

double
phi_mass(const Family& family, double t)
{
  if (!(t >= 0.0))
    throw Error("phi_mass needs t >= 0");
  if (family.kind == FamilyKind::gaussian)
    return std::erf(t / std::numbers::sqrt2);
  return -std::expm1(-std::numbers::sqrt2 * t);
}

double
family_cdf(const Family& family, double x)
{
  if (family.kind == FamilyKind::gaussian)
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double tail = 0.5 * std::exp(-std::numbers::sqrt2 * std::abs(x));
  return x < 0.0 ? tail : 1.0 - tail;
}

double
expected_count(const SigmaProfile& profile, const Family& family, double s)
{
  if (!(s >= 0.0))
    throw Error("s must be non-negative");
  double total = 0.0;
  for (double sigma : profile.sigmas())
    total += phi_mass(family, s / sigma);
  return total;
}

std::size_t
m_of_s(const SigmaProfile& profile, double s)
{
  if (!(s >= 0.0))
    return 0;
  const auto sig = profile.sigmas();
  return static_cast<std::size_t>(std::upper_bound(sig.begin(), sig.end(), s) - sig.begin());
}

Criterion
parse_criterion(std::string_view name)
{
  if (name == "exact")
    return Criterion::exact;
  if (name == "bounded_density")
    return Criterion::bounded_density;
  throw Error("unknown admissibility criterion '" + std::string(name) + "'");
}

bool
is_admissible(const SigmaProfile& profile,
              const Family& family,
              double s,
              double delta,
              double kappa,
              Criterion criterion)
{
  require_delta(delta);
  if (!(kappa > 0.0))
    throw Error("kappa must be positive");
  const std::size_t m = m_of_s(profile, s);
  if (m == 0)
    return false;
  const double log_term = admissibility_log(profile.size(), delta);
  // The square-root term is non-negative, so this alone rules s out.
  if (static_cast<double>(m) < kappa * log_term)
    return false;
  double mass = 0.0;
  if (criterion == Criterion::exact) {
    mass = expected_count(profile, family, s);
  } else {
    for (double sigma : profile.sigmas())
      mass += std::min(1.0, 2.0 * family.phi_at_zero * s / sigma);
  }
  return admissible_threshold(m, mass, log_term, kappa);
}

bool
is_admissible_observed(const SigmaProfile& profile,
                       std::size_t observed_count,
                       double s,
                       double delta,
                       double kappa)
{
  require_delta(delta);
  if (!(kappa > 0.0))
    throw Error("kappa must be positive");
  const std::size_t m = m_of_s(profile, s);
  return m > 0 && admissible_threshold(m,
                                       static_cast<double>(observed_count),
                                       admissibility_log(profile.size(), delta),
                                       kappa);
}

std::optional<double>
s_bar(const SigmaProfile& profile,
      const Family& family,
      double delta,
      double kappa,
      Criterion criterion)
{
  const auto sig = profile.sigmas();
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i + 1 < sig.size() && sig[i + 1] == sig[i])
      continue;
    if (is_admissible(profile, family, sig[i], delta, kappa, criterion))
      return sig[i];
  }
  return std::nullopt;
}

double
median_interval_bound(const SigmaProfile& profile, double delta, double beta)
{
  const std::size_t n = profile.size();
  require_median_precondition(n, delta);
  if (!(beta > 0.0))
    throw Error("beta must be positive");
  const std::size_t k = median_bound_index(n, delta);
  const double log_factor = std::max(std::log(3.0 / delta), std::log(static_cast<double>(n) + 1.0));
  return 8.0 * std::numbers::e * std::numbers::sqrt2 * log_factor / beta *
         harmonic_tail_ratio(profile.sigmas(), k);
}

double
gordon_moment_bound(const SigmaProfile& profile, std::size_t k, double p, double beta)
{
  if (k < 1 || k > profile.size())
    throw Error("order index k out of range");
  if (!(p >= 1.0))
    throw Error("moment order p must be >= 1");
  if (!(beta > 0.0))
    throw Error("beta must be positive");
  const double lead = std::max(p, std::log(static_cast<double>(k) + 1.0));
  return 4.0 * std::numbers::sqrt2 * lead / beta * harmonic_tail_ratio(profile.sigmas(), k);
}

AdaptiveBound
adaptive_bound(const SigmaProfile& profile, const Family& family, double delta, double kappa)
{
  const std::size_t n = profile.size();
  require_median_precondition(n, delta);
  AdaptiveBound out;
  out.s_bar = s_bar(profile, family, delta, kappa);
  const std::size_t k = median_bound_index(n, delta);
  out.median_term = std::log(static_cast<double>(n) / delta) / family.beta *
                    harmonic_tail_ratio(profile.sigmas(), k);
  out.value = out.s_bar ? std::min(*out.s_bar, out.median_term) : out.median_term;
  return out;
}

XiaBound
xia_bound(const SigmaProfile& profile, double delta)
{
  require_delta(delta);
  double harmonic = 0.0;
  for (double sigma : profile.sigmas())
    harmonic += 1.0 / sigma;
  const double n = static_cast<double>(profile.size());
  const double log_term = std::log(1.0 / delta);
  XiaBound out;
  out.applicable = std::sqrt(n * log_term) / harmonic <= 7.0 * std::numbers::sqrt2 * profile[0] / 10.0;
  out.bound = (10.0 / 7.0) * std::sqrt(2.0 * n * log_term) / harmonic;
  return out;
}

double
chierichetti_style_bound(const SigmaProfile& profile, double c)
{
  if (!(c >= 1.0))
    throw Error("constant c must be >= 1");
  const double n = static_cast<double>(profile.size());
  const double log_n = std::log(n);
  const double index = std::ceil(c * log_n);
  if (index > n || index < 1.0)
    throw Error("profile index c log n exceeds n");
  const double sigma = profile[static_cast<std::size_t>(index) - 1];
  return sigma * std::sqrt(n) * std::pow(log_n, 1.5);
}

double
uniform_interval_deviation(std::span<const double> values, const IntervalMass& mass)
{
  const IntervalCandidates cand(values);
  double best = 0.0;
  cand.for_each([&](double count, std::size_t a, std::size_t b) {
    best = std::max(best, std::abs(count - mass(cand.los[a], cand.his[b])));
  });
  return best;
}

DeviationRatios
interval_deviation_ratios(std::span<const double> values, const IntervalMass& mass, double complexity)
{
  require_complexity(complexity);
  const IntervalCandidates cand(values);
  RatioAccumulator acc{ complexity, {} };
  cand.for_each([&](double count, std::size_t a, std::size_t b) {
    acc.add(count, mass(cand.los[a], cand.his[b]));
  });
  return acc.out;
}

DeviationRatios
interval_deviation_ratios_cdf(std::span<const double> values,
                              const std::function<double(double)>& cumulative,
                              double complexity)
{
  require_complexity(complexity);
  const IntervalCandidates cand(values);
  std::vector<double> at_lo;
  for (double lo : cand.los)
    at_lo.push_back(cumulative(lo));
  std::vector<double> at_hi;
  for (double hi : cand.his)
    at_hi.push_back(cumulative(hi));
  RatioAccumulator acc{ complexity, {} };
  cand.for_each([&](double count, std::size_t a, std::size_t b) { acc.add(count, at_hi[b] - at_lo[a]); });
  return acc.out;
}

} // namespace hetmean
