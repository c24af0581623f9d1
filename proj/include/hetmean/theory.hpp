#pragma once

#include "hetmean/core.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hetmean {

//! Non-decreasing sequence of positive scales sigma_1 <= ... <= sigma_n.
class SigmaProfile
{
public:
  SigmaProfile(std::vector<double> sigmas, std::string label = "custom");

  std::size_t size() const noexcept { return sigmas_.size(); }
  std::span<const double> sigmas() const noexcept { return sigmas_; }
  double operator[](std::size_t i) const { return sigmas_[i]; }
  const std::string& label() const noexcept { return label_; }

  //! Same profile with every scale multiplied by `factor`.
  SigmaProfile scaled(double factor) const;

private:
  std::vector<double> sigmas_;
  std::string label_;
};

enum class FamilyKind
{
  gaussian,
  laplace
};

//! Unit-variance symmetric noise law.
struct Family
{
  FamilyKind kind = FamilyKind::gaussian;
  double phi_at_zero = 0.0;
  double beta = 0.0;

  static Family gaussian();
  //! Density exp(-sqrt(2)|x|)/sqrt(2).
  static Family laplace();
  static Family parse(std::string_view name);
  std::string_view name() const noexcept;
};

//! Probability mass of [-t, t] under the standardized family.
double phi_mass(const Family& family, double t);

//! P(Z <= x) for the standardized family.
double family_cdf(const Family& family, double x);

//! sum_i Phi(s / sigma_i), the expected count of A_s(mu).
double expected_count(const SigmaProfile& profile, const Family& family, double s);

//! #{i : sigma_i <= s}; zero below sigma_1.
std::size_t m_of_s(const SigmaProfile& profile, double s);

enum class Criterion
{
  exact,          // expected count from Phi
  bounded_density // sum_i min(1, 2 phi(0) s / sigma_i)
};

Criterion parse_criterion(std::string_view name);

bool is_admissible(const SigmaProfile& profile,
                   const Family& family,
                   double s,
                   double delta,
                   double kappa,
                   Criterion criterion = Criterion::exact);

//! Admissibility with an observed count D_s(mu) in place of its expectation.
//! For simulation diagnostics only.
bool is_admissible_observed(const SigmaProfile& profile,
                            std::size_t observed_count,
                            double s,
                            double delta,
                            double kappa);

/**
 * Smallest admissible length.
 *
 * m_s is constant on [sigma_(m), sigma_(m+1)) while the expected count grows
 * with s, so within each cell the left endpoint is the easiest to admit and
 * the infimum is always one of the distinct sigma values.
 */
std::optional<double> s_bar(const SigmaProfile& profile,
                            const Family& family,
                            double delta,
                            double kappa,
                            Criterion criterion = Criterion::exact);

//! Median-interval length bound (coverage with probability 1 - delta).
//! Requires 128 log(6/delta) <= n.
double median_interval_bound(const SigmaProfile& profile, double delta, double beta);

//! Moment bound on the k-th smallest |X_i|.
double gordon_moment_bound(const SigmaProfile& profile, std::size_t k, double p, double beta);

struct AdaptiveBound
{
  std::optional<double> s_bar;
  double median_term = 0.0;
  double value = 0.0; // min of the two terms
};

//! Bracketed quantity of the adaptive guarantee (leading constant not tracked).
AdaptiveBound adaptive_bound(const SigmaProfile& profile,
                             const Family& family,
                             double delta,
                             double kappa);

struct XiaBound
{
  bool applicable = false;
  double bound = 0.0;
};

XiaBound xia_bound(const SigmaProfile& profile, double delta);

//! sigma_{ceil(c log n)} sqrt(n) log^{3/2} n (leading constant not tracked).
double chierichetti_style_bound(const SigmaProfile& profile, double c);

//! Total expected mass sum_i P(X_i in [a, b]); endpoints may be infinite.
using IntervalMass = std::function<double(double a, double b)>;

inline constexpr std::size_t deviation_oracle_max_n = 512;

/**
 * sup over closed intervals [a, b] of |#{X_i in [a, b]} - mass(a, b)|.
 *
 * Endpoints range over the data points, their right/left neighbours in
 * floating point (standing in for open ends) and +-infinity.
 */
double uniform_interval_deviation(std::span<const double> values, const IntervalMass& mass);

struct DeviationRatios
{
  double deviation = 0.0;      // sup |count - mass|
  double expected_ratio = 0.0; // sup |count - mass| / (sqrt(mass T) + T)
  double observed_ratio = 0.0; // sup |count - mass| / (sqrt(count T) + T)
};

//! Same enumeration as uniform_interval_deviation, also reporting the
//! normalized deviations used to fit concentration constants.
DeviationRatios interval_deviation_ratios(std::span<const double> values,
                                          const IntervalMass& mass,
                                          double complexity);

//! Variant for continuous laws: mass(a, b) = cumulative(b) - cumulative(a),
//! with `cumulative` evaluated once per candidate endpoint.
DeviationRatios interval_deviation_ratios_cdf(std::span<const double> values,
                                              const std::function<double(double)>& cumulative,
                                              double complexity);

} // namespace hetmean
