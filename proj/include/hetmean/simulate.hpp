#pragma once

#include "hetmean/core.hpp"
#include "hetmean/estimators.hpp"
#include "hetmean/rng.hpp"
#include "hetmean/theory.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hetmean {

enum class ProfileKind
{
  equal,
  two_level,
  alpha_mixture,
  quadratic,
  subset_of_signals,
  custom
};

ProfileKind parse_profile_kind(std::string_view name);
std::string_view to_string(ProfileKind kind);

/**
 * Declarative sigma profile.
 *
 * Parameters per kind (defaults in brackets):
 *   equal              sigma [1]
 *   two_level          m, sigma [1], sigma_prime          (sigma < sigma_prime)
 *   alpha_mixture      alpha, c [1]                       ceil(c log n) ones, then n^alpha
 *   quadratic          c [1]                              sigma_i = c i
 *   subset_of_signals  m, sigma [1], sigma_prime [n]      (sigma <= 1)
 *   custom             uses `custom_sigmas`, sorted on use
 */
struct ProfileSpec
{
  ProfileKind kind = ProfileKind::equal;
  std::map<std::string, double> params;
  std::size_t n = 0;
  std::vector<double> custom_sigmas;

  //! Same spec at a different sample size.
  ProfileSpec with_n(std::size_t new_n) const;
};

//! Parameter names accepted by each kind.
std::vector<std::string> profile_parameters(ProfileKind kind);

SigmaProfile make_profile(const ProfileSpec& spec);

//! Draws one standardized noise value.
using NoiseSampler = std::function<double(Philox&)>;

NoiseSampler family_sampler(const Family& family);

/**
 * n draws X_i = mu + sigma_i Z_i, returned in shuffled order so estimators
 * never see the sigma-sorted arrangement.
 */
std::vector<double> gen_sample(Philox& rng, double mu, const SigmaProfile& profile, const Family& family);
std::vector<double> gen_sample(Philox& rng, double mu, const SigmaProfile& profile, const NoiseSampler& noise);

//! In-place Fisher-Yates shuffle driven by `rng`.
void shuffle(std::vector<double>& values, Philox& rng);

enum class DeltaRule
{
  fixed,    // use constants.delta
  inverse_n // delta = 1/n
};

DeltaRule parse_delta_rule(std::string_view name);
std::string_view to_string(DeltaRule rule);

struct ExperimentConfig
{
  ProfileSpec profile;
  Family family = Family::gaussian();
  double mu = 0.0;
  Constants constants;
  DeltaRule delta_rule = DeltaRule::fixed;
  GridMode mode = GridMode::dyadic;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> n_grid;
  // Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;

  //! Constants in force at sample size n (delta resolved by `delta_rule`).
  Constants constants_at(std::size_t n) const;
  void validate() const;
};

enum class Estimator
{
  mean,
  median,
  oracle_weighted,
  modal_sbar,
  adaptive,
  modal_mean
};

inline constexpr std::size_t estimator_count = 6;
inline constexpr Estimator all_estimators[estimator_count] = {
  Estimator::mean,      Estimator::median,   Estimator::oracle_weighted,
  Estimator::modal_sbar, Estimator::adaptive, Estimator::modal_mean,
};

std::string_view to_string(Estimator e);

struct TrialRecord
{
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  // |estimate - mu| per estimator, indexed by Estimator. NaN for modal_sbar
  // when no admissible length exists.
  double errors[estimator_count] = {};
  bool covered_by_median_interval = false;
  std::optional<bool> modal_within_4s;
  std::size_t accepted_count = 0;

  double error(Estimator e) const { return errors[static_cast<std::size_t>(e)]; }
};

//! Trials at the config's own profile size, in trial-index order.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

//! Trials for a single size n (overrides profile.n and resolves delta).
std::vector<TrialRecord> run_experiment_at(const ExperimentConfig& config, std::size_t n);

struct GridRun
{
  std::size_t n = 0;
  double delta = 0.0;
  std::vector<TrialRecord> records;
};

//! One run per entry of n_grid, or a single run when n_grid is empty.
std::vector<GridRun> run_grid(const ExperimentConfig& config);

struct ErrorStats
{
  double median = 0.0;
  double q90 = 0.0;
  double mean = 0.0;
  std::size_t defined = 0; // trials where the estimator produced a value
};

struct Summary
{
  std::size_t trials = 0;
  ErrorStats stats[estimator_count];
  double coverage_median_interval = 0.0;
  // NaN when no trial had an admissible length.
  double coverage_modal_4s = 0.0;
  double accepted_mean = 0.0;
  std::size_t accepted_min = 0;
  std::size_t accepted_max = 0;

  const ErrorStats& at(Estimator e) const { return stats[static_cast<std::size_t>(e)]; }
};

//! Linear-interpolation quantile of `values` (sorted internally), q in [0, 1].
double quantile(std::vector<double> values, double q);

Summary summarize(const std::vector<TrialRecord>& records);

//! Least-squares slope of log(y) against log(x); NaN if any y <= 0.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CalibrationResult
{
  double kappa1 = 0.0; // fitted constant of the expected-count deviation bound
  double kappa2 = 0.0; // fitted constant of the observed-count deviation bound
  Constants suggested;
  std::vector<std::size_t> sizes;
  std::vector<double> size_kappa1; // per-size (1 - delta)-quantiles
  std::vector<double> size_kappa2;
  std::size_t trials = 0;
};

/**
 * Fits the concentration constants of the uniform interval deviation bound
 * on i.i.d. reference samples for n in {64, 128, 256, 512}.
 *
 * For each sample the statistic sup |count - mass| / (sqrt(v T) + T) is
 * computed with T = 2 log(n / 2) and v the expected (kappa1) or observed
 * (kappa2) count; each constant is the empirical (1 - delta)-quantile.
 */
CalibrationResult calibrate_constants(const Family& family,
                                      double delta,
                                      std::size_t trials,
                                      std::uint64_t seed);

} // namespace hetmean
