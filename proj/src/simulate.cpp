#include "hetmean/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

namespace hetmean {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double
param(const ProfileSpec& spec, const std::string& name, std::optional<double> fallback = std::nullopt)
{
  auto it = spec.params.find(name);
  if (it != spec.params.end())
    return it->second;
  if (!fallback)
    throw Error("profile '" + std::string(to_string(spec.kind)) + "' needs parameter '" + name + "'");
  return *fallback;
}

void
check_known_params(const ProfileSpec& spec)
{
  const auto allowed = profile_parameters(spec.kind);
  for (const auto& [key, value] : spec.params) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error("profile '" + std::string(to_string(spec.kind)) + "' has unknown parameter '" + key + "'");
  }
}

std::size_t
count_param(double value, std::size_t n, const char* what)
{
  if (!(value >= 0.0) || value != std::floor(value))
    throw Error(std::string(what) + " must be a non-negative integer");
  if (value > static_cast<double>(n))
    throw Error(std::string(what) + " exceeds n");
  return static_cast<std::size_t>(value);
}

// Values and the true scale of each one, after shuffling.
void
draw(Philox& rng,
     double mu,
     const SigmaProfile& profile,
     const NoiseSampler& noise,
     std::vector<double>& values,
     std::vector<double>& sigmas)
{
  const std::size_t n = profile.size();
  values.resize(n);
  sigmas.assign(profile.sigmas().begin(), profile.sigmas().end());
  for (std::size_t i = 0; i < n; ++i)
    values[i] = mu + sigmas[i] * noise(rng);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
    std::swap(sigmas[i - 1], sigmas[j]);
  }
}

struct TrialContext
{
  const ExperimentConfig& config;
  SigmaProfile profile;
  Constants constants;
  std::optional<double> sbar;
  NoiseSampler noise;
};

TrialRecord
run_trial(const TrialContext& ctx, std::size_t t)
{
  const double mu = ctx.config.mu;
  TrialRecord rec;
  rec.trial_index = t;
  rec.seed = substream_key(ctx.config.master_seed, t);
  Philox rng(rec.seed);

  std::vector<double> values;
  std::vector<double> sigmas;
  draw(rng, mu, ctx.profile, ctx.noise, values, sigmas);
  const Sample sample = Sample::ingest(values);

  auto set = [&](Estimator e, double v) { rec.errors[static_cast<std::size_t>(e)] = v; };
  set(Estimator::mean, std::abs(sample_mean(sample) - mu));
  set(Estimator::median, std::abs(sample_median(sample) - mu));
  set(Estimator::oracle_weighted, std::abs(weighted_mean_oracle(values, sigmas) - mu));

  const auto report = adaptive_estimate(sample, ctx.constants, ctx.config.mode);
  set(Estimator::adaptive, std::abs(report.estimate - mu));
  rec.covered_by_median_interval = report.median_interval.contains(mu);
  rec.accepted_count = report.accepted_lengths.size();

  if (ctx.sbar) {
    const auto modal = modal_interval(sample, *ctx.sbar);
    const double err = std::abs(modal.center - mu);
    set(Estimator::modal_sbar, err);
    rec.modal_within_4s = err <= 4.0 * *ctx.sbar;
  } else {
    set(Estimator::modal_sbar, nan);
  }

  const Interval averaging = report.accepted_lengths.empty()
                               ? report.final_interval
                               : Interval::around(report.finest_modal.center, report.finest_length);
  set(Estimator::modal_mean, std::abs(modal_mean(sample, averaging) - mu));
  return rec;
}

} // namespace

ProfileKind
parse_profile_kind(std::string_view name)
{
  static constexpr std::pair<std::string_view, ProfileKind> table[] = {
    { "equal", ProfileKind::equal },
    { "two_level", ProfileKind::two_level },
    { "alpha_mixture", ProfileKind::alpha_mixture },
    { "quadratic", ProfileKind::quadratic },
    { "subset_of_signals", ProfileKind::subset_of_signals },
    { "custom", ProfileKind::custom },
  };
  for (const auto& [key, kind] : table) {
    if (key == name)
      return kind;
  }
  throw Error("unknown profile kind '" + std::string(name) + "'");
}

std::string_view
to_string(ProfileKind kind)
{
  switch (kind) {
    case ProfileKind::equal:
      return "equal";
    case ProfileKind::two_level:
      return "two_level";
    case ProfileKind::alpha_mixture:
      return "alpha_mixture";
    case ProfileKind::quadratic:
      return "quadratic";
    case ProfileKind::subset_of_signals:
      return "subset_of_signals";
    case ProfileKind::custom:
      return "custom";
  }
  return "custom";
}

ProfileSpec
ProfileSpec::with_n(std::size_t new_n) const
{
  ProfileSpec out = *this;
  out.n = new_n;
  return out;
}

std::vector<std::string>
profile_parameters(ProfileKind kind)
{
  switch (kind) {
    case ProfileKind::equal:
      return { "sigma" };
    case ProfileKind::two_level:
    case ProfileKind::subset_of_signals:
      return { "m", "sigma", "sigma_prime" };
    case ProfileKind::alpha_mixture:
      return { "alpha", "c" };
    case ProfileKind::quadratic:
      return { "c" };
    case ProfileKind::custom:
      break;
  }
  return {};
}

SigmaProfile
make_profile(const ProfileSpec& spec)
{
  const std::string label(to_string(spec.kind));
  if (spec.kind == ProfileKind::custom) {
    check_known_params(spec);
    std::vector<double> sig = spec.custom_sigmas;
    if (spec.n != 0 && spec.n != sig.size())
      throw Error("custom profile length differs from n");
    std::sort(sig.begin(), sig.end());
    return SigmaProfile(std::move(sig), label);
  }

  const std::size_t n = spec.n;
  if (n == 0)
    throw Error("profile size n must be positive");
  const double nd = static_cast<double>(n);
  std::vector<double> sig(n);

  switch (spec.kind) {
    case ProfileKind::equal: {
      check_known_params(spec);
      std::fill(sig.begin(), sig.end(), param(spec, "sigma", 1.0));
      break;
    }
    case ProfileKind::two_level: {
      check_known_params(spec);
      const std::size_t m = count_param(param(spec, "m"), n, "m");
      const double lo = param(spec, "sigma", 1.0);
      const double hi = param(spec, "sigma_prime");
      if (!(lo < hi))
        throw Error("two_level needs sigma < sigma_prime");
      std::fill(sig.begin(), sig.begin() + static_cast<std::ptrdiff_t>(m), lo);
      std::fill(sig.begin() + static_cast<std::ptrdiff_t>(m), sig.end(), hi);
      break;
    }
    case ProfileKind::alpha_mixture: {
      check_known_params(spec);
      const double alpha = param(spec, "alpha");
      const double c = param(spec, "c", 1.0);
      if (!(alpha > 0.0))
        throw Error("alpha_mixture needs alpha > 0");
      if (!(c > 0.0))
        throw Error("alpha_mixture needs c > 0");
      const std::size_t m = count_param(std::ceil(c * std::log(nd)), n, "ceil(c log n)");
      std::fill(sig.begin(), sig.begin() + static_cast<std::ptrdiff_t>(m), 1.0);
      std::fill(sig.begin() + static_cast<std::ptrdiff_t>(m), sig.end(), std::pow(nd, alpha));
      break;
    }
    case ProfileKind::quadratic: {
      check_known_params(spec);
      const double c = param(spec, "c", 1.0);
      for (std::size_t i = 0; i < n; ++i)
        sig[i] = c * static_cast<double>(i + 1);
      break;
    }
    case ProfileKind::subset_of_signals: {
      check_known_params(spec);
      const std::size_t m = count_param(param(spec, "m"), n, "m");
      const double lo = param(spec, "sigma", 1.0);
      const double hi = param(spec, "sigma_prime", nd);
      if (!(lo <= 1.0))
        throw Error("subset_of_signals needs sigma <= 1");
      if (!(lo <= hi))
        throw Error("subset_of_signals needs sigma <= sigma_prime");
      std::fill(sig.begin(), sig.begin() + static_cast<std::ptrdiff_t>(m), lo);
      std::fill(sig.begin() + static_cast<std::ptrdiff_t>(m), sig.end(), hi);
      break;
    }
    case ProfileKind::custom:
      break;
  }
  return SigmaProfile(std::move(sig), label);
}

NoiseSampler
family_sampler(const Family& family)
{
  if (family.kind == FamilyKind::gaussian)
    return [](Philox& rng) { return rng.gaussian(); };
  return [](Philox& rng) { return rng.laplace(); };
}

std::vector<double>
gen_sample(Philox& rng, double mu, const SigmaProfile& profile, const Family& family)
{
  return gen_sample(rng, mu, profile, family_sampler(family));
}

std::vector<double>
gen_sample(Philox& rng, double mu, const SigmaProfile& profile, const NoiseSampler& noise)
{
  std::vector<double> values;
  std::vector<double> sigmas;
  draw(rng, mu, profile, noise, values, sigmas);
  return values;
}

void
shuffle(std::vector<double>& values, Philox& rng)
{
  for (std::size_t i = values.size(); i > 1; --i)
    std::swap(values[i - 1], values[static_cast<std::size_t>(rng.below(i))]);
}

DeltaRule
parse_delta_rule(std::string_view name)
{
  if (name == "fixed")
    return DeltaRule::fixed;
  if (name == "inverse_n")
    return DeltaRule::inverse_n;
  throw Error("unknown delta rule '" + std::string(name) + "'");
}

std::string_view
to_string(DeltaRule rule)
{
  return rule == DeltaRule::fixed ? "fixed" : "inverse_n";
}

Constants
ExperimentConfig::constants_at(std::size_t n) const
{
  Constants out = constants;
  if (delta_rule == DeltaRule::inverse_n)
    out.delta = 1.0 / static_cast<double>(n);
  out.validate();
  return out;
}

void
ExperimentConfig::validate() const
{
  if (trials < 1)
    throw Error("trials must be >= 1");
  if (!std::isfinite(mu))
    throw Error("mu must be finite");
  constants.validate();
  for (std::size_t n : n_grid) {
    if (n < 2)
      throw Error("n_grid entries must be >= 2");
  }
  if (profile.kind == ProfileKind::custom && !n_grid.empty())
    throw Error("custom profiles cannot be combined with n_grid");
}

std::string_view
to_string(Estimator e)
{
  switch (e) {
    case Estimator::mean:
      return "mean";
    case Estimator::median:
      return "median";
    case Estimator::oracle_weighted:
      return "oracle";
    case Estimator::modal_sbar:
      return "modal_sbar";
    case Estimator::adaptive:
      return "adaptive";
    case Estimator::modal_mean:
      return "modal_mean";
  }
  return "unknown";
}

std::vector<TrialRecord>
run_experiment(const ExperimentConfig& config)
{
  const std::size_t n =
    config.profile.kind == ProfileKind::custom ? config.profile.custom_sigmas.size() : config.profile.n;
  return run_experiment_at(config, n);
}

std::vector<TrialRecord>
run_experiment_at(const ExperimentConfig& config, std::size_t n)
{
  config.validate();
  const ProfileSpec spec = config.profile.kind == ProfileKind::custom ? config.profile : config.profile.with_n(n);
  TrialContext ctx{ config, make_profile(spec), config.constants_at(n), std::nullopt, family_sampler(config.family) };
  ctx.sbar = s_bar(ctx.profile, config.family, ctx.constants.delta, ctx.constants.kappa);

  std::vector<TrialRecord> records(config.trials);
  unsigned workers = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.trials));

  std::atomic<std::size_t> next{ 0 };
  auto work = [&] {
    for (std::size_t t = next++; t < config.trials; t = next++)
      records[t] = run_trial(ctx, t);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work);
  }
  return records;
}

std::vector<GridRun>
run_grid(const ExperimentConfig& config)
{
  std::vector<GridRun> out;
  if (config.n_grid.empty()) {
    GridRun run;
    run.records = run_experiment(config);
    run.n = config.profile.kind == ProfileKind::custom ? config.profile.custom_sigmas.size() : config.profile.n;
    run.delta = config.constants_at(run.n).delta;
    out.push_back(std::move(run));
    return out;
  }
  for (std::size_t n : config.n_grid) {
    GridRun run;
    run.n = n;
    run.delta = config.constants_at(n).delta;
    run.records = run_experiment_at(config, n);
    out.push_back(std::move(run));
  }
  return out;
}

double
quantile(std::vector<double> values, double q)
{
  if (values.empty())
    return nan;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Summary
summarize(const std::vector<TrialRecord>& records)
{
  if (records.empty())
    throw Error("cannot summarize an empty record set");
  Summary out;
  out.trials = records.size();
  for (Estimator e : all_estimators) {
    std::vector<double> errs;
    for (const auto& r : records) {
      if (!std::isnan(r.error(e)))
        errs.push_back(r.error(e));
    }
    ErrorStats& st = out.stats[static_cast<std::size_t>(e)];
    st.defined = errs.size();
    if (errs.empty()) {
      st.median = st.q90 = st.mean = nan;
      continue;
    }
    double total = 0.0;
    for (double v : errs)
      total += v;
    st.mean = total / static_cast<double>(errs.size());
    st.median = quantile(errs, 0.5);
    st.q90 = quantile(std::move(errs), 0.9);
  }

  std::size_t covered = 0;
  std::size_t modal_defined = 0;
  std::size_t modal_ok = 0;
  std::size_t accepted_total = 0;
  out.accepted_min = std::numeric_limits<std::size_t>::max();
  for (const auto& r : records) {
    covered += r.covered_by_median_interval ? 1 : 0;
    if (r.modal_within_4s) {
      ++modal_defined;
      modal_ok += *r.modal_within_4s ? 1 : 0;
    }
    accepted_total += r.accepted_count;
    out.accepted_min = std::min(out.accepted_min, r.accepted_count);
    out.accepted_max = std::max(out.accepted_max, r.accepted_count);
  }
  const double count = static_cast<double>(records.size());
  out.coverage_median_interval = static_cast<double>(covered) / count;
  out.coverage_modal_4s = modal_defined ? static_cast<double>(modal_ok) / static_cast<double>(modal_defined) : nan;
  out.accepted_mean = static_cast<double>(accepted_total) / count;
  return out;
}

double
log_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw Error("slope fit needs at least two paired points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      return nan;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : nan;
}

CalibrationResult
calibrate_constants(const Family& family, double delta, std::size_t trials, std::uint64_t seed)
{
  if (!(delta > 0.0 && delta < 1.0))
    throw Error("delta must lie in (0, 1)");
  if (trials < 100)
    throw Error("insufficient trials");

  CalibrationResult out;
  out.trials = trials;
  out.sizes = { 64, 128, 256, 512 };
  const auto noise = family_sampler(family);
  // Smallest v with at least a (1 - delta) fraction of the values <= v.
  auto upper_quantile = [delta](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil((1.0 - delta) * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
  };

  std::vector<double> all1;
  std::vector<double> all2;
  for (std::size_t n : out.sizes) {
    const double nd = static_cast<double>(n);
    const double complexity = 2.0 * std::log(nd / 2.0);
    const SigmaProfile unit(std::vector<double>(n, 1.0), "calibration");
    const auto cumulative = [&](double x) { return nd * family_cdf(family, x); };
    std::vector<double> r1;
    std::vector<double> r2;
    for (std::size_t t = 0; t < trials; ++t) {
      Philox rng(substream_key(mix64(seed) + n, t));
      const auto values = gen_sample(rng, 0.0, unit, noise);
      const auto ratios = interval_deviation_ratios_cdf(values, cumulative, complexity);
      r1.push_back(ratios.expected_ratio);
      r2.push_back(ratios.observed_ratio);
    }
    out.size_kappa1.push_back(upper_quantile(r1));
    out.size_kappa2.push_back(upper_quantile(r2));
    all1.insert(all1.end(), r1.begin(), r1.end());
    all2.insert(all2.end(), r2.begin(), r2.end());
  }
  out.kappa1 = upper_quantile(all1);
  out.kappa2 = upper_quantile(all2);

  // Lower-deviation step of the modal analysis needs kappa * 2/(3 sqrt 3) / 4
  // >= kappa1; rejection of far windows needs eta > 2 kappa2; the count floor
  // must dominate eta^2.
  out.suggested.delta = delta;
  out.suggested.beta = family.beta;
  out.suggested.kappa = 6.0 * std::numbers::sqrt3 * out.kappa1;
  out.suggested.eta = 2.0 * out.kappa2;
  out.suggested.xi = out.suggested.eta * out.suggested.eta;
  return out;
}

} // namespace hetmean
