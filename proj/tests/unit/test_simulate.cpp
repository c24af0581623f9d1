#include "hetmean/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

using namespace hetmean;

namespace {

ProfileSpec
spec(ProfileKind kind, std::size_t n, std::map<std::string, double> params = {})
{
  ProfileSpec s;
  s.kind = kind;
  s.n = n;
  s.params = std::move(params);
  return s;
}

std::vector<double>
as_vector(const SigmaProfile& p)
{
  return { p.sigmas().begin(), p.sigmas().end() };
}

} // namespace

TEST_CASE("profile generators")
{
  CHECK(as_vector(make_profile(spec(ProfileKind::equal, 4, { { "sigma", 1.0 } }))) == std::vector<double>(4, 1.0));
  CHECK(as_vector(make_profile(spec(ProfileKind::quadratic, 3, { { "c", 2.0 } }))) == std::vector<double>{ 2, 4, 6 });

  const auto two = as_vector(make_profile(spec(ProfileKind::two_level, 5, { { "m", 2 }, { "sigma", 0.5 }, { "sigma_prime", 3 } })));
  CHECK(two == std::vector<double>{ 0.5, 0.5, 3, 3, 3 });

  // n = 55: ceil(log 55) = ceil(4.007) = 5 ones.
  const auto mix = as_vector(make_profile(spec(ProfileKind::alpha_mixture, 55, { { "alpha", 0.5 }, { "c", 1.0 } })));
  REQUIRE(mix.size() == 55);
  CHECK(std::count(mix.begin(), mix.end(), 1.0) == 5);
  CHECK(mix.back() == doctest::Approx(std::sqrt(55.0)));
  CHECK(mix[5] == doctest::Approx(7.416).epsilon(1e-4));

  const auto sub = as_vector(make_profile(spec(ProfileKind::subset_of_signals, 10, { { "m", 3 } })));
  CHECK(sub == std::vector<double>{ 1, 1, 1, 10, 10, 10, 10, 10, 10, 10 });

  ProfileSpec custom = spec(ProfileKind::custom, 3);
  custom.custom_sigmas = { 3, 1, 2 };
  CHECK(as_vector(make_profile(custom)) == std::vector<double>{ 1, 2, 3 });
}

TEST_CASE("profile parameter errors")
{
  CHECK_THROWS_AS(make_profile(spec(ProfileKind::two_level, 5, { { "m", 2 }, { "sigma", 3 }, { "sigma_prime", 3 } })), Error);
  CHECK_THROWS_AS(make_profile(spec(ProfileKind::two_level, 5, { { "m", 6 }, { "sigma_prime", 3 } })), Error);
  CHECK_THROWS_AS(make_profile(spec(ProfileKind::alpha_mixture, 50, { { "alpha", 0.0 } })), Error);
  CHECK_THROWS_AS(make_profile(spec(ProfileKind::alpha_mixture, 50, {})), Error);
  CHECK_THROWS_AS(make_profile(spec(ProfileKind::equal, 5, { { "sigmaa", 1.0 } })), Error);
  CHECK_THROWS_AS(make_profile(spec(ProfileKind::equal, 0)), Error);
  CHECK_THROWS_AS(parse_profile_kind("cubic"), Error);
}

TEST_CASE("degenerate scale collapses onto mu")
{
  Philox rng(substream_key(1, 0));
  const auto p = make_profile(spec(ProfileKind::equal, 1000, { { "sigma", 1e-12 } }));
  for (const Family& f : { Family::gaussian(), Family::laplace() }) {
    const auto x = gen_sample(rng, 3.5, p, f);
    REQUIRE(x.size() == 1000);
    for (double v : x)
      CHECK(std::abs(v - 3.5) <= 1e-9);
  }
}

TEST_CASE("samples arrive shuffled")
{
  // Two-level profile with mu = 0: sorted-by-sigma order would put all the
  // small values first.
  Philox rng(substream_key(3, 0));
  const auto p = make_profile(spec(ProfileKind::two_level, 1000, { { "m", 500 }, { "sigma", 1e-9 }, { "sigma_prime", 1.0 } }));
  const auto x = gen_sample(rng, 0.0, p, Family::gaussian());
  const auto small_first = std::count_if(x.begin(), x.begin() + 500, [](double v) { return std::abs(v) < 1e-6; });
  CHECK(small_first > 200);
  CHECK(small_first < 300);
}

TEST_CASE("experiments are deterministic and degenerate runs are exact")
{
  ExperimentConfig c;
  c.profile = spec(ProfileKind::equal, 256, { { "sigma", 1e-12 } });
  c.trials = 1;
  c.master_seed = 99;
  const auto r = run_experiment(c);
  REQUIRE(r.size() == 1);
  for (double e : r[0].errors)
    if (!std::isnan(e))
      CHECK(e <= 1e-9);

  c.profile = spec(ProfileKind::two_level, 300, { { "m", 100 }, { "sigma_prime", 10.0 } });
  c.trials = 12;
  c.threads = 3;
  const auto a = run_experiment(c);
  c.threads = 1;
  const auto b = run_experiment(c);
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].trial_index == t);
    CHECK(a[t].seed == b[t].seed);
    CHECK(a[t].seed == substream_key(99, t));
    for (std::size_t e = 0; e < estimator_count; ++e)
      CHECK(std::memcmp(&a[t].errors[e], &b[t].errors[e], sizeof(double)) == 0);
    CHECK(a[t].accepted_count == b[t].accepted_count);
    CHECK(a[t].modal_within_4s == b[t].modal_within_4s);
  }
}

TEST_CASE("estimates do not depend on sample order")
{
  Philox rng(substream_key(4, 0));
  const auto p = make_profile(spec(ProfileKind::quadratic, 600));
  for (int inst = 0; inst < 20; ++inst) {
    auto x = gen_sample(rng, 1.0, p, Family::laplace());
    auto sorted = x;
    std::sort(sorted.begin(), sorted.end());
    shuffle(x, rng);
    const auto ra = adaptive_estimate(Sample::ingest(x), Constants{});
    const auto rb = adaptive_estimate(Sample::ingest(sorted), Constants{});
    CHECK(ra.estimate == rb.estimate);
    CHECK(sample_median(Sample::ingest(x)) == sample_median(Sample::ingest(sorted)));
  }
}

TEST_CASE("median interval coverage")
{
  ExperimentConfig c;
  c.profile = spec(ProfileKind::equal, 1024);
  c.trials = 2000;
  c.master_seed = 5;
  const auto s = summarize(run_experiment(c));
  CHECK(s.coverage_median_interval >= 0.9 - 0.02);
}

TEST_CASE("delta rules")
{
  ExperimentConfig c;
  c.profile = spec(ProfileKind::equal, 100);
  CHECK(c.constants_at(100).delta == 0.1);
  c.delta_rule = DeltaRule::inverse_n;
  CHECK(c.constants_at(400).delta == 1.0 / 400);
  CHECK(parse_delta_rule("inverse_n") == DeltaRule::inverse_n);
  CHECK_THROWS_AS(parse_delta_rule("auto"), Error);
}

TEST_CASE("config validation")
{
  ExperimentConfig c;
  c.profile = spec(ProfileKind::equal, 100);
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.trials = 1;
  c.n_grid = { 1 };
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("quantiles and summaries")
{
  CHECK(quantile({ 1, 2, 3, 4 }, 0.5) == 2.5);
  CHECK(quantile({ 4, 1, 3, 2 }, 0.0) == 1.0);
  CHECK(quantile({ 4, 1, 3, 2 }, 1.0) == 4.0);
  CHECK(quantile({ 0, 10 }, 0.9) == doctest::Approx(9.0));

  std::vector<TrialRecord> zeros(5);
  for (auto& r : zeros)
    r.covered_by_median_interval = true;
  const auto s = summarize(zeros);
  for (const auto e : all_estimators) {
    CHECK(s.at(e).median == 0.0);
    CHECK(s.at(e).q90 == 0.0);
    CHECK(s.at(e).mean == 0.0);
  }
  CHECK(s.coverage_median_interval == 1.0);
  CHECK(std::isnan(s.coverage_modal_4s));

  std::vector<TrialRecord> mixed(4);
  for (std::size_t i = 0; i < 4; ++i) {
    mixed[i].errors[static_cast<std::size_t>(Estimator::median)] = static_cast<double>(i + 1);
    mixed[i].errors[static_cast<std::size_t>(Estimator::modal_sbar)] = std::nan("");
    mixed[i].accepted_count = i;
    mixed[i].modal_within_4s = i != 0;
  }
  const auto m = summarize(mixed);
  CHECK(m.at(Estimator::median).median == 2.5);
  CHECK(m.at(Estimator::modal_sbar).defined == 0);
  CHECK(m.coverage_modal_4s == 0.75);
  CHECK(m.accepted_min == 0);
  CHECK(m.accepted_max == 3);
  CHECK(m.accepted_mean == 1.5);
  CHECK_THROWS_AS(summarize({}), Error);
}

TEST_CASE("log-log slope")
{
  CHECK(log_log_slope({ 1, 10, 100 }, { 1, 0.1, 0.01 }) == doctest::Approx(-1.0));
  CHECK(log_log_slope({ 256, 1024, 4096 }, { 2, 1, 0.5 }) == doctest::Approx(-0.5));
  CHECK(std::isnan(log_log_slope({ 1, 2 }, { 1, 0 })));
}

TEST_CASE("calibration")
{
  CHECK_THROWS_WITH_AS(calibrate_constants(Family::gaussian(), 0.1, 10, 1), "insufficient trials", Error);
  const auto a = calibrate_constants(Family::gaussian(), 0.1, 100, 7);
  const auto b = calibrate_constants(Family::gaussian(), 0.1, 100, 7);
  CHECK(a.kappa1 == b.kappa1);
  CHECK(a.suggested.kappa == b.suggested.kappa);
  CHECK(a.sizes == std::vector<std::size_t>{ 64, 128, 256, 512 });
  CHECK(a.kappa1 > 0.0);
  CHECK(a.suggested.xi == doctest::Approx(a.suggested.eta * a.suggested.eta));

  double prev = INFINITY;
  for (double delta : { 0.02, 0.05, 0.1, 0.2, 0.4 }) {
    const auto r = calibrate_constants(Family::laplace(), delta, 100, 3);
    CHECK(r.suggested.kappa <= prev);
    prev = r.suggested.kappa;
  }
}
