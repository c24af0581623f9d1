#include "hetmean/app/cli.hpp"

#include "hetmean/app/config.hpp"
#include "hetmean/app/io.hpp"
#include "hetmean/estimators.hpp"
#include "hetmean/simulate.hpp"
#include "hetmean/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace hetmean::app {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* precondition_na = "n/a (precondition)";

// ---------------------------------------------------------------- estimate

struct EstimateArgs
{
  std::string input;
  double delta = 0.1;
  std::string mode = "dyadic";
  std::optional<double> kappa, eta, xi;
  bool as_json = false;
};

std::string
interval_text(const Interval& iv)
{
  return "[" + format_short(iv.lo) + ", " + format_short(iv.hi) + "]";
}

void
cmd_estimate(const EstimateArgs& a, std::ostream& out)
{
  Constants constants;
  constants.delta = a.delta;
  if (a.kappa)
    constants.kappa = *a.kappa;
  if (a.eta)
    constants.eta = *a.eta;
  if (a.xi)
    constants.xi = *a.xi;
  constants.validate();
  const GridMode mode = parse_grid_mode(a.mode);

  const Sample sample = Sample::ingest(read_observations(a.input));
  const AdaptiveReport report = adaptive_estimate(sample, constants, mode);

  if (a.as_json) {
    ordered_json j;
    j["n"] = sample.size();
    j["delta"] = constants.delta;
    j["alpha"] = report.alpha;
    j["median_interval"] = { report.median_interval.lo, report.median_interval.hi };
    j["sample_mean"] = sample_mean(sample);
    j["sample_median"] = sample_median(sample);
    j["adaptive_estimate"] = report.estimate;
    j["final_interval"] = { report.final_interval.lo, report.final_interval.hi };
    j["accepted_lengths"] = report.accepted_lengths;
    j["fallback_used"] = report.fallback_used;
    j["mode"] = std::string(to_string(mode));
    j["constants"] = { { "kappa", constants.kappa }, { "eta", constants.eta }, { "xi", constants.xi } };
    out << j.dump() << '\n';
    return;
  }

  std::string accepted;
  for (double s : report.accepted_lengths)
    accepted += (accepted.empty() ? "" : ", ") + format_short(s);
  out << "n                  " << sample.size() << '\n'
      << "delta              " << format_short(constants.delta) << '\n'
      << "alpha              " << format_short(report.alpha) << '\n'
      << "median_interval    " << interval_text(report.median_interval) << '\n'
      << "sample_mean        " << format_short(sample_mean(sample)) << '\n'
      << "sample_median      " << format_short(sample_median(sample)) << '\n'
      << "adaptive_estimate  " << format_short(report.estimate) << '\n'
      << "final_interval     " << interval_text(report.final_interval) << '\n'
      << "accepted_lengths   " << (accepted.empty() ? "none" : accepted) << '\n'
      << "fallback_used      " << (report.fallback_used ? "true" : "false") << '\n'
      << "mode               " << to_string(mode) << '\n'
      << "constants          kappa=" << format_short(constants.kappa)
      << " eta=" << format_short(constants.eta) << " xi=" << format_short(constants.xi) << '\n';
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs
{
  std::string config;
};

void
cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
  const RunConfig run = load_run_config(a.config);
  const std::vector<GridRun> runs = run_grid(run.experiment);
  const bool grid = !run.experiment.n_grid.empty();

  for (const auto& g : runs) {
    std::ostringstream csv;
    write_trial_csv(csv, g.records);
    const auto path = grid ? grid_trial_path(run.trials_csv, g.n) : run.trials_csv;
    write_file(path, csv.str());
    out << "wrote " << path.string() << " (" << g.records.size() << " trials, n=" << g.n << ")\n";
  }
  std::ostringstream summary;
  write_summary_csv(summary, summary_rows(runs));
  write_file(run.summary_csv, summary.str());
  out << "wrote " << run.summary_csv.string() << '\n';
}

// ---------------------------------------------------------------- bounds

struct BoundsArgs
{
  std::string profile;
  std::size_t n = 0;
  std::vector<std::string> params;
  std::string sigmas_file;
  double delta = 0.1;
  std::string family = "gaussian";
  double kappa = Constants{}.kappa;
  std::optional<double> beta;
  std::optional<std::size_t> k;
  double p = 1.0;
  double c = 2.0;
  bool as_json = false;
};

ProfileSpec
bounds_profile(const BoundsArgs& a)
{
  ProfileSpec spec;
  spec.kind = parse_profile_kind(a.profile);
  spec.n = a.n;
  for (const auto& kv : a.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("--param expects key=value, got '" + kv + "'");
    spec.params[kv.substr(0, eq)] = parse_real(kv.substr(eq + 1));
  }
  if (spec.kind == ProfileKind::custom) {
    if (a.sigmas_file.empty())
      throw Error("custom profile needs --sigmas FILE");
    spec.custom_sigmas = read_observations(a.sigmas_file);
    if (spec.n == 0)
      spec.n = spec.custom_sigmas.size();
  } else if (!a.sigmas_file.empty()) {
    throw Error("--sigmas is only valid with --profile custom");
  }
  if (spec.n == 0)
    throw Error("--n is required");
  return spec;
}

struct BoundRow
{
  std::string name;
  std::optional<double> value; // empty: not available
  std::string status;          // "ok", "none" or the precondition marker
  std::string detail;
  std::string caveat;
};

// Evaluates `f`, turning a violated precondition into an n/a row.
template<typename F>
BoundRow
guarded(std::string name, std::string caveat, F f)
{
  BoundRow row{ std::move(name), std::nullopt, "ok", {}, std::move(caveat) };
  try {
    f(row);
  } catch (const Error& e) {
    row.value.reset();
    row.status = precondition_na;
    row.detail = e.what();
  }
  return row;
}

void
cmd_bounds(const BoundsArgs& a, std::ostream& out)
{
  const ProfileSpec spec = bounds_profile(a);
  const SigmaProfile profile = make_profile(spec);
  const Family family = Family::parse(a.family);
  if (!(a.delta > 0.0 && a.delta < 1.0))
    throw Error("delta must lie in (0, 1)");
  if (!(a.kappa > 0.0))
    throw Error("kappa must be positive");
  const double beta = a.beta.value_or(family.beta);
  const std::size_t n = profile.size();
  const std::size_t k =
    a.k.value_or(std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))))));

  const std::string kappa_note = "oracle; kappa_0 unknown, evaluated at kappa=" + format_short(a.kappa);
  std::vector<BoundRow> rows;
  for (const auto criterion : { Criterion::exact, Criterion::bounded_density }) {
    const std::string label = criterion == Criterion::exact ? "s_bar_exact" : "s_bar_bounded_density";
    rows.push_back(guarded(label, kappa_note, [&](BoundRow& r) {
      r.value = s_bar(profile, family, a.delta, a.kappa, criterion);
      if (!r.value) {
        r.status = "none";
        r.detail = "no admissible length";
      }
    }));
  }
  rows.push_back(guarded("median_interval_bound", "explicit constants; holds w.p. 1-delta", [&](BoundRow& r) {
    r.value = median_interval_bound(profile, a.delta, beta);
  }));
  rows.push_back(guarded("adaptive_bound", "leading constant c1 not tracked (reported as 1)", [&](BoundRow& r) {
    const AdaptiveBound b = adaptive_bound(profile, family, a.delta, a.kappa);
    r.value = b.value;
    r.detail = "min(s_bar=" + (b.s_bar ? format_short(*b.s_bar) : std::string("none")) +
               ", median_term=" + format_short(b.median_term) + ")";
  }));
  rows.push_back(guarded("gordon_moment_bound", "explicit constants", [&](BoundRow& r) {
    r.value = gordon_moment_bound(profile, k, a.p, beta);
    r.detail = "k=" + std::to_string(k) + " p=" + format_short(a.p);
  }));
  rows.push_back(guarded("xia_bound", "explicit constants; valid only when applicable", [&](BoundRow& r) {
    const XiaBound b = xia_bound(profile, a.delta);
    r.value = b.bound;
    r.detail = std::string("applicable=") + (b.applicable ? "true" : "false");
  }));
  rows.push_back(guarded("chierichetti_style_bound", "constant c(beta, phi(0)) not tracked (reported as 1)", [&](BoundRow& r) {
    r.value = chierichetti_style_bound(profile, a.c);
    r.detail = "c=" + format_short(a.c);
  }));

  if (a.as_json) {
    ordered_json j;
    j["profile"] = std::string(to_string(spec.kind));
    j["n"] = n;
    j["delta"] = a.delta;
    j["family"] = std::string(family.name());
    j["kappa"] = a.kappa;
    j["beta"] = beta;
    ordered_json list = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json e;
      e["name"] = r.name;
      e["value"] = r.value ? ordered_json(*r.value) : ordered_json(nullptr);
      e["status"] = r.status;
      e["detail"] = r.detail;
      e["caveat"] = r.caveat;
      list.push_back(e);
    }
    j["bounds"] = list;
    out << j.dump() << '\n';
    return;
  }

  out << "profile " << to_string(spec.kind) << "  n=" << n << "  delta=" << format_short(a.delta)
      << "  family=" << family.name() << "  kappa=" << format_short(a.kappa)
      << "  beta=" << format_short(beta) << '\n';
  for (const auto& r : rows) {
    std::string value = r.value ? format_short(*r.value) : r.status;
    out << std::left << std::setw(26) << r.name << std::setw(24) << value;
    if (!r.detail.empty())
      out << r.detail << "  ";
    out << "[" << r.caveat << "]\n";
  }
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs
{
  std::string family = "gaussian";
  double delta = 0.1;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  bool as_json = false;
};

void
cmd_calibrate(const CalibrateArgs& a, std::ostream& out)
{
  const Family family = Family::parse(a.family);
  const CalibrationResult r = calibrate_constants(family, a.delta, a.trials, a.seed);
  if (a.as_json) {
    ordered_json j;
    j["family"] = std::string(family.name());
    j["delta"] = a.delta;
    j["trials"] = r.trials;
    j["seed"] = a.seed;
    j["kappa1"] = r.kappa1;
    j["kappa2"] = r.kappa2;
    j["sizes"] = r.sizes;
    j["size_kappa1"] = r.size_kappa1;
    j["size_kappa2"] = r.size_kappa2;
    j["suggested"] = { { "kappa", r.suggested.kappa }, { "eta", r.suggested.eta }, { "xi", r.suggested.xi } };
    out << j.dump() << '\n';
    return;
  }
  out << "family " << family.name() << "  delta=" << format_short(a.delta) << "  trials=" << r.trials
      << "  seed=" << a.seed << '\n';
  out << "n      kappa1_q   kappa2_q\n";
  for (std::size_t i = 0; i < r.sizes.size(); ++i)
    out << std::left << std::setw(7) << r.sizes[i] << std::setw(11) << format_short(r.size_kappa1[i])
        << format_short(r.size_kappa2[i]) << '\n';
  out << "kappa1 " << format_short(r.kappa1) << '\n'
      << "kappa2 " << format_short(r.kappa2) << '\n'
      << "suggested kappa=" << format_short(r.suggested.kappa) << " eta=" << format_short(r.suggested.eta)
      << " xi=" << format_short(r.suggested.xi) << "  (advisory; defaults unchanged)\n";
}

std::string
one_line(std::string text)
{
  std::replace(text.begin(), text.end(), '\n', ' ');
  while (!text.empty() && text.back() == ' ')
    text.pop_back();
  return text;
}

} // namespace

int
run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Mean estimation under heteroscedastic noise", "hetmean" };
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Adaptive estimate from a file of observations");
  estimate->add_option("input", est.input, "One decimal per line; '#' starts a comment line")->required();
  estimate->add_option("--delta", est.delta, "Failure probability")->capture_default_str();
  estimate->add_option("--mode", est.mode, "Length grid: dyadic or pairwise")->capture_default_str();
  estimate->add_option("--kappa", est.kappa);
  estimate->add_option("--eta", est.eta);
  estimate->add_option("--xi", est.xi);
  estimate->add_flag("--json", est.as_json, "Print one JSON object");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment from a JSON run file");
  simulate->add_option("config", sim.config, "Run file")->required();

  BoundsArgs bnd;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the oracle bounds for a sigma profile");
  bounds->add_option("--profile", bnd.profile, "equal|two_level|alpha_mixture|quadratic|subset_of_signals|custom")
    ->required();
  bounds->add_option("--n", bnd.n, "Sample size");
  bounds->add_option("--param", bnd.params, "Profile parameter key=value (repeatable)");
  bounds->add_option("--sigmas", bnd.sigmas_file, "File of sigmas for --profile custom");
  bounds->add_option("--delta", bnd.delta)->capture_default_str();
  bounds->add_option("--family", bnd.family)->capture_default_str();
  bounds->add_option("--kappa", bnd.kappa)->capture_default_str();
  bounds->add_option("--beta", bnd.beta, "Tail constant (default: the family's)");
  bounds->add_option("--k", bnd.k, "Order index for the moment bound (default ceil(sqrt n))");
  bounds->add_option("--p", bnd.p, "Moment order")->capture_default_str();
  bounds->add_option("--c", bnd.c, "Index constant of the chierichetti-style bound")->capture_default_str();
  bounds->add_flag("--json", bnd.as_json);

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit concentration constants on reference samples");
  calibrate->add_option("--family", cal.family)->capture_default_str();
  calibrate->add_option("--delta", cal.delta)->capture_default_str();
  calibrate->add_option("--trials", cal.trials)->capture_default_str();
  calibrate->add_option("--seed", cal.seed)->capture_default_str();
  calibrate->add_flag("--json", cal.as_json);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return exit_input_error;
  }

  try {
    if (estimate->parsed())
      cmd_estimate(est, out);
    else if (simulate->parsed())
      cmd_simulate(sim, out);
    else if (bounds->parsed())
      cmd_bounds(bnd, out);
    else if (calibrate->parsed())
      cmd_calibrate(cal, out);
  } catch (const Error& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return exit_input_error;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return exit_input_error;
  } catch (const std::exception& e) {
    err << "internal error: " << one_line(e.what()) << '\n';
    return exit_internal_error;
  }
  return exit_ok;
}

} // namespace hetmean::app
