#pragma once

#include "hetmean/simulate.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hetmean::app {

//! One finite decimal per line; blank lines and lines starting with '#' are skipped.
std::vector<double> parse_observations(std::istream& in);
std::vector<double> read_observations(const std::filesystem::path& path);

//! Shortest text that reads back to the same double (%.17g; nan, inf, -inf).
std::string format_real(double value);
double parse_real(const std::string& text);

//! Shortest round-trip form, for human-readable reports.
std::string format_short(double value);

inline constexpr const char* trial_csv_header =
  "trial,seed,err_mean,err_median,err_oracle,err_modal_sbar,err_adaptive,err_modal_mean,"
  "covered,modal_within_4s,accepted_count";

void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trial_csv(std::istream& in);

struct SummaryRow
{
  std::size_t n = 0;
  double delta = 0.0;
  Estimator estimator = Estimator::mean;
  Summary summary;
  // log-log slope of the estimator's median error over n; NaN without a grid.
  double slope = 0.0;
};

inline constexpr const char* summary_csv_header =
  "n,delta,estimator,trials,defined,median_error,q90_error,mean_error,"
  "coverage_median_interval,coverage_modal_4s,accepted_mean,accepted_min,accepted_max,slope";

//! One row per (n, estimator); slopes fitted over the grid when it has >= 2 sizes.
std::vector<SummaryRow> summary_rows(const std::vector<GridRun>& runs);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

//! Parsed summary CSV, keyed the same way as summary_rows.
struct SummaryLine
{
  std::size_t n = 0;
  double delta = 0.0;
  std::string estimator;
  std::size_t trials = 0;
  std::size_t defined = 0;
  double median_error = 0.0;
  double q90_error = 0.0;
  double mean_error = 0.0;
  double coverage_median_interval = 0.0;
  double coverage_modal_4s = 0.0;
  double accepted_mean = 0.0;
  std::size_t accepted_min = 0;
  std::size_t accepted_max = 0;
  double slope = 0.0;
};

std::vector<SummaryLine> read_summary_csv(std::istream& in);

//! Trial file for size n of a grid run: "<stem>_n<N><ext>".
std::filesystem::path grid_trial_path(const std::filesystem::path& base, std::size_t n);

//! Writes `content` to `path`, throwing Error when the file cannot be written.
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace hetmean::app
