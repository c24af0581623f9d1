#include "hetmean/app/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace hetmean::app {

namespace {

std::string
trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string>
split_fields(const std::string& line)
{
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ','))
    fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',')
    fields.emplace_back();
  return fields;
}

template<typename T = std::size_t>
T
parse_count(const std::string& text)
{
  T value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw Error("malformed integer '" + text + "'");
  return value;
}

bool
parse_flag(const std::string& text)
{
  if (text == "1")
    return true;
  if (text == "0")
    return false;
  throw Error("malformed flag '" + text + "'");
}

// Reads the header and checks it against `expected`.
void
expect_header(std::istream& in, const char* expected)
{
  std::string line;
  if (!std::getline(in, line) || trim(line) != expected)
    throw Error("unexpected CSV header");
}

} // namespace

double
parse_real(const std::string& raw)
{
  const std::string text = trim(raw);
  if (text == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf")
    return std::numeric_limits<double>::infinity();
  if (text == "-inf")
    return -std::numeric_limits<double>::infinity();
  const char* begin = text.data();
  if (!text.empty() && text.front() == '+')
    ++begin;
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw Error("malformed number '" + text + "'");
  return value;
}

std::string
format_real(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string
format_short(double value)
{
  if (!std::isfinite(value))
    return format_real(value);
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::vector<double>
parse_observations(std::istream& in)
{
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#')
      continue;
    double value = 0.0;
    try {
      value = parse_real(text);
    } catch (const Error&) {
      throw Error("line " + std::to_string(line_no) + ": malformed value '" + text + "'");
    }
    if (!std::isfinite(value))
      throw Error("line " + std::to_string(line_no) + ": non-finite value '" + text + "'");
    values.push_back(value);
  }
  if (values.empty())
    throw Error("input contains no observations");
  return values;
}

std::vector<double>
read_observations(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  return parse_observations(in);
}

void
write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records)
{
  out << trial_csv_header << '\n';
  for (const auto& r : records) {
    out << r.trial_index << ',' << r.seed;
    for (double e : r.errors)
      out << ',' << format_real(e);
    out << ',' << (r.covered_by_median_interval ? 1 : 0) << ',';
    if (r.modal_within_4s)
      out << (*r.modal_within_4s ? 1 : 0);
    out << ',' << r.accepted_count << '\n';
  }
}

std::vector<TrialRecord>
read_trial_csv(std::istream& in)
{
  expect_header(in, trial_csv_header);
  std::vector<TrialRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    const auto f = split_fields(line);
    if (f.size() != 11)
      throw Error("trial CSV row has " + std::to_string(f.size()) + " fields");
    TrialRecord r;
    r.trial_index = parse_count(f[0]);
    r.seed = parse_count<std::uint64_t>(f[1]);
    for (std::size_t e = 0; e < estimator_count; ++e)
      r.errors[e] = parse_real(f[2 + e]);
    r.covered_by_median_interval = parse_flag(f[8]);
    if (!f[9].empty())
      r.modal_within_4s = parse_flag(f[9]);
    r.accepted_count = parse_count(f[10]);
    records.push_back(r);
  }
  return records;
}

std::vector<SummaryRow>
summary_rows(const std::vector<GridRun>& runs)
{
  std::vector<Summary> summaries;
  summaries.reserve(runs.size());
  for (const auto& run : runs)
    summaries.push_back(summarize(run.records));

  double slopes[estimator_count];
  for (std::size_t e = 0; e < estimator_count; ++e) {
    slopes[e] = std::numeric_limits<double>::quiet_NaN();
    if (runs.size() < 2)
      continue;
    std::vector<double> x, y;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto& stats = summaries[r].stats[e];
      if (stats.defined == 0)
        continue;
      x.push_back(static_cast<double>(runs[r].n));
      y.push_back(stats.median);
    }
    if (x.size() >= 2)
      slopes[e] = log_log_slope(x, y);
  }

  std::vector<SummaryRow> rows;
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (std::size_t e = 0; e < estimator_count; ++e)
      rows.push_back({ runs[r].n, runs[r].delta, all_estimators[e], summaries[r], slopes[e] });
  return rows;
}

void
write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows)
{
  out << summary_csv_header << '\n';
  for (const auto& row : rows) {
    const auto& s = row.summary;
    const auto& st = s.at(row.estimator);
    out << row.n << ',' << format_real(row.delta) << ',' << to_string(row.estimator) << ','
        << s.trials << ',' << st.defined << ',' << format_real(st.median) << ','
        << format_real(st.q90) << ',' << format_real(st.mean) << ','
        << format_real(s.coverage_median_interval) << ',' << format_real(s.coverage_modal_4s)
        << ',' << format_real(s.accepted_mean) << ',' << s.accepted_min << ','
        << s.accepted_max << ',' << format_real(row.slope) << '\n';
  }
}

std::vector<SummaryLine>
read_summary_csv(std::istream& in)
{
  expect_header(in, summary_csv_header);
  std::vector<SummaryLine> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    const auto f = split_fields(line);
    if (f.size() != 14)
      throw Error("summary CSV row has " + std::to_string(f.size()) + " fields");
    SummaryLine s;
    s.n = parse_count(f[0]);
    s.delta = parse_real(f[1]);
    s.estimator = f[2];
    s.trials = parse_count(f[3]);
    s.defined = parse_count(f[4]);
    s.median_error = parse_real(f[5]);
    s.q90_error = parse_real(f[6]);
    s.mean_error = parse_real(f[7]);
    s.coverage_median_interval = parse_real(f[8]);
    s.coverage_modal_4s = parse_real(f[9]);
    s.accepted_mean = parse_real(f[10]);
    s.accepted_min = parse_count(f[11]);
    s.accepted_max = parse_count(f[12]);
    s.slope = parse_real(f[13]);
    lines.push_back(s);
  }
  return lines;
}

std::filesystem::path
grid_trial_path(const std::filesystem::path& base, std::size_t n)
{
  auto name = base.stem().string() + "_n" + std::to_string(n) + base.extension().string();
  return base.parent_path() / name;
}

void
write_file(const std::filesystem::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out)
    throw Error("cannot write '" + path.string() + "'");
}

} // namespace hetmean::app
