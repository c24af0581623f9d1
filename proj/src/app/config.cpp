#include "hetmean/app/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace hetmean::app {

namespace {

using nlohmann::json;

[[noreturn]] void
fail(const std::string& path, const std::string& what)
{
  throw Error("config: " + path + ": " + what);
}

std::string
join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

void
check_object(const json& node, const std::string& path, const std::set<std::string>& allowed)
{
  if (!node.is_object())
    fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : node.items())
    if (!allowed.contains(key))
      fail(join(path, key), "unknown key");
}

const json*
find(const json& node, const std::string& key)
{
  const auto it = node.find(key);
  return it == node.end() ? nullptr : &*it;
}

const json&
require(const json& node, const std::string& path, const std::string& key)
{
  const json* value = find(node, key);
  if (!value)
    fail(join(path, key), "missing required key");
  return *value;
}

double
as_real(const json& node, const std::string& path)
{
  if (!node.is_number())
    fail(path, "expected a number");
  return node.get<double>();
}

std::uint64_t
as_unsigned(const json& node, const std::string& path)
{
  if (node.is_number_unsigned())
    return node.get<std::uint64_t>();
  if (node.is_number_integer() && node.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(node.get<std::int64_t>());
  fail(path, "expected a non-negative integer");
}

std::string
as_string(const json& node, const std::string& path)
{
  if (!node.is_string())
    fail(path, "expected a string");
  return node.get<std::string>();
}

// Runs `parse` on a string field, reporting library errors against `path`.
template<typename F>
auto
parse_enum(const json& node, const std::string& path, F parse)
{
  const std::string text = as_string(node, path);
  try {
    return parse(text);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

ProfileSpec
parse_profile(const json& node)
{
  const std::string path = "profile";
  check_object(node, path, { "kind", "n", "params", "sigmas" });
  ProfileSpec spec;
  spec.kind = parse_enum(require(node, path, "kind"), "profile.kind", parse_profile_kind);
  if (const json* n = find(node, "n"))
    spec.n = as_unsigned(*n, "profile.n");
  if (const json* params = find(node, "params")) {
    if (!params->is_object())
      fail("profile.params", "expected an object");
    const auto allowed = profile_parameters(spec.kind);
    for (const auto& [key, value] : params->items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail("profile.params." + key, "unknown key for kind '" + std::string(to_string(spec.kind)) + "'");
      spec.params[key] = as_real(value, "profile.params." + key);
    }
  }
  if (const json* sigmas = find(node, "sigmas")) {
    if (spec.kind != ProfileKind::custom)
      fail("profile.sigmas", "only allowed for kind 'custom'");
    if (!sigmas->is_array())
      fail("profile.sigmas", "expected an array");
    for (std::size_t i = 0; i < sigmas->size(); ++i)
      spec.custom_sigmas.push_back(as_real((*sigmas)[i], "profile.sigmas[" + std::to_string(i) + "]"));
    if (spec.n == 0)
      spec.n = spec.custom_sigmas.size();
  } else if (spec.kind == ProfileKind::custom) {
    fail("profile.sigmas", "missing required key");
  }
  if (spec.n == 0)
    fail("profile.n", "missing or zero");
  // Reject bad parameter sets before any computation starts.
  try {
    (void)make_profile(spec);
  } catch (const Error& e) {
    fail("profile", e.what());
  }
  return spec;
}

Constants
parse_constants(const json& node, Constants constants)
{
  check_object(node, "constants", { "kappa", "eta", "xi", "beta" });
  if (const json* v = find(node, "kappa"))
    constants.kappa = as_real(*v, "constants.kappa");
  if (const json* v = find(node, "eta"))
    constants.eta = as_real(*v, "constants.eta");
  if (const json* v = find(node, "xi"))
    constants.xi = as_real(*v, "constants.xi");
  if (const json* v = find(node, "beta"))
    constants.beta = as_real(*v, "constants.beta");
  return constants;
}

std::filesystem::path
resolve(const std::filesystem::path& base_dir, const std::string& p)
{
  std::filesystem::path path(p);
  if (path.is_relative() && !base_dir.empty())
    return base_dir / path;
  return path;
}

} // namespace

RunConfig
parse_run_config(const std::string& text, const std::filesystem::path& base_dir)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: malformed JSON: ") + e.what());
  }
  check_object(root,
               "",
               { "profile", "family", "mu", "delta", "delta_rule", "constants", "mode", "trials",
                 "master_seed", "n_grid", "threads", "output" });

  RunConfig run;
  auto& cfg = run.experiment;
  cfg.profile = parse_profile(require(root, "", "profile"));
  if (const json* v = find(root, "family"))
    cfg.family = parse_enum(*v, "family", Family::parse);
  if (const json* v = find(root, "mu"))
    cfg.mu = as_real(*v, "mu");
  if (const json* v = find(root, "delta"))
    cfg.constants.delta = as_real(*v, "delta");
  if (const json* v = find(root, "delta_rule"))
    cfg.delta_rule = parse_enum(*v, "delta_rule", parse_delta_rule);
  if (const json* v = find(root, "constants"))
    cfg.constants = parse_constants(*v, cfg.constants);
  if (const json* v = find(root, "mode"))
    cfg.mode = parse_enum(*v, "mode", parse_grid_mode);
  cfg.trials = as_unsigned(require(root, "", "trials"), "trials");
  cfg.master_seed = as_unsigned(require(root, "", "master_seed"), "master_seed");
  if (const json* v = find(root, "n_grid")) {
    if (!v->is_array() || v->empty())
      fail("n_grid", "expected a non-empty array");
    for (std::size_t i = 0; i < v->size(); ++i)
      cfg.n_grid.push_back(as_unsigned((*v)[i], "n_grid[" + std::to_string(i) + "]"));
  }
  if (const json* v = find(root, "threads"))
    cfg.threads = static_cast<unsigned>(as_unsigned(*v, "threads"));

  const json& output = require(root, "", "output");
  check_object(output, "output", { "trials_csv", "summary_csv" });
  run.trials_csv = resolve(base_dir, as_string(require(output, "output", "trials_csv"), "output.trials_csv"));
  run.summary_csv =
    resolve(base_dir, as_string(require(output, "output", "summary_csv"), "output.summary_csv"));

  if (!(cfg.constants.delta > 0.0 && cfg.constants.delta < 1.0))
    fail("delta", "must lie in (0, 1)");
  try {
    cfg.constants.validate();
  } catch (const Error& e) {
    fail("constants", e.what());
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail("<root>", e.what());
  }
  return run;
}

RunConfig
load_run_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

} // namespace hetmean::app
