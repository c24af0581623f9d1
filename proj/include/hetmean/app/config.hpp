#pragma once

#include "hetmean/simulate.hpp"

#include <filesystem>
#include <string>

namespace hetmean::app {

/**
 * Simulation run file (JSON). Every object rejects unknown keys.
 *
 *   {
 *     "profile":     {"kind": "equal", "n": 1024, "params": {"sigma": 1.0},
 *                     "sigmas": [...]},            // sigmas only for kind "custom"
 *     "family":      "gaussian" | "laplace",       // default gaussian
 *     "mu":          0.0,
 *     "delta":       0.1,
 *     "delta_rule":  "fixed" | "inverse_n",        // default fixed
 *     "constants":   {"kappa": 8, "eta": 2, "xi": 4, "beta": 0.798},
 *     "mode":        "dyadic" | "pairwise",
 *     "trials":      100,                          // required
 *     "master_seed": 1,                            // required
 *     "n_grid":      [256, 1024],                  // optional
 *     "threads":     0,
 *     "output":      {"trials_csv": "t.csv", "summary_csv": "s.csv"}   // required
 *   }
 *
 * Relative output paths resolve against the directory of the run file.
 */
struct RunConfig
{
  ExperimentConfig experiment;
  std::filesystem::path trials_csv;
  std::filesystem::path summary_csv;
};

//! Validates `text` and builds the run; errors name the offending field path.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace hetmean::app
