#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hetmean::app {

inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 1;
inline constexpr int exit_internal_error = 2;

/**
 * Runs the command line `args` (without the program name).
 *
 * Subcommands: estimate, simulate, bounds, calibrate. Reports go to `out`;
 * on failure a single diagnostic line goes to `err` and the exit code is
 * 1 for bad input and 2 for internal errors.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hetmean::app
