#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covevo::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kNumerical = 3,
};

/// Runs one subcommand. `args` excludes the program name. Output goes to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "a,b,c" into numbers; ValidationError names the bad token.
std::vector<double> parse_list(const std::string& text);

/// Parses "lo:hi:steps" into `steps` evenly spaced values from lo to hi inclusive.
std::vector<double> parse_range(const std::string& text);

}  // namespace covevo::cli
