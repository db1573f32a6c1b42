#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cqed/experiments.hpp"

namespace cqed {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AxisConfig {
  std::optional<std::string> name;
  std::optional<std::pair<double, double>> range;
  std::optional<int> points;
};

struct RunConfig {
  std::optional<std::string> preset;
  /// Parameter overrides in file order.
  std::vector<std::pair<std::string, double>> overrides;
  AxisConfig axis1;
  AxisConfig axis2;
  std::optional<std::string> output;
  int workers = 1;
  std::optional<int> cutoff;
  bool emit_plot = false;
  bool audit = false;
};

/// Parses a flat "key = value" document ('#' starts a comment). Throws
/// ConfigError for unknown or repeated keys, malformed numbers, r together
/// with e_b, and axis names combined with a preset.
RunConfig parse_config(std::string_view text);

/// Resolves a config into a sweep: preset (or the custom grid), then
/// parameter overrides, then axis reshaping and the cutoff override.
/// An axis with one point and no range sits at the base value of its
/// parameter. Throws ConfigError.
SweepSpec build_spec(const RunConfig& config);

/// Default CSV path when none is configured: "<sweep name>.csv".
std::string output_path(const RunConfig& config, const SweepSpec& spec);

/// Executes the sweep, writes the CSV (and plot script), prints one summary
/// line per located extremum to `out`. Returns 0 on success, 1 on a config
/// error (nothing written), 2 if any row was flagged.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace cqed
