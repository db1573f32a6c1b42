#include "cqed/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cqed/csv.hpp"

namespace cqed {

namespace {

const std::set<std::string, std::less<>> parameter_keys = {"g",     "kappa",   "gamma",   "chi",     "e_a",    "e_b",
                                                          "r",     "delta",   "delta_a", "delta_b", "n_a_max", "n_b_max"};
const std::set<std::string, std::less<>> other_keys = {"preset", "axis1",        "axis1_range", "axis1_points", "axis2",
                                                       "axis2_range", "axis2_points", "output",      "workers"};

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_number(std::string_view text, int line, std::string_view key) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    fail(line, "malformed number '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

int parse_integer(std::string_view text, int line, std::string_view key) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    fail(line, "malformed integer '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

std::pair<double, double> parse_range(std::string_view text, int line, std::string_view key) {
  std::string s(text);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), ':', ' ');
  std::istringstream is(s);
  std::string lo, hi, extra;
  if (!(is >> lo >> hi) || (is >> extra)) fail(line, std::string(key) + " needs two numbers, e.g. '0.5, 20'");
  return {parse_number(lo, line, key), parse_number(hi, line, key)};
}

AxisConfig& axis_for(RunConfig& c, std::string_view key) { return key[4] == '1' ? c.axis1 : c.axis2; }

std::optional<Axis> resolve_axis(const AxisConfig& cfg, const std::optional<Axis>& preset_axis,
                                 const SystemParams& base, const char* label) {
  std::optional<std::string> name = cfg.name;
  if (!name && preset_axis) name = preset_axis->name;
  if (!name) {
    if (cfg.range || cfg.points) throw ConfigError(std::string(label) + "_range/points given without " + label);
    return std::nullopt;
  }
  if (!is_parameter_name(*name)) throw ConfigError("unknown sweep parameter '" + *name + "'");
  int points = 101;
  if (preset_axis) points = static_cast<int>(preset_axis->values.size());
  if (cfg.points) points = *cfg.points;
  if (points < 1) throw ConfigError(std::string(label) + "_points must be >= 1");

  std::optional<std::pair<double, double>> range = cfg.range;
  if (!range && preset_axis) range = std::make_pair(preset_axis->values.front(), preset_axis->values.back());
  if (points == 1) {
    const double at = cfg.range ? cfg.range->first : get_parameter(base, *name);
    return Axis{*name, {at}};
  }
  if (!range) throw ConfigError(std::string(label) + " = " + *name + " needs " + label + "_range");
  if (!(range->second > range->first)) throw ConfigError(std::string(label) + "_range must be increasing");
  return uniform_axis(*name, range->first, range->second, points);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!parameter_keys.count(key) && !other_keys.count(key)) fail(line_no, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) fail(line_no, "repeated key '" + std::string(key) + "'");
    if (value.empty()) fail(line_no, "missing value for '" + std::string(key) + "'");

    if (parameter_keys.count(key)) {
      const double v = (key == "n_a_max" || key == "n_b_max") ? parse_integer(value, line_no, key)
                                                               : parse_number(value, line_no, key);
      c.overrides.emplace_back(std::string(key), v);
    } else if (key == "preset") {
      if (!preset(std::string(value))) fail(line_no, "unknown preset '" + std::string(value) + "'");
      c.preset = std::string(value);
    } else if (key == "axis1" || key == "axis2") {
      if (!is_parameter_name(value)) fail(line_no, "unknown sweep parameter '" + std::string(value) + "'");
      axis_for(c, key).name = std::string(value);
    } else if (key == "axis1_range" || key == "axis2_range") {
      axis_for(c, key).range = parse_range(value, line_no, key);
    } else if (key == "axis1_points" || key == "axis2_points") {
      axis_for(c, key).points = parse_integer(value, line_no, key);
    } else if (key == "output") {
      c.output = std::string(value);
    } else if (key == "workers") {
      c.workers = parse_integer(value, line_no, key);
      if (c.workers < 1) fail(line_no, "workers must be >= 1");
    }
  }
  if (seen.count("r") && seen.count("e_b")) throw ConfigError("'r' and 'e_b' both set; give one of them");
  if (c.preset && (c.axis1.name || c.axis2.name)) {
    throw ConfigError("a preset fixes its sweep axes; drop axis1/axis2 or the preset");
  }
  return c;
}

SweepSpec build_spec(const RunConfig& config) {
  if (config.preset && (config.axis1.name || config.axis2.name)) {
    throw ConfigError("a preset fixes its sweep axes; drop axis1/axis2 or the preset");
  }
  SweepSpec spec;
  if (config.preset) {
    const auto p = preset(*config.preset);
    if (!p) throw ConfigError("unknown preset '" + *config.preset + "'");
    spec = *p;
  } else {
    spec.observables = {"n_a", "n_b", "g2_a", "g2_b", "mandel_q_b", "intensity"};
    spec.axis1.reset();
    spec.axis2.reset();
  }
  try {
    for (const auto& [k, v] : config.overrides) {
      if (k != "r") set_parameter(spec.base, k, v);
    }
    for (const auto& [k, v] : config.overrides) {
      if (k == "r") set_parameter(spec.base, k, v);
    }
    if (config.cutoff) {
      spec.base.n_a_max = *config.cutoff;
      spec.base.n_b_max = *config.cutoff;
    }
    const auto preset_axis1 = spec.axis1;
    const auto preset_axis2 = spec.axis2;
    spec.axis1 = resolve_axis(config.axis1, preset_axis1, spec.base, "axis1");
    spec.axis2 = resolve_axis(config.axis2, preset_axis2, spec.base, "axis2");
    if (spec.axis2 && !spec.axis1) throw ConfigError("axis2 given without axis1");
    for (const auto& [k, v] : config.overrides) {
      for (const auto* a : {&spec.axis1, &spec.axis2}) {
        if (*a && (*a)->name == k && (*a)->values.size() > 1) {
          throw ConfigError("parameter '" + k + "' is both overridden and swept");
        }
      }
    }
    spec.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

std::string output_path(const RunConfig& config, const SweepSpec& spec) {
  return config.output ? *config.output : spec.name + ".csv";
}

namespace {

const char* kind_label(ExtremumKind k) {
  switch (k) {
    case ExtremumKind::minimum: return "min";
    case ExtremumKind::maximum: return "max";
    case ExtremumKind::local_maxima: return "local max";
  }
  return "";
}

// Width of the g2_a < 1 window along delta_a on the row of the grid closest
// to delta_b = -chi/2.
std::optional<std::string> antibunching_window_line(const SweepResult& result) {
  const SweepSpec& s = result.spec;
  if (!s.axis1 || !s.axis2 || s.axis1->name != "delta_a" || s.axis2->name != "delta_b") return std::nullopt;
  const double target = -s.base.chi / 2;
  const auto& yb = s.axis2->values;
  const auto it = std::min_element(yb.begin(), yb.end(),
                                   [&](double a, double b) { return std::abs(a - target) < std::abs(b - target); });
  const std::size_t i2 = static_cast<std::size_t>(it - yb.begin());
  const std::size_t n1 = s.axis1->values.size();
  std::vector<std::optional<double>> g2(n1);
  for (std::size_t i1 = 0; i1 < n1; ++i1) g2[i1] = result.column(i2 * n1 + i1, "g2_a");
  const auto width = window_width(s.axis1->values, g2, 0.0, 1.0);
  std::ostringstream os;
  os << "g2_a < 1 window along delta_a at delta_b = " << format_number(yb[i2]) << ": ";
  if (!width) {
    os << "none (g2_a >= 1 at delta_a = 0)";
  } else {
    os << "width " << format_number(*width) << " ueV = " << format_number(*width / s.base.g) << " g = "
       << format_number(*width * ghz_per_micro_ev) << " GHz";
  }
  return os.str();
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  try {
    spec = build_spec(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  }
  const std::string path = output_path(config, spec);

  SweepOptions opts;
  opts.workers = config.workers;
  const SweepResult result = run_sweep(spec, opts);

  {
    std::ofstream csv(path);
    if (!csv) {
      err << "cannot write " << path << '\n';
      return 1;
    }
    write_csv(csv, result);
  }
  if (config.emit_plot) {
    std::string script = path;
    const auto dot = script.rfind('.');
    const auto slash = script.rfind('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) script.resize(dot);
    script += ".gp";
    std::ofstream gp(script);
    const std::string csv_name = slash == std::string::npos ? path : path.substr(slash + 1);
    write_plot_script(gp, result, csv_name);
  }

  for (const auto& e : extrema(result)) {
    out << kind_label(e.kind) << ' ' << e.column << " = " << format_number(e.at.value) << " at "
        << spec.axis1->name << " = " << format_number(e.at.coordinate) << '\n';
  }
  if (const auto line = antibunching_window_line(result)) out << *line << '\n';
  if (!spec.axis1 && !result.rows.empty()) {
    for (const auto& c : result.value_columns()) {
      const auto v = result.column(0, c);
      out << c << " = " << (v ? format_number(*v) : csv_undefined) << '\n';
    }
  }

  if (config.audit) {
    const int c0 = std::max(spec.base.n_a_max, spec.base.n_b_max);
    const AuditReport report = convergence_audit(spec, {c0, c0 + 2}, config.workers);
    for (const auto& step : report.steps) {
      for (const auto& l : step.lines) {
        out << "audit " << l.column << ": max relative change " << step.from << " -> " << step.to << " = "
            << format_number(l.max_relative_change) << '\n';
      }
    }
  }

  const std::size_t flagged = result.flagged();
  if (flagged > 0) {
    err << flagged << " of " << result.rows.size() << " rows flagged\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      if (!result.rows[i].flag.empty()) err << "  row " << i << ": " << result.rows[i].flag << '\n';
    }
    return 2;
  }
  return 0;
}

}  // namespace cqed
