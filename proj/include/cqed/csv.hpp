#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cqed/experiments.hpp"

namespace cqed {

inline constexpr const char* csv_banner = "# cavity-qed-sim v1";
inline constexpr const char* csv_undefined = "undef";
/// 1 micro-eV corresponds to 0.2418 GHz.
inline constexpr double ghz_per_micro_ev = 0.2418;

/// True for parameters measured as detunings, which get a GHz helper column.
bool is_detuning_axis(const std::string& name);

std::vector<std::string> csv_columns(const SweepResult& result);
void write_csv(std::ostream& os, const SweepResult& result);

/// Shortest round-trip text form with 17 significant digits.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
  std::optional<std::size_t> column_index(const std::string& name) const;
};

/// Reads a file written by write_csv. Throws std::runtime_error on malformed input.
CsvTable read_csv(std::istream& is);

/// gnuplot script plotting the CSV found at `csv_name` (relative path).
void write_plot_script(std::ostream& os, const SweepResult& result, const std::string& csv_name);

}  // namespace cqed
