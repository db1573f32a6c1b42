#include "cqed/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cqed {

bool is_detuning_axis(const std::string& name) {
  return name == "delta" || name == "delta_a" || name == "delta_b";
}

namespace {

std::vector<const Axis*> axes(const SweepSpec& spec) {
  std::vector<const Axis*> out;
  if (spec.axis1) out.push_back(&*spec.axis1);
  if (spec.axis2) out.push_back(&*spec.axis2);
  return out;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string(csv_undefined);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> csv_columns(const SweepResult& result) {
  std::vector<std::string> cols;
  for (const Axis* a : axes(result.spec)) {
    cols.push_back(a->name);
    if (is_detuning_axis(a->name)) cols.push_back(a->name + "_ghz");
  }
  for (const auto& c : result.value_columns()) cols.push_back(c);
  cols.push_back("residual");
  return cols;
}

void write_csv(std::ostream& os, const SweepResult& result) {
  os << csv_banner << '\n';
  const auto cols = csv_columns(result);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  const auto ax = axes(result.spec);
  const auto values = result.value_columns();
  for (std::size_t r = 0; r < result.rows.size(); ++r) {
    const SweepRow& row = result.rows[r];
    bool first = true;
    auto cell = [&](const std::string& s) {
      if (!first) os << ',';
      os << s;
      first = false;
    };
    for (std::size_t k = 0; k < ax.size(); ++k) {
      cell(format_number(row.coords[k]));
      if (is_detuning_axis(ax[k]->name)) cell(format_number(row.coords[k] * ghz_per_micro_ev));
    }
    const bool ok = row.flag.empty();
    for (const auto& c : values) cell(ok ? format_optional(result.column(r, c)) : csv_undefined);
    cell(std::isfinite(row.residual) ? format_number(row.residual) : csv_undefined);
    os << '\n';
  }
}

std::optional<std::size_t> CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != csv_banner) throw std::runtime_error("missing CSV banner");
  if (!std::getline(is, line)) throw std::runtime_error("missing CSV header");
  CsvTable t;
  t.columns = split(line, ',');
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size()) throw std::runtime_error("CSV row has the wrong number of cells");
    std::vector<std::optional<double>> row;
    for (const auto& c : cells) {
      if (c == csv_undefined) {
        row.emplace_back();
        continue;
      }
      double v = 0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) throw std::runtime_error("malformed CSV number '" + c + "'");
      row.emplace_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_plot_script(std::ostream& os, const SweepResult& result, const std::string& csv_name) {
  const auto cols = csv_columns(result);
  os << "# gnuplot script for " << csv_name << "\n";
  os << "set datafile separator ','\n";
  os << "set datafile missing '" << csv_undefined << "'\n";
  os << "set key autotitle columnhead\n";
  os << "data = '" << csv_name << "'\n";
  const auto values = result.value_columns();
  auto column_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == name) return i + 1;
    }
    return std::size_t{0};
  };
  if (!result.spec.axis1) {
    os << "# single-point run: no axis to plot\n";
    return;
  }
  const std::size_t x = column_of(result.spec.axis1->name);
  if (result.spec.axis2) {
    const std::size_t y = column_of(result.spec.axis2->name);
    os << "set view map\n";
    os << "set xlabel '" << result.spec.axis1->name << "'\n";
    os << "set ylabel '" << result.spec.axis2->name << "'\n";
    for (const auto& c : values) {
      os << "set title '" << c << "'\n";
      os << "splot data using " << x << ":" << y << ":" << column_of(c) << " with points pointtype 5 palette notitle\n";
      os << "pause -1\n";
    }
    return;
  }
  os << "set xlabel '" << result.spec.axis1->name << "'\n";
  os << "set multiplot layout " << values.size() << ",1\n";
  for (const auto& c : values) {
    os << "plot data using " << x << ":" << column_of(c) << " with lines title '" << c << "'\n";
  }
  os << "unset multiplot\n";
  os << "pause -1\n";
}

}  // namespace cqed
