#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cqed/liouville.hpp"
#include "cqed/model.hpp"
#include "cqed/observables.hpp"

namespace cqed {

struct Axis {
  std::string name;
  std::vector<double> values;
};

/// `points` uniformly spaced values from lo to hi inclusive.
Axis uniform_axis(std::string name, double lo, double hi, int points);

enum class ExtremumKind { minimum, maximum, local_maxima };

struct ExtremumRequest {
  std::string column;
  ExtremumKind kind;
};

/// Parameter grid plus the columns to report. Axis names are SystemParams
/// fields or "r" (drive ratio e_b / e_a).
struct SweepSpec {
  std::string name = "custom";
  SystemParams base;
  std::optional<Axis> axis1;
  std::optional<Axis> axis2;
  std::vector<std::string> observables = {"n_a", "n_b", "g2_a", "g2_b"};
  /// Column divided by its maximum over the sweep, emitted as "<column>_norm".
  std::optional<std::string> normalize;
  std::vector<ExtremumRequest> extrema;

  /// Throws std::invalid_argument for bad names, empty or unordered axes.
  void validate() const;
  std::size_t size() const;
  SystemParams params_at(std::size_t i1, std::size_t i2) const;
};

/// Observable columns understood by sweeps:
/// n_a, n_b, g2_a, g2_b, mandel_q_b, g2_a_over_n_a, log10_g2_a, g2_alpha,
/// intensity, qd_emission.
const std::vector<std::string>& observable_columns();
bool is_observable_column(const std::string& name);

struct SweepRow {
  std::vector<double> coords;
  ObservableSet values;
  double residual = 0;
  int iterations = 0;
  double wall_time = 0;
  InvariantReport invariants;
  /// Empty when the row solved cleanly; otherwise a short reason.
  std::string flag;
};

struct SweepResult {
  SweepSpec spec;
  /// Row index = i2 * n1 + i1 (axis2 outer, axis1 inner).
  std::vector<SweepRow> rows;
  std::optional<double> normalization;

  bool all_ok() const;
  std::size_t flagged() const;
  std::optional<double> column(std::size_t row, const std::string& name) const;
  std::vector<std::optional<double>> column(const std::string& name) const;
  /// Column names in output order: requested observables then the
  /// normalized column, if any.
  std::vector<std::string> value_columns() const;
};

struct SweepOptions {
  int workers = 1;
  /// Consecutive grid points solved by one worker. Each point after the
  /// first in a chunk starts from an extrapolation of its predecessors.
  int chunk = 16;
  /// Within a chunk, precondition with the factorization built for an
  /// earlier point until the iteration count exceeds the fresh count by
  /// reuse_slack; then rebuild.
  bool reuse_preconditioner = true;
  int reuse_slack = 4;
  /// Evaluate the minimum eigenvalue of rho on this many evenly spaced rows.
  int spectrum_rows = 0;
  /// Keep each solved density matrix; indexed like rows.
  std::vector<std::optional<DensityMatrix>>* states = nullptr;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Rows evenly spaced through [0, n): round(k (n-1) / (count-1)).
std::vector<std::size_t> subsample(std::size_t n, std::size_t count);

SweepSpec preset_fig2();
SweepSpec preset_fig3();
SweepSpec preset_fig4();
SweepSpec preset_fig5();
SweepSpec preset_ref31();
/// Looks up one of fig2, fig3, fig4, fig5, ref31.
std::optional<SweepSpec> preset(const std::string& name);
const std::vector<std::string>& preset_names();

struct Extremum {
  std::size_t index;
  double coordinate;
  double value;
};

/// Vertex of the parabola through three points.
Extremum parabolic_vertex(double x0, double y0, double x1, double y1, double x2, double y2, std::size_t index);

/// Global extremum of y(x); interior points are refined by parabolic
/// interpolation through their two neighbours. Undefined samples are skipped.
std::optional<Extremum> locate_minimum(const std::vector<double>& x, const std::vector<std::optional<double>>& y);
std::optional<Extremum> locate_maximum(const std::vector<double>& x, const std::vector<std::optional<double>>& y);
/// Every strict interior local maximum, refined the same way.
std::vector<Extremum> local_maxima(const std::vector<double>& x, const std::vector<std::optional<double>>& y);

/// Width of the contiguous x-interval containing x_center on which y < level,
/// with the crossings linearly interpolated. nullopt if y(x_center) >= level.
/// An interval reaching the grid edge is clipped to it.
std::optional<double> window_width(const std::vector<double>& x, const std::vector<std::optional<double>>& y,
                                   double x_center, double level);

/// Located extrema for a one-axis result, one per request (local_maxima may
/// produce several).
struct ExtremumReport {
  std::string column;
  ExtremumKind kind;
  Extremum at;
};
std::vector<ExtremumReport> extrema(const SweepResult& result);

struct AuditLine {
  std::string column;
  /// Largest relative change between the two cutoffs over the subsample.
  double max_relative_change;
};

struct AuditStep {
  int from;
  int to;
  std::vector<AuditLine> lines;
  double worst() const;
};

struct AuditReport {
  std::vector<std::size_t> sample_rows;
  std::vector<AuditStep> steps;
  double worst() const;
};

/// |a - b| / max(|a|, |b|), 0 if both are zero or both undefined, infinity if
/// only one is defined.
double relative_change(std::optional<double> a, std::optional<double> b);

/// Re-solves a 5-point subsample of the sweep with both cutoffs set to each
/// entry of `cutoffs` and compares successive cutoffs column by column.
AuditReport convergence_audit(const SweepSpec& spec, const std::vector<int>& cutoffs, int workers = 1);

}  // namespace cqed
