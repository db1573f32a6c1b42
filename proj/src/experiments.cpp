#include "cqed/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#ifdef CQED_HAVE_OPENBLAS
extern "C" void openblas_set_num_threads(int);
#endif

namespace cqed {

namespace {

void validate_axis(const Axis& axis) {
  if (!is_parameter_name(axis.name)) throw std::invalid_argument("unknown sweep parameter '" + axis.name + "'");
  if (axis.values.empty()) throw std::invalid_argument("axis '" + axis.name + "' has no values");
  for (std::size_t i = 0; i < axis.values.size(); ++i) {
    if (!std::isfinite(axis.values[i])) throw std::invalid_argument("axis '" + axis.name + "' has a non-finite value");
    if (i > 0 && !(axis.values[i] > axis.values[i - 1])) {
      throw std::invalid_argument("axis '" + axis.name + "' values must be strictly increasing");
    }
  }
}

std::size_t axis_size(const std::optional<Axis>& axis) { return axis ? axis->values.size() : 1; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Lagrange extrapolation of previous solutions to the coordinate x.
Matrix extrapolate(const std::vector<std::pair<double, const Matrix*>>& history, double x) {
  Matrix out = Matrix::Zero(history.front().second->rows(), history.front().second->cols());
  for (std::size_t k = 0; k < history.size(); ++k) {
    double w = 1.0;
    for (std::size_t m = 0; m < history.size(); ++m) {
      if (m != k) w *= (x - history[m].first) / (history[k].first - history[m].first);
    }
    out += w * *history[k].second;
  }
  return out;
}

std::optional<double> raw_column(const ObservableSet& o, const std::string& name) {
  if (name == "n_a") return o.n_a;
  if (name == "n_b") return o.n_b;
  if (name == "g2_a") return o.g2_a;
  if (name == "g2_b") return o.g2_b;
  if (name == "mandel_q_b") return o.mandel_q_b;
  if (name == "g2_alpha") return o.g2_alpha;
  if (name == "intensity") return o.intensity;
  if (name == "qd_emission") return o.qd_emission;
  if (name == "g2_a_over_n_a") {
    if (!o.g2_a) return std::nullopt;
    return *o.g2_a / o.n_a;
  }
  if (name == "log10_g2_a") {
    if (!o.g2_a || !(*o.g2_a > 0)) return std::nullopt;
    return std::log10(*o.g2_a);
  }
  throw std::invalid_argument("unknown observable column '" + name + "'");
}

}  // namespace

Axis uniform_axis(std::string name, double lo, double hi, int points) {
  if (points < 1) throw std::invalid_argument("axis needs at least one point");
  Axis axis{std::move(name), {}};
  axis.values.resize(points);
  if (points == 1) {
    axis.values[0] = lo;
    return axis;
  }
  for (int i = 0; i < points; ++i) {
    axis.values[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  axis.values.back() = hi;
  return axis;
}

const std::vector<std::string>& observable_columns() {
  static const std::vector<std::string> names = {"n_a",        "n_b",      "g2_a",      "g2_b",
                                                 "mandel_q_b", "g2_a_over_n_a", "log10_g2_a", "g2_alpha",
                                                 "intensity",  "qd_emission"};
  return names;
}

bool is_observable_column(const std::string& name) {
  const auto& names = observable_columns();
  return std::find(names.begin(), names.end(), name) != names.end();
}

void SweepSpec::validate() const {
  base.validate();
  if (axis2 && !axis1) throw std::invalid_argument("axis2 given without axis1");
  if (axis1) validate_axis(*axis1);
  if (axis2) {
    validate_axis(*axis2);
    if (axis2->name == axis1->name) throw std::invalid_argument("both axes sweep '" + axis1->name + "'");
  }
  if (observables.empty()) throw std::invalid_argument("no observables requested");
  for (const auto& o : observables) {
    if (!is_observable_column(o)) throw std::invalid_argument("unknown observable column '" + o + "'");
  }
  if (normalize && !is_observable_column(*normalize)) {
    throw std::invalid_argument("cannot normalize unknown column '" + *normalize + "'");
  }
  for (std::size_t i1 = 0; i1 < axis_size(axis1); ++i1) {
    for (std::size_t i2 = 0; i2 < axis_size(axis2); ++i2) params_at(i1, i2).validate();
  }
}

std::size_t SweepSpec::size() const { return axis_size(axis1) * axis_size(axis2); }

SystemParams SweepSpec::params_at(std::size_t i1, std::size_t i2) const {
  SystemParams p = base;
  if (axis2) set_parameter(p, axis2->name, axis2->values.at(i2));
  if (axis1) set_parameter(p, axis1->name, axis1->values.at(i1));
  return p;
}

bool SweepResult::all_ok() const { return flagged() == 0; }

std::size_t SweepResult::flagged() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.flag.empty(); }));
}

std::optional<double> SweepResult::column(std::size_t row, const std::string& name) const {
  const SweepRow& r = rows.at(row);
  if (spec.normalize && name == *spec.normalize + "_norm") {
    const auto v = raw_column(r.values, *spec.normalize);
    if (!v || !normalization || *normalization == 0) return std::nullopt;
    return *v / *normalization;
  }
  return raw_column(r.values, name);
}

std::vector<std::optional<double>> SweepResult::column(const std::string& name) const {
  std::vector<std::optional<double>> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = column(i, name);
  return out;
}

std::vector<std::string> SweepResult::value_columns() const {
  std::vector<std::string> cols = spec.observables;
  if (spec.normalize) cols.push_back(*spec.normalize + "_norm");
  return cols;
}

std::vector<std::size_t> subsample(std::size_t n, std::size_t count) {
  std::vector<std::size_t> out;
  if (n == 0 || count == 0) return out;
  if (count >= n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  if (count == 1) return {0};
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(k) * (n - 1) / (count - 1))));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
#ifdef CQED_HAVE_OPENBLAS
  openblas_set_num_threads(1);
#endif
  const std::size_t n1 = axis_size(spec.axis1);
  const std::size_t total = spec.size();
  SweepResult result;
  result.spec = spec;
  result.rows.resize(total);
  if (options.states) options.states->assign(total, std::nullopt);

  std::vector<bool> spectrum(total, false);
  for (std::size_t i : subsample(total, static_cast<std::size_t>(std::max(0, options.spectrum_rows)))) {
    spectrum[i] = true;
  }

  const std::size_t chunk = static_cast<std::size_t>(std::max(1, options.chunk));
  const std::size_t n_chunks = (total + chunk - 1) / chunk;
  std::atomic<std::size_t> next_chunk{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto solve_chunk = [&](std::size_t c) {
    std::vector<std::pair<double, Matrix>> history;
    std::shared_ptr<const LyapunovSolver> precond;
    int fresh_iterations = 0;
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t i1 = idx % n1;
      const std::size_t i2 = idx / n1;
      SweepRow& row = result.rows[idx];
      if (spec.axis1) row.coords.push_back(spec.axis1->values[i1]);
      if (spec.axis2) row.coords.push_back(spec.axis2->values[i2]);
      const double x = spec.axis1 ? spec.axis1->values[i1] : 0.0;
      if (i1 == 0) {
        history.clear();
        precond.reset();
      }

      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SystemParams p = spec.params_at(i1, i2);
        const Superoperator l = build_liouvillian(p);
        SteadyStateOptions opts;
        Matrix guess;
        if (!history.empty()) {
          std::vector<std::pair<double, const Matrix*>> h;
          for (const auto& [hx, hm] : history) h.emplace_back(hx, &hm);
          guess = extrapolate(h, x);
          opts.initial_guess = &guess;
        }
        bool reused = options.reuse_preconditioner && precond != nullptr;
        if (reused) opts.preconditioner = precond;
        std::optional<SteadyStateResult> attempt;
        try {
          attempt = solve_steady_state(l, opts);
        } catch (const SteadyStateError&) {
          if (!reused) throw;
          // A stale factorization can stall GMRES; retry with a fresh one.
          reused = false;
          opts.preconditioner.reset();
          attempt = solve_steady_state(l, opts);
        }
        SteadyStateResult& sol = *attempt;
        if (!reused) {
          precond = sol.preconditioner;
          fresh_iterations = sol.iterations;
        } else if (sol.iterations > fresh_iterations + options.reuse_slack) {
          precond.reset();
        }
        row.residual = sol.residual;
        row.iterations = sol.iterations;
        row.values = evaluate(sol.rho, p);
        row.invariants = check_invariants(sol.rho, spectrum[idx]);
        if (!row.invariants.ok()) row.flag = "density matrix invariants violated";
        history.emplace_back(x, sol.rho.matrix());
        if (history.size() > 3) history.erase(history.begin());
        if (options.states) (*options.states)[idx] = std::move(sol.rho);
      } catch (const SteadyStateError& e) {
        row.residual = e.residual();
        row.flag = e.what();
        history.clear();
        precond.reset();
      } catch (const std::exception& e) {
        row.residual = std::numeric_limits<double>::infinity();
        row.flag = e.what();
        history.clear();
        precond.reset();
      }
      row.wall_time = seconds_since(t0);
      const std::size_t finished = ++done;
      if (options.progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        options.progress(finished, total);
      }
    }
  };

  auto worker = [&] {
    for (std::size_t c = next_chunk++; c < n_chunks; c = next_chunk++) solve_chunk(c);
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(n_chunks)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (spec.normalize) {
    std::optional<double> best;
    for (const auto& row : result.rows) {
      if (!row.flag.empty()) continue;
      const auto v = raw_column(row.values, *spec.normalize);
      if (v && (!best || *v > *best)) best = v;
    }
    result.normalization = best;
  }
  return result;
}

SweepSpec preset_fig2() {
  SweepSpec s;
  s.name = "fig2";
  s.base.e_a = 1.0;
  s.base.e_b = 1.0;
  const double g = s.base.g;
  s.axis1 = uniform_axis("delta", -4 * g, 14 * g, 721);
  s.observables = {"intensity", "qd_emission", "n_a", "n_b"};
  s.normalize = "intensity";
  s.extrema = {{"intensity_norm", ExtremumKind::local_maxima}};
  return s;
}

SweepSpec preset_fig3() {
  SweepSpec s;
  s.name = "fig3";
  s.base.delta = s.base.g;
  s.axis1 = uniform_axis("r", 0.5, 20.0, 391);
  s.observables = {"g2_a", "g2_a_over_n_a", "n_a", "n_b"};
  s.extrema = {{"g2_a_over_n_a", ExtremumKind::minimum}};
  return s;
}

SweepSpec preset_fig4() {
  SweepSpec s;
  s.name = "fig4";
  const double g = s.base.g;
  const double chi = s.base.chi;
  s.base.delta = g;
  s.base.e_b = 9.5 * s.base.e_a;
  s.axis1 = uniform_axis("delta_a", -2 * g, 2 * g, 81);
  s.axis2 = uniform_axis("delta_b", -chi / 2 - 2 * g, -chi / 2 + 2 * g, 81);
  s.observables = {"g2_a", "log10_g2_a", "n_a"};
  return s;
}

SweepSpec preset_fig5() {
  SweepSpec s;
  s.name = "fig5";
  s.base.delta = s.base.chi / 2;
  s.axis1 = uniform_axis("r", 1.0, 30.0, 581);
  s.observables = {"mandel_q_b", "n_b", "n_a", "g2_b"};
  s.extrema = {{"mandel_q_b", ExtremumKind::maximum}};
  return s;
}

SweepSpec preset_ref31() {
  SweepSpec s;
  s.name = "ref31";
  s.base.delta = -s.base.g;
  s.base.e_b = 9.5 * s.base.e_a;
  s.observables = {"g2_a", "n_a"};
  return s;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5", "ref31"};
  return names;
}

std::optional<SweepSpec> preset(const std::string& name) {
  if (name == "fig2") return preset_fig2();
  if (name == "fig3") return preset_fig3();
  if (name == "fig4") return preset_fig4();
  if (name == "fig5") return preset_fig5();
  if (name == "ref31") return preset_ref31();
  return std::nullopt;
}

Extremum parabolic_vertex(double x0, double y0, double x1, double y1, double x2, double y2, std::size_t index) {
  const double d0 = x1 - x0;
  const double d2 = x1 - x2;
  const double den = d0 * (y1 - y2) - d2 * (y1 - y0);
  if (den == 0) return {index, x1, y1};
  const double xv = x1 - 0.5 * (d0 * d0 * (y1 - y2) - d2 * d2 * (y1 - y0)) / den;
  // Lagrange form of the same parabola evaluated at the vertex.
  const double yv = y0 * (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2)) +
                    y1 * (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2)) +
                    y2 * (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
  return {index, xv, yv};
}

namespace {

std::optional<Extremum> locate(const std::vector<double>& x, const std::vector<std::optional<double>>& y, bool maximum) {
  if (x.size() != y.size()) throw std::invalid_argument("locate: size mismatch");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y[i]) continue;
    if (!best || (maximum ? *y[i] > *y[*best] : *y[i] < *y[*best])) best = i;
  }
  if (!best) return std::nullopt;
  const std::size_t i = *best;
  if (i == 0 || i + 1 >= y.size() || !y[i - 1] || !y[i + 1]) return Extremum{i, x[i], *y[i]};
  return parabolic_vertex(x[i - 1], *y[i - 1], x[i], *y[i], x[i + 1], *y[i + 1], i);
}

}  // namespace

std::optional<Extremum> locate_minimum(const std::vector<double>& x, const std::vector<std::optional<double>>& y) {
  return locate(x, y, false);
}

std::optional<Extremum> locate_maximum(const std::vector<double>& x, const std::vector<std::optional<double>>& y) {
  return locate(x, y, true);
}

std::vector<Extremum> local_maxima(const std::vector<double>& x, const std::vector<std::optional<double>>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("local_maxima: size mismatch");
  std::vector<Extremum> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!y[i - 1] || !y[i] || !y[i + 1]) continue;
    if (*y[i] > *y[i - 1] && *y[i] > *y[i + 1]) {
      out.push_back(parabolic_vertex(x[i - 1], *y[i - 1], x[i], *y[i], x[i + 1], *y[i + 1], i));
    }
  }
  return out;
}

std::optional<double> window_width(const std::vector<double>& x, const std::vector<std::optional<double>>& y,
                                   double x_center, double level) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("window_width: size mismatch");
  const auto it = std::min_element(x.begin(), x.end(),
                                   [&](double a, double b) { return std::abs(a - x_center) < std::abs(b - x_center); });
  const std::size_t c = static_cast<std::size_t>(it - x.begin());
  auto below = [&](std::size_t i) { return y[i] && *y[i] < level; };
  if (!below(c)) return std::nullopt;
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    if (!y[outside]) return x[inside];
    const double t = (level - *y[inside]) / (*y[outside] - *y[inside]);
    return x[inside] + t * (x[outside] - x[inside]);
  };
  std::size_t lo = c;
  while (lo > 0 && below(lo - 1)) --lo;
  std::size_t hi = c;
  while (hi + 1 < x.size() && below(hi + 1)) ++hi;
  const double left = lo == 0 ? x.front() : crossing(lo, lo - 1);
  const double right = hi + 1 == x.size() ? x.back() : crossing(hi, hi + 1);
  return right - left;
}

std::vector<ExtremumReport> extrema(const SweepResult& result) {
  std::vector<ExtremumReport> out;
  if (!result.spec.axis1 || result.spec.axis2) return out;
  const auto& x = result.spec.axis1->values;
  for (const auto& req : result.spec.extrema) {
    const auto y = result.column(req.column);
    switch (req.kind) {
      case ExtremumKind::minimum:
        if (auto e = locate_minimum(x, y)) out.push_back({req.column, req.kind, *e});
        break;
      case ExtremumKind::maximum:
        if (auto e = locate_maximum(x, y)) out.push_back({req.column, req.kind, *e});
        break;
      case ExtremumKind::local_maxima:
        for (const auto& e : local_maxima(x, y)) out.push_back({req.column, req.kind, e});
        break;
    }
  }
  return out;
}

double relative_change(std::optional<double> a, std::optional<double> b) {
  if (!a && !b) return 0.0;
  if (!a || !b) return std::numeric_limits<double>::infinity();
  const double scale = std::max(std::abs(*a), std::abs(*b));
  if (scale == 0) return 0.0;
  return std::abs(*a - *b) / scale;
}

double AuditStep::worst() const {
  double w = 0;
  for (const auto& l : lines) w = std::max(w, l.max_relative_change);
  return w;
}

double AuditReport::worst() const {
  double w = 0;
  for (const auto& s : steps) w = std::max(w, s.worst());
  return w;
}

AuditReport convergence_audit(const SweepSpec& spec, const std::vector<int>& cutoffs, int workers) {
  if (cutoffs.size() < 2) throw std::invalid_argument("convergence_audit needs at least two cutoffs");
  spec.validate();
  AuditReport report;
  report.sample_rows = subsample(spec.size(), 5);

  std::vector<std::string> columns;
  for (const auto& o : spec.observables) columns.push_back(o);

  const std::size_t n1 = axis_size(spec.axis1);
  std::vector<SweepResult> runs;
  for (int cutoff : cutoffs) {
    // The sample points become a one-off list sweep over the flattened grid.
    SweepResult run;
    run.spec = spec;
    run.rows.resize(report.sample_rows.size());
    std::vector<SystemParams> points;
    for (std::size_t idx : report.sample_rows) {
      SystemParams p = spec.params_at(idx % n1, idx / n1);
      p.n_a_max = cutoff;
      p.n_b_max = cutoff;
      points.push_back(p);
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t k = next++; k < points.size(); k = next++) {
        SweepRow& row = run.rows[k];
        try {
          const SteadyStateResult sol = solve_steady_state(build_liouvillian(points[k]));
          row.values = evaluate(sol.rho, points[k]);
          row.residual = sol.residual;
        } catch (const std::exception& e) {
          row.flag = e.what();
        }
      }
    };
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < w; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    runs.push_back(std::move(run));
  }

  for (std::size_t s = 1; s < cutoffs.size(); ++s) {
    AuditStep step{cutoffs[s - 1], cutoffs[s], {}};
    for (const auto& col : columns) {
      double worst = 0;
      for (std::size_t k = 0; k < report.sample_rows.size(); ++k) {
        const auto& ra = runs[s - 1].rows[k];
        const auto& rb = runs[s].rows[k];
        if (!ra.flag.empty() || !rb.flag.empty()) {
          worst = std::numeric_limits<double>::infinity();
          continue;
        }
        worst = std::max(worst, relative_change(raw_column(ra.values, col), raw_column(rb.values, col)));
      }
      step.lines.push_back({col, worst});
    }
    report.steps.push_back(std::move(step));
  }
  return report;
}

}  // namespace cqed
