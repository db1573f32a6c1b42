#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cqed/config.hpp"
#include "cqed/csv.hpp"

using namespace cqed;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cqed_test_" + name);
}

}  // namespace

TEST_CASE("preset alone reproduces the preset") {
  const RunConfig c = parse_config("preset = fig3\n");
  const SweepSpec s = build_spec(c);
  const SweepSpec p = preset_fig3();
  CHECK(s.base == p.base);
  CHECK(s.axis1->values == p.axis1->values);
  CHECK(s.observables == p.observables);
}

TEST_CASE("single point at the chosen drive ratio") {
  const SweepSpec s = build_spec(parse_config("preset = fig3\nr = 9.5\naxis1_points = 1\n"));
  REQUIRE(s.axis1);
  CHECK(s.axis1->values == std::vector<double>{9.5});
  CHECK(s.base.e_b == doctest::Approx(9.5));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("e_b = 2\nr = 9.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("omega = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("g = twenty\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("g = 20x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("g = 20\ng = 21\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("g 20\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("preset = fig3\naxis1 = delta\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("preset = fig9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_a_max = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(build_spec(parse_config("preset = fig3\nr = 9.5\n")), ConfigError);
  CHECK_THROWS_AS(build_spec(parse_config("axis1 = r\n")), ConfigError);
  CHECK_THROWS_AS(build_spec(parse_config("kappa = -1\n")), ConfigError);
}

TEST_CASE("custom sweep with comments") {
  const RunConfig c = parse_config(
      "# custom grid\n"
      "delta = 20   # laser detuning\n"
      "e_a = 2\n"
      "r = 3\n"
      "axis1 = delta_a\n"
      "axis1_range = -10, 10\n"
      "axis1_points = 5\n"
      "n_a_max = 3\nn_b_max = 2\n"
      "workers = 2\n"
      "output = out.csv\n");
  const SweepSpec s = build_spec(c);
  CHECK(s.base.delta == 20);
  CHECK(s.base.e_b == doctest::Approx(6.0));
  CHECK(s.axis1->values == std::vector<double>{-10, -5, 0, 5, 10});
  CHECK(c.workers == 2);
  CHECK(output_path(c, s) == "out.csv");
}

TEST_CASE("run writes a CSV that round-trips exactly") {
  const auto path = temp_path("roundtrip.csv");
  std::filesystem::remove(path);
  RunConfig c = parse_config("n_a_max = 2\nn_b_max = 2\ndelta = 20\naxis1 = r\naxis1_range = 1, 4\naxis1_points = 4\n");
  c.output = path.string();
  c.emit_plot = true;
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);

  const SweepSpec spec = build_spec(c);
  const SweepResult direct = run_sweep(spec);
  std::ifstream in(path);
  const CsvTable t = read_csv(in);
  CHECK(t.columns.front() == "r");
  CHECK(t.columns.back() == "residual");
  REQUIRE(t.rows.size() == 4);
  const auto cols = direct.value_columns();
  for (std::size_t i = 0; i < 4; ++i) {
    for (const auto& col : cols) {
      const auto idx = t.column_index(col);
      REQUIRE(idx);
      CHECK(t.rows[i][*idx] == direct.column(i, col));
    }
  }
  auto script = path;
  script.replace_extension(".gp");
  CHECK(std::filesystem::exists(script));
  std::ifstream gp(script);
  std::stringstream ss;
  ss << gp.rdbuf();
  CHECK(ss.str().find("'cqed_test_roundtrip.csv'") != std::string::npos);
}

TEST_CASE("CSV header, GHz column and undefined values") {
  SweepSpec s;
  s.base.n_a_max = s.base.n_b_max = 1;
  s.base.e_a = 0;
  s.base.e_b = 0;
  s.axis1 = uniform_axis("delta_b", -1, 1, 2);
  s.observables = {"n_a", "g2_a"};
  const SweepResult r = run_sweep(s);
  std::ostringstream os;
  write_csv(os, r);
  std::istringstream is(os.str());
  std::string banner, header, first;
  std::getline(is, banner);
  std::getline(is, header);
  std::getline(is, first);
  CHECK(banner == "# cavity-qed-sim v1");
  CHECK(header == "delta_b,delta_b_ghz,n_a,g2_a,residual");
  CHECK(first.find("undef") != std::string::npos);
  CHECK(first.find("nan") == std::string::npos);
  CHECK(first.rfind("-1,-0.24179999999999999,", 0) == 0);
}

TEST_CASE("invalid config writes nothing") {
  const auto path = temp_path("invalid.csv");
  std::filesystem::remove(path);
  RunConfig c;
  c.overrides = {{"kappa", -3.0}};
  c.output = path.string();
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 1);
  CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("single-point preset summary") {
  const auto path = temp_path("ref31.csv");
  RunConfig c = parse_config("preset = ref31\nn_a_max = 4\nn_b_max = 4\n");
  c.output = path.string();
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);
  CHECK(out.str().find("g2_a = ") != std::string::npos);
}
