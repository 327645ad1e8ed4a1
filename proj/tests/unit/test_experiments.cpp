#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fracperim/error.hpp"
#include "fracperim/experiments.hpp"
#include "oracles.hpp"

using namespace fracperim;
using nlohmann::json;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::invalid_argument;
}

double num(const TableValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return static_cast<double>(std::get<std::int64_t>(v));
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c] == name) return c;
  FAIL("missing column " << name);
  return 0;
}

}  // namespace

TEST_CASE("config parsing fills every field") {
  const json doc = json::parse(R"({
    "experiment": "converge", "dim": 2,
    "domain": {"slab": 0.75},
    "shape": {"kind": "ball", "center": [0.1, 0.0], "radius": 0.2},
    "s_list": [0.6, 0.9], "resolutions": [8, 16],
    "rel_tol": 1e-9, "r_trunc": 0.5, "near_cutoff": 3, "seed": 7, "threads": 2,
    "include_j2": false, "max_sweeps": 5
  })");
  const ExperimentConfig c = parse_config(doc);
  CHECK(c.kind == ExperimentKind::converge);
  CHECK(c.dim == 2);
  CHECK(c.domain == Domain::slab(2, 0.75));
  CHECK(c.s_list == std::vector<double>{0.6, 0.9});
  CHECK(c.resolutions == std::vector<int>{8, 16});
  CHECK(c.rel_tol == 1e-9);
  CHECK(c.near_cutoff == 3);
  CHECK(c.seed == 7u);
  CHECK_FALSE(c.include_j2);
  CHECK(c.max_sweeps == 5);
  CHECK(c.weight_options().near_cutoff == 3);
  CHECK(c.eval_options().threads == 2);
  CHECK(c.shape.contains({0.1, 0.1, 0}, 2));
  CHECK_FALSE(c.shape.contains({0.4, 0.0, 0}, 2));
}

TEST_CASE("shape records") {
  const AnalyticSet boxes =
      parse_shape(json::parse(R"({"kind": "box_union", "boxes": [{"lo": [0, 0], "hi": [0.5, 0.5]}]})"), 2);
  CHECK(boxes.contains({0.25, 0.25, 0}, 2));
  const AnalyticSet c = parse_shape(json::parse(R"({"kind": "complement", "of": {"kind": "empty"}})"), 2);
  CHECK(c.contains({0.0, 0.0, 0}, 2));
  const AnalyticSet up = parse_shape(json::parse(R"({"kind": "halfspace", "offset": 0.1, "side": "above"})"), 2);
  CHECK(up.contains({0.0, 0.2, 0}, 2));
  CHECK_FALSE(up.contains({0.0, 0.1, 0}, 2));
}

TEST_CASE("config errors") {
  for (const char* text :
       {R"({"s_list": [1.0]})", R"({"s_list": []})", R"({"resolutions": [0]})", R"({"dim": 4})",
        R"({"experiment": "nope"})", R"({"shape": {"kind": "blob"}})", R"({"s_list": "x"})",
        R"({"shape": {"kind": "halfspace", "side": "left"}})"}) {
    CAPTURE(text);
    CHECK(kind_of([&] { parse_config(json::parse(text)); }) == ErrorKind::config);
  }
  CHECK(kind_of([] { load_config("/nonexistent/config.json"); }) == ErrorKind::config);
}

TEST_CASE("tables print doubles with 17 significant digits") {
  CHECK(format_value(0.1) == "0.10000000000000001");
  CHECK(format_value(std::int64_t{42}) == "42");
  CHECK(format_value(std::string("x")) == "x");
  Table t{{"a", "b"}, {{1.0 / 3.0, std::int64_t{2}}}, false};
  std::ostringstream csv;
  write_csv(t, csv);
  CHECK(csv.str() == "a,b\n0.33333333333333331,2\n");
  std::ostringstream js;
  write_json(t, js);
  const json back = json::parse(js.str());
  CHECK(back.is_array());
  CHECK(back[0]["a"].get<double>() == 1.0 / 3.0);
  CHECK(back[0]["b"].get<int>() == 2);
}

TEST_CASE("isotropic grids need whole cells") {
  CHECK(isotropic_grid(Domain::slab(2, 0.75), 8).cells(1) == 12);
  CHECK_THROWS_AS(isotropic_grid(Domain::slab(2, 0.3), 8), Error);
}

TEST_CASE("Richardson extrapolation") {
  // Exact on data linear in 1 - s.
  const std::vector<double> s{0.9, 0.95, 0.99};
  std::vector<double> y;
  for (double v : s) y.push_back(2.0 + 3.0 * (1.0 - v));
  const Extrapolation e = richardson(s, y, y, y);
  CHECK(e.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(e.lower == doctest::Approx(2.0).epsilon(1e-13));
  // Points below 0.9 are ignored when two or more others exist.
  const Extrapolation f = richardson({0.5, 0.9, 0.95}, {100.0, 2.3, 2.15}, {100.0, 2.3, 2.15}, {100.0, 2.3, 2.15});
  CHECK(f.value == doctest::Approx(2.0).epsilon(1e-12));
  // Brackets widen through the weights.
  const Extrapolation g = richardson(s, y, {y[0] - 0.01, y[1] - 0.01, y[2] - 0.01}, {y[0] + 0.01, y[1] + 0.01, y[2] + 0.01});
  CHECK(g.lower < g.value);
  CHECK(g.upper > g.value);
  CHECK(g.upper - g.lower >= 0.02);
}

TEST_CASE("converge sweep of the 1D halfspace") {
  ExperimentConfig c;
  c.kind = ExperimentKind::converge;
  c.s_list = {0.5, 0.7, 0.9, 0.99};
  c.resolutions = {32, 64};
  c.include_j2 = false;
  const std::vector<ConvergenceRow> rows = converge_sweep(c);
  REQUIRE(rows.size() == 9u);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const ConvergenceRow& r = rows[k];
    const double ref = (1 - r.s) * oracle::halfspace_1d(0.5, r.s);
    CHECK(r.bracket_lo <= r.j_total_scaled);
    CHECK(r.j_total_scaled <= r.bracket_hi);
    CHECK(std::fabs(r.j1_scaled - ref) <= 1e-10 * ref);
    CHECK(r.reference == 1.0);
  }
  CHECK(std::fabs(rows[7].j1_scaled - 1.0) < 0.01);
  CHECK(rows.back().s == 1.0);
  CHECK(std::fabs(rows.back().j1_scaled - 1.0) < 0.01);
  const Table t = convergence_table(rows);
  CHECK(t.columns == std::vector<std::string>{"s", "h", "j1_scaled", "j_total_scaled", "bracket_lo", "bracket_hi",
                                              "reference", "rel_gap"});
}

TEST_CASE("converge gap shrinks as s grows past 0.9") {
  ExperimentConfig c;
  c.s_list = {0.9, 0.93, 0.96, 0.99};
  c.resolutions = {64};
  const std::vector<ConvergenceRow> rows = converge_sweep(c);
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) CHECK(rows[k].rel_gap < rows[k - 1].rel_gap);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    CHECK(rows[k].bracket_lo <= rows[k].j_total_scaled);
    CHECK(rows[k].j_total_scaled <= rows[k].bracket_hi);
  }
}

TEST_CASE("converge sweep of the empty set is all zero") {
  ExperimentConfig c;
  c.shape = AnalyticSet::empty();
  c.s_list = {0.5, 0.9};
  c.resolutions = {16};
  for (const ConvergenceRow& r : converge_sweep(c)) {
    CHECK(r.j1_scaled == 0.0);
    CHECK(r.j_total_scaled == 0.0);
    CHECK(r.reference == 0.0);
  }
}

TEST_CASE("compute table") {
  ExperimentConfig c;
  c.s_list = {0.5};
  c.resolutions = {64};
  const Table t = compute_table(c);
  REQUIRE(t.rows.size() == 1u);
  CHECK(num(t.rows[0][column(t, "j1")]) == doctest::Approx(1.656854).epsilon(1e-6));
  CHECK(num(t.rows[0][column(t, "perimeter")]) == 1.0);
  const double j = num(t.rows[0][column(t, "j_total")]);
  CHECK(num(t.rows[0][column(t, "j_lo")]) <= j);
  CHECK(j <= num(t.rows[0][column(t, "j_hi")]));
}

TEST_CASE("halfspace table") {
  ExperimentConfig c;
  c.kind = ExperimentKind::halfspace;
  c.a_list = {0.5, 1.0};
  c.s_list = {0.5};
  c.resolutions = {16};
  const Table t = halfspace_table(c);
  REQUIRE(t.rows.size() == 2u);
  CHECK(num(t.rows[0][column(t, "reference")]) == doctest::Approx(1.656854).epsilon(1e-6));
  CHECK(num(t.rows[1][column(t, "reference")]) == doctest::Approx(2.343146).epsilon(1e-6));
  CHECK(num(t.rows[1][column(t, "j1")]) == doctest::Approx(2.343146).epsilon(1e-6));
  CHECK(num(t.rows[0][column(t, "reference_exact")]) == 1.0);
}

TEST_CASE("coarea table residuals") {
  ExperimentConfig c;
  c.kind = ExperimentKind::coarea;
  c.instances = 10;
  c.resolutions = {16};
  const Table t = coarea_table(c);
  REQUIRE(t.rows.size() == 10u);
  for (const auto& row : t.rows) CHECK(num(row[column(t, "residual")]) <= 1e-12);
}

TEST_CASE("translation sweep of the 1D halfspace") {
  ExperimentConfig c;
  c.kind = ExperimentKind::translation;
  c.s_list = {0.5};
  c.resolutions = {64};
  const Table t = translation_sweep(c);
  REQUIRE(t.rows.size() == 4u);
  CHECK(num(t.rows[0][column(t, "defect")]) == 0.0);
  std::int64_t flagged = 0;
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    CHECK(num(t.rows[k][column(t, "defect")]) == doctest::Approx(num(t.rows[k][column(t, "shift")])));
    flagged += std::get<std::int64_t>(t.rows[k][column(t, "is_max")]);
  }
  CHECK(flagged == 1);
  c.region_margin = 0.1;
  CHECK(kind_of([&] { translation_sweep(c); }) == ErrorKind::config);
}

TEST_CASE("minimize experiment") {
  ExperimentConfig c;
  c.kind = ExperimentKind::minimize;
  c.s_list = {0.5, 0.7, 0.9};
  c.resolutions = {16};
  c.r_trunc = 0.5;
  Table t = minimizer_convergence_experiment(c);
  REQUIRE(t.rows.size() == 3u);
  CHECK_FALSE(t.non_converged);
  for (const auto& row : t.rows) {
    CHECK(num(row[column(t, "sym_diff_limit")]) == 0.0);
    CHECK(num(row[column(t, "sym_diff_prev")]) == 0.0);
    CHECK(num(row[column(t, "reference")]) == 1.0);
  }
  const double e9 = num(t.rows[2][column(t, "energy_scaled")]);
  const double e5 = num(t.rows[0][column(t, "energy_scaled")]);
  CHECK(std::fabs(e9 - 1.0) < std::fabs(e5 - 1.0));

  c.shape = AnalyticSet::empty();
  t = minimizer_convergence_experiment(c);
  for (const auto& row : t.rows) {
    CHECK(num(row[column(t, "energy_scaled")]) == 0.0);
    CHECK(num(row[column(t, "sym_diff_limit")]) == 0.0);
  }
}

TEST_CASE("glue table on random instances") {
  ExperimentConfig c;
  c.kind = ExperimentKind::glue;
  c.dim = 2;
  c.domain = Domain::unit_cube(2);
  c.resolutions = {12};
  c.instances = 6;
  const Table t = glue_table(c);
  REQUIRE(t.rows.size() == 6u);
  for (const auto& row : t.rows) {
    CHECK(num(row[column(t, "condition_a")]) == 1.0);
    CHECK(num(row[column(t, "condition_b")]) == 1.0);
    CHECK(num(row[column(t, "bounds_ok")]) == 1.0);
  }
}

TEST_CASE("run_experiment dispatches and tables are reproducible") {
  ExperimentConfig c;
  c.kind = ExperimentKind::coarea;
  c.instances = 3;
  c.resolutions = {8};
  std::ostringstream a, b;
  write_csv(run_experiment(c), a);
  c.threads = 3;
  write_csv(run_experiment(c), b);
  CHECK(a.str() == b.str());
  CHECK(std::string(to_string(ExperimentKind::glue)) == "glue");
  CHECK(parse_experiment_kind("minimize") == ExperimentKind::minimize);
}
