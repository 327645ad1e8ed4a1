#include <doctest.h>

#include <cmath>
#include <random>

#include "fracperim/error.hpp"
#include "fracperim/functionals.hpp"
#include "oracles.hpp"

using namespace fracperim;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::config;
}

bool brackets(const FunctionalValue& v, double x) { return v.lower <= x && x <= v.upper; }

IndicatorField halfspace_on(int dim, int cells, int padding = 0) {
  return rasterize(AnalyticSet::lower_halfspace(dim), Grid::uniform(Domain::unit_cube(dim), cells, padding));
}

}  // namespace

TEST_CASE("pair counts agree with direct enumeration") {
  std::mt19937 rng(11);
  for (int dim = 1; dim <= 3; ++dim) {
    const int cells = dim == 3 ? 5 : (dim == 2 ? 9 : 70);
    const Grid g = Grid::uniform(Domain::unit_cube(dim), cells, 1);
    std::bernoulli_distribution coin(0.4);
    std::vector<std::uint8_t> a(g.size()), b(g.size());
    for (auto& x : a) x = coin(rng);
    for (auto& x : b) x = coin(rng);
    const PairCounts pc = pair_counts(g, a, b, 3);
    std::vector<std::int64_t> expected(pc.counts.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!a[i] || !b[j] || i == j) continue;
        const Index xi = g.unravel(i), xj = g.unravel(j);
        ++expected[pc.index({xj[0] - xi[0], xj[1] - xi[1], xj[2] - xi[2]})];
      }
    CHECK(pc.counts == expected);
  }
}

TEST_CASE("j1 of the grid-aligned halfspace equals the closed form") {
  const IndicatorField e = halfspace_on(1, 64);
  const FunctionalValue v = j1(e, Domain::unit_cube(1), FractionalOrder(0.5));
  CHECK(v.value == doctest::Approx(1.656854).epsilon(1e-6));
  CHECK(brackets(v, oracle::halfspace_1d(0.5, 0.5)));
  CHECK(std::fabs(v.value - oracle::halfspace_1d(0.5, 0.5)) <= 1e-12 * v.value);
  CHECK(v.width() == doctest::Approx(2 * v.quadrature_error));
  CHECK(v.truncation_radius == 0.0);
}

TEST_CASE("j1 vanishes on empty and full sets") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 8);
  for (const AnalyticSet& s : {AnalyticSet::empty(), AnalyticSet::full()}) {
    const FunctionalValue v = j1(rasterize(s, g), Domain::unit_cube(2), FractionalOrder(0.5));
    CHECK(v.value == 0.0);
    CHECK(v.width() == 0.0);
  }
}

TEST_CASE("j1 of a middle interval from interval closed forms") {
  const Grid g = Grid::uniform(Domain::unit_cube(1), 64);
  const IndicatorField e = rasterize(AnalyticSet::box_union({{{-0.25, 0, 0}, {0.25, 0, 0}}}), g);
  const double s = 0.5;
  // E against the two outer quarters.
  const double expected =
      oracle::interval_pair(-0.5, -0.25, -0.25, 0.25, s) + oracle::interval_pair(-0.25, 0.25, 0.25, 0.5, s);
  const FunctionalValue v = j1(e, Domain::unit_cube(1), FractionalOrder(s));
  CHECK(std::fabs(v.value - expected) <= 1e-12 * expected);
  // Same value assembled as two halfspace-type pieces minus the separated quarter pair.
  const double halves = oracle::interval_pair(-0.5, -0.25, -0.25, 0.5, s) +
                        oracle::interval_pair(-0.5, 0.25, 0.25, 0.5, s) -
                        2 * oracle::interval_pair(-0.5, -0.25, 0.25, 0.5, s);
  CHECK(std::fabs(v.value - halves) <= 1e-12 * expected);
}

TEST_CASE("j1 requires an aligned domain") {
  const IndicatorField e = halfspace_on(1, 10, 2);
  const Domain off = Domain::unit_cube(1).expanded(0.03);
  CHECK(kind_of([&] { j1(e, off, FractionalOrder(0.5)); }) == ErrorKind::misaligned_domain);
}

TEST_CASE("j2 on empty and full sets") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 8, 4);
  for (const AnalyticSet& s : {AnalyticSet::empty(), AnalyticSet::full()}) {
    const FunctionalValue v = j2(rasterize(s, g), Domain::unit_cube(2), FractionalOrder(0.5), 0.5);
    CHECK(v.value == 0.0);
    CHECK(v.width() == 0.0);
  }
}

TEST_CASE("j2 of the halfspace brackets the exact value") {
  const double s = 0.5;
  // (-1/2, 0] against (1/2, inf) plus its mirror image.
  const double exact = 2.0 * (1.0 - std::pow(0.5, 1.0 - s)) / (s * (1.0 - s));
  const IndicatorField e = halfspace_on(1, 64, 256);
  const FunctionalValue v = j2(e, Domain::unit_cube(1), FractionalOrder(s), 4.0);
  CHECK(brackets(v, exact));
  CHECK(v.truncation_radius == 4.0);
  // Pairs inside the truncation box: four interval-pair closed forms.
  const double inner = oracle::interval_pair(-0.5, 0.0, 0.5, 4.5, s) + oracle::interval_pair(-4.5, -0.5, 0.0, 0.5, s);
  CHECK(v.lower <= inner);
  CHECK(std::fabs(v.lower - inner) <= 1e-10 * inner);
  // The tail interval covers the missing mass.
  const double missing = exact - inner;
  CHECK(v.upper - v.lower >= missing);
}

TEST_CASE("j2 needs enough padding") {
  const IndicatorField e = halfspace_on(1, 16, 4);
  CHECK(kind_of([&] { j2(e, Domain::unit_cube(1), FractionalOrder(0.5), 1.0); }) == ErrorKind::padding_too_small);
  CHECK_NOTHROW(j2(e, Domain::unit_cube(1), FractionalOrder(0.5), 0.25));
}

TEST_CASE("j2 of a ball inside the truncation box has no tail on the ball side") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 16, 8);
  const IndicatorField e = rasterize(AnalyticSet::ball({0.4, 0.0, 0.0}, 0.3), g);
  const FunctionalValue v = j2(e, Domain::unit_cube(2), FractionalOrder(0.5), 0.5);
  CHECK(v.value >= v.lower);
  CHECK(v.upper >= v.value);
  CHECK(v.lower > 0.0);
}

TEST_CASE("F_s of an indicator is twice j1, bit for bit") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 12);
  const IndicatorField e = rasterize(AnalyticSet::ball({0.1, -0.1, 0}, 0.3), g);
  const FractionalOrder s(0.4);
  CHECK(f_seminorm(DensityField::indicator(e), Domain::unit_cube(2), s).value ==
        2.0 * j1(e, Domain::unit_cube(2), s).value);
}

TEST_CASE("F_s of constants and of scaled indicators") {
  const Grid g = Grid::uniform(Domain::unit_cube(1), 64);
  CHECK(f_seminorm(DensityField::constant(g, 0.3), Domain::unit_cube(1), FractionalOrder(0.5)).value == 0.0);
  const IndicatorField h = rasterize(AnalyticSet::lower_halfspace(1), g);
  std::vector<double> half(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) half[i] = h.inside(i) ? 0.5 : 0.0;
  const double v = f_seminorm(DensityField(g, half), Domain::unit_cube(1), FractionalOrder(0.5)).value;
  const double full = f_seminorm(DensityField::indicator(h), Domain::unit_cube(1), FractionalOrder(0.5)).value;
  CHECK(v == doctest::Approx(0.5 * full).epsilon(1e-14));
  CHECK(v == doctest::Approx(1.656854).epsilon(1e-6));
}

TEST_CASE("coarea identity on piecewise constant fields") {
  const Grid g = Grid::uniform(Domain::unit_cube(1), 48);
  const FractionalOrder s(0.5);
  const IndicatorField h = rasterize(AnalyticSet::lower_halfspace(1), g);
  CHECK(coarea_check(DensityField::indicator(h), Domain::unit_cube(1), s) <= 1e-12);
  CHECK(coarea_check(DensityField::constant(g, 0.7), Domain::unit_cube(1), s) == 0.0);

  // Levels 0, 1/2, 1 on three blocks.
  std::vector<double> u(g.size());
  for (int k = 0; k < 48; ++k) u[k] = k < 16 ? 0.0 : (k < 32 ? 0.5 : 1.0);
  const DensityField field(g, u);
  CHECK(coarea_check(field, Domain::unit_cube(1), s) <= 1e-12);
  const double a = -0.5, b = -1.0 / 6.0, c = 1.0 / 6.0, d = 0.5;
  const double half_f = 0.5 * oracle::interval_pair(a, b, b, c, 0.5) + oracle::interval_pair(a, b, c, d, 0.5) +
                        0.5 * oracle::interval_pair(b, c, c, d, 0.5);
  CHECK(0.5 * f_seminorm(field, Domain::unit_cube(1), s).value == doctest::Approx(half_f).epsilon(1e-12));
}

TEST_CASE("coarea identity with many levels uses the direct pair sum") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 10);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u(g.size());
  for (double& x : u) x = unit(rng);
  const DensityField field(g, u);
  CHECK(coarea_check(field, Domain::unit_cube(2), FractionalOrder(0.6)) <= 1e-12);
}

TEST_CASE("complement symmetry is exact") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 20);
  for (const AnalyticSet& shape :
       {AnalyticSet::ball({0.1, 0.05, 0}, 0.27), AnalyticSet::lower_halfspace(2),
        AnalyticSet::box_union({{{-0.3, -0.2, 0}, {0.1, 0.4, 0}}})}) {
    const IndicatorField e = rasterize(shape, g);
    CHECK(j1(e, Domain::unit_cube(2), FractionalOrder(0.5)).value ==
          j1(e.complement(), Domain::unit_cube(2), FractionalOrder(0.5)).value);
  }
}

TEST_CASE("j1 is superadditive over disjoint boxes") {
  const Grid g = Grid::uniform(Domain::unit_cube(2), 16);
  const IndicatorField e = rasterize(AnalyticSet::ball({0.0, 0.1, 0}, 0.3), g);
  const std::vector<double> lo1{-0.5, -0.5}, hi1{0.0, 0.5}, lo2{0.0, -0.5}, hi2{0.5, 0.5};
  const Domain left(2, lo1, hi1), right(2, lo2, hi2);
  const FractionalOrder s(0.5);
  const double parts = j1(e, left, s).value + j1(e, right, s).value;
  CHECK(parts <= j1(e, Domain::unit_cube(2), s).value);
}

TEST_CASE("scaling: j1 and j2 pick up lambda^{n-s}") {
  const FractionalOrder s(0.5);
  for (int n : {1, 2}) {
    const Domain q = Domain::unit_cube(n);
    for (const AnalyticSet& shape :
         {AnalyticSet::lower_halfspace(n), AnalyticSet::ball({0.05, 0, 0}, 0.3),
          AnalyticSet::box_union({{{-0.25, -0.25, 0}, {0.25, 0.125, 0}}})}) {
      const IndicatorField e = rasterize(shape, Grid::uniform(q, 16, 8));
      const FunctionalValue a1 = j1(e, q, s), a2 = j2(e, q, s, 0.5);
      for (double lambda : {0.5, 2.0}) {
        const IndicatorField f = rasterize(shape.scaled(lambda), Grid::uniform(q.scaled(lambda), 16, 8));
        const FunctionalValue b1 = j1(f, q.scaled(lambda), s), b2 = j2(f, q.scaled(lambda), s, 0.5 * lambda);
        const double k = std::pow(lambda, n - 0.5);
        CHECK(std::fabs(b1.value - k * a1.value) <= b1.width() / 2 + k * a1.width() / 2 + 1e-13 * b1.value);
        CHECK(b2.lower <= k * a2.upper * (1 + 1e-13));
        CHECK(k * a2.lower <= b2.upper * (1 + 1e-13));
        CHECK(b2.value == doctest::Approx(k * a2.value).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  const IndicatorField e = rasterize(AnalyticSet::ball({0.0, 0.1, 0}, 0.3), Grid::uniform(Domain::unit_cube(2), 40, 10));
  EvalOptions one, many;
  many.threads = 4;
  const FractionalOrder s(0.7);
  CHECK(j1(e, Domain::unit_cube(2), s, one).value == j1(e, Domain::unit_cube(2), s, many).value);
  const FunctionalValue a = j2(e, Domain::unit_cube(2), s, 0.25, one);
  const FunctionalValue b = j2(e, Domain::unit_cube(2), s, 0.25, many);
  CHECK(a.value == b.value);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
}

TEST_CASE("translation defects") {
  const Grid g = Grid::uniform(Domain::unit_cube(1), 64, 8);
  const DensityField h = DensityField::indicator(rasterize(AnalyticSet::lower_halfspace(1), g));
  const Domain q = Domain::unit_cube(1);
  CHECK(translation_defect(h, {0, 0, 0}, q).value == 0.0);
  CHECK(translation_defect(h, {2.0 / 64, 0, 0}, q).value == doctest::Approx(2.0 / 64));
  CHECK(translation_defect(h, {-3.0 / 64, 0, 0}, q).value == doctest::Approx(3.0 / 64));
  const DensityField full = DensityField::constant(g, 1.0);
  CHECK(translation_defect(full, {5.0 / 64, 0, 0}, q).value == 0.0);
  CHECK(kind_of([&] { translation_defect(h, {0.01, 0, 0}, q); }) == ErrorKind::not_grid_aligned);
  CHECK(kind_of([&] { translation_defect(h, {9.0 / 64, 0, 0}, q); }) == ErrorKind::out_of_range);
}

TEST_CASE("translation ratio is bounded for the halfspace") {
  // For chi_H in 1D the defect equals |h| and the ratio is |h|^{1-s} / ((1-s) F_s).
  const Grid g = Grid::uniform(Domain::unit_cube(1), 128);
  const DensityField h = DensityField::indicator(rasterize(AnalyticSet::lower_halfspace(1), g));
  const std::vector<double> lo{-0.25}, hi{0.25};
  const Domain a(1, lo, hi);
  for (double s : {0.3, 0.5, 0.7, 0.9}) {
    const double f = f_seminorm(h, Domain::unit_cube(1), FractionalOrder(s)).value;
    for (int k = 1; k <= 16; k *= 2) {
      const double len = k / 128.0;
      const double d = translation_defect(h, {len, 0, 0}, a).value;
      CHECK(d == doctest::Approx(len));
      const double ratio = d / (std::pow(len, s) * (1 - s) * f);
      CHECK(ratio == doctest::Approx(std::pow(len, 1 - s) / ((1 - s) * f)));
      CHECK(ratio < 1.0);
    }
  }
}
