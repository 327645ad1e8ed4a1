#include "fracperim/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fracperim/error.hpp"
#include "fracperim/parallel.hpp"
#include "fracperim/summation.hpp"

namespace fracperim {

FunctionalValue FunctionalValue::scaled(double factor) const {
  FunctionalValue out = *this;
  out.value *= factor;
  out.lower *= factor;
  out.upper *= factor;
  out.quadrature_error *= std::fabs(factor);
  if (factor < 0) std::swap(out.lower, out.upper);
  return out;
}

FunctionalValue operator+(const FunctionalValue& a, const FunctionalValue& b) {
  return {a.value + b.value, a.lower + b.lower, a.upper + b.upper,
          std::max(a.truncation_radius, b.truncation_radius),
          a.quadrature_error + b.quadrature_error};
}

namespace {

void check_table(const Grid& grid, const WeightTable& table) {
  if (!grid.isotropic() || table.dim() != grid.dim() ||
      std::fabs(table.h() - grid.h(0)) > 1e-12 * grid.h(0))
    throw Error(ErrorKind::invalid_argument, "weight table does not match the grid");
}

std::vector<std::uint8_t> mask_in(const Grid& grid, const CellRange& range,
                                  const std::function<bool(std::size_t)>& keep) {
  std::vector<std::uint8_t> m(grid.size(), 0);
  for_each_cell(grid, range, [&](const Index&, std::size_t lin) { m[lin] = keep(lin) ? 1 : 0; });
  return m;
}

FunctionalValue bracketed(double value, double q) { return {value, value - q, value + q, 0.0, q}; }

}  // namespace

FunctionalValue j1(const IndicatorField& e, const Domain& omega, const WeightTable& table, int threads) {
  const Grid& grid = e.grid();
  check_table(grid, table);
  const CellRange range = aligned_cells(grid, omega);
  const auto a = mask_in(grid, range, [&](std::size_t i) { return e.inside(i); });
  const auto b = mask_in(grid, range, [&](std::size_t i) { return !e.inside(i); });
  const Interaction l = interaction(grid, a, b, table, threads);
  return bracketed(l.value, l.abs_error);
}

FunctionalValue j1(const IndicatorField& e, const Domain& omega, FractionalOrder s,
                   const EvalOptions& options) {
  return j1(e, omega, make_weight_table(e.grid(), s, options.weights), options.threads);
}

CellRange truncation_cells(const Grid& grid, const Domain& omega, double r_trunc) {
  if (!(r_trunc > 0)) throw Error(ErrorKind::invalid_argument, "truncation radius must be positive");
  CellRange range = aligned_cells(grid, omega);
  for (int a = 0; a < grid.dim(); ++a) {
    const double layers = std::floor(r_trunc / grid.h(a) + 1e-9);
    const int room = std::min(range.lo[a], grid.extent(a) - range.hi[a]);
    if (layers > room)
      throw Error(ErrorKind::padding_too_small,
                  "grid padding does not cover the truncation radius");
    range.lo[a] -= static_cast<int>(layers);
    range.hi[a] += static_cast<int>(layers);
  }
  return range;
}

double cell_tail_bound(const Grid& grid, const CellRange& truncation, const Index& cell,
                       FractionalOrder s) {
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dim(); ++a) {
    r = std::min(r, (cell[a] - truncation.lo[a]) * grid.h(a));
    r = std::min(r, (truncation.hi[a] - cell[a] - 1) * grid.h(a));
  }
  if (!(r > 0)) throw Error(ErrorKind::padding_too_small, "cell touches the truncation boundary");
  return grid.cell_volume() * complement_tail(r, grid.dim(), s);
}

FunctionalValue j2(const IndicatorField& e, const Domain& omega, const WeightTable& table,
                   double r_trunc, int threads) {
  const Grid& grid = e.grid();
  check_table(grid, table);
  const CellRange inner = aligned_cells(grid, omega);
  const CellRange outer = truncation_cells(grid, omega, r_trunc);

  auto in_omega = [&](std::size_t i) { return inner.contains(grid.unravel(i)); };
  const auto a1 = mask_in(grid, inner, [&](std::size_t i) { return e.inside(i); });
  const auto b2 = mask_in(grid, inner, [&](std::size_t i) { return !e.inside(i); });
  const auto b1 = mask_in(grid, outer, [&](std::size_t i) { return !e.inside(i) && !in_omega(i); });
  const auto a2 = mask_in(grid, outer, [&](std::size_t i) { return e.inside(i) && !in_omega(i); });

  const Interaction first = interaction(grid, a1, b1, table, threads);
  const Interaction second = interaction(grid, a2, b2, table, threads);

  std::vector<double> lo(grid.dim()), hi(grid.dim());
  for (int a = 0; a < grid.dim(); ++a) {
    lo[a] = grid.cell_lo(a, outer.lo[a]);
    hi[a] = grid.cell_lo(a, outer.hi[a]);
  }
  const Domain box(grid.dim(), lo, hi);
  const bool e_escapes = e.exterior().escapes(box);
  const bool ec_escapes = e.exterior().complement_escapes(box);

  CompensatedSum tail;
  const FractionalOrder s = table.order();
  for_each_cell(grid, inner, [&](const Index& idx, std::size_t lin) {
    const bool side_escapes = e.inside(lin) ? ec_escapes : e_escapes;
    if (side_escapes) tail.add(cell_tail_bound(grid, outer, idx, s));
  });

  CompensatedSum kernel;
  kernel.add(first.value);
  kernel.add(second.value);
  const double k = kernel.value();
  const double q = first.abs_error + second.abs_error;
  const double t = tail.value();
  return {k + 0.5 * t, k - q, k + t + q, r_trunc, q};
}

FunctionalValue j2(const IndicatorField& e, const Domain& omega, FractionalOrder s, double r_trunc,
                   const EvalOptions& options) {
  return j2(e, omega, make_weight_table(e.grid(), s, options.weights), r_trunc, options.threads);
}

FunctionalValue j_total(const IndicatorField& e, const Domain& omega, FractionalOrder s,
                        double r_trunc, const EvalOptions& options) {
  const WeightTable table = make_weight_table(e.grid(), s, options.weights);
  return j1(e, omega, table, options.threads) + j2(e, omega, table, r_trunc, options.threads);
}

namespace {

constexpr std::size_t kMaxLevelPairs = 16;

std::vector<double> levels_in(const DensityField& u, const CellRange& range) {
  std::vector<double> levels;
  for_each_cell(u.grid(), range, [&](const Index&, std::size_t lin) { levels.push_back(u[lin]); });
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

// Ordered pairs of Omega cells, one row of i per chunk.
Interaction direct_seminorm(const DensityField& u, const CellRange& range, const WeightTable& table,
                            int threads) {
  const Grid& grid = u.grid();
  std::vector<std::size_t> cells;
  for_each_cell(grid, range, [&](const Index&, std::size_t lin) { cells.push_back(lin); });
  Offset reach{0, 0, 0};
  for (int a = 0; a < grid.dim(); ++a) reach[a] = range.hi[a] - range.lo[a] - 1;
  const DenseWeights w = table.dense(reach, threads);
  std::vector<CompensatedSum> value(cells.size()), error(cells.size());
  parallel_chunks(cells.size(), threads, [&](std::size_t c) {
    const Index xi = grid.unravel(cells[c]);
    const double ui = u[cells[c]];
    for (std::size_t j : cells) {
      const double diff = std::fabs(ui - u[j]);
      if (diff == 0.0) continue;
      const Index xj = grid.unravel(j);
      const Offset d{xj[0] - xi[0], xj[1] - xi[1], xj[2] - xi[2]};
      const std::size_t k = w.index(d);
      value[c].add(diff * w.value_at(k));
      error[c].add(diff * w.error_at(k));
    }
  });
  CompensatedSum v, e;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    v += value[c];
    e += error[c];
  }
  return {v.value(), e.value()};
}

}  // namespace

FunctionalValue f_seminorm(const DensityField& u, const Domain& omega, const WeightTable& table,
                           int threads) {
  const Grid& grid = u.grid();
  check_table(grid, table);
  const CellRange range = aligned_cells(grid, omega);
  const std::vector<double> levels = levels_in(u, range);
  if (levels.size() > kMaxLevelPairs) {
    const Interaction l = direct_seminorm(u, range, table, threads);
    return bracketed(l.value, l.abs_error);
  }
  std::vector<std::vector<std::uint8_t>> masks;
  for (double v : levels)
    masks.push_back(mask_in(grid, range, [&](std::size_t i) { return u[i] == v; }));
  CompensatedSum value, error;
  // Higher level first, so u = chi_E reproduces L(E, E^c) term for term.
  for (std::size_t b = 0; b < levels.size(); ++b)
    for (std::size_t a = 0; a < b; ++a) {
      const Interaction l = interaction(grid, masks[b], masks[a], table, threads);
      const double gap = levels[b] - levels[a];
      value.add(2.0 * gap * l.value);
      error.add(2.0 * gap * l.abs_error);
    }
  return bracketed(value.value(), error.value());
}

FunctionalValue f_seminorm(const DensityField& u, const Domain& omega, FractionalOrder s,
                           const EvalOptions& options) {
  return f_seminorm(u, omega, make_weight_table(u.grid(), s, options.weights), options.threads);
}

double coarea_check(const DensityField& u, const Domain& omega, FractionalOrder s,
                    const EvalOptions& options) {
  const Grid& grid = u.grid();
  const WeightTable table = make_weight_table(grid, s, options.weights);
  const double half_f = 0.5 * f_seminorm(u, omega, table, options.threads).value;
  const std::vector<double> levels = levels_in(u, aligned_cells(grid, omega));
  CompensatedSum integral;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    std::vector<std::uint8_t> bits(grid.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = u[i] > levels[k] ? 1 : 0;
    const IndicatorField level_set(grid, std::move(bits), AnalyticSet::empty());
    integral.add((levels[k + 1] - levels[k]) * j1(level_set, omega, table, options.threads).value);
  }
  return std::fabs(half_f - integral.value()) / std::max(1.0, half_f);
}

TranslationDefect translation_defect(const DensityField& u, const Point& shift, const Domain& region) {
  const Grid& grid = u.grid();
  const CellRange range = aligned_cells(grid, region);
  Index k{0, 0, 0};
  for (int a = 0; a < grid.dim(); ++a) {
    const double cells = shift[a] / grid.h(a);
    const double r = std::round(cells);
    if (std::fabs(cells - r) > 1e-9)
      throw Error(ErrorKind::not_grid_aligned, "shift is not a whole number of cells");
    k[a] = static_cast<int>(r);
    if (range.lo[a] + k[a] < 0 || range.hi[a] + k[a] > grid.extent(a))
      throw Error(ErrorKind::out_of_range, "shifted region leaves the padded grid");
  }
  CompensatedSum sum;
  for_each_cell(grid, range, [&](const Index& idx, std::size_t lin) {
    const Index moved{idx[0] + k[0], idx[1] + k[1], idx[2] + k[2]};
    sum.add(std::fabs(u.at(moved) - u[lin]));
  });
  return {shift, sum.value() * grid.cell_volume(), region};
}

}  // namespace fracperim
