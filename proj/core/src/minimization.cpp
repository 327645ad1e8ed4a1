#include "fracperim/minimization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <variant>

#include "fracperim/error.hpp"
#include "fracperim/parallel.hpp"
#include "fracperim/summation.hpp"

namespace fracperim {

const char* to_string(MinimizeMethod method) noexcept {
  return method == MinimizeMethod::brute_force ? "brute_force" : "flip_descent";
}

namespace {

Offset offset_between(const Index& from, const Index& to) {
  return {to[0] - from[0], to[1] - from[1], to[2] - from[2]};
}

double default_radius(const Grid& grid, double requested) {
  if (requested > 0) return requested;
  if (grid.padding() < 1)
    throw Error(ErrorKind::padding_too_small, "minimization needs at least one padding layer");
  return grid.padding() * grid.h(0);
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

void collect_breaks(const AnalyticSet& set, std::vector<double>& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AnalyticSet::Halfspace>) {
          out.push_back(v.offset);
        } else if constexpr (std::is_same_v<T, AnalyticSet::Ball>) {
          out.push_back(v.center[0] - v.radius);
          out.push_back(v.center[0] + v.radius);
        } else if constexpr (std::is_same_v<T, AnalyticSet::BoxUnion>) {
          for (const Box& b : v.boxes) {
            out.push_back(b.lo[0]);
            out.push_back(b.hi[0]);
          }
        } else if constexpr (std::is_same_v<T, AnalyticSet::Complement>) {
          collect_breaks(*v.inner, out);
        }
      },
      set.shape());
}

// int_a^b int_c^inf (y - x)^{-(1+s)} for c >= b.
double half_line_1d(double a, double b, double c, double s) {
  const double oms = 1.0 - s;
  const double x = c - b;
  const double step = x == 0.0 ? std::pow(b - a, oms) : std::pow(x, oms) * std::expm1(oms * std::log1p((b - a) / x));
  return step / (s * oms);
}

// Exact interaction of the cell [a, b] with the part of `set` (or of its
// complement) lying outside (lo, hi), on the line.
double far_mass_1d(const AnalyticSet& set, bool inside, double a, double b, double lo, double hi,
                   FractionalOrder s) {
  std::vector<double> breaks;
  collect_breaks(set, breaks);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  auto member = [&](double y) { return set.contains({y, 0.0, 0.0}, 1) == inside; };

  CompensatedSum sum;
  std::vector<double> right{hi};
  for (double p : breaks)
    if (p > hi) right.push_back(p);
  for (std::size_t k = 0; k + 1 < right.size(); ++k)
    if (member(0.5 * (right[k] + right[k + 1]))) sum.add(pair_weight_1d(a, b, right[k], right[k + 1], s));
  if (member(right.back() + 1.0)) sum.add(half_line_1d(a, b, right.back(), s.value()));

  // Mirror the left side onto the right.
  std::vector<double> left{-lo};
  for (auto it = breaks.rbegin(); it != breaks.rend(); ++it)
    if (*it < lo) left.push_back(-*it);
  for (std::size_t k = 0; k + 1 < left.size(); ++k)
    if (member(-0.5 * (left[k] + left[k + 1]))) sum.add(pair_weight_1d(-b, -a, left[k], left[k + 1], s));
  if (member(-left.back() - 1.0)) sum.add(half_line_1d(-b, -a, left.back(), s.value()));
  return sum.value();
}

}  // namespace

Interaction interaction(const Grid& grid, std::span<const std::size_t> a,
                        std::span<const std::size_t> b, const WeightTable& table) {
  CompensatedSum value, error;
  for (std::size_t i : a) {
    const Index xi = grid.unravel(i);
    for (std::size_t j : b) {
      if (i == j) throw Error(ErrorKind::overlap, "interaction sets share a cell");
      const WeightEntry w = table.at(offset_between(xi, grid.unravel(j)));
      value.add(w.value);
      error.add(w.abs_error);
    }
  }
  return {value.value(), error.value()};
}

Interaction interaction(const Grid& grid, std::span<const std::size_t> a,
                        std::span<const std::size_t> b, FractionalOrder s,
                        const WeightOptions& options) {
  return interaction(grid, a, b, make_weight_table(grid, s, options));
}

// ---------------------------------------------------------------- energy model

TruncatedEnergy::TruncatedEnergy(const IndicatorField& e, const Domain& omega, FractionalOrder s,
                                 const MinimizeOptions& options)
    : grid_(e.grid()),
      base_(e),
      table_(make_weight_table(e.grid(), s, options.weights)),
      r_trunc_(default_radius(e.grid(), options.r_trunc)) {
  const CellRange inner = aligned_cells(grid_, omega);
  const CellRange outer = truncation_cells(grid_, omega, r_trunc_);
  position_.assign(grid_.size(), -1);
  for_each_cell(grid_, inner, [&](const Index& idx, std::size_t lin) {
    position_[lin] = static_cast<int>(cells_.size());
    cells_.push_back(lin);
    index_.push_back(idx);
  });
  std::vector<std::size_t> fixed;
  for_each_cell(grid_, outer, [&](const Index&, std::size_t lin) {
    if (position_[lin] < 0) fixed.push_back(lin);
  });

  Offset reach{0, 0, 0};
  for (int a = 0; a < grid_.dim(); ++a) reach[a] = outer.hi[a] - outer.lo[a] - 1;
  w_ = table_.dense(reach, options.threads);

  std::vector<double> lo(grid_.dim()), hi(grid_.dim());
  for (int a = 0; a < grid_.dim(); ++a) {
    lo[a] = grid_.cell_lo(a, outer.lo[a]);
    hi[a] = grid_.cell_lo(a, outer.hi[a]);
  }
  const Domain box(grid_.dim(), lo, hi);
  const bool e_escapes = e.exterior().escapes(box);
  const bool ec_escapes = e.exterior().complement_escapes(box);

  const std::size_t n = cells_.size();
  c0_.assign(n, 0.0);
  c1_.assign(n, 0.0);
  fixed_err_.assign(n, 0.0);
  flip_err_.assign(n, 0.0);
  std::vector<double> row_mass(n, 0.0);
  parallel_chunks(n, options.threads, [&](std::size_t i) {
    CompensatedSum in, out, err;
    for (std::size_t k : fixed) {
      const std::size_t d = w_.index(offset_between(index_[i], grid_.unravel(k)));
      // A cell inside pays against fixed complement cells and vice versa.
      (e.inside(k) ? out : in).add(w_.value_at(d));
      err.add(w_.error_at(d));
    }
    if (grid_.dim() == 1) {
      // On the line the exterior beyond the box is a union of intervals.
      const double a = grid_.cell_lo(0, index_[i][0]), b = grid_.cell_lo(0, index_[i][0] + 1);
      const double far_in = far_mass_1d(e.exterior(), false, a, b, lo[0], hi[0], s);
      const double far_out = far_mass_1d(e.exterior(), true, a, b, lo[0], hi[0], s);
      in.add(far_in);
      out.add(far_out);
      err.add(16.0 * kEps * (far_in + far_out));
    } else {
      const double tail = cell_tail_bound(grid_, outer, index_[i], s);
      if (ec_escapes) in.add(0.5 * tail);
      if (e_escapes) out.add(0.5 * tail);
    }
    c1_[i] = in.value();
    c0_[i] = out.value();
    fixed_err_[i] = err.value();
    CompensatedSum pair_err, mass;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      pair_err.add(pair_error(i, j));
      mass.add(pair(i, j));
    }
    flip_err_[i] = fixed_err_[i] + pair_err.value();
    row_mass[i] = mass.value();
  });
  CompensatedSum scale;
  for (std::size_t i = 0; i < n; ++i) scale.add(c0_[i] + c1_[i] + row_mass[i]);
  slack_ = 16.0 * static_cast<double>(n + 4) * kEps * scale.value();
}

double TruncatedEnergy::pair(std::size_t i, std::size_t j) const {
  return w_.value(offset_between(index_[i], index_[j]));
}

double TruncatedEnergy::pair_error(std::size_t i, std::size_t j) const {
  return w_.error(offset_between(index_[i], index_[j]));
}

double TruncatedEnergy::energy(std::span<const std::uint8_t> x) const {
  CompensatedSum sum;
  const std::size_t n = cells_.size();
  for (std::size_t i = 0; i < n; ++i) {
    sum.add(x[i] ? c1_[i] : c0_[i]);
    for (std::size_t j = i + 1; j < n; ++j)
      if (x[i] != x[j]) sum.add(pair(i, j));
  }
  return sum.value();
}

double TruncatedEnergy::flip_delta(std::span<const std::uint8_t> x, std::size_t i) const {
  CompensatedSum d;
  d.add(x[i] ? c0_[i] - c1_[i] : c1_[i] - c0_[i]);
  for (std::size_t j = 0; j < cells_.size(); ++j) {
    if (j == i) continue;
    // After the flip the pair is cut exactly when it was not cut before.
    d.add(x[j] == x[i] ? pair(i, j) : -pair(i, j));
  }
  return d.value();
}

double TruncatedEnergy::difference_error(std::span<const std::uint8_t> x,
                                         std::span<const std::uint8_t> y) const {
  CompensatedSum err;
  const std::size_t n = cells_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] != y[i]) err.add(fixed_err_[i]);
    for (std::size_t j = i + 1; j < n; ++j)
      if ((x[i] != x[j]) != (y[i] != y[j])) err.add(pair_error(i, j));
  }
  return err.value();
}

std::vector<std::uint8_t> TruncatedEnergy::pattern(const IndicatorField& e) const {
  if (!(e.grid() == grid_)) throw Error(ErrorKind::invalid_argument, "set lives on another grid");
  std::vector<std::uint8_t> x(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) x[i] = e.inside(cells_[i]) ? 1 : 0;
  return x;
}

IndicatorField TruncatedEnergy::apply(std::span<const std::uint8_t> x) const {
  IndicatorField out = base_;
  for (std::size_t i = 0; i < cells_.size(); ++i) out.set(cells_[i], x[i] != 0);
  return out;
}

// ---------------------------------------------------------------- optimality

DeviationResult local_deviation_test(const TruncatedEnergy& model, const IndicatorField& e,
                                     std::span<const std::size_t> a) {
  DeviationResult r;
  if (a.empty()) return r;
  const std::vector<std::uint8_t> x = model.pattern(e);
  std::vector<std::uint8_t> in_a(model.size(), 0);
  std::vector<std::size_t> pos;
  for (std::size_t cell : a) {
    if (cell >= model.grid().size() || model.position(cell) < 0)
      throw Error(ErrorKind::invalid_argument, "deviation set must consist of Omega cells");
    pos.push_back(static_cast<std::size_t>(model.position(cell)));
    in_a[pos.back()] = 1;
  }
  const std::uint8_t side = x[pos.front()];
  for (std::size_t p : pos)
    if (x[p] != side) throw Error(ErrorKind::straddling_set, "deviation set straddles E and its complement");

  CompensatedSum margin, tol;
  for (std::size_t p : pos) {
    margin.add(side ? model.cost_outside(p) - model.cost_inside(p)
                    : model.cost_inside(p) - model.cost_outside(p));
    tol.add(model.fixed_error(p));
    for (std::size_t j = 0; j < model.size(); ++j) {
      if (in_a[j]) continue;
      const double w = model.pair(p, j);
      margin.add(x[j] == side ? w : -w);
      tol.add(model.pair_error(p, j));
    }
  }
  r.margin = margin.value();
  r.tolerance = tol.value() + model.rounding_slack();
  const bool ok = r.margin >= -r.tolerance;
  (side ? r.sup_ok : r.sub_ok) = ok;
  return r;
}

DeviationResult local_deviation_test(const IndicatorField& e, std::span<const std::size_t> a,
                                     const Domain& omega, FractionalOrder s,
                                     const MinimizeOptions& options) {
  const TruncatedEnergy model(e, omega, s, options);
  return local_deviation_test(model, e, a);
}

// ---------------------------------------------------------------- minimizers

namespace {

FunctionalValue certified_energy(const IndicatorField& f, const Domain& omega,
                                 const TruncatedEnergy& model, int threads) {
  return j1(f, omega, model.table(), threads) + j2(f, omega, model.table(), model.r_trunc(), threads);
}

std::vector<std::uint8_t> bits_of(std::uint64_t p, std::size_t n) {
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>((p >> i) & 1u);
  return x;
}

}  // namespace

MinimizeReport brute_force_minimizer(const AnalyticSet& exterior, const Grid& grid,
                                     const Domain& omega, FractionalOrder s,
                                     const MinimizeOptions& options) {
  const IndicatorField start = rasterize(exterior, grid);
  const TruncatedEnergy model(start, omega, s, options);
  const std::size_t n = model.size();
  if (n > 20)
    throw Error(ErrorKind::budget_exceeded, "brute force is limited to 20 Omega cells");

  const std::uint64_t total = std::uint64_t{1} << n;
  constexpr std::uint64_t kChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);
  std::vector<double> energy(total);
  parallel_chunks(chunks, options.threads, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(total, (c + 1) * kChunk);
    for (std::uint64_t p = c * kChunk; p < end; ++p) energy[p] = model.energy(bits_of(p, n));
  });

  std::uint64_t best = 0;
  for (std::uint64_t p = 1; p < total; ++p)
    if (energy[p] < energy[best]) best = p;
  const std::vector<std::uint8_t> xb = bits_of(best, n);

  CompensatedSum all_err;
  for (std::size_t i = 0; i < n; ++i) all_err.add(model.flip_error(i));
  const double widest = all_err.value() + model.rounding_slack();

  MinimizeReport report{model.apply(xb), {}, MinimizeMethod::brute_force,
                        static_cast<long long>(total), true, {energy[best]}, {}};
  for (std::uint64_t p = 0; p < total; ++p) {
    const double gap = energy[p] - energy[best];
    if (gap > widest) continue;
    const std::vector<std::uint8_t> x = bits_of(p, n);
    if (p == best || gap <= model.difference_error(x, xb) + model.rounding_slack())
      report.ties.push_back(model.apply(x));
  }
  report.energy = certified_energy(report.minimizer, omega, model, options.threads);
  return report;
}

MinimizeReport flip_descent(const IndicatorField& init, const Domain& omega, FractionalOrder s,
                            int max_sweeps, const MinimizeOptions& options) {
  if (max_sweeps < 1) throw Error(ErrorKind::invalid_argument, "max_sweeps must be at least 1");
  const TruncatedEnergy model(init, omega, s, options);
  std::vector<std::uint8_t> x = model.pattern(init);
  double current = model.energy(x);
  MinimizeReport report{init, {}, MinimizeMethod::flip_descent, 0, false, {current}, {}};
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    ++report.iterations;
    std::size_t flips = 0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double delta = model.flip_delta(x, i);
      if (delta < -(model.flip_error(i) + model.rounding_slack())) {
        x[i] ^= 1;
        current += delta;
        report.energy_trace.push_back(current);
        ++flips;
      }
    }
    if (flips == 0) {
      report.converged = true;
      break;
    }
  }
  report.minimizer = model.apply(x);
  report.energy = certified_energy(report.minimizer, omega, model, options.threads);
  return report;
}

ComparisonResult comparison_check(const IndicatorField& e) {
  const Grid& grid = e.grid();
  const int axis = grid.dim() - 1;
  const double lo = grid.cell_lo(axis, 0);
  const double hi = grid.cell_lo(axis, grid.extent(axis));
  if (std::fabs(lo + hi) > 1e-12 * (hi - lo))
    throw Error(ErrorKind::asymmetric_grid, "grid is not symmetric under the reflection across x_n = 0");
  const IndicatorField h = rasterize(AnalyticSet::lower_halfspace(grid.dim()), grid);
  ComparisonResult r{true, true};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (h.inside(i) && !e.inside(i)) r.contains_h = false;
    if (e.inside(i) && !h.inside(i)) r.contained_in_h = false;
  }
  return r;
}

// ---------------------------------------------------------------- gluing

namespace {

bool whole_cells(double delta, const Grid& grid) {
  for (int a = 0; a < grid.dim(); ++a) {
    const double k = delta / grid.h(a);
    if (std::fabs(k - std::round(k)) > 1e-9) return false;
  }
  return true;
}

}  // namespace

GlueReport glue(const IndicatorField& e1, const IndicatorField& e2, const Domain& omega, double delta1,
                double delta2, FractionalOrder s, const EvalOptions& options) {
  if (!(delta1 > delta2 && delta2 > 0))
    throw Error(ErrorKind::invalid_argument, "gluing needs delta1 > delta2 > 0");
  const Grid& grid = e1.grid();
  if (!(e2.grid() == grid)) throw Error(ErrorKind::invalid_argument, "glued sets must share a grid");
  if (!whole_cells(delta1, grid) || !whole_cells(delta2, grid))
    throw Error(ErrorKind::not_grid_aligned, "gluing widths must be whole numbers of cells");
  const CellRange inner = aligned_cells(grid, omega);
  const WeightTable table = make_weight_table(grid, s, options.weights);
  const double h = grid.h(0);

  // w = phi chi_E1 + (1 - phi) chi_E2, exact wherever E1 and E2 agree.
  std::vector<double> w(grid.size());
  std::vector<double> depth(grid.size(), -1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) w[i] = e2.inside(i) ? 1.0 : 0.0;
  for_each_cell(grid, inner, [&](const Index& idx, std::size_t lin) {
    const double d = omega.distance_to_boundary(grid.center(idx));
    depth[lin] = d;
    const double phi = std::clamp((d - delta2) / (delta1 - delta2), 0.0, 1.0);
    if (e1.inside(lin) != e2.inside(lin)) w[lin] = e1.inside(lin) ? phi : 1.0 - phi;
  });

  std::vector<double> breaks{0.0, 1.0};
  for_each_cell(grid, inner, [&](const Index&, std::size_t lin) { breaks.push_back(w[lin]); });
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto superlevel = [&](double t) {
    std::vector<std::uint8_t> bits(grid.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = w[i] > t ? 1 : 0;
    return IndicatorField(grid, std::move(bits), e2.exterior());
  };

  std::size_t best = 0;
  double best_j = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double j = j1(superlevel(breaks[k]), omega, table, options.threads).value;
    if (j < best_j) {
      best_j = j;
      best = k;
    }
  }
  const double t_star = 0.5 * (breaks[best] + breaks[best + 1]);
  DensityField wf(grid, w);
  GlueReport r{superlevel(t_star), wf, t_star};

  const double cell = grid.cell_volume();
  std::size_t f_e1 = 0, e1_e2 = 0, e1_e2_shell = 0;
  bool b_ok = true;
  std::vector<std::uint8_t> shell_in(grid.size(), 0), shell_out(grid.size(), 0);
  for_each_cell(grid, inner, [&](const Index&, std::size_t lin) {
    const bool f = r.f.inside(lin), a = e1.inside(lin), b = e2.inside(lin);
    const double d = depth[lin];
    f_e1 += f != a;
    e1_e2 += a != b;
    if (d <= delta1 && d > delta2) e1_e2_shell += a != b;
    if (d > delta1 && f != a) b_ok = false;
    if (d <= delta2 && f != b) b_ok = false;
    if (d <= delta1 + h) (b ? shell_in : shell_out)[lin] = 1;
  });
  r.l1_f_e1 = f_e1 * cell;
  r.l1_e1_e2 = e1_e2 * cell;
  r.l1_e1_e2_shell = e1_e2_shell * cell;
  r.condition_a = f_e1 <= e1_e2;
  r.condition_b = b_ok;

  r.j1_f = j1(r.f, omega, table, options.threads).value;
  r.f_w = f_seminorm(r.w, omega, table, options.threads).value;
  r.bounds_ok = 2.0 * r.j1_f <= r.f_w * (1.0 + 1e-12);
  r.j1_e1 = j1(e1, omega, table, options.threads).value;
  r.j1_e2_shell = fracperim::interaction(grid, shell_in, shell_out, table, options.threads).value;
  return r;
}

}  // namespace fracperim
