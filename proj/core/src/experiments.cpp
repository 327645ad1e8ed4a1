#include "fracperim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fracperim/error.hpp"
#include "fracperim/halfspace.hpp"
#include "fracperim/minimization.hpp"

namespace fracperim {

using nlohmann::json;

namespace {

constexpr const char* kKindNames[] = {"compute", "converge", "halfspace", "coarea",
                                      "translation", "minimize", "glue"};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::config, what); }

Point point_from(const json& j, int dim, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    config_error(std::string(what) + " must be an array of " + std::to_string(dim) + " numbers");
  Point p{};
  for (int a = 0; a < dim; ++a) p[a] = j.at(a).get<double>();
  return p;
}

Domain domain_from(const json& j, int dim) {
  if (j.is_string()) {
    if (j.get<std::string>() == "unit_cube") return Domain::unit_cube(dim);
    config_error("unknown domain name " + j.get<std::string>());
  }
  if (j.contains("slab")) return Domain::slab(dim, j.at("slab").get<double>());
  const Point lo = point_from(j.at("lo"), dim, "domain.lo");
  const Point hi = point_from(j.at("hi"), dim, "domain.hi");
  return Domain(dim, std::span<const double>(lo.data(), dim), std::span<const double>(hi.data(), dim));
}

template <class T>
std::vector<T> list_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) config_error(std::string(what) + " must be a non-empty array");
  return j.get<std::vector<T>>();
}

int padding_for(double r_trunc, int resolution) {
  return static_cast<int>(std::ceil(r_trunc * resolution - 1e-9));
}

double reference_for(const ExperimentConfig& cfg) {
  return halfspace_limit_constant(cfg.dim) * exact_perimeter(cfg.shape, cfg.domain);
}

double rel_gap(double value, double reference) {
  const double gap = std::fabs(value - reference);
  return reference != 0.0 ? gap / std::fabs(reference) : gap;
}

Table make_table(std::vector<std::string> columns) { return Table{std::move(columns), {}, false}; }

std::int64_t as_int(bool b) { return b ? 1 : 0; }

}  // namespace

const char* to_string(ExperimentKind kind) noexcept { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (int k = 0; k < 7; ++k)
    if (name == kKindNames[k]) return static_cast<ExperimentKind>(k);
  config_error("unknown experiment kind " + name);
}

WeightOptions ExperimentConfig::weight_options() const {
  WeightOptions w;
  w.rel_tol = rel_tol;
  w.near_cutoff = near_cutoff;
  return w;
}

EvalOptions ExperimentConfig::eval_options() const { return EvalOptions{weight_options(), threads}; }

AnalyticSet parse_shape(const json& r, int dim) {
  const std::string kind = r.at("kind").get<std::string>();
  if (kind == "empty") return AnalyticSet::empty();
  if (kind == "full") return AnalyticSet::full();
  if (kind == "halfspace") {
    const int axis = r.value("axis", dim - 1);
    if (axis < 0 || axis >= dim) config_error("halfspace axis out of range");
    const std::string side = r.value("side", std::string("below"));
    if (side != "below" && side != "above") config_error("halfspace side must be below or above");
    return AnalyticSet::halfspace(axis, r.value("offset", 0.0),
                                  side == "below" ? AnalyticSet::Side::below : AnalyticSet::Side::above);
  }
  if (kind == "ball") {
    const double radius = r.at("radius").get<double>();
    if (!(radius > 0)) config_error("ball radius must be positive");
    return AnalyticSet::ball(point_from(r.at("center"), dim, "ball.center"), radius);
  }
  if (kind == "box_union") {
    std::vector<Box> boxes;
    for (const json& b : r.at("boxes"))
      boxes.push_back({point_from(b.at("lo"), dim, "box.lo"), point_from(b.at("hi"), dim, "box.hi")});
    return AnalyticSet::box_union(std::move(boxes));
  }
  if (kind == "complement") return AnalyticSet::complement_of(parse_shape(r.at("of"), dim));
  config_error("unknown shape kind " + kind);
}

ExperimentConfig parse_config(const json& d) {
  try {
    if (!d.is_object()) config_error("configuration must be a JSON object");
    ExperimentConfig c;
    if (d.contains("experiment")) c.kind = parse_experiment_kind(d.at("experiment").get<std::string>());
    c.dim = d.value("dim", 1);
    if (c.dim < 1 || c.dim > kMaxDim) config_error("dim must be 1, 2 or 3");
    c.domain = d.contains("domain") ? domain_from(d.at("domain"), c.dim) : Domain::unit_cube(c.dim);
    c.shape = d.contains("shape") ? parse_shape(d.at("shape"), c.dim) : AnalyticSet::lower_halfspace(c.dim);
    if (d.contains("shape2")) c.shape2 = parse_shape(d.at("shape2"), c.dim);
    if (d.contains("s_list")) c.s_list = list_from<double>(d.at("s_list"), "s_list");
    for (double s : c.s_list)
      if (!(s > 0 && s < 1)) config_error("every s must lie strictly between 0 and 1");
    if (d.contains("resolutions")) c.resolutions = list_from<int>(d.at("resolutions"), "resolutions");
    for (int r : c.resolutions)
      if (r < 1) config_error("resolutions must be positive");
    c.rel_tol = d.value("rel_tol", c.rel_tol);
    c.r_trunc = d.value("r_trunc", c.r_trunc);
    c.near_cutoff = d.value("near_cutoff", c.near_cutoff);
    c.seed = d.value("seed", c.seed);
    c.threads = d.value("threads", c.threads);
    c.output = d.value("output", c.output);
    c.include_j2 = d.value("include_j2", c.include_j2);
    if (d.contains("a_list")) c.a_list = list_from<double>(d.at("a_list"), "a_list");
    c.instances = d.value("instances", c.instances);
    c.max_levels = d.value("max_levels", c.max_levels);
    c.region_margin = d.value("region_margin", c.region_margin);
    if (d.contains("shifts")) c.shifts = list_from<double>(d.at("shifts"), "shifts");
    c.max_sweeps = d.value("max_sweeps", c.max_sweeps);
    c.delta1 = d.value("delta1", c.delta1);
    c.delta2 = d.value("delta2", c.delta2);
    if (!(c.rel_tol > 0)) config_error("rel_tol must be positive");
    if (!(c.r_trunc > 0)) config_error("r_trunc must be positive");
    if (c.near_cutoff < 0) config_error("near_cutoff must be non-negative");
    if (c.threads < 1) config_error("threads must be at least 1");
    if (c.max_levels < 1) config_error("max_levels must be at least 1");
    if (c.max_sweeps < 1) config_error("max_sweeps must be at least 1");
    return c;
  } catch (const json::exception& e) {
    config_error(std::string("malformed configuration: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    config_error(std::string("invalid configuration: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open configuration file " + path);
  json d;
  try {
    in >> d;
  } catch (const json::exception& e) {
    config_error(std::string("cannot parse ") + path + ": " + e.what());
  }
  return parse_config(d);
}

// ---------------------------------------------------------------- output

std::string format_value(const TableValue& v) {
  if (const double* d = std::get_if<double>(&v)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_value(row[c]);
    out << '\n';
  }
}

void write_json(const Table& t, std::ostream& out) {
  out << "[\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out << "  {";
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const TableValue& v = t.rows[r][c];
      out << (c ? ", " : "") << '"' << t.columns[c] << "\": ";
      if (std::holds_alternative<std::string>(v)) {
        out << json(std::get<std::string>(v)).dump();
      } else if (const double* d = std::get_if<double>(&v); d && !std::isfinite(*d)) {
        out << "null";
      } else {
        out << format_value(v);
      }
    }
    out << (r + 1 < t.rows.size() ? "},\n" : "}\n");
  }
  out << "]\n";
}

Grid isotropic_grid(const Domain& domain, int resolution, int padding) {
  std::vector<int> cells(domain.dim());
  for (int a = 0; a < domain.dim(); ++a) {
    const double k = domain.extent(a) * resolution;
    const double r = std::round(k);
    if (std::fabs(k - r) > 1e-9 * std::max(1.0, k) || r < 1)
      throw Error(ErrorKind::misaligned_domain, "domain extent is not a whole number of cells");
    cells[a] = static_cast<int>(r);
  }
  return Grid(domain, cells, padding);
}

// ---------------------------------------------------------------- converge

Extrapolation richardson(const std::vector<double>& s, const std::vector<double>& y,
                         const std::vector<double>& lo, const std::vector<double>& hi) {
  std::vector<std::size_t> use;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k] >= 0.9) use.push_back(k);
  if (use.size() < 2) {
    use.resize(s.size());
    std::iota(use.begin(), use.end(), std::size_t{0});
  }
  if (use.empty()) throw Error(ErrorKind::invalid_argument, "nothing to extrapolate");
  const double m = static_cast<double>(use.size());
  double tbar = 0.0;
  for (std::size_t k : use) tbar += (1.0 - s[k]) / m;
  double sxx = 0.0;
  for (std::size_t k : use) sxx += (1.0 - s[k] - tbar) * (1.0 - s[k] - tbar);
  Extrapolation e;
  for (std::size_t k : use) {
    const double c = sxx > 0 ? 1.0 / m - tbar * (1.0 - s[k] - tbar) / sxx : 1.0 / m;
    e.value += c * y[k];
    e.lower += c * (c >= 0 ? lo[k] : hi[k]);
    e.upper += c * (c >= 0 ? hi[k] : lo[k]);
  }
  return e;
}

std::vector<ConvergenceRow> converge_sweep(const ExperimentConfig& cfg) {
  const double reference = reference_for(cfg);
  const int finest = *std::max_element(cfg.resolutions.begin(), cfg.resolutions.end());
  std::vector<ConvergenceRow> rows;
  std::vector<double> fs, fy1, flo1, fhi1, fy, flo, fhi;
  for (double sv : cfg.s_list) {
    const FractionalOrder s(sv);
    for (int res : cfg.resolutions) {
      const Grid grid = isotropic_grid(cfg.domain, res, cfg.include_j2 ? padding_for(cfg.r_trunc, res) : 0);
      const IndicatorField e = rasterize(cfg.shape, grid);
      const WeightTable table = make_weight_table(grid, s, cfg.weight_options());
      const FunctionalValue v1 = j1(e, cfg.domain, table, cfg.threads).scaled(1.0 - sv);
      FunctionalValue total = v1;
      if (cfg.include_j2)
        total = v1 + j2(e, cfg.domain, table, cfg.r_trunc, cfg.threads).scaled(1.0 - sv);
      rows.push_back({sv, grid.h(0), v1.value, total.value, total.lower, total.upper, reference,
                      rel_gap(total.value, reference)});
      if (res == finest) {
        fs.push_back(sv);
        fy1.push_back(v1.value);
        flo1.push_back(v1.lower);
        fhi1.push_back(v1.upper);
        fy.push_back(total.value);
        flo.push_back(total.lower);
        fhi.push_back(total.upper);
      }
    }
  }
  const Extrapolation x1 = richardson(fs, fy1, flo1, fhi1);
  const Extrapolation xt = richardson(fs, fy, flo, fhi);
  rows.push_back({1.0, 1.0 / finest, x1.value, xt.value, xt.lower, xt.upper, reference,
                  rel_gap(xt.value, reference)});
  return rows;
}

Table convergence_table(const std::vector<ConvergenceRow>& rows) {
  Table t = make_table({"s", "h", "j1_scaled", "j_total_scaled", "bracket_lo", "bracket_hi", "reference",
                        "rel_gap"});
  for (const auto& r : rows)
    t.rows.push_back({r.s, r.h, r.j1_scaled, r.j_total_scaled, r.bracket_lo, r.bracket_hi, r.reference,
                      r.rel_gap});
  return t;
}

Table compute_table(const ExperimentConfig& cfg) {
  Table t = make_table({"s", "h", "j1", "j1_lo", "j1_hi", "j2", "j2_lo", "j2_hi", "j_total", "j_lo",
                        "j_hi", "perimeter"});
  double perimeter = 0.0;
  try {
    perimeter = exact_perimeter(cfg.shape, cfg.domain);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::unsupported_shape) throw;
    perimeter = std::nan("");
  }
  for (double sv : cfg.s_list)
    for (int res : cfg.resolutions) {
      const Grid grid = isotropic_grid(cfg.domain, res, padding_for(cfg.r_trunc, res));
      const IndicatorField e = rasterize(cfg.shape, grid);
      const WeightTable table = make_weight_table(grid, FractionalOrder(sv), cfg.weight_options());
      const FunctionalValue a = j1(e, cfg.domain, table, cfg.threads);
      const FunctionalValue b = j2(e, cfg.domain, table, cfg.r_trunc, cfg.threads);
      const FunctionalValue c = a + b;
      t.rows.push_back({sv, grid.h(0), a.value, a.lower, a.upper, b.value, b.lower, b.upper, c.value,
                        c.lower, c.upper, perimeter});
    }
  return t;
}

Table halfspace_table(const ExperimentConfig& cfg) {
  Table t = make_table({"dim", "a", "s", "h", "j1", "j1_lo", "j1_hi", "reference", "reference_exact",
                        "j1_scaled", "limit", "rho"});
  const double limit = halfspace_limit_constant(cfg.dim);
  for (double a : cfg.a_list)
    for (double sv : cfg.s_list) {
      const FractionalOrder s(sv);
      const HalfspaceValue ref = halfspace_product_bound(cfg.dim, a, s);
      const double rho = cfg.dim >= 2 ? rho_integral(cfg.dim, sv) : 0.0;
      const Domain qa = Domain::slab(cfg.dim, a);
      for (int res : cfg.resolutions) {
        const Grid grid = isotropic_grid(qa, res);
        const IndicatorField e = rasterize(AnalyticSet::lower_halfspace(cfg.dim), grid);
        const FunctionalValue v = j1(e, qa, FractionalOrder(sv), cfg.eval_options());
        t.rows.push_back({static_cast<std::int64_t>(cfg.dim), a, sv, grid.h(0), v.value, v.lower, v.upper,
                          ref.value, as_int(ref.is_exact), (1.0 - sv) * v.value, limit, rho});
      }
    }
  return t;
}

Table coarea_table(const ExperimentConfig& cfg) {
  Table t = make_table({"instance", "dim", "s", "cells", "levels", "half_f", "residual"});
  std::mt19937_64 rng(cfg.seed);
  const int count = cfg.instances > 0 ? cfg.instances : 100;
  for (int k = 0; k < count; ++k) {
    const double sv = cfg.s_list[k % cfg.s_list.size()];
    const int res = cfg.resolutions[k % cfg.resolutions.size()];
    const Grid grid = isotropic_grid(cfg.domain, res);
    const int m = std::uniform_int_distribution<int>(1, cfg.max_levels)(rng);
    std::vector<double> levels(m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : levels) v = unit(rng);
    if (m >= 2) levels[0] = 0.0;
    if (m >= 3) levels[1] = 1.0;
    std::uniform_int_distribution<int> pick(0, m - 1);
    std::vector<double> values(grid.size());
    for (double& v : values) v = levels[pick(rng)];
    const DensityField u(grid, values);
    const FunctionalValue f = f_seminorm(u, cfg.domain, FractionalOrder(sv), cfg.eval_options());
    const double residual = coarea_check(u, cfg.domain, FractionalOrder(sv), cfg.eval_options());
    t.rows.push_back({static_cast<std::int64_t>(k), static_cast<std::int64_t>(cfg.dim), sv,
                      static_cast<std::int64_t>(grid.size()), static_cast<std::int64_t>(m), 0.5 * f.value,
                      residual});
  }
  return t;
}

Table translation_sweep(const ExperimentConfig& cfg) {
  Table t = make_table({"s", "h", "shift", "defect", "f_s", "ratio", "is_max"});
  const double max_shift = *std::max_element(cfg.shifts.begin(), cfg.shifts.end());
  if (!(cfg.region_margin > 2.0 * max_shift))
    config_error("region margin must exceed twice the largest shift");
  const Domain region = cfg.domain.expanded(-cfg.region_margin);
  const int axis = cfg.dim - 1;
  for (double sv : cfg.s_list)
    for (int res : cfg.resolutions) {
      const Grid grid = isotropic_grid(cfg.domain, res);
      const DensityField u = DensityField::indicator(rasterize(cfg.shape, grid));
      const double f = f_seminorm(u, cfg.domain, FractionalOrder(sv), cfg.eval_options()).value;
      const std::size_t first = t.rows.size();
      t.rows.push_back({sv, grid.h(0), 0.0, 0.0, f, 0.0, std::int64_t{0}});
      std::size_t best = first;
      double best_ratio = 0.0;
      for (double len : cfg.shifts) {
        Point shift{};
        shift[axis] = len;
        const TranslationDefect d = translation_defect(u, shift, region);
        const double denom = std::pow(std::fabs(len), sv) * (1.0 - sv) * f;
        const double ratio = denom > 0 ? d.value / denom : 0.0;
        t.rows.push_back({sv, grid.h(0), len, d.value, f, ratio, std::int64_t{0}});
        if (ratio > best_ratio) {
          best_ratio = ratio;
          best = t.rows.size() - 1;
        }
      }
      t.rows[best][6] = std::int64_t{1};
    }
  return t;
}

Table minimizer_convergence_experiment(const ExperimentConfig& cfg) {
  Table t = make_table({"s", "h", "sweeps", "converged", "flips", "sym_diff_prev", "sym_diff_limit",
                        "energy_scaled", "energy_lo", "energy_hi", "reference"});
  const double reference = reference_for(cfg);
  MinimizeOptions opts{cfg.weight_options(), cfg.r_trunc, cfg.threads};
  for (int res : cfg.resolutions) {
    const Grid grid = isotropic_grid(cfg.domain, res, padding_for(cfg.r_trunc, res));
    const IndicatorField start = rasterize(cfg.shape, grid);
    const CellRange inner = aligned_cells(grid, cfg.domain);
    auto sym_diff = [&](const IndicatorField& a, const IndicatorField& b) {
      std::size_t n = 0;
      for_each_cell(grid, inner, [&](const Index&, std::size_t lin) { n += a.inside(lin) != b.inside(lin); });
      return static_cast<double>(n) * grid.cell_volume();
    };
    std::optional<IndicatorField> previous;
    for (double sv : cfg.s_list) {
      const MinimizeReport r = flip_descent(start, cfg.domain, FractionalOrder(sv), cfg.max_sweeps, opts);
      if (!r.converged) t.non_converged = true;
      const FunctionalValue e = r.energy.scaled(1.0 - sv);
      t.rows.push_back({sv, grid.h(0), static_cast<std::int64_t>(r.iterations), as_int(r.converged),
                        static_cast<std::int64_t>(r.energy_trace.size() - 1),
                        previous ? sym_diff(*previous, r.minimizer) : 0.0, sym_diff(start, r.minimizer),
                        e.value, e.lower, e.upper, reference});
      previous = r.minimizer;
    }
  }
  return t;
}

Table glue_table(const ExperimentConfig& cfg) {
  Table t = make_table({"instance", "s", "delta1", "delta2", "t_star", "condition_a", "condition_b",
                        "bounds_ok", "j1_f", "f_w", "j1_e1", "j1_e2_shell", "l1_e1_e2_shell", "l1_e1_e2",
                        "l1_f_e1"});
  auto emit = [&](int k, double sv, double d1, double d2, const GlueReport& g) {
    t.rows.push_back({static_cast<std::int64_t>(k), sv, d1, d2, g.t_star, as_int(g.condition_a),
                      as_int(g.condition_b), as_int(g.bounds_ok), g.j1_f, g.f_w, g.j1_e1, g.j1_e2_shell,
                      g.l1_e1_e2_shell, g.l1_e1_e2, g.l1_f_e1});
  };
  const Grid grid = isotropic_grid(cfg.domain, cfg.resolutions.front());
  if (cfg.shape2) {
    const IndicatorField e1 = rasterize(cfg.shape, grid);
    const IndicatorField e2 = rasterize(*cfg.shape2, grid);
    for (std::size_t k = 0; k < cfg.s_list.size(); ++k) {
      const double sv = cfg.s_list[k];
      emit(static_cast<int>(k), sv, cfg.delta1, cfg.delta2,
           glue(e1, e2, cfg.domain, cfg.delta1, cfg.delta2, FractionalOrder(sv), cfg.eval_options()));
    }
    return t;
  }
  std::mt19937_64 rng(cfg.seed);
  int half = std::numeric_limits<int>::max();
  for (int a = 0; a < cfg.dim; ++a) half = std::min(half, grid.cells(a) / 2);
  if (half < 3) config_error("glue instances need at least 6 cells per axis");
  const double h = grid.h(0);
  const int count = cfg.instances > 0 ? cfg.instances : 50;
  for (int k = 0; k < count; ++k) {
    const double sv = cfg.s_list[k % cfg.s_list.size()];
    const int k2 = std::uniform_int_distribution<int>(1, half - 2)(rng);
    const int k1 = std::uniform_int_distribution<int>(k2 + 1, half - 1)(rng);
    std::bernoulli_distribution coin(std::uniform_real_distribution<double>(0.2, 0.8)(rng));
    std::vector<std::uint8_t> b1(grid.size()), b2(grid.size());
    for (auto& b : b1) b = coin(rng);
    for (auto& b : b2) b = coin(rng);
    const IndicatorField e1(grid, b1, AnalyticSet::empty());
    const IndicatorField e2(grid, b2, AnalyticSet::empty());
    emit(k, sv, k1 * h, k2 * h, glue(e1, e2, cfg.domain, k1 * h, k2 * h, FractionalOrder(sv), cfg.eval_options()));
  }
  return t;
}

Table run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::compute: return compute_table(cfg);
    case ExperimentKind::converge: return convergence_table(converge_sweep(cfg));
    case ExperimentKind::halfspace: return halfspace_table(cfg);
    case ExperimentKind::coarea: return coarea_table(cfg);
    case ExperimentKind::translation: return translation_sweep(cfg);
    case ExperimentKind::minimize: return minimizer_convergence_experiment(cfg);
    case ExperimentKind::glue: return glue_table(cfg);
  }
  throw Error(ErrorKind::invalid_argument, "unknown experiment kind");
}

}  // namespace fracperim
