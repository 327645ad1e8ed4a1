#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fracperim/functionals.hpp"
#include "fracperim/geometry.hpp"

namespace fracperim {

enum class ExperimentKind { compute, converge, halfspace, coarea, translation, minimize, glue };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::compute;
  int dim = 1;
  Domain domain = Domain::unit_cube(1);
  AnalyticSet shape = AnalyticSet::lower_halfspace(1);
  std::optional<AnalyticSet> shape2;  // second set for glue
  std::vector<double> s_list{0.5};
  std::vector<int> resolutions{64};  // cells per unit length
  double rel_tol = 1e-8;
  double r_trunc = 0.25;
  int near_cutoff = 2;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output;

  bool include_j2 = true;                      // converge, compute
  std::vector<double> a_list{0.5};             // halfspace
  int instances = 0;                           // coarea, glue (0: kind default)
  int max_levels = 8;                          // coarea
  double region_margin = 0.25;                 // translation
  std::vector<double> shifts{1.0 / 64, 1.0 / 32, 1.0 / 16};  // translation
  int max_sweeps = 100;                        // minimize
  double delta1 = 0.25, delta2 = 0.125;        // glue with explicit shapes

  WeightOptions weight_options() const;
  EvalOptions eval_options() const;
};

/// Shape records: {"kind": "halfspace", "axis", "offset", "side": "below"|"above"},
/// {"kind": "ball", "center", "radius"}, {"kind": "box_union", "boxes": [{"lo", "hi"}]},
/// {"kind": "complement", "of": shape}, {"kind": "empty"}, {"kind": "full"}.
AnalyticSet parse_shape(const nlohmann::json& record, int dim);

/// Throws Error(config) on malformed input.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig load_config(const std::string& path);

using TableValue = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<TableValue>> rows;
  /// Set when a run hit a sweep or subdivision limit.
  bool non_converged = false;
};

void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, std::ostream& out);
/// %.17g for doubles.
std::string format_value(const TableValue& value);

/// Grid with cell size 1/resolution on every axis; throws when the domain
/// extents are not whole multiples of the cell size.
Grid isotropic_grid(const Domain& domain, int resolution, int padding = 0);

struct ConvergenceRow {
  double s = 0.0;
  double h = 0.0;
  double j1_scaled = 0.0;
  double j_total_scaled = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double reference = 0.0;
  double rel_gap = 0.0;
};

/// Rows for every (s, resolution), followed by one row with s = 1 holding the
/// extrapolation in (1 - s) at the finest resolution.
std::vector<ConvergenceRow> converge_sweep(const ExperimentConfig& cfg);
Table convergence_table(const std::vector<ConvergenceRow>& rows);

Table compute_table(const ExperimentConfig& cfg);
Table halfspace_table(const ExperimentConfig& cfg);
Table coarea_table(const ExperimentConfig& cfg);
Table translation_sweep(const ExperimentConfig& cfg);
Table minimizer_convergence_experiment(const ExperimentConfig& cfg);
Table glue_table(const ExperimentConfig& cfg);

Table run_experiment(const ExperimentConfig& cfg);

struct Extrapolation {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Least-squares line through (1 - s_k, y_k) evaluated at 0, using only
/// s_k >= 0.9 when at least two such points exist. Each point's bracket is
/// carried through the linear weights.
Extrapolation richardson(const std::vector<double>& s, const std::vector<double>& y,
                         const std::vector<double>& lo, const std::vector<double>& hi);

}  // namespace fracperim
