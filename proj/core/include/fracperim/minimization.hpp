#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fracperim/functionals.hpp"

namespace fracperim {

/// Cells given by padded linear index on a grid.
using CellList = std::vector<std::size_t>;

/// L(A, B) = sum over a in A, b in B of w(b - a). A and B must be disjoint.
Interaction interaction(const Grid& grid, std::span<const std::size_t> a,
                        std::span<const std::size_t> b, const WeightTable& table);
Interaction interaction(const Grid& grid, std::span<const std::size_t> a,
                        std::span<const std::size_t> b, FractionalOrder s,
                        const WeightOptions& options = {});

struct MinimizeOptions {
  WeightOptions weights{};
  /// Truncation radius shared by every candidate; 0 uses the whole padding.
  double r_trunc = 0.0;
  int threads = 1;
};

enum class MinimizeMethod { brute_force, flip_descent };

const char* to_string(MinimizeMethod method) noexcept;

struct MinimizeReport {
  IndicatorField minimizer;
  FunctionalValue energy;
  MinimizeMethod method = MinimizeMethod::brute_force;
  long long iterations = 0;  // patterns evaluated, or sweeps performed
  bool converged = true;     // flip_descent: ended on a sweep without flips
  std::vector<double> energy_trace;
  /// brute_force: every pattern whose energy cannot be told apart from the
  /// minimum given the weight error bounds (the minimizer included).
  std::vector<IndicatorField> ties;
  bool unique() const noexcept { return ties.size() <= 1; }
};

/// Energy J^1 + J^2 restricted to a truncation box, as a function of the
/// Omega cells of a set whose cells outside Omega stay fixed:
///   E(x) = sum_i cost_{x_i}(i) + sum_{i<j, x_i != x_j} W_ij.
/// In one dimension the exterior beyond the box is integrated exactly. In
/// higher dimensions it enters each cell as half its tail bound on whichever
/// side escapes the box.
class TruncatedEnergy {
 public:
  TruncatedEnergy(const IndicatorField& e, const Domain& omega, FractionalOrder s,
                  const MinimizeOptions& options = {});

  const Grid& grid() const noexcept { return grid_; }
  const CellList& cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  double r_trunc() const noexcept { return r_trunc_; }
  const WeightTable& table() const noexcept { return table_; }

  double pair(std::size_t i, std::size_t j) const;
  double pair_error(std::size_t i, std::size_t j) const;
  /// Cost of cell i being inside (resp. outside) from the fixed cells and tail.
  double cost_inside(std::size_t i) const { return c1_[i]; }
  double cost_outside(std::size_t i) const { return c0_[i]; }
  /// Error bound of the fixed-cell sums of cell i.
  double fixed_error(std::size_t i) const { return fixed_err_[i]; }

  double energy(std::span<const std::uint8_t> x) const;
  /// E(x with cell i flipped) - E(x).
  double flip_delta(std::span<const std::uint8_t> x, std::size_t i) const;
  /// Error bound of flip_delta: every weight touching cell i.
  double flip_error(std::size_t i) const { return flip_err_[i]; }
  /// Bound on |E(x) - E(y)| error from the terms in which x and y differ.
  double difference_error(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) const;
  /// Floating-point slack for comparing two energies.
  double rounding_slack() const noexcept { return slack_; }

  /// Position of a grid cell among cells(), or -1 outside Omega.
  int position(std::size_t linear) const { return position_[linear]; }

  std::vector<std::uint8_t> pattern(const IndicatorField& e) const;
  IndicatorField apply(std::span<const std::uint8_t> x) const;

 private:
  Grid grid_;
  IndicatorField base_;
  WeightTable table_;
  double r_trunc_;
  CellList cells_;
  std::vector<Index> index_;
  std::vector<int> position_;  // grid cell -> position in cells_, or -1
  DenseWeights w_;
  std::vector<double> c0_, c1_, fixed_err_, flip_err_;
  double slack_ = 0.0;
};

struct DeviationResult {
  bool sub_ok = true;
  bool sup_ok = true;
  /// Right side minus left side of the inequality that applies (0 for empty A).
  double margin = 0.0;
  double tolerance = 0.0;
};

/// Checks L(A, E) <= L(A, E^c \ A) when A lies in E^c, or
/// L(A, E^c) <= L(A, E \ A) when A lies in E, on the truncated energy.
DeviationResult local_deviation_test(const IndicatorField& e, std::span<const std::size_t> a,
                                     const Domain& omega, FractionalOrder s,
                                     const MinimizeOptions& options = {});
DeviationResult local_deviation_test(const TruncatedEnergy& model, const IndicatorField& e,
                                     std::span<const std::size_t> a);

/// Exhaustive minimization over the Omega cells (at most 20).
MinimizeReport brute_force_minimizer(const AnalyticSet& exterior, const Grid& grid,
                                     const Domain& omega, FractionalOrder s,
                                     const MinimizeOptions& options = {});

/// Lexicographic single-cell flips, accepted only when the energy drops by
/// more than the error bound of the change.
MinimizeReport flip_descent(const IndicatorField& init, const Domain& omega, FractionalOrder s,
                            int max_sweeps, const MinimizeOptions& options = {});

struct ComparisonResult {
  bool contains_h = false;
  bool contained_in_h = false;
};

/// Bitwise H subset E and E subset H over the padded grid, where H is
/// rasterized on the same grid. The grid must be symmetric under x_n -> -x_n.
ComparisonResult comparison_check(const IndicatorField& e);

struct GlueReport {
  IndicatorField f;
  DensityField w;
  double t_star = 0.5;
  bool condition_a = false;
  bool condition_b = false;
  bool bounds_ok = false;
  double j1_f = 0.0;
  double f_w = 0.0;
  // Terms of the energy estimate, reported for inspection.
  double j1_e1 = 0.0;
  double j1_e2_shell = 0.0;   // J^1 of E2 over Omega_{delta1 + h}
  double l1_e1_e2_shell = 0.0;  // ||chi_E1 - chi_E2|| on Omega_{delta1} minus Omega_{delta2}
  double l1_e1_e2 = 0.0;        // ||chi_E1 - chi_E2|| on Omega
  double l1_f_e1 = 0.0;         // ||chi_F - chi_E1|| on Omega
};

GlueReport glue(const IndicatorField& e1, const IndicatorField& e2, const Domain& omega, double delta1,
                double delta2, FractionalOrder s, const EvalOptions& options = {});

}  // namespace fracperim
