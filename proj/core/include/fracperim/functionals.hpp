#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fracperim/geometry.hpp"
#include "fracperim/kernel_weights.hpp"

namespace fracperim {

/// A computed functional with a certified bracket [lower, upper].
struct FunctionalValue {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double truncation_radius = 0.0;
  double quadrature_error = 0.0;

  double width() const noexcept { return upper - lower; }
  FunctionalValue scaled(double factor) const;
};

FunctionalValue operator+(const FunctionalValue& a, const FunctionalValue& b);

struct EvalOptions {
  WeightOptions weights{};
  int threads = 1;
};

/// Number of cell pairs (i in A, j in B) with j - i = offset, for every offset.
struct PairCounts {
  Offset reach{0, 0, 0};
  std::vector<std::int64_t> counts;

  std::size_t index(const Offset& d) const;
  std::int64_t at(const Offset& d) const { return counts[index(d)]; }
  std::int64_t total() const;
};

/// Exact integer pair counts between two cell masks of the same grid, by
/// bit-packed correlation along axis 0. The result does not depend on the
/// thread count.
PairCounts pair_counts(const Grid& grid, std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b, int threads = 1);

struct Interaction {
  double value = 0.0;
  double abs_error = 0.0;
};

/// sum_offset count(offset) * w(offset), summed in a fixed offset order with
/// compensated accumulation.
Interaction weigh(const PairCounts& counts, const WeightTable& table, int threads = 1);

/// L(A, B) for two cell masks.
Interaction interaction(const Grid& grid, std::span<const std::uint8_t> a,
                        std::span<const std::uint8_t> b, const WeightTable& table, int threads = 1);

/// J^1_s(E, Omega): E inside Omega against E^c inside Omega.
FunctionalValue j1(const IndicatorField& e, const Domain& omega, FractionalOrder s,
                   const EvalOptions& options = {});
FunctionalValue j1(const IndicatorField& e, const Domain& omega, const WeightTable& table,
                   int threads = 1);

/// Cells within `r_trunc` of Omega that the finite sums of J^2 cover.
CellRange truncation_cells(const Grid& grid, const Domain& omega, double r_trunc);

/// Upper bound on the kernel mass that a cell of `range_inner` can exchange
/// with anything outside `truncation`: cell volume times complement_tail.
double cell_tail_bound(const Grid& grid, const CellRange& truncation, const Index& cell,
                       FractionalOrder s);

/// J^2_s(E, Omega) from pairs inside the truncation box, plus a per-cell tail
/// interval for the unresolved exterior. The value takes the tail midpoint.
FunctionalValue j2(const IndicatorField& e, const Domain& omega, FractionalOrder s, double r_trunc,
                   const EvalOptions& options = {});
FunctionalValue j2(const IndicatorField& e, const Domain& omega, const WeightTable& table,
                   double r_trunc, int threads = 1);

/// J_s = J^1_s + J^2_s.
FunctionalValue j_total(const IndicatorField& e, const Domain& omega, FractionalOrder s,
                        double r_trunc, const EvalOptions& options = {});

/// F_s(u, Omega): ordered pairs of Omega cells weighted by |u_i - u_j|.
FunctionalValue f_seminorm(const DensityField& u, const Domain& omega, FractionalOrder s,
                           const EvalOptions& options = {});
FunctionalValue f_seminorm(const DensityField& u, const Domain& omega, const WeightTable& table,
                           int threads = 1);

/// Relative residual of (1/2) F_s(u) = int_0^1 J^1_s({u > t}) dt, with the
/// t-integral evaluated exactly over the finitely many levels of u.
double coarea_check(const DensityField& u, const Domain& omega, FractionalOrder s,
                    const EvalOptions& options = {});

struct TranslationDefect {
  Point shift{};
  double value = 0.0;
  Domain region;
};

/// ||tau_h u - u||_{L^1(A)} for a shift that is a whole number of cells.
TranslationDefect translation_defect(const DensityField& u, const Point& shift, const Domain& region);

}  // namespace fracperim
