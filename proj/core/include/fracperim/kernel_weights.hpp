#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

#include "fracperim/geometry.hpp"

namespace fracperim {

/// Fractional order s, strictly inside (0, 1).
class FractionalOrder {
 public:
  explicit FractionalOrder(double s);
  double value() const noexcept { return s_; }

 private:
  double s_;
};

using Offset = std::array<int, kMaxDim>;

/// w(offset) = int_{C_0} int_{C_offset} |x - y|^{-(n+s)} dx dy.
struct WeightEntry {
  Offset offset{0, 0, 0};
  double value = 0.0;
  double abs_error = 0.0;
};

struct WeightOptions {
  double rel_tol = 1e-8;
  /// Offsets with max-norm <= near_cutoff get refined quadrature.
  int near_cutoff = 2;
  int max_depth = 40;
};

/// int_a^b int_c^d (y - x)^{-(1+s)} dy dx for b <= c, from the second
/// antiderivative r^{1-s} / (s (1 - s)). Finite when the intervals touch.
double pair_weight_1d(double a, double b, double c, double d, FractionalOrder s);

/// Same integral with a bound on the floating-point error of the evaluation.
WeightEntry pair_weight_1d_entry(double a, double b, double c, double d, FractionalOrder s);

/// Interaction weight between the cell at the origin and the cell at
/// `offset` on an isotropic grid of cell size h. n = 1 is exact; in n >= 2
/// near offsets are integrated to rel_tol, far offsets use the midpoint value
/// with a Taylor remainder bound as abs_error.
WeightEntry cell_pair_weight(const Offset& offset, int dim, double h, FractionalOrder s,
                             const WeightOptions& options = {});

/// int_{B_R(x)^c} |x - y|^{-(n+s)} dy = n omega_n / (s R^s).
double complement_tail(double radius, int dim, FractionalOrder s);

/// Dense view of w over the offset box [-reach, reach]; entry 0 is unused.
class DenseWeights {
 public:
  DenseWeights() = default;
  DenseWeights(const Offset& reach, std::vector<double> value, std::vector<double> error);

  const Offset& reach() const noexcept { return reach_; }
  std::size_t index(const Offset& d) const {
    return static_cast<std::size_t>(d[0] + reach_[0]) +
           stride_[1] * static_cast<std::size_t>(d[1] + reach_[1]) +
           stride_[2] * static_cast<std::size_t>(d[2] + reach_[2]);
  }
  double value(const Offset& d) const { return value_[index(d)]; }
  double error(const Offset& d) const { return error_[index(d)]; }
  double value_at(std::size_t i) const { return value_[i]; }
  double error_at(std::size_t i) const { return error_[i]; }
  std::size_t size() const noexcept { return value_.size(); }
  const std::array<std::size_t, kMaxDim>& stride() const noexcept { return stride_; }

 private:
  Offset reach_{0, 0, 0};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  std::vector<double> value_;
  std::vector<double> error_;
};

/// Memoized weights for one (n, s, h). Entries are keyed by the sorted
/// absolute offset, which the weight depends on only. Concurrent lookups
/// are safe; a racing computation of the same key yields the same value.
class WeightTable {
 public:
  WeightTable(int dim, double h, FractionalOrder s, WeightOptions options = {});

  int dim() const noexcept { return dim_; }
  double h() const noexcept { return h_; }
  FractionalOrder order() const noexcept { return s_; }
  const WeightOptions& options() const noexcept { return options_; }

  WeightEntry at(const Offset& offset) const;
  DenseWeights dense(const Offset& reach, int threads = 1) const;

  std::size_t cached_entries() const;

 private:
  int dim_;
  double h_;
  FractionalOrder s_;
  WeightOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<Offset, WeightEntry> cache_;
};

/// Builds a table for an isotropic grid; throws invalid_argument otherwise.
WeightTable make_weight_table(const Grid& grid, FractionalOrder s, const WeightOptions& options = {});

}  // namespace fracperim
