#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace fracperim {

inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using Index = std::array<int, kMaxDim>;

/// Open axis-aligned box (lo_1, hi_1) x ... x (lo_n, hi_n), 1 <= n <= 3.
/// Coordinates past `dim()` are unused and kept at zero.
class Domain {
 public:
  Domain(int dim, std::span<const double> lo, std::span<const double> hi);

  /// Q = (-1/2, 1/2)^n.
  static Domain unit_cube(int dim);
  /// Q_a: |x_i| <= 1/2 for i < n, |x_n| <= a.
  static Domain slab(int dim, double half_height);

  int dim() const noexcept { return dim_; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double extent(int axis) const { return hi_[axis] - lo_[axis]; }
  double volume() const;

  Domain scaled(double factor) const;
  Domain expanded(double margin) const;
  Domain translated(const Point& shift) const;

  bool contains(const Point& x) const;
  /// d(x, complement) for x inside the box; negative outside.
  double distance_to_boundary(const Point& x) const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  int dim_;
  Point lo_{};
  Point hi_{};
};

/// Uniform cell decomposition of a Domain, surrounded by `padding` layers of
/// exterior cells on every side. Cell multi-indices are padded coordinates:
/// index 0 is the outermost padding cell. Linear order is axis 0 fastest.
class Grid {
 public:
  Grid(Domain domain, std::span<const int> cells, int padding = 0);

  static Grid uniform(const Domain& domain, int cells_per_axis, int padding = 0);

  const Domain& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.dim(); }
  int cells(int axis) const { return cells_[axis]; }
  int padding() const noexcept { return padding_; }
  double h(int axis) const { return h_[axis]; }
  /// Padded cell count along an axis (1 for unused axes).
  int extent(int axis) const { return extent_[axis]; }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const;
  bool isotropic() const;

  std::size_t ravel(const Index& idx) const {
    return static_cast<std::size_t>(idx[0]) +
           static_cast<std::size_t>(extent_[0]) *
               (static_cast<std::size_t>(idx[1]) +
                static_cast<std::size_t>(extent_[1]) * static_cast<std::size_t>(idx[2]));
  }
  Index unravel(std::size_t linear) const;

  /// Lower coordinate of cell `k` (padded index) along an axis.
  double cell_lo(int axis, int k) const;
  Point center(const Index& idx) const;
  /// True when the cell is one of the Omega cells (not padding).
  bool in_domain(const Index& idx) const;

  Grid scaled(double factor) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Domain domain_;
  Index cells_{1, 1, 1};
  int padding_ = 0;
  Point h_{1.0, 1.0, 1.0};
  Index extent_{1, 1, 1};
  std::size_t size_ = 1;
};

/// Half-open range of padded cell indices [lo, hi) per axis.
struct CellRange {
  Index lo{0, 0, 0};
  Index hi{1, 1, 1};

  bool contains(const Index& idx) const {
    for (int a = 0; a < kMaxDim; ++a)
      if (idx[a] < lo[a] || idx[a] >= hi[a]) return false;
    return true;
  }
  std::size_t count() const;
  friend bool operator==(const CellRange&, const CellRange&) = default;
};

/// Cells of `grid` that tile `box`. Throws misaligned_domain when a face of
/// the box does not fall on a cell face of the padded grid.
CellRange aligned_cells(const Grid& grid, const Domain& box);

/// Whole padded grid as a range.
CellRange all_cells(const Grid& grid);

/// Calls f(idx, linear) for every cell of `range` in linear order.
template <class F>
void for_each_cell(const Grid& grid, const CellRange& range, F&& f) {
  Index idx;
  for (idx[2] = range.lo[2]; idx[2] < range.hi[2]; ++idx[2])
    for (idx[1] = range.lo[1]; idx[1] < range.hi[1]; ++idx[1])
      for (idx[0] = range.lo[0]; idx[0] < range.hi[0]; ++idx[0]) f(idx, grid.ravel(idx));
}

struct Box {
  Point lo{};
  Point hi{};
  friend bool operator==(const Box&, const Box&) = default;
};

/// Closed-form test shapes. Membership is total: every point is in or out.
/// Points exactly on the boundary belong to a `below` halfspace and to no
/// other primitive.
class AnalyticSet {
 public:
  enum class Side { below, above };

  struct Halfspace {
    int axis = 0;
    double offset = 0.0;
    Side side = Side::below;  // below: x_axis <= offset, above: x_axis > offset
  };
  struct Ball {
    Point center{};
    double radius = 0.0;
  };
  struct BoxUnion {
    std::vector<Box> boxes;
  };
  struct Complement {
    std::shared_ptr<const AnalyticSet> inner;
  };
  struct Empty {};
  struct Full {};

  using Variant = std::variant<Halfspace, Ball, BoxUnion, Complement, Empty, Full>;

  AnalyticSet() : shape_(Empty{}) {}
  explicit AnalyticSet(Variant v) : shape_(std::move(v)) {}

  static AnalyticSet empty() { return AnalyticSet(Empty{}); }
  static AnalyticSet full() { return AnalyticSet(Full{}); }
  static AnalyticSet halfspace(int axis, double offset, Side side = Side::below);
  /// H = {x : x_n <= 0}.
  static AnalyticSet lower_halfspace(int dim);
  static AnalyticSet ball(const Point& center, double radius);
  static AnalyticSet box_union(std::vector<Box> boxes);
  static AnalyticSet complement_of(AnalyticSet inner);

  const Variant& shape() const noexcept { return shape_; }

  bool contains(const Point& x, int dim) const;
  AnalyticSet complement() const { return complement_of(*this); }
  AnalyticSet scaled(double factor) const;
  AnalyticSet translated(const Point& shift) const;

  /// Whether the set may contain points outside `box` (conservative: true
  /// whenever that cannot be ruled out analytically).
  bool escapes(const Domain& box) const;
  /// Same question for the complement of the set.
  bool complement_escapes(const Domain& box) const;

 private:
  Variant shape_;
};

/// chi_E on a padded grid plus the analytic description of E past the padding.
class IndicatorField {
 public:
  IndicatorField(Grid grid, std::vector<std::uint8_t> inside, AnalyticSet exterior);

  const Grid& grid() const noexcept { return grid_; }
  const AnalyticSet& exterior() const noexcept { return exterior_; }
  std::span<const std::uint8_t> bits() const noexcept { return inside_; }
  bool inside(std::size_t linear) const { return inside_[linear] != 0; }
  bool inside(const Index& idx) const { return inside_[grid_.ravel(idx)] != 0; }
  void set(std::size_t linear, bool value) { inside_[linear] = value ? 1 : 0; }
  void flip(std::size_t linear) { inside_[linear] ^= 1; }
  std::size_t count() const;

  /// Same bits, complementary exterior description.
  IndicatorField complement() const;

  friend bool operator==(const IndicatorField& a, const IndicatorField& b) {
    return a.grid_ == b.grid_ && a.inside_ == b.inside_;
  }

 private:
  Grid grid_;
  std::vector<std::uint8_t> inside_;
  AnalyticSet exterior_;
};

/// Piecewise-constant u: cells -> [0, 1].
class DensityField {
 public:
  DensityField(Grid grid, std::vector<double> values);

  static DensityField indicator(const IndicatorField& field);
  static DensityField constant(const Grid& grid, double value);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t linear) const { return values_[linear]; }
  double at(const Index& idx) const { return values_[grid_.ravel(idx)]; }

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// A cell is inside iff its center is in the shape.
IndicatorField rasterize(const AnalyticSet& shape, const Grid& grid);

/// H^{n-1}(boundary of E inside the open box). Supports halfspaces, balls
/// contained in or disjoint from the box, unions of axis-aligned boxes, and
/// complements of these.
double exact_perimeter(const AnalyticSet& shape, const Domain& domain);

/// omega_k = pi^{k/2} / Gamma(k/2 + 1), omega_0 = 1.
double unit_ball_volume(int k);

}  // namespace fracperim
