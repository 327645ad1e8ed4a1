#include "fracperim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "fracperim/error.hpp"

namespace fracperim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::unsupported_shape: return "unsupported shape";
    case ErrorKind::misaligned_domain: return "misaligned domain";
    case ErrorKind::padding_too_small: return "padding too small";
    case ErrorKind::overlap: return "overlapping intervals";
    case ErrorKind::zero_offset: return "zero offset";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::budget_exceeded: return "budget exceeded";
    case ErrorKind::straddling_set: return "set straddles E and its complement";
    case ErrorKind::asymmetric_grid: return "asymmetric grid";
    case ErrorKind::not_grid_aligned: return "shift not grid aligned";
    case ErrorKind::out_of_range: return "out of range";
    case ErrorKind::config: return "configuration error";
  }
  return "unknown";
}

namespace {

void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

// Snaps x to the nearest integer when it is within rounding noise of one.
bool near_integer(double x, long& out) {
  const double r = std::round(x);
  if (std::fabs(x - r) > 1e-9 * std::max(1.0, std::fabs(x))) return false;
  out = static_cast<long>(r);
  return true;
}

}  // namespace

// ---------------------------------------------------------------- Domain

Domain::Domain(int dim, std::span<const double> lo, std::span<const double> hi) : dim_(dim) {
  require(dim >= 1 && dim <= kMaxDim, ErrorKind::invalid_argument,
          "domain dimension must be 1, 2 or 3");
  require(lo.size() == static_cast<std::size_t>(dim) && hi.size() == static_cast<std::size_t>(dim),
          ErrorKind::invalid_argument, "domain corner coordinates must match the dimension");
  for (int a = 0; a < dim; ++a) {
    require(std::isfinite(lo[a]) && std::isfinite(hi[a]) && lo[a] < hi[a],
            ErrorKind::invalid_argument, "domain requires lo < hi on every axis");
    lo_[a] = lo[a];
    hi_[a] = hi[a];
  }
}

Domain Domain::unit_cube(int dim) { return slab(dim, 0.5); }

Domain Domain::slab(int dim, double half_height) {
  require(half_height > 0.0, ErrorKind::invalid_argument, "slab half height must be positive");
  std::vector<double> lo(dim, -0.5), hi(dim, 0.5);
  lo[dim - 1] = -half_height;
  hi[dim - 1] = half_height;
  return Domain(dim, lo, hi);
}

double Domain::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= extent(a);
  return v;
}

Domain Domain::scaled(double factor) const {
  require(factor > 0.0, ErrorKind::invalid_argument, "scale factor must be positive");
  Domain d = *this;
  for (int a = 0; a < dim_; ++a) {
    d.lo_[a] *= factor;
    d.hi_[a] *= factor;
  }
  return d;
}

Domain Domain::expanded(double margin) const {
  std::vector<double> lo(dim_), hi(dim_);
  for (int a = 0; a < dim_; ++a) {
    lo[a] = lo_[a] - margin;
    hi[a] = hi_[a] + margin;
  }
  return Domain(dim_, lo, hi);
}

Domain Domain::translated(const Point& shift) const {
  Domain d = *this;
  for (int a = 0; a < dim_; ++a) {
    d.lo_[a] += shift[a];
    d.hi_[a] += shift[a];
  }
  return d;
}

bool Domain::contains(const Point& x) const {
  for (int a = 0; a < dim_; ++a)
    if (!(x[a] > lo_[a] && x[a] < hi_[a])) return false;
  return true;
}

double Domain::distance_to_boundary(const Point& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim_; ++a) d = std::min({d, x[a] - lo_[a], hi_[a] - x[a]});
  return d;
}

// ---------------------------------------------------------------- Grid

Grid::Grid(Domain domain, std::span<const int> cells, int padding)
    : domain_(std::move(domain)), padding_(padding) {
  const int n = domain_.dim();
  require(cells.size() == static_cast<std::size_t>(n), ErrorKind::invalid_argument,
          "cells_per_axis must have one entry per dimension");
  require(padding >= 0, ErrorKind::invalid_argument, "padding must be non-negative");
  size_ = 1;
  for (int a = 0; a < n; ++a) {
    require(cells[a] > 0, ErrorKind::invalid_argument, "cells_per_axis must be positive");
    cells_[a] = cells[a];
    h_[a] = domain_.extent(a) / cells[a];
    extent_[a] = cells[a] + 2 * padding;
    size_ *= static_cast<std::size_t>(extent_[a]);
  }
}

Grid Grid::uniform(const Domain& domain, int cells_per_axis, int padding) {
  std::vector<int> cells(domain.dim(), cells_per_axis);
  return Grid(domain, cells, padding);
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= h_[a];
  return v;
}

bool Grid::isotropic() const {
  for (int a = 1; a < dim(); ++a)
    if (std::fabs(h_[a] - h_[0]) > 1e-12 * h_[0]) return false;
  return true;
}

Index Grid::unravel(std::size_t linear) const {
  Index idx{0, 0, 0};
  idx[0] = static_cast<int>(linear % extent_[0]);
  linear /= extent_[0];
  idx[1] = static_cast<int>(linear % extent_[1]);
  idx[2] = static_cast<int>(linear / extent_[1]);
  return idx;
}

double Grid::cell_lo(int axis, int k) const {
  return domain_.lo(axis) + (k - padding_) * h_[axis];
}

Point Grid::center(const Index& idx) const {
  Point p{};
  for (int a = 0; a < dim(); ++a) p[a] = domain_.lo(a) + (idx[a] - padding_ + 0.5) * h_[a];
  return p;
}

bool Grid::in_domain(const Index& idx) const {
  for (int a = 0; a < dim(); ++a)
    if (idx[a] < padding_ || idx[a] >= padding_ + cells_[a]) return false;
  return true;
}

Grid Grid::scaled(double factor) const {
  std::vector<int> cells(cells_.begin(), cells_.begin() + dim());
  return Grid(domain_.scaled(factor), cells, padding_);
}

std::size_t CellRange::count() const {
  std::size_t c = 1;
  for (int a = 0; a < kMaxDim; ++a) c *= static_cast<std::size_t>(std::max(0, hi[a] - lo[a]));
  return c;
}

CellRange aligned_cells(const Grid& grid, const Domain& box) {
  require(box.dim() == grid.dim(), ErrorKind::misaligned_domain,
          "domain dimension differs from grid dimension");
  CellRange r;
  for (int a = 0; a < grid.dim(); ++a) {
    long klo = 0, khi = 0;
    const double flo = (box.lo(a) - grid.domain().lo(a)) / grid.h(a) + grid.padding();
    const double fhi = (box.hi(a) - grid.domain().lo(a)) / grid.h(a) + grid.padding();
    if (!near_integer(flo, klo) || !near_integer(fhi, khi)) {
      std::ostringstream msg;
      msg << "domain face on axis " << a << " does not lie on a cell face";
      throw Error(ErrorKind::misaligned_domain, msg.str());
    }
    require(klo >= 0 && khi <= grid.extent(a) && klo < khi, ErrorKind::misaligned_domain,
            "domain extends past the padded grid");
    r.lo[a] = static_cast<int>(klo);
    r.hi[a] = static_cast<int>(khi);
  }
  return r;
}

CellRange all_cells(const Grid& grid) {
  CellRange r;
  for (int a = 0; a < kMaxDim; ++a) r.hi[a] = grid.extent(a);
  return r;
}

// ---------------------------------------------------------------- AnalyticSet

AnalyticSet AnalyticSet::halfspace(int axis, double offset, Side side) {
  require(axis >= 0 && axis < kMaxDim, ErrorKind::invalid_argument, "halfspace axis out of range");
  return AnalyticSet(Halfspace{axis, offset, side});
}

AnalyticSet AnalyticSet::lower_halfspace(int dim) { return halfspace(dim - 1, 0.0, Side::below); }

AnalyticSet AnalyticSet::ball(const Point& center, double radius) {
  require(radius > 0.0, ErrorKind::invalid_argument, "ball radius must be positive");
  return AnalyticSet(Ball{center, radius});
}

AnalyticSet AnalyticSet::box_union(std::vector<Box> boxes) {
  return AnalyticSet(BoxUnion{std::move(boxes)});
}

AnalyticSet AnalyticSet::complement_of(AnalyticSet inner) {
  return AnalyticSet(Complement{std::make_shared<const AnalyticSet>(std::move(inner))});
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool box_strictly_contains(const Box& b, const Point& x, int dim) {
  for (int a = 0; a < dim; ++a)
    if (!(x[a] > b.lo[a] && x[a] < b.hi[a])) return false;
  return true;
}

bool box_within(const Box& b, const Domain& d) {
  for (int a = 0; a < d.dim(); ++a)
    if (b.lo[a] < d.lo(a) || b.hi[a] > d.hi(a)) return false;
  return true;
}

}  // namespace

bool AnalyticSet::contains(const Point& x, int dim) const {
  return std::visit(
      overloaded{
          [&](const Halfspace& h) {
            return h.side == Side::below ? x[h.axis] <= h.offset : x[h.axis] > h.offset;
          },
          [&](const Ball& b) {
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) r2 += (x[a] - b.center[a]) * (x[a] - b.center[a]);
            return r2 < b.radius * b.radius;
          },
          [&](const BoxUnion& u) {
            return std::any_of(u.boxes.begin(), u.boxes.end(),
                               [&](const Box& b) { return box_strictly_contains(b, x, dim); });
          },
          [&](const Complement& c) { return !c.inner->contains(x, dim); },
          [](const Empty&) { return false; },
          [](const Full&) { return true; },
      },
      shape_);
}

AnalyticSet AnalyticSet::scaled(double f) const {
  return std::visit(
      overloaded{
          [&](const Halfspace& h) { return AnalyticSet(Halfspace{h.axis, h.offset * f, h.side}); },
          [&](const Ball& b) {
            Ball out = b;
            for (auto& c : out.center) c *= f;
            out.radius *= f;
            return AnalyticSet(out);
          },
          [&](const BoxUnion& u) {
            BoxUnion out = u;
            for (auto& b : out.boxes)
              for (int a = 0; a < kMaxDim; ++a) {
                b.lo[a] *= f;
                b.hi[a] *= f;
              }
            return AnalyticSet(out);
          },
          [&](const Complement& c) { return complement_of(c.inner->scaled(f)); },
          [&](const Empty&) { return *this; },
          [&](const Full&) { return *this; },
      },
      shape_);
}

AnalyticSet AnalyticSet::translated(const Point& t) const {
  return std::visit(
      overloaded{
          [&](const Halfspace& h) {
            return AnalyticSet(Halfspace{h.axis, h.offset + t[h.axis], h.side});
          },
          [&](const Ball& b) {
            Ball out = b;
            for (int a = 0; a < kMaxDim; ++a) out.center[a] += t[a];
            return AnalyticSet(out);
          },
          [&](const BoxUnion& u) {
            BoxUnion out = u;
            for (auto& b : out.boxes)
              for (int a = 0; a < kMaxDim; ++a) {
                b.lo[a] += t[a];
                b.hi[a] += t[a];
              }
            return AnalyticSet(out);
          },
          [&](const Complement& c) { return complement_of(c.inner->translated(t)); },
          [&](const Empty&) { return *this; },
          [&](const Full&) { return *this; },
      },
      shape_);
}

bool AnalyticSet::escapes(const Domain& box) const {
  return std::visit(
      overloaded{
          [](const Halfspace&) { return true; },
          [&](const Ball& b) {
            for (int a = 0; a < box.dim(); ++a)
              if (b.center[a] - b.radius < box.lo(a) || b.center[a] + b.radius > box.hi(a))
                return true;
            return false;
          },
          [&](const BoxUnion& u) {
            return std::any_of(u.boxes.begin(), u.boxes.end(),
                               [&](const Box& b) { return !box_within(b, box); });
          },
          [&](const Complement& c) { return c.inner->complement_escapes(box); },
          [](const Empty&) { return false; },
          [](const Full&) { return true; },
      },
      shape_);
}

bool AnalyticSet::complement_escapes(const Domain& box) const {
  return std::visit(overloaded{
                        [&](const Complement& c) { return c.inner->escapes(box); },
                        [](const Full&) { return false; },
                        [](const auto&) { return true; },
                    },
                    shape_);
}

// ---------------------------------------------------------------- fields

IndicatorField::IndicatorField(Grid grid, std::vector<std::uint8_t> inside, AnalyticSet exterior)
    : grid_(std::move(grid)), inside_(std::move(inside)), exterior_(std::move(exterior)) {
  require(inside_.size() == grid_.size(), ErrorKind::invalid_argument,
          "indicator bit count must equal the padded cell count");
  for (auto& b : inside_) b = b ? 1 : 0;
}

std::size_t IndicatorField::count() const {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), std::uint8_t{1}));
}

IndicatorField IndicatorField::complement() const {
  std::vector<std::uint8_t> bits(inside_.size());
  std::transform(inside_.begin(), inside_.end(), bits.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ^ 1); });
  return IndicatorField(grid_, std::move(bits), exterior_.complement());
}

DensityField::DensityField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorKind::invalid_argument,
          "density value count must equal the padded cell count");
  for (double v : values_)
    require(v >= 0.0 && v <= 1.0, ErrorKind::invalid_argument, "density values must lie in [0,1]");
}

DensityField DensityField::indicator(const IndicatorField& field) {
  std::vector<double> v(field.bits().begin(), field.bits().end());
  return DensityField(field.grid(), std::move(v));
}

DensityField DensityField::constant(const Grid& grid, double value) {
  return DensityField(grid, std::vector<double>(grid.size(), value));
}

IndicatorField rasterize(const AnalyticSet& shape, const Grid& grid) {
  std::vector<std::uint8_t> bits(grid.size());
  for_each_cell(grid, all_cells(grid), [&](const Index& idx, std::size_t lin) {
    bits[lin] = shape.contains(grid.center(idx), grid.dim()) ? 1 : 0;
  });
  return IndicatorField(grid, std::move(bits), shape);
}

// ---------------------------------------------------------------- perimeter

namespace {

// Shapes whose boundary is a union of axis-aligned faces.
bool collect_breakpoints(const AnalyticSet& s, std::array<std::vector<double>, kMaxDim>& cuts) {
  using AS = AnalyticSet;
  return std::visit(overloaded{
                        [&](const AS::Halfspace& h) {
                          cuts[h.axis].push_back(h.offset);
                          return true;
                        },
                        [&](const AS::BoxUnion& u) {
                          for (const auto& b : u.boxes)
                            for (int a = 0; a < kMaxDim; ++a) {
                              cuts[a].push_back(b.lo[a]);
                              cuts[a].push_back(b.hi[a]);
                            }
                          return true;
                        },
                        [&](const AS::Complement& c) { return collect_breakpoints(*c.inner, cuts); },
                        [](const AS::Empty&) { return true; },
                        [](const AS::Full&) { return true; },
                        [](const AS::Ball&) { return false; },
                    },
                    s.shape());
}

// Coordinate compression: the shape is constant on every elementary box
// between consecutive breakpoints, so the perimeter is the total area of
// interior faces separating elementary boxes with different membership.
double rectilinear_perimeter(const AnalyticSet& shape, const Domain& domain,
                             std::array<std::vector<double>, kMaxDim> cuts) {
  const int n = domain.dim();
  std::array<std::vector<double>, kMaxDim> edges;
  for (int a = 0; a < kMaxDim; ++a) {
    if (a >= n) {
      edges[a] = {0.0, 1.0};
      continue;
    }
    edges[a] = {domain.lo(a), domain.hi(a)};
    for (double c : cuts[a])
      if (c > domain.lo(a) && c < domain.hi(a)) edges[a].push_back(c);
    std::sort(edges[a].begin(), edges[a].end());
    edges[a].erase(std::unique(edges[a].begin(), edges[a].end()), edges[a].end());
  }
  const Index count{static_cast<int>(edges[0].size()) - 1, static_cast<int>(edges[1].size()) - 1,
                    static_cast<int>(edges[2].size()) - 1};
  auto member = [&](const Index& e) {
    Point c{};
    for (int a = 0; a < n; ++a) c[a] = 0.5 * (edges[a][e[a]] + edges[a][e[a] + 1]);
    return shape.contains(c, n);
  };
  double total = 0.0;
  Index e;
  for (e[2] = 0; e[2] < count[2]; ++e[2])
    for (e[1] = 0; e[1] < count[1]; ++e[1])
      for (e[0] = 0; e[0] < count[0]; ++e[0])
        for (int a = 0; a < n; ++a) {
          if (e[a] + 1 >= count[a]) continue;
          Index nb = e;
          nb[a] += 1;
          if (member(e) == member(nb)) continue;
          double area = 1.0;
          for (int b = 0; b < n; ++b)
            if (b != a) area *= edges[b][e[b] + 1] - edges[b][e[b]];
          total += area;
        }
  return total;
}

double ball_perimeter(const AnalyticSet::Ball& b, const Domain& domain) {
  const int n = domain.dim();
  if (n == 1) {
    double count = 0.0;
    for (double end : {b.center[0] - b.radius, b.center[0] + b.radius})
      if (end > domain.lo(0) && end < domain.hi(0)) count += 1.0;
    return count;
  }
  bool inside = true;
  double dist2 = 0.0;
  for (int a = 0; a < n; ++a) {
    if (b.center[a] - b.radius < domain.lo(a) || b.center[a] + b.radius > domain.hi(a))
      inside = false;
    const double gap = std::max({domain.lo(a) - b.center[a], 0.0, b.center[a] - domain.hi(a)});
    dist2 += gap * gap;
  }
  if (inside) return n * unit_ball_volume(n) * std::pow(b.radius, n - 1);
  if (dist2 >= b.radius * b.radius) return 0.0;
  throw Error(ErrorKind::unsupported_shape,
              "ball crossing the domain boundary has no closed-form relative perimeter");
}

}  // namespace

double exact_perimeter(const AnalyticSet& shape, const Domain& domain) {
  if (const auto* c = std::get_if<AnalyticSet::Complement>(&shape.shape())) {
    if (const auto* b = std::get_if<AnalyticSet::Ball>(&c->inner->shape()))
      return ball_perimeter(*b, domain);
  }
  if (const auto* b = std::get_if<AnalyticSet::Ball>(&shape.shape())) return ball_perimeter(*b, domain);
  std::array<std::vector<double>, kMaxDim> cuts;
  if (!collect_breakpoints(shape, cuts))
    throw Error(ErrorKind::unsupported_shape, "shape has no closed-form perimeter");
  return rectilinear_perimeter(shape, domain, std::move(cuts));
}

double unit_ball_volume(int k) {
  require(k >= 0, ErrorKind::invalid_argument, "unit ball dimension must be non-negative");
  if (k == 0) return 1.0;
  return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

}  // namespace fracperim
