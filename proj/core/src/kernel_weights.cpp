#include "fracperim/kernel_weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fracperim/error.hpp"
#include "fracperim/parallel.hpp"
#include "fracperim/quadrature.hpp"

namespace fracperim {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// G(x + len) - G(x) for G(r) = r^{1-s}, without cancellation for x >> len.
double antiderivative_step(double x, double len, double one_minus_s) {
  if (x == 0.0) return std::pow(len, one_minus_s);
  return std::pow(x, one_minus_s) * std::expm1(one_minus_s * std::log1p(len / x));
}

constexpr int kFaceOrder = 10;
constexpr int kBoxOrder = 8;

// Weight of the unit-cell pair at `offset` (h = 1) by singularity-aware
// cubature. The pair integral equals the integral over u = x - y of the tent
// weight prod_i (1 - |u_i - offset_i|) against |u|^{-(n+s)}. Splitting the
// support at the tent kinks gives 2^n unit boxes with a multilinear weight;
// a box either has the origin as a corner (touching cells) or stays a unit
// distance away from it.
WeightEntry near_unit_weight(const Offset& offset, int n, double s, const WeightOptions& opt) {
  const double p = n + s;
  WeightEntry out;
  out.offset = offset;
  for (int sub = 0; sub < (1 << n); ++sub) {
    std::array<double, 3> lo{}, hi{}, alpha{}, beta{};
    bool corner = true;
    for (int i = 0; i < n; ++i) {
      const double d = offset[i];
      if (sub & (1 << i)) {
        lo[i] = d;
        hi[i] = d + 1.0;
        alpha[i] = 1.0 + d;
        beta[i] = -1.0;
      } else {
        lo[i] = d - 1.0;
        hi[i] = d;
        alpha[i] = 1.0 - d;
        beta[i] = 1.0;
      }
      if (lo[i] != 0.0 && hi[i] != 0.0) corner = false;
    }

    if (!corner) {
      auto f = [&](const std::array<double, 3>& u) {
        double w = 1.0, r2 = 0.0;
        for (int i = 0; i < n; ++i) {
          w *= alpha[i] + beta[i] * u[i];
          r2 += u[i] * u[i];
        }
        return w * std::pow(r2, -0.5 * p);
      };
      const auto e = quad::adaptive_cubature(n, lo, hi, f, opt.rel_tol, kBoxOrder, opt.max_depth);
      out.value += e.value;
      out.abs_error += e.abs_error;
      continue;
    }

    // Reflect so the box is [0,1]^n with the origin at the shared corner.
    std::array<double, 3> b = beta;
    for (int i = 0; i < n; ++i)
      if (hi[i] == 0.0) b[i] = -beta[i];

    // Radial reduction: on the pyramid over face {u_k = 1}, u = t v with
    // du = t^{n-1} dt dv. The weight is a polynomial sum_m c_m(v) t^m with
    // c_0 = 0 (the tent vanishes where the cells touch), so the t-integral is
    // sum_m c_m(v) / (m - s) exactly.
    for (int k = 0; k < n; ++k) {
      std::array<int, 2> free_axes{};
      int nf = 0;
      for (int i = 0; i < n; ++i)
        if (i != k) free_axes[nf++] = i;
      auto g = [&](const std::array<double, 3>& w) {
        std::array<double, 3> v{};
        v[k] = 1.0;
        for (int j = 0; j < nf; ++j) v[free_axes[j]] = w[j];
        std::array<double, 4> c{1.0, 0.0, 0.0, 0.0};
        int deg = 0;
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) {
          // multiply by (alpha_i + b_i v_i t)
          const double a0 = alpha[i], a1 = b[i] * v[i];
          for (int m = deg + 1; m >= 1; --m) c[m] = c[m] * a0 + c[m - 1] * a1;
          c[0] *= a0;
          ++deg;
          r2 += v[i] * v[i];
        }
        double radial = 0.0;
        for (int m = 1; m <= deg; ++m) radial += c[m] / (m - s);
        return radial * std::pow(r2, -0.5 * p);
      };
      std::array<double, 3> flo{0.0, 0.0, 0.0}, fhi{1.0, 1.0, 1.0};
      const auto e = quad::adaptive_cubature(nf, flo, fhi, g, opt.rel_tol, kFaceOrder, opt.max_depth);
      out.value += e.value;
      out.abs_error += e.abs_error;
    }
  }
  return out;
}

// Midpoint value d^{-p} for a unit-cell pair at distance d. The tent weight
// is even, so the midpoint error is the Laplacian term plus a fourth-order
// remainder; directional k-th derivatives of |z|^{-p} are bounded by
// p (p+1) ... (p+k-1) |z|^{-p-k}.
WeightEntry far_unit_weight(const Offset& offset, int n, double s) {
  const double p = n + s;
  double d2 = 0.0, near2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(offset[i]);
    d2 += a * a;
    const double g = std::max(0.0, a - 1.0);
    near2 += g * g;
  }
  const double d = std::sqrt(d2);
  const double dmin = std::sqrt(near2);
  WeightEntry e;
  e.offset = offset;
  e.value = std::pow(d, -p);
  const double second = p * (p + 2.0 - n) * std::pow(d, -p - 2.0) / 12.0;
  const double fourth_moment = n / 15.0 + n * (n - 1.0) / 36.0;
  const double remainder =
      p * (p + 1.0) * (p + 2.0) * (p + 3.0) / 24.0 * std::pow(dmin, -p - 4.0) * fourth_moment;
  e.abs_error = std::fabs(second) + remainder;
  return e;
}

Offset canonical(const Offset& o, int n) {
  Offset c{0, 0, 0};
  for (int i = 0; i < n; ++i) c[i] = std::abs(o[i]);
  std::sort(c.begin(), c.begin() + n, std::greater<>());
  return c;
}

void check_offset(const Offset& offset, int dim) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::invalid_argument, "dimension must be 1..3");
  bool zero = true;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i >= dim && offset[i] != 0)
      throw Error(ErrorKind::invalid_argument, "offset has components past the dimension");
    if (offset[i] != 0) zero = false;
  }
  if (zero) throw Error(ErrorKind::zero_offset, "a cell does not interact with itself");
}

WeightEntry unit_weight(const Offset& offset, int dim, double s, const WeightOptions& opt) {
  if (dim == 1) {
    const double k = std::abs(offset[0]);
    WeightEntry e = pair_weight_1d_entry(0.0, 1.0, k, k + 1.0, FractionalOrder(s));
    e.offset = offset;
    return e;
  }
  // Evaluate on the representative of the symmetry orbit so that all
  // reflections and axis permutations give bitwise equal weights.
  const Offset key = canonical(offset, dim);
  WeightEntry e = key[0] > opt.near_cutoff ? far_unit_weight(key, dim, s) : near_unit_weight(key, dim, s, opt);
  e.offset = offset;
  return e;
}

void check_options(const WeightOptions& opt) {
  if (!(opt.rel_tol > 0.0)) throw Error(ErrorKind::invalid_argument, "rel_tol must be positive");
  if (opt.near_cutoff < 1) throw Error(ErrorKind::invalid_argument, "near_cutoff must be >= 1");
  if (opt.max_depth < 1) throw Error(ErrorKind::invalid_argument, "max_depth must be >= 1");
}

}  // namespace

FractionalOrder::FractionalOrder(double s) : s_(s) {
  if (!(s > 0.0 && s < 1.0))
    throw Error(ErrorKind::invalid_argument, "fractional order must satisfy 0 < s < 1");
}

WeightEntry pair_weight_1d_entry(double a, double b, double c, double d, FractionalOrder order) {
  if (!(a < b) || !(c < d)) throw Error(ErrorKind::invalid_argument, "intervals must be non-degenerate");
  if (b > c) throw Error(ErrorKind::overlap, "first interval must lie left of the second");
  const double s = order.value();
  const double oms = 1.0 - s;
  const double gap = c - b;
  const double near = antiderivative_step(gap, d - c, oms);
  const double far = antiderivative_step(gap + (b - a), d - c, oms);
  const double denom = s * oms;
  WeightEntry e;
  e.value = (near - far) / denom;
  e.abs_error = 8.0 * kEps * (std::fabs(near) + std::fabs(far)) / denom;
  return e;
}

double pair_weight_1d(double a, double b, double c, double d, FractionalOrder s) {
  return pair_weight_1d_entry(a, b, c, d, s).value;
}

WeightEntry cell_pair_weight(const Offset& offset, int dim, double h, FractionalOrder s,
                             const WeightOptions& options) {
  check_offset(offset, dim);
  check_options(options);
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "cell size must be positive");
  WeightEntry e = unit_weight(offset, dim, s.value(), options);
  const double scale = std::pow(h, dim - s.value());
  e.value *= scale;
  e.abs_error *= scale;
  return e;
}

double complement_tail(double radius, int dim, FractionalOrder s) {
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "tail radius must be positive");
  return dim * unit_ball_volume(dim) / (s.value() * std::pow(radius, s.value()));
}

// ---------------------------------------------------------------- tables

DenseWeights::DenseWeights(const Offset& reach, std::vector<double> value, std::vector<double> error)
    : reach_(reach), value_(std::move(value)), error_(std::move(error)) {
  stride_[1] = static_cast<std::size_t>(2 * reach_[0] + 1);
  stride_[2] = stride_[1] * static_cast<std::size_t>(2 * reach_[1] + 1);
}

WeightTable::WeightTable(int dim, double h, FractionalOrder s, WeightOptions options)
    : dim_(dim), h_(h), s_(s), options_(options) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorKind::invalid_argument, "dimension must be 1..3");
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "cell size must be positive");
  check_options(options_);
}

WeightEntry WeightTable::at(const Offset& offset) const {
  check_offset(offset, dim_);
  const double scale = std::pow(h_, dim_ - s_.value());
  int inf_norm = 0;
  for (int i = 0; i < dim_; ++i) inf_norm = std::max(inf_norm, std::abs(offset[i]));

  WeightEntry unit;
  if (inf_norm > options_.near_cutoff) {
    unit = unit_weight(offset, dim_, s_.value(), options_);
  } else {
    const Offset key = canonical(offset, dim_);
    bool found = false;
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) {
        unit = it->second;
        found = true;
      }
    }
    if (!found) {
      unit = unit_weight(key, dim_, s_.value(), options_);
      std::lock_guard lock(mutex_);
      cache_.emplace(key, unit);
    }
  }
  unit.offset = offset;
  unit.value *= scale;
  unit.abs_error *= scale;
  return unit;
}

DenseWeights WeightTable::dense(const Offset& reach, int threads) const {
  Offset r{0, 0, 0};
  for (int i = 0; i < dim_; ++i) {
    if (reach[i] < 0) throw Error(ErrorKind::invalid_argument, "reach must be non-negative");
    r[i] = reach[i];
  }
  const std::size_t nx = 2 * r[0] + 1, ny = 2 * r[1] + 1, nz = 2 * r[2] + 1;
  std::vector<double> value(nx * ny * nz, 0.0), error(nx * ny * nz, 0.0);
  // Warm the cache for near offsets first so workers only read it.
  for (int z = 0; z <= std::min(r[2], options_.near_cutoff); ++z)
    for (int y = 0; y <= std::min(r[1], options_.near_cutoff); ++y)
      for (int x = 0; x <= std::min(r[0], options_.near_cutoff); ++x)
        if (x || y || z) at(Offset{x, y, z});
  parallel_chunks(ny * nz, threads, [&](std::size_t line) {
    const int y = static_cast<int>(line % ny) - r[1];
    const int z = static_cast<int>(line / ny) - r[2];
    for (int x = -r[0]; x <= r[0]; ++x) {
      if (x == 0 && y == 0 && z == 0) continue;
      const WeightEntry e = at(Offset{x, y, z});
      const std::size_t i = line * nx + static_cast<std::size_t>(x + r[0]);
      value[i] = e.value;
      error[i] = e.abs_error;
    }
  });
  return DenseWeights(r, std::move(value), std::move(error));
}

std::size_t WeightTable::cached_entries() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

WeightTable make_weight_table(const Grid& grid, FractionalOrder s, const WeightOptions& options) {
  if (!grid.isotropic())
    throw Error(ErrorKind::invalid_argument, "interaction weights require an isotropic grid");
  return WeightTable(grid.dim(), grid.h(0), s, options);
}

}  // namespace fracperim
