#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracperim::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule (Newton iteration on P_n).
const GaussRule& gauss_legendre(int points);

struct Estimate {
  double value = 0.0;
  double abs_error = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Intervals are bisected until the
/// Kronrod-Gauss difference is below max(abs_tol, rel_tol * |I|) pro rata.
/// Throws non_convergence when more than `max_depth` bisections are needed.
Estimate integrate_gk15(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, double abs_tol = 0.0, int max_depth = 40);

/// Adaptive tensor Gauss-Legendre cubature over an axis-aligned box in
/// `dim` <= 3 dimensions. A box is accepted when the sum over its 2^dim
/// dyadic children agrees with the parent estimate to within the box's share
/// (by volume) of rel_tol * |I|; the reported error is the sum of those
/// differences. Depth beyond `max_depth` throws non_convergence.
template <class F>
Estimate adaptive_cubature(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                           F&& f, double rel_tol, int order = 8, int max_depth = 40);

}  // namespace fracperim::quad

#include "fracperim/error.hpp"

namespace fracperim::quad {

namespace detail {

template <class F>
double tensor_rule(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi, F& f,
                   const GaussRule& rule) {
  const std::size_t q = rule.nodes.size();
  std::array<double, 3> half{}, mid{};
  for (int a = 0; a < dim; ++a) {
    half[a] = 0.5 * (hi[a] - lo[a]);
    mid[a] = 0.5 * (hi[a] + lo[a]);
  }
  const std::size_t q1 = dim > 1 ? q : 1;
  const std::size_t q2 = dim > 2 ? q : 1;
  double total = 0.0;
  std::array<double, 3> x{};
  for (std::size_t k = 0; k < q2; ++k) {
    double wk = 1.0;
    if (dim > 2) {
      x[2] = mid[2] + half[2] * rule.nodes[k];
      wk = rule.weights[k];
    }
    for (std::size_t j = 0; j < q1; ++j) {
      double wj = wk;
      if (dim > 1) {
        x[1] = mid[1] + half[1] * rule.nodes[j];
        wj *= rule.weights[j];
      }
      double row = 0.0;
      for (std::size_t i = 0; i < q; ++i) {
        x[0] = mid[0] + half[0] * rule.nodes[i];
        row += rule.weights[i] * f(x);
      }
      total += wj * row;
    }
  }
  double jac = 1.0;
  for (int a = 0; a < dim; ++a) jac *= half[a];
  return total * jac;
}

}  // namespace detail

template <class F>
Estimate adaptive_cubature(int dim, const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                           F&& f, double rel_tol, int order, int max_depth) {
  const GaussRule& rule = gauss_legendre(order);
  struct Cell {
    std::array<double, 3> lo, hi;
    double estimate;
    int depth;
  };
  double total_volume = 1.0;
  for (int a = 0; a < dim; ++a) total_volume *= hi[a] - lo[a];

  const double root = detail::tensor_rule(dim, lo, hi, f, rule);
  std::vector<Cell> stack{{lo, hi, root, 0}};
  // Tolerances are set against the first refined estimate of the whole box.
  double scale = std::fabs(root);
  Estimate out;
  const int children = 1 << dim;
  bool first = true;
  while (!stack.empty()) {
    Cell c = stack.back();
    stack.pop_back();
    std::array<Cell, 8> kids;
    double sum = 0.0;
    for (int m = 0; m < children; ++m) {
      Cell& k = kids[m];
      k.depth = c.depth + 1;
      k.lo = c.lo;
      k.hi = c.hi;
      for (int a = 0; a < dim; ++a) {
        const double mid = 0.5 * (c.lo[a] + c.hi[a]);
        if (m & (1 << a)) {
          k.lo[a] = mid;
        } else {
          k.hi[a] = mid;
        }
      }
      k.estimate = detail::tensor_rule(dim, k.lo, k.hi, f, rule);
      sum += k.estimate;
    }
    if (first) {
      scale = std::max(std::fabs(sum), std::fabs(root));
      first = false;
    }
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) vol *= c.hi[a] - c.lo[a];
    const double diff = std::fabs(sum - c.estimate);
    const double allowed = rel_tol * scale * (vol / total_volume);
    if (diff <= allowed || diff <= 1e-15 * std::fabs(sum)) {
      out.value += sum;
      out.abs_error += diff;
      continue;
    }
    if (c.depth + 1 > max_depth)
      throw Error(ErrorKind::non_convergence, "cubature subdivision exceeded the depth limit");
    for (int m = 0; m < children; ++m) stack.push_back(kids[m]);
  }
  return out;
}

}  // namespace fracperim::quad
