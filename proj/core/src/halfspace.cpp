#include "fracperim/halfspace.hpp"

#include <cmath>

#include "fracperim/error.hpp"
#include "fracperim/geometry.hpp"
#include "fracperim/quadrature.hpp"

namespace fracperim {

HalfspaceValue j1_halfspace_1d(double a, FractionalOrder s) {
  if (!(a > 0)) throw Error(ErrorKind::invalid_argument, "slab half-height must be positive");
  const double t = s.value();
  const double value = std::pow(a, 1.0 - t) * (2.0 - std::exp2(1.0 - t)) / (t * (1.0 - t));
  return {1, t, a, value, true};
}

double rho_integral(int dim, double s) {
  if (dim < 2) throw Error(ErrorKind::invalid_argument, "rho integral needs n >= 2");
  if (!(s > 0 && s <= 1)) throw Error(ErrorKind::invalid_argument, "rho integral needs s in (0, 1]");
  if (s == 1.0) return 1.0 / (dim - 1);

  constexpr double cut = 4.0;
  const double alpha = 0.5 * (dim + s);
  auto f = [&](double r) { return std::pow(r, dim - 2) * std::pow(1.0 + r * r, -alpha); };
  const double body = quad::integrate_gk15(f, 0.0, cut, 1e-13, 1e-16, 40).value;

  // (1 + r^2)^{-alpha} = r^{-2 alpha} sum_k binom(-alpha, k) r^{-2k} for r > 1.
  double tail = 0.0;
  double coef = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double term = coef * std::pow(cut, -1.0 - s - 2.0 * k) / (1.0 + s + 2.0 * k);
    tail += term;
    if (std::fabs(term) < 1e-18 * std::fabs(tail)) break;
    coef *= (-alpha - k) / (k + 1.0);
  }
  return body + tail;
}

double halfspace_limit_constant(int dim) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "dimension must be at least 1");
  return unit_ball_volume(dim - 1);
}

HalfspaceValue halfspace_product_bound(int dim, double a, FractionalOrder s) {
  HalfspaceValue v = j1_halfspace_1d(a, s);
  v.dim = dim;
  if (dim == 1) return v;
  v.value *= (dim - 1) * unit_ball_volume(dim - 1) * rho_integral(dim, s.value());
  v.is_exact = false;
  return v;
}

}  // namespace fracperim
