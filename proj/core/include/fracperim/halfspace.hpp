#pragma once

#include "fracperim/kernel_weights.hpp"

namespace fracperim {

struct HalfspaceValue {
  int dim = 1;
  double s = 0.0;
  double a = 0.0;  // half-height of the slab Q_a
  double value = 0.0;
  bool is_exact = false;
};

/// J^1_s(H, Q_a) in one dimension: a^{1-s} (2 - 2^{1-s}) / (s (1 - s)).
HalfspaceValue j1_halfspace_1d(double a, FractionalOrder s);

/// int_0^inf rho^{n-2} / (1 + rho^2)^{(n+s)/2} d rho for n >= 2 and s in (0, 1].
double rho_integral(int dim, double s);

/// omega_{n-1}, the limit of (1 - s) J^1_s(H, Q) as s -> 1.
double halfspace_limit_constant(int dim);

/// Upper bound for J^1_s(H, Q_a) in n >= 2 dimensions obtained by letting the
/// transverse integral run over all of R^{n-1}:
/// j1_halfspace_1d(a, s) * (n - 1) omega_{n-1} * rho_integral(n, s).
HalfspaceValue halfspace_product_bound(int dim, double a, FractionalOrder s);

}  // namespace fracperim
