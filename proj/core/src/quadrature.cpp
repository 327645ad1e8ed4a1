#include "fracperim/quadrature.hpp"

#include <map>
#include <mutex>
#include <numbers>

namespace fracperim::quad {

namespace {

GaussRule build_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// One G7/K15 panel; returns the Kronrod value and |K - G|.
Estimate gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(c);
  double k = kWgk[7] * fc;
  double g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(c - dx) + f(c + dx);
    k += kWgk[j] * pair;
    if (j % 2 == 1) g += kWg[j / 2] * pair;
  }
  return {k * half, std::fabs((k - g) * half)};
}

}  // namespace

const GaussRule& gauss_legendre(int points) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, build_rule(points)).first;
  return it->second;
}

Estimate integrate_gk15(const std::function<double(double)>& f, double a, double b, double rel_tol,
                        double abs_tol, int max_depth) {
  struct Panel {
    double a, b;
    int depth;
  };
  const Estimate whole = gk15(f, a, b);
  const double scale = std::fabs(whole.value);
  std::vector<Panel> stack{{a, b, 0}};
  Estimate out;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const Estimate e = gk15(f, p.a, p.b);
    const double share = (p.b - p.a) / (b - a);
    if (e.abs_error <= std::max(abs_tol, rel_tol * scale) * share) {
      out.value += e.value;
      out.abs_error += e.abs_error;
      continue;
    }
    if (p.depth + 1 > max_depth)
      throw Error(ErrorKind::non_convergence, "Gauss-Kronrod bisection exceeded the depth limit");
    const double m = 0.5 * (p.a + p.b);
    stack.push_back({m, p.b, p.depth + 1});
    stack.push_back({p.a, m, p.depth + 1});
  }
  return out;
}

}  // namespace fracperim::quad
