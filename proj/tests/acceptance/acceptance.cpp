// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. With --known-failures 6,9 the exit status
// instead reports whether the failing set is exactly {6, 9}.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fracperim/error.hpp"
#include "fracperim/experiments.hpp"
#include "fracperim/functionals.hpp"
#include "fracperim/halfspace.hpp"
#include "fracperim/minimization.hpp"

using namespace fracperim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double closed_form_1d(double a, double s) {
  return std::pow(a, 1.0 - s) * (2.0 - std::pow(2.0, 1.0 - s)) / (s * (1.0 - s));
}

Outcome closed_form() {
  double worst = 0.0;
  for (double a : {0.25, 0.5, 1.0})
    for (double s : {0.3, 0.5, 0.7, 0.9}) {
      const Domain qa = Domain::slab(1, a);
      const IndicatorField e = rasterize(AnalyticSet::lower_halfspace(1), isotropic_grid(qa, 64));
      const double v = j1(e, qa, FractionalOrder(s)).value;
      worst = std::max(worst, std::fabs(v - closed_form_1d(a, s)) / closed_form_1d(a, s));
    }
  return {worst <= 1e-10, fmt("max relative error %.3e over 12 cases", worst)};
}

Outcome limit_1d() {
  double worst = 0.0;
  for (double a : {0.25, 0.5, 1.0}) {
    const Domain qa = Domain::slab(1, a);
    const IndicatorField e = rasterize(AnalyticSet::lower_halfspace(1), isotropic_grid(qa, 64));
    const double v = 0.001 * j1(e, qa, FractionalOrder(0.999)).value;
    worst = std::max(worst, std::fabs(v - 1.0));
  }
  return {worst <= 0.005, fmt("max |(1-s) j1 - 1| = %.3e at s = 0.999", worst)};
}

ExperimentConfig criterion3_config(int threads) {
  ExperimentConfig c;
  c.kind = ExperimentKind::converge;
  c.dim = 2;
  c.domain = Domain::unit_cube(2);
  c.shape = AnalyticSet::lower_halfspace(2);
  c.s_list = {0.9, 0.95, 0.99};
  c.resolutions = {256};
  c.include_j2 = false;
  c.threads = threads;
  return c;
}

Outcome limit_2d() {
  const std::vector<ConvergenceRow> rows = converge_sweep(criterion3_config(1));
  const ConvergenceRow& x = rows.back();
  const double gap = std::fabs(x.j1_scaled - 2.0) / 2.0;
  return {gap <= 0.02, fmt("extrapolated %.6f vs 2 (gap %.3f%%, bracket [%.6f, %.6f])", x.j1_scaled, 100 * gap,
                           x.bracket_lo, x.bracket_hi)};
}

Outcome scaling() {
  const FractionalOrder s(0.5);
  int cases = 0, bad = 0;
  for (int n : {1, 2}) {
    const Domain q = Domain::unit_cube(n);
    for (const AnalyticSet& shape : {AnalyticSet::lower_halfspace(n), AnalyticSet::ball({0.05, 0.0, 0.0}, 0.3),
                                     AnalyticSet::box_union({{{-0.25, -0.25, 0}, {0.25, 0.125, 0}}})}) {
      const IndicatorField e = rasterize(shape, Grid::uniform(q, 16, 8));
      const FunctionalValue a1 = j1(e, q, s), a2 = j2(e, q, s, 0.5);
      for (double lambda : {0.5, 2.0}) {
        const IndicatorField f = rasterize(shape.scaled(lambda), Grid::uniform(q.scaled(lambda), 16, 8));
        const FunctionalValue b1 = j1(f, q.scaled(lambda), s), b2 = j2(f, q.scaled(lambda), s, 0.5 * lambda);
        const double k = std::pow(lambda, n - 0.5);
        for (auto [x, y] : {std::pair{a1, b1}, std::pair{a2, b2}}) {
          ++cases;
          const double slack = 1e-13 * std::fabs(y.value);
          if (y.lower > k * x.upper + slack || k * x.lower > y.upper + slack) ++bad;
        }
      }
    }
  }
  return {bad == 0, fmt("%d of %d scaled brackets disjoint", bad, cases)};
}

Outcome coarea() {
  double worst = 0.0;
  int count = 0;
  for (int n : {1, 2}) {
    ExperimentConfig c;
    c.kind = ExperimentKind::coarea;
    c.dim = n;
    c.domain = Domain::unit_cube(n);
    c.instances = 50;
    c.max_levels = 8;
    c.s_list = {0.2, 0.5, 0.8};
    c.resolutions = n == 1 ? std::vector<int>{32, 64} : std::vector<int>{8, 16};
    c.seed = 100 + n;
    const Table t = coarea_table(c);
    for (const auto& row : t.rows) {
      worst = std::max(worst, std::get<double>(row.back()));
      ++count;
    }
  }
  return {count == 100 && worst <= 1e-12, fmt("max residual %.3e over %d fields", worst, count)};
}

MinimizeOptions tight_options(const Grid& g) {
  MinimizeOptions o;
  o.weights.rel_tol = 1e-10;
  int reach = 0;
  for (int a = 0; a < g.dim(); ++a) reach = std::max(reach, g.extent(a) - 1);
  o.weights.near_cutoff = g.dim() == 1 ? 2 : reach;
  return o;
}

struct Instance {
  std::string name;
  Grid grid;
  Domain omega;
};

std::vector<Instance> enumeration_instances() {
  std::vector<Instance> out;
  for (int n = 8; n <= 16; n += 2)
    out.push_back({fmt("1D N=%d", n), Grid::uniform(Domain::unit_cube(1), n, 8), Domain::unit_cube(1)});
  out.push_back({"2D 4x4", Grid::uniform(Domain::unit_cube(2), 4, 3), Domain::unit_cube(2)});
  return out;
}

Outcome halfspace_minimality() {
  int runs[2] = {0, 0}, good[2] = {0, 0};
  std::size_t ties_1d = 0;
  for (const Instance& inst : enumeration_instances()) {
    const int n = inst.grid.dim();
    const IndicatorField h = rasterize(AnalyticSet::lower_halfspace(n), inst.grid);
    for (double s : {0.3, 0.5, 0.7}) {
      const MinimizeReport r = brute_force_minimizer(AnalyticSet::lower_halfspace(n), inst.grid, inst.omega,
                                                     FractionalOrder(s), tight_options(inst.grid));
      bool ok = r.minimizer == h && r.unique();
      for (const IndicatorField& t : r.ties) {
        const ComparisonResult c = comparison_check(t);
        ok = ok && c.contains_h && c.contained_in_h;
      }
      ++runs[n - 1];
      good[n - 1] += ok;
      if (n == 1) ties_1d = std::max(ties_1d, r.ties.size());
    }
  }
  return {good[0] == runs[0] && good[1] == runs[1],
          fmt("1D: %d of %d unique (up to %zu tied step sets); 2D 4x4: %d of %d unique H with both containments",
              good[0], runs[0], ties_1d, good[1], runs[1])};
}

// Flip descent starts from the rasterized exterior data, as the minimize
// experiment does. Empty and full starts are reported alongside.
Outcome oracle_equivalence() {
  int runs = 0, matched = 0, extra_runs = 0, extra_matched = 0;
  double worst_excess = 0.0;
  for (const Instance& inst : enumeration_instances()) {
    const int n = inst.grid.dim();
    const std::vector<AnalyticSet> exteriors{AnalyticSet::lower_halfspace(n), AnalyticSet::halfspace(n - 1, 0.125),
                                             AnalyticSet::halfspace(n - 1, -0.375),
                                             AnalyticSet::ball({0.0, 0.0, 0.0}, 0.3)};
    for (const AnalyticSet& ext : exteriors)
      for (double s : {0.3, 0.5, 0.7}) {
        const FractionalOrder fs(s);
        const MinimizeOptions opt = tight_options(inst.grid);
        const MinimizeReport brute = brute_force_minimizer(ext, inst.grid, inst.omega, fs, opt);
        const TruncatedEnergy model(brute.minimizer, inst.omega, fs, opt);
        const std::vector<std::uint8_t> xb = model.pattern(brute.minimizer);
        const double best = model.energy(xb);
        for (int init = 0; init < 3; ++init) {
          IndicatorField start = rasterize(ext, inst.grid);
          if (init > 0)
            for (std::size_t c : model.cells()) start.set(c, init == 2);
          const MinimizeReport f = flip_descent(start, inst.omega, fs, 1000, opt);
          const std::vector<std::uint8_t> xf = model.pattern(f.minimizer);
          const double excess = model.energy(xf) - best;
          const bool tied = std::any_of(brute.ties.begin(), brute.ties.end(),
                                        [&](const IndicatorField& t) { return t == f.minimizer; });
          const bool ok = f.converged && (tied || excess <= model.difference_error(xf, xb) + model.rounding_slack());
          if (init == 0) {
            ++runs;
            matched += ok;
            if (!ok) worst_excess = std::max(worst_excess, excess);
          } else {
            ++extra_runs;
            extra_matched += ok;
          }
        }
      }
  }
  return {matched == runs, fmt("%d of %d descents from the exterior data reached the enumerated minimum (worst "
                               "excess %.3e); empty/full starts: %d of %d",
                               matched, runs, worst_excess, extra_matched, extra_runs)};
}

Outcome rho_identity() {
  double worst = 0.0;
  for (int n = 2; n <= 6; ++n) worst = std::max(worst, std::fabs(rho_integral(n, 1.0) - 1.0 / (n - 1)));
  return {worst <= 1e-10, fmt("max |rho(n,1) - 1/(n-1)| = %.3e", worst)};
}

Outcome translation() {
  std::string detail;
  bool pass = true;
  for (int n : {1, 2}) {
    double lo_all = INFINITY, hi_all = 0.0;
    for (double s : {0.3, 0.5, 0.7, 0.9}) {
      std::vector<double> maxima;
      for (int res : {64, 128, 256}) {
        ExperimentConfig c;
        c.kind = ExperimentKind::translation;
        c.dim = n;
        c.domain = Domain::unit_cube(n);
        c.shape = AnalyticSet::lower_halfspace(n);
        c.s_list = {s};
        c.resolutions = {res};
        const Table t = translation_sweep(c);
        double m = 0.0;
        for (const auto& row : t.rows) m = std::max(m, std::get<double>(row[5]));
        maxima.push_back(m);
      }
      const double lo = *std::min_element(maxima.begin(), maxima.end());
      const double hi = *std::max_element(maxima.begin(), maxima.end());
      const double variation = (hi - lo) / hi;
      if (!std::isfinite(hi) || !(variation < 0.25)) pass = false;
      lo_all = std::min(lo_all, variation);
      hi_all = std::max(hi_all, variation);
    }
    detail += fmt("n=%d refinement variation %.2e..%.2e; ", n, lo_all, hi_all);
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

Outcome gluing() {
  ExperimentConfig c;
  c.kind = ExperimentKind::glue;
  c.dim = 2;
  c.domain = Domain::unit_cube(2);
  c.resolutions = {16};
  c.s_list = {0.2, 0.5, 0.8};
  c.instances = 50;
  c.seed = 3;
  const Table t = glue_table(c);
  int ok = 0;
  for (const auto& row : t.rows)
    ok += std::get<std::int64_t>(row[5]) && std::get<std::int64_t>(row[6]) && std::get<std::int64_t>(row[7]);
  return {ok == 50 && t.rows.size() == 50, fmt("%d of %zu instances satisfy (a), (b) and the energy bound", ok,
                                                t.rows.size())};
}

Outcome determinism() {
  std::vector<std::string> outputs;
  for (int threads : {1, 4, 8}) {
    std::ostringstream out;
    write_csv(convergence_table(converge_sweep(criterion3_config(threads))), out);
    outputs.push_back(out.str());
  }
  const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {same, same ? "CSV identical for 1, 4 and 8 threads" : "CSV differs between thread counts"};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> known;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--known-failures") {
      std::stringstream list(argv[i + 1]);
      for (std::string item; std::getline(list, item, ',');) known.push_back(std::stoi(item));
    }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1D closed form", closed_form},          {"1D limit at s = 0.999", limit_1d},
      {"2D extrapolated limit", limit_2d},      {"scaling identity", scaling},
      {"coarea identity", coarea},              {"halfspace minimality", halfspace_minimality},
      {"flip descent vs enumeration", oracle_equivalence}, {"rho identity", rho_identity},
      {"translation estimate", translation},    {"gluing", gluing},
      {"thread determinism", determinism}};
  std::vector<int> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %zu: %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) failed.push_back(static_cast<int>(k + 1));
  }
  std::sort(known.begin(), known.end());
  if (!known.empty())
    std::printf("%s: failing criteria %s the documented known failures\n", failed == known ? "OK" : "MISMATCH",
                failed == known ? "match" : "differ from");
  return failed == known ? 0 : 1;
}
