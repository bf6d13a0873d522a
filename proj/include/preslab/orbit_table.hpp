#pragma once

// Per-class value tables, R_T slices, counting entropy, intersection and
// renormalized intersection, shell-averaged equilibrium weights, variance.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "length_functional.hpp"
#include "util.hpp"
#include "word.hpp"

namespace preslab {

// Relative slack for window-membership comparisons.  Thresholds sit at
// attained values, so counts are exact; the slack only decides which
// attained values enter the fit window and keeps that decision stable
// under exact rescaling of a functional.
inline constexpr double kWindowSlack = 1e-9;

struct OrbitTable {
  std::vector<ConjClass> classes;             // (length, lex) order from enumerate_classes
  std::vector<std::vector<double>> values;    // values[f][i], f indexes functionals
  std::vector<std::string> functional_names;
  int max_len = 0;
  std::vector<double> complete_to;            // per functional
  std::vector<DisplacementFit> fits;          // per functional

  std::size_t n_functionals() const { return values.size(); }
};

// assemble a table from precomputed per-class value columns
inline OrbitTable build_orbit_table(std::vector<ConjClass> classes,
                                    std::vector<std::vector<double>> values,
                                    std::vector<std::string> names) {
  OrbitTable t;
  t.classes = std::move(classes);
  if (t.classes.empty()) throw InsufficientData("build_orbit_table: no classes");
  for (const auto& c : t.classes)
    t.max_len = std::max<int>(t.max_len, static_cast<int>(c.length));
  t.values = std::move(values);
  t.functional_names = std::move(names);
  t.functional_names.resize(t.values.size(), "value");
  for (std::size_t f = 0; f < t.values.size(); ++f) {
    auto& col = t.values[f];
    if (col.size() != t.classes.size())
      throw ConfigError("build_orbit_table: value column size mismatch");
    std::vector<double> lens(t.classes.size());
    double min_at_top = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.classes.size(); ++i) {
      if (col[i] <= 0)
        throw PositivityViolation("build_orbit_table: nonpositive value for class " +
                                  t.classes[i].rep.str() + " under " + t.functional_names[f]);
      lens[i] = static_cast<double>(t.classes[i].length);
      if (static_cast<int>(t.classes[i].length) == t.max_len)
        min_at_top = std::min(min_at_top, col[i]);
    }
    t.fits.push_back(fit_displacement(lens, col));
    // guaranteed-complete threshold: absent classes have length > max_len,
    // hence value > slope_low * max_len - c_low
    auto lf = linear_fit(lens, col);
    double c_low = 0;
    for (std::size_t i = 0; i < lens.size(); ++i)
      c_low = std::max(c_low, lf.slope * lens[i] - col[i]);
    double fit_bound = lf.slope * t.max_len - c_low;
    t.complete_to.push_back(std::min(fit_bound, min_at_top));
  }
  return t;
}

inline OrbitTable build_orbit_table(std::vector<ConjClass> classes,
                                    const std::vector<LengthFunctional>& functionals,
                                    unsigned threads = 0) {
  if (classes.empty()) throw InsufficientData("build_orbit_table: no classes");
  std::vector<std::vector<double>> values(functionals.size());
  std::vector<std::string> names;
  for (std::size_t f = 0; f < functionals.size(); ++f) {
    names.push_back(functionals[f].name());
    auto& col = values[f];
    col.resize(classes.size());
    parallel_for(
        classes.size(), [&](std::size_t i) { col[i] = functionals[f](classes[i]); },
        threads);
  }
  return build_orbit_table(std::move(classes), std::move(values), std::move(names));
}

struct EntropyEstimate {
  double h = 0;
  double stderr_ = 0;
  double window_lo = 0, window_hi = 0;
  std::vector<std::pair<double, std::size_t>> counts;  // (T, #R_T) at fit thresholds
  double h_raw = 0;  // uncorrected slope of log #R_T against T (diagnostic)
  std::size_t classes_in_window = 0;
};

namespace detail {

// Sorted values of the selected classes for one functional.
inline std::vector<double> sorted_values(const OrbitTable& t, std::size_t f,
                                         bool primitive_only) {
  std::vector<double> v;
  v.reserve(t.classes.size());
  for (std::size_t i = 0; i < t.classes.size(); ++i)
    if (!primitive_only || t.classes[i].primitive) v.push_back(t.values[f][i]);
  std::sort(v.begin(), v.end());
  return v;
}

// Indices (into the sorted array) of tie-run ends whose value lies in the
// fit window; these are the count thresholds.
struct Window {
  std::size_t lo = 0, hi = 0;          // index range [lo, hi] in sorted values
  std::vector<std::size_t> run_ends;   // distinct-threshold indices
};

inline Window fit_window(const std::vector<double>& sorted, double complete_to,
                         std::size_t max_thresholds = 32) {
  Window w;
  if (sorted.empty()) throw InsufficientData("fit_window: no classes");
  // last attained value within the complete range
  std::size_t hi = sorted.size();
  while (hi > 0 && sorted[hi - 1] > complete_to * (1 + kWindowSlack)) --hi;
  if (hi == 0) throw InsufficientData("fit_window: nothing below complete_to");
  w.hi = hi - 1;
  const double t_hi = sorted[w.hi];
  const double t_lo = t_hi / 2;  // exact halving keeps rescaling consistent
  std::size_t lo = 0;
  while (lo < hi && sorted[lo] < t_lo * (1 - kWindowSlack)) ++lo;
  w.lo = lo;
  // tie runs by relative gap, so the run structure survives exact rescaling
  // (FP products can break exact equality of tied values)
  double run_start = sorted[w.lo];
  for (std::size_t i = w.lo; i <= w.hi; ++i) {
    if (i == w.hi || sorted[i + 1] > run_start * (1 + kWindowSlack)) {
      w.run_ends.push_back(i);
      if (i != w.hi) run_start = sorted[i + 1];
    }
  }
  if (w.run_ends.size() > max_thresholds) {
    std::vector<std::size_t> sub;
    for (std::size_t j = 0; j < max_thresholds; ++j)
      sub.push_back(w.run_ends[(j * (w.run_ends.size() - 1)) / (max_thresholds - 1)]);
    sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
    w.run_ends = std::move(sub);
  }
  return w;
}

inline EntropyEstimate entropy_from_thresholds(const std::vector<double>& xs,
                                               const std::vector<std::size_t>& counts) {
  if (xs.size() < 8)
    throw InsufficientData("entropy_count: fewer than 8 thresholds in fit window");
  std::vector<double> y, y_raw;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double logc = std::log(static_cast<double>(counts[j]));
    y_raw.push_back(logc);
    // orbit-counting form #R_T ~ e^{hT}/(hT): fit log #R_T + log T
    y.push_back(logc + std::log(xs[j]));
  }
  auto fit = linear_fit(xs, y);
  auto raw = linear_fit(xs, y_raw);
  // next orders of #R_T ~ e^{hT}/(hT) (1 + 1/(hT) + 2/(hT)^2 + ...):
  // subtract log(1 + u + 2u^2) ~ u + 3u^2/2 at the current h and refit
  double h = fit.slope;
  for (int it = 0; it < 4 && h > 0; ++it) {
    std::vector<double> yc(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
      double u = 1.0 / (h * xs[j]);
      yc[j] = y[j] - u - 1.5 * u * u;
    }
    fit = linear_fit(xs, yc);
    h = fit.slope;
  }
  EntropyEstimate e;
  e.h = fit.slope;
  e.stderr_ = fit.slope_stderr;
  e.h_raw = raw.slope;
  e.window_lo = xs.front();
  e.window_hi = xs.back();
  for (std::size_t j = 0; j < xs.size(); ++j) e.counts.emplace_back(xs[j], counts[j]);
  if (e.h <= 0) throw NumericError("entropy_count: nonpositive entropy estimate");
  return e;
}

}  // namespace detail

// Counting entropy: growth rate of #R_T over the top half of the complete
// range.  Thresholds sit at attained values (tie-run ends), so the counts
// are exact and the estimate is invariant under exact rescaling.
inline EntropyEstimate entropy_count(const OrbitTable& t, std::size_t f,
                                     bool primitive_only = true) {
  auto sorted = detail::sorted_values(t, f, primitive_only);
  auto w = detail::fit_window(sorted, t.complete_to[f]);
  std::size_t in_window = w.hi - w.lo + 1;
  if (in_window < 100)
    throw InsufficientData("entropy_count: fewer than 100 classes in fit window");
  std::vector<double> xs;
  std::vector<std::size_t> counts;
  for (std::size_t idx : w.run_ends) {
    xs.push_back(sorted[idx]);
    counts.push_back(idx + 1);
  }
  auto e = detail::entropy_from_thresholds(xs, counts);
  e.classes_in_window = in_window;
  return e;
}

struct IntersectionEstimate {
  std::vector<std::pair<double, double>> partial;  // (T, I_T)
  double extrapolated = 1.0;
  double trend = 0.0;  // linear-in-1/T coefficient of I_T (reported, not applied)
  double h_f = 0, h_g = 0;
  double intersection = 1.0;  // I
  double j = 1.0;             // (h_g/h_f) * I
};

// Orbit-average intersection I(f,g) with matched-rank entropy ratio.
// h_g is fitted at the same count ranks as h_f, so exact functional
// rescalings cancel to machine precision.
inline IntersectionEstimate intersection(const OrbitTable& t, std::size_t f, std::size_t g,
                                         bool primitive_only = true) {
  std::vector<std::size_t> sel;
  for (std::size_t i = 0; i < t.classes.size(); ++i)
    if (!primitive_only || t.classes[i].primitive) sel.push_back(i);
  if (sel.empty()) throw InsufficientData("intersection: no classes");
  // order classes by f-value
  std::sort(sel.begin(), sel.end(),
            [&](std::size_t a, std::size_t b) { return t.values[f][a] < t.values[f][b]; });
  std::vector<double> fv(sel.size()), gv(sel.size());
  for (std::size_t i = 0; i < sel.size(); ++i) {
    fv[i] = t.values[f][sel[i]];
    gv[i] = t.values[g][sel[i]];
  }
  auto w = detail::fit_window(fv, t.complete_to[f]);
  if (w.hi - w.lo + 1 < 100)
    throw InsufficientData("intersection: fewer than 100 classes in fit window");

  // prefix averages of g/f in f-order
  IntersectionEstimate est;
  KahanSum ratio_sum;
  std::size_t consumed = 0;
  std::vector<double> inv_t, i_t;
  for (std::size_t idx : w.run_ends) {
    while (consumed <= idx) {
      ratio_sum.add(gv[consumed] / fv[consumed]);
      ++consumed;
    }
    double avg = ratio_sum.value() / static_cast<double>(idx + 1);
    // thresholds live in the window but the sum runs over all of R_T(f)
    est.partial.emplace_back(fv[idx], avg);
    inv_t.push_back(1.0 / fv[idx]);
    i_t.push_back(avg);
  }
  est.extrapolated = est.partial.back().second;
  est.intersection = est.extrapolated;
  if (inv_t.size() >= 2) est.trend = linear_fit(inv_t, i_t).slope;

  // entropies on each functional's own complete window; the threshold
  // construction is exactly equivariant, so rescalings cancel in the ratio
  est.h_f = entropy_count(t, f, primitive_only).h;
  est.h_g = entropy_count(t, g, primitive_only).h;
  est.j = (est.h_g / est.h_f) * est.intersection;
  return est;
}

struct WeightedOrbitMeasure {
  std::vector<std::size_t> index;   // indices into the table's class list
  std::vector<double> weights;      // nonnegative, sum to 1
  std::vector<double> base_period;  // per selected class, the shell functional value
  double shell_t = 0, shell_dt = 0;
};

// Shell-restricted weights proportional to exp(<delta_a | Phi>).
// `phi` holds per-class periods of Phi, indexed like the table.
inline WeightedOrbitMeasure equilibrium_weights(const OrbitTable& t, std::size_t shell_f,
                                                const std::vector<double>& phi, double T,
                                                double dT, bool primitive_only = true) {
  WeightedOrbitMeasure m;
  m.shell_t = T;
  m.shell_dt = dT;
  std::vector<double> logw;
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    if (primitive_only && !t.classes[i].primitive) continue;
    double v = t.values[shell_f][i];
    if (v >= T - dT && v <= T) {
      m.index.push_back(i);
      m.base_period.push_back(v);
      logw.push_back(phi[i]);
    }
  }
  if (m.index.empty()) throw InsufficientData("equilibrium_weights: empty shell");
  double lz = log_sum_exp(logw);
  m.weights.resize(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) m.weights[i] = std::exp(logw[i] - lz);
  return m;
}

// (1/T) sum w (<delta_a|g> - T gbar)^2 with gbar the weighted mean rate.
inline double variance_estimate(const WeightedOrbitMeasure& m, const std::vector<double>& g) {
  if (m.index.empty()) throw InsufficientData("variance_estimate: empty measure");
  KahanSum num, den;
  for (std::size_t i = 0; i < m.index.size(); ++i) {
    num.add(m.weights[i] * g[m.index[i]]);
    den.add(m.weights[i] * m.base_period[i]);
  }
  double gbar = num.value() / den.value();
  KahanSum var;
  for (std::size_t i = 0; i < m.index.size(); ++i) {
    double d = g[m.index[i]] - m.shell_t * gbar;
    var.add(m.weights[i] * d * d);
  }
  return var.value() / m.shell_t;
}

// Weighted mean of g-periods divided by weighted mean of base periods.
inline double weighted_mean_rate(const WeightedOrbitMeasure& m, const std::vector<double>& g) {
  KahanSum num, den;
  for (std::size_t i = 0; i < m.index.size(); ++i) {
    num.add(m.weights[i] * g[m.index[i]]);
    den.add(m.weights[i] * m.base_period[i]);
  }
  return num.value() / den.value();
}

}  // namespace preslab
