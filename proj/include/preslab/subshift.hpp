#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "preslab/errors.hpp"
#include "preslab/orbit_table.hpp"
#include "preslab/representation.hpp"
#include "preslab/util.hpp"
#include "preslab/word.hpp"

namespace preslab {

// No-backtrack subshift on 2k letters: a transition a -> b is allowed iff
// b != a^-1.  States at depth n are the reduced words of length n; a state
// w maps to w' when w' = (shift of w) + one admissible letter.
struct SubshiftSpec {
  int rank = 0;
  int depth = 0;
  std::vector<Word> states;
  // edges[i] = list of (target state index, appended letter)
  std::vector<std::vector<std::pair<int, Letter>>> edges;

  std::size_t n_states() const { return states.size(); }
};

inline SubshiftSpec build_subshift(int rank, int depth,
                                   std::size_t state_budget = 2'000'000) {
  if (rank < 2) throw UnsupportedGroup("build_subshift: rank must be >= 2");
  if (depth < 1) throw ConfigError("build_subshift: depth must be >= 1");
  double est = 2.0 * rank * std::pow(2.0 * rank - 1, depth - 1);
  if (est > static_cast<double>(state_budget))
    throw ResourceLimit("build_subshift: state count exceeds budget");

  SubshiftSpec s;
  s.rank = rank;
  s.depth = depth;
  // enumerate reduced words of length `depth` in lexicographic letter order
  std::vector<Letter> cur;
  auto emit = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == depth) {
      s.states.emplace_back(std::vector<Letter>(cur));
      return;
    }
    for (Letter l = 0; l < static_cast<Letter>(2 * rank); ++l) {
      if (!cur.empty() && cur.back() == inverse_letter(l)) continue;
      cur.push_back(l);
      self(self);
      cur.pop_back();
    }
  };
  emit(emit);

  // index states by their letter sequence for transition lookup
  std::vector<std::pair<std::vector<Letter>, int>> index;
  index.reserve(s.states.size());
  for (std::size_t i = 0; i < s.states.size(); ++i)
    index.emplace_back(s.states[i].letters(), static_cast<int>(i));
  std::sort(index.begin(), index.end());
  auto find_state = [&](const std::vector<Letter>& w) {
    auto it = std::lower_bound(index.begin(), index.end(),
                               std::make_pair(w, -1));
    return it->second;
  };

  s.edges.resize(s.states.size());
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    const auto& w = s.states[i].letters();
    std::vector<Letter> next(w.begin() + 1, w.end());
    next.push_back(0);
    for (Letter l = 0; l < static_cast<Letter>(2 * rank); ++l) {
      if (w.back() == inverse_letter(l)) continue;
      next.back() = l;
      s.edges[i].emplace_back(find_state(next), l);
    }
  }
  return s;
}

// Approximate limit-line directions along the subshift.  For a state word w
// the sample point is the periodic extension of w (patched to stay reduced
// when w is not cyclically reduced), and u(w) is the image of a fixed seed
// vector under the first `flag_depth` letters, normalized.
template <typename Scalar>
class CocycleSamplerT {
 public:
  CocycleSamplerT(RepT<Scalar> rep, int flag_depth)
      : rep_(std::move(rep)), flag_depth_(flag_depth) {
    if (flag_depth < 0) throw ConfigError("CocycleSampler: negative depth");
  }

  const RepT<Scalar>& rep() const { return rep_; }
  int flag_depth() const { return flag_depth_; }

  // unit limit-line approximation for the (patched) periodic extension of w
  VecX<Scalar> limit_vector(const Word& w) const {
    VecX<Scalar> v = detail::seed_vector(rep_.dim()).template cast<Scalar>();
    if (w.empty()) return v;
    const auto& ls = w.letters();
    Letter prev = -1;
    MatX<Scalar> m = MatX<Scalar>::Identity(rep_.dim(), rep_.dim());
    for (int i = 0; i < flag_depth_; ++i) {
      Letter l = ls[static_cast<std::size_t>(i) % ls.size()];
      if (prev >= 0 && l == inverse_letter(prev)) l = prev;  // keep reduced
      m = m * rep_.image(l);
      double top = m.cwiseAbs().maxCoeff();
      if (!(top > 0)) throw SingularProduct("CocycleSampler: zero product");
      m /= top;
      prev = l;
    }
    VecX<Scalar> u = m * v;
    double n = u.norm();
    if (!(n > 0)) throw ProximalityFailure("CocycleSampler: collapsed direction");
    return u / n;
  }

  // weight of the transition whose source sequence starts with `first` and
  // whose shifted sequence has limit direction `u_next` (unit)
  double one_step_weight(Letter first, const VecX<Scalar>& u_next) const {
    double n = (rep_.image(first) * u_next).norm();
    if (!(n > 0)) throw SingularProduct("one_step_weight: annihilated direction");
    return std::log(n);
  }

  // Birkhoff sum of one-step weights around the periodic orbit of a
  // cyclically reduced word; telescopes to log Lambda as flag_depth grows.
  double periodic_weight_sum(const Word& w) const {
    Word cyc(cyclic_reduce(w));
    if (cyc.empty()) throw IdentityWord("periodic_weight_sum: identity class");
    const auto& ls = cyc.letters();
    double sum = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      std::vector<Letter> rot;
      for (std::size_t j = 0; j < ls.size(); ++j)
        rot.push_back(ls[(i + 1 + j) % ls.size()]);
      sum += one_step_weight(ls[i], limit_vector(Word(std::move(rot))));
    }
    return sum;
  }

 private:
  RepT<Scalar> rep_;
  int flag_depth_;
};

using CocycleSampler = CocycleSamplerT<double>;
using ComplexCocycleSampler = CocycleSamplerT<std::complex<double>>;

// Per-edge roof weights aligned with SubshiftSpec::edges.
using EdgeWeights = std::vector<std::vector<double>>;

// scale = 1 for the log-norm cocycle (spectral-radius roof); scale = 2
// turns the complex cocycle into the hyperbolic translation-length roof.
template <typename Scalar>
EdgeWeights cylinder_weights(const SubshiftSpec& shift,
                             const CocycleSamplerT<Scalar>& sampler,
                             double scale = 1.0) {
  std::vector<VecX<Scalar>> u(shift.n_states());
  parallel_for(shift.n_states(), [&](std::size_t i) {
    u[i] = sampler.limit_vector(shift.states[i]);
  });
  EdgeWeights w(shift.n_states());
  parallel_for(shift.n_states(), [&](std::size_t i) {
    Letter first = shift.states[i].letters().front();
    w[i].reserve(shift.edges[i].size());
    for (const auto& [j, l] : shift.edges[i]) {
      (void)l;
      w[i].push_back(scale *
                     sampler.one_step_weight(first, u[static_cast<std::size_t>(j)]));
    }
  });
  return w;
}

inline EdgeWeights constant_weights(const SubshiftSpec& shift, double c) {
  EdgeWeights w(shift.n_states());
  for (std::size_t i = 0; i < shift.n_states(); ++i)
    w[i].assign(shift.edges[i].size(), c);
  return w;
}

// log spectral radius of the transfer matrix with entries e^{-s c} via
// power iteration with Collatz-Wielandt bounds.
inline double pressure(const SubshiftSpec& shift, const EdgeWeights& weights,
                       double s, double rel_tol = 1e-12,
                       std::size_t max_iters = 100000) {
  const std::size_t n = shift.n_states();
  if (weights.size() != n) throw ConfigError("pressure: weight shape mismatch");

  std::vector<std::vector<double>> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i].size() != shift.edges[i].size())
      throw ConfigError("pressure: weight shape mismatch");
    m[i].resize(weights[i].size());
    for (std::size_t e = 0; e < weights[i].size(); ++e)
      m[i][e] = std::exp(-s * weights[i][e]);
  }

  std::vector<double> v(n, 1.0), nv(n);
  double log_scale = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    parallel_for(n, [&](std::size_t i) {
      KahanSum acc;
      for (std::size_t e = 0; e < shift.edges[i].size(); ++e)
        acc.add(m[i][e] * v[static_cast<std::size_t>(shift.edges[i][e].first)]);
      nv[i] = acc.value();
    });
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = nv[i] / v[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (!(lo > 0) || !std::isfinite(hi))
      throw NonConvergence("pressure: iteration left the positive cone");
    double top = *std::max_element(nv.begin(), nv.end());
    for (std::size_t i = 0; i < n; ++i) v[i] = nv[i] / top;
    log_scale += std::log(top);
    if (hi - lo <= rel_tol * hi)
      return std::log(0.5 * (lo + hi));
  }
  throw NonConvergence("pressure: power iteration budget exhausted");
}

template <typename Scalar>
double pressure(const SubshiftSpec& shift, const CocycleSamplerT<Scalar>& sampler,
                double s) {
  if (s < 0) throw ConfigError("pressure: s must be >= 0");
  return pressure(shift, cylinder_weights(shift, sampler), s);
}

// root of s -> P(-s * roof): entropy of the reparametrized flow
inline double entropy_root(const SubshiftSpec& shift, const EdgeWeights& weights,
                           double p_tol = 1e-10) {
  double p0 = pressure(shift, weights, 0.0);
  if (p0 <= 0) throw BracketFailure("entropy_root: P(0) <= 0");
  double lo = 0.0, hi = 1.0;
  double phi = pressure(shift, weights, hi);
  int guard = 0;
  while (phi > 0) {
    lo = hi;
    hi *= 2;
    if (++guard > 60) throw BracketFailure("entropy_root: no sign change found");
    phi = pressure(shift, weights, hi);
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double pm = pressure(shift, weights, mid);
    if (std::abs(pm) <= p_tol) return mid;
    (pm > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <typename Scalar>
double entropy_root(const SubshiftSpec& shift,
                    const CocycleSamplerT<Scalar>& sampler, double p_tol = 1e-10) {
  return entropy_root(shift, cylinder_weights(shift, sampler), p_tol);
}

// direct orbit-sum pressure estimate (1/T) log sum_{a in R_T} e^{g(a)},
// with R_T the classes whose base-functional value is <= T
inline double pressure_orbit_sum(const OrbitTable& table, std::size_t base,
                                 const std::vector<double>& g, double T,
                                 bool primitive_only = true) {
  if (g.size() != table.classes.size())
    throw ConfigError("pressure_orbit_sum: g size mismatch");
  std::vector<double> terms;
  for (std::size_t i = 0; i < table.classes.size(); ++i) {
    if (primitive_only && !table.classes[i].primitive) continue;
    if (table.values[base][i] <= T * (1 + kWindowSlack)) terms.push_back(g[i]);
  }
  if (terms.size() < 2)
    throw InsufficientData("pressure_orbit_sum: too few classes below threshold");
  return log_sum_exp(terms) / T;
}

}  // namespace preslab
