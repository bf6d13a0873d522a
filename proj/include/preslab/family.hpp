#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "preslab/errors.hpp"
#include "preslab/length_functional.hpp"
#include "preslab/orbit_table.hpp"
#include "preslab/representation.hpp"
#include "preslab/subshift.hpp"
#include "preslab/util.hpp"

namespace preslab {

// Multivariate polynomial with exact-rational-parsed coefficients.
class Poly {
 public:
  struct Term {
    double coeff = 0;
    std::vector<int> exp;  // one exponent per parameter
  };

  Poly() = default;
  explicit Poly(double c, int nvars = 0) {
    if (c != 0) terms_.push_back({c, std::vector<int>(static_cast<std::size_t>(nvars), 0)});
    nvars_ = nvars;
  }

  static Poly variable(int idx, int nvars) {
    Poly p;
    p.nvars_ = nvars;
    std::vector<int> e(static_cast<std::size_t>(nvars), 0);
    e[static_cast<std::size_t>(idx)] = 1;
    p.terms_.push_back({1.0, std::move(e)});
    return p;
  }

  // grammar: expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
  // factor := ['-'] (number | tK | '(' expr ')'); numbers may be "p/q"
  static Poly parse(const std::string& src, int nvars);

  double eval(const std::vector<double>& t) const {
    KahanSum s;
    for (const auto& term : terms_) {
      double v = term.coeff;
      for (std::size_t k = 0; k < term.exp.size(); ++k)
        for (int e = 0; e < term.exp[k]; ++e) v *= t[k];
      s.add(v);
    }
    return s.value();
  }

  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (const auto& term : o.terms_) r.accumulate(term);
    r.nvars_ = std::max(nvars_, o.nvars_);
    return r;
  }
  Poly operator-(const Poly& o) const {
    Poly r = *this;
    for (auto term : o.terms_) {
      term.coeff = -term.coeff;
      r.accumulate(term);
    }
    r.nvars_ = std::max(nvars_, o.nvars_);
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    r.nvars_ = std::max(nvars_, o.nvars_);
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        Term t;
        t.coeff = a.coeff * b.coeff;
        t.exp.resize(static_cast<std::size_t>(r.nvars_), 0);
        for (std::size_t k = 0; k < a.exp.size(); ++k) t.exp[k] += a.exp[k];
        for (std::size_t k = 0; k < b.exp.size(); ++k) t.exp[k] += b.exp[k];
        r.accumulate(t);
      }
    return r;
  }

  const std::vector<Term>& terms() const { return terms_; }

 private:
  void accumulate(Term t) {
    t.exp.resize(static_cast<std::size_t>(std::max<int>(
                     nvars_, static_cast<int>(t.exp.size()))),
                 0);
    for (auto& mine : terms_) {
      if (mine.exp == t.exp) {
        mine.coeff += t.coeff;
        return;
      }
    }
    if (t.coeff != 0) terms_.push_back(std::move(t));
  }

  std::vector<Term> terms_;
  int nvars_ = 0;
};

namespace detail {

struct PolyParser {
  const std::string& s;
  std::size_t pos = 0;
  int nvars;

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  Poly expr() {
    Poly r = term();
    for (;;) {
      if (eat('+'))
        r = r + term();
      else if (eat('-'))
        r = r - term();
      else
        return r;
    }
  }
  Poly term() {
    Poly r = factor();
    while (eat('*')) r = r * factor();
    return r;
  }
  Poly factor() {
    skip();
    if (eat('-')) return Poly(-1.0, nvars) * factor();
    if (eat('(')) {
      Poly r = expr();
      if (!eat(')'))
        throw ConfigError("Poly::parse: missing ')' at position " + std::to_string(pos));
      return r;
    }
    if (pos < s.size() && s[pos] == 't') {
      std::size_t start = ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == start) throw ConfigError("Poly::parse: bare 't' at position " +
                                          std::to_string(start));
      int idx = std::stoi(s.substr(start, pos - start)) - 1;  // t1 is the first parameter
      if (idx < 0 || idx >= nvars)
        throw ConfigError("Poly::parse: parameter t" + std::to_string(idx + 1) +
                          " out of range");
      return Poly::variable(idx, nvars);
    }
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
            s[pos] == '/' || s[pos] == 'e' || s[pos] == 'E' ||
            ((s[pos] == '+' || s[pos] == '-') && pos > start &&
             (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
      ++pos;
    if (pos == start)
      throw ConfigError("Poly::parse: unexpected character at position " +
                        std::to_string(pos));
    return Poly(parse_exact_number(s.substr(start, pos - start)), nvars);
  }
};

}  // namespace detail

inline Poly Poly::parse(const std::string& src, int nvars) {
  detail::PolyParser p{src, 0, nvars};
  Poly r = p.expr();
  p.skip();
  if (p.pos != src.size())
    throw ConfigError("Poly::parse: trailing input at position " + std::to_string(p.pos));
  return r;
}

// Analytic family of representations.  Explicit families carry polynomial
// generator entries; a conjugation wrapper appends parameters that move the
// family along conjugation directions; a symmetric-power wrapper composes
// with tau_m.
class RepFamily {
 public:
  static RepFamily constant(Representation rep) {
    RepFamily f;
    f.kind_ = Kind::Explicit;
    f.dim_ = rep.dim();
    f.nparams_ = 0;
    for (int g = 0; g < rep.rank(); ++g) {
      std::vector<std::vector<Poly>> m(static_cast<std::size_t>(rep.dim()));
      for (int i = 0; i < rep.dim(); ++i)
        for (int j = 0; j < rep.dim(); ++j)
          m[static_cast<std::size_t>(i)].push_back(
              Poly(rep.image(static_cast<Letter>(2 * g))(i, j), 0));
      f.entries_.push_back(std::move(m));
    }
    f.label_ = rep.label();
    return f;
  }

  static RepFamily parse(const std::vector<std::vector<std::vector<std::string>>>& gens,
                         int nparams, std::string label = "") {
    RepFamily f;
    f.kind_ = Kind::Explicit;
    f.nparams_ = nparams;
    if (gens.empty() || gens[0].empty())
      throw ConfigError("RepFamily: empty generator expressions");
    f.dim_ = static_cast<int>(gens[0].size());
    for (const auto& g : gens) {
      std::vector<std::vector<Poly>> m;
      if (static_cast<int>(g.size()) != f.dim_)
        throw ConfigError("RepFamily: ragged generator matrix");
      for (const auto& row : g) {
        if (static_cast<int>(row.size()) != f.dim_)
          throw ConfigError("RepFamily: ragged generator matrix");
        std::vector<Poly> prow;
        for (const auto& cell : row) prow.push_back(Poly::parse(cell, nparams));
        m.push_back(std::move(prow));
      }
      f.entries_.push_back(std::move(m));
    }
    f.label_ = std::move(label);
    return f;
  }

  // append conjugation parameters: rho_t = S(u) rho_{t_inner}(g) S(u)^{-1}
  // with S(u) = I + sum u_i X_i
  static RepFamily conjugation(RepFamily inner, std::vector<Eigen::MatrixXd> dirs) {
    RepFamily f;
    f.kind_ = Kind::Conjugation;
    f.dim_ = inner.dim_;
    f.nparams_ = inner.nparams_ + static_cast<int>(dirs.size());
    for (const auto& x : dirs)
      if (x.rows() != f.dim_ || x.cols() != f.dim_)
        throw ConfigError("RepFamily: conjugation direction dimension mismatch");
    f.label_ = inner.label_ + "+conj";
    f.inner_ = std::make_shared<RepFamily>(std::move(inner));
    f.dirs_ = std::move(dirs);
    return f;
  }

  static RepFamily symmetric_power(RepFamily inner, int m) {
    if (inner.dim_ != 2)
      throw UnsupportedGroup("RepFamily: symmetric powers take 2x2 families");
    RepFamily f;
    f.kind_ = Kind::SymmetricPower;
    f.dim_ = m;
    f.nparams_ = inner.nparams_;
    f.power_ = m;
    f.label_ = inner.label_ + "^sym" + std::to_string(m);
    f.inner_ = std::make_shared<RepFamily>(std::move(inner));
    return f;
  }

  RepFamily& with_box(std::vector<std::pair<double, double>> box) {
    if (static_cast<int>(box.size()) != nparams_)
      throw ConfigError("RepFamily: box dimension mismatch");
    box_ = std::move(box);
    return *this;
  }

  int n_params() const { return nparams_; }
  int dim() const { return dim_; }
  int rank() const {
    return kind_ == Kind::Explicit ? static_cast<int>(entries_.size()) : inner_->rank();
  }
  const std::string& label() const { return label_; }

  Representation evaluate(const std::vector<double>& t) const {
    if (static_cast<int>(t.size()) != nparams_)
      throw ConfigError("RepFamily: parameter dimension mismatch");
    for (std::size_t i = 0; i < box_.size(); ++i)
      if (t[i] < box_[i].first || t[i] > box_[i].second)
        throw OutOfDomain("RepFamily: parameter t" + std::to_string(i + 1) +
                          " outside configured box");
    switch (kind_) {
      case Kind::Explicit: {
        std::vector<Eigen::MatrixXd> gens;
        for (const auto& m : entries_) {
          Eigen::MatrixXd g(dim_, dim_);
          for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j)
              g(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(t);
          gens.push_back(std::move(g));
        }
        return Representation(std::move(gens), label_);
      }
      case Kind::Conjugation: {
        std::size_t ni = static_cast<std::size_t>(inner_->nparams_);
        Representation base =
            inner_->evaluate(std::vector<double>(t.begin(), t.begin() + ni));
        Eigen::MatrixXd s = Eigen::MatrixXd::Identity(dim_, dim_);
        for (std::size_t k = 0; k < dirs_.size(); ++k) s += t[ni + k] * dirs_[k];
        if (std::abs(s.determinant()) < 1e-12)
          throw OutOfDomain("RepFamily: conjugator became singular");
        Eigen::MatrixXd si = s.inverse();
        std::vector<Eigen::MatrixXd> gens;
        for (int g = 0; g < base.rank(); ++g)
          gens.push_back(s * base.image(static_cast<Letter>(2 * g)) * si);
        return Representation(std::move(gens), label_);
      }
      case Kind::SymmetricPower:
        return symmetric_power_rep(inner_->evaluate(t), power_);
    }
    throw ConfigError("RepFamily: unknown kind");
  }

 private:
  enum class Kind { Explicit, Conjugation, SymmetricPower };

  Kind kind_ = Kind::Explicit;
  int dim_ = 0;
  int nparams_ = 0;
  int power_ = 0;
  std::vector<std::vector<std::vector<Poly>>> entries_;  // [gen][row][col]
  std::shared_ptr<RepFamily> inner_;
  std::vector<Eigen::MatrixXd> dirs_;
  std::vector<std::pair<double, double>> box_;
  std::string label_;
};

inline Representation evaluate_family(const RepFamily& fam, const std::vector<double>& t) {
  return fam.evaluate(t);
}

// Stencil settings shared by the finite-difference operations.
struct FamilyRunConfig {
  int max_len = 10;     // enumeration depth for orbit tables
  int cert_len = 6;     // class length used for certification at sample points
  int depth = 4;        // subshift memory for transfer-route entropies
  int flag_depth = 12;  // cocycle limit-vector depth
  double step = 1e-2;   // default finite-difference step
};

namespace detail {

inline std::vector<double> logL_column(const Representation& rep,
                                       const std::vector<ConjClass>& classes) {
  std::vector<double> col(classes.size());
  parallel_for(classes.size(), [&](std::size_t i) {
    col[i] = spectral_data(rep, classes[i].rep).log_radius;
  });
  return col;
}

inline void require_certified(const Representation& rep,
                              const std::vector<ConjClass>& cert_classes) {
  auto rpt = certify_anosov(rep, cert_classes);
  if (!rpt.certified)
    throw CertificationFailure("family sample point failed certification (" +
                               std::to_string(rpt.n_failures) + " failures)");
}

inline std::vector<double> shifted(const std::vector<double>& t0,
                                   const std::vector<double>& v, double eps) {
  std::vector<double> t(t0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += eps * v[i];
  return t;
}

}  // namespace detail

// One certified sample of the family: per-class log spectral radii plus the
// transfer-route entropy (smooth in the parameter, unlike counting fits).
struct FamilySample {
  std::vector<double> column;
  double h = 0;
};

// Shared-enumeration J: both functionals are evaluated on one fixed class
// list, so truncation bias largely cancels in differences of J.  Entropies
// come from the transfer operator so finite-difference stencils see an
// analytic function of the parameter.
class FamilyWorkspace {
 public:
  FamilyWorkspace(const RepFamily& fam, std::vector<double> t0, FamilyRunConfig cfg = {})
      : fam_(fam), t0_(std::move(t0)), cfg_(cfg) {
    classes_ = enumerate_classes(fam.rank(), cfg_.max_len);
    for (const auto& c : classes_)
      if (static_cast<int>(c.length) <= cfg_.cert_len) cert_classes_.push_back(c);
    shift_ = build_subshift(fam.rank(), cfg_.depth);
    base_ = sample(t0_);
  }

  const std::vector<ConjClass>& classes() const { return classes_; }
  const std::vector<double>& base_column() const { return base_.column; }
  double base_entropy() const { return base_.h; }
  const FamilyRunConfig& config() const { return cfg_; }
  const std::vector<double>& base_point() const { return t0_; }
  const RepFamily& family() const { return fam_; }

  FamilySample sample(const std::vector<double>& t) const {
    Representation rep = fam_.evaluate(t);
    detail::require_certified(rep, cert_classes_);
    FamilySample s;
    s.column = detail::logL_column(rep, classes_);
    CocycleSampler cs(rep, cfg_.flag_depth);
    s.h = entropy_root(shift_, cylinder_weights(shift_, cs));
    return s;
  }

  std::vector<double> column_at(const std::vector<double>& t) const {
    return sample(t).column;
  }

  // J(rho_0, rho_t) = (h_t / h_0) * I, with I from prefix ratio averages on
  // the base functional's complete window (smooth: the window is pinned to
  // the fixed base column)
  double j_of(const FamilySample& s) const {
    auto table =
        build_orbit_table(classes_, {base_.column, s.column}, {"base", "moved"});
    return (s.h / base_.h) * intersection(table, 0, 1).intersection;
  }

  double j_at(const std::vector<double>& t) const { return j_of(sample(t)); }

  double j_shift(const std::vector<double>& v, double eps) const {
    return j_at(detail::shifted(t0_, v, eps));
  }

 private:
  const RepFamily& fam_;
  std::vector<double> t0_;
  FamilyRunConfig cfg_;
  std::vector<ConjClass> classes_;
  std::vector<ConjClass> cert_classes_;
  SubshiftSpec shift_;
  FamilySample base_;
};

inline std::vector<std::pair<double, double>> j_profile(const FamilyWorkspace& ws,
                                                        const std::vector<double>& v,
                                                        const std::vector<double>& steps) {
  std::vector<std::pair<double, double>> out;
  for (double eps : steps)
    out.emplace_back(eps, eps == 0.0 ? 1.0 : ws.j_shift(v, eps));
  return out;
}

inline double first_derivative_check(const FamilyWorkspace& ws, const std::vector<double>& v,
                                     double step) {
  return (ws.j_shift(v, step) - ws.j_shift(v, -step)) / (2 * step);
}

struct PressureForm {
  Eigen::MatrixXd matrix;                  // symmetric d x d
  std::vector<double> base;                // t0
  double step = 0;
  std::vector<double> first_residuals;     // central first differences per direction
  std::vector<double> quad_residuals;      // |H_ii(step) - H_ii(step/2)| per direction
  double symmetry_defect = 0;              // 0 by construction
};

// second central differences of J(rho_0, rho_t); off-diagonals by
// polarization p(v,w) = (p(v+w) - p(v-w)) / 4
inline PressureForm pressure_form(const FamilyWorkspace& ws,
                                  const std::vector<std::vector<double>>& basis,
                                  double step, double step_tolerance = 0.5) {
  const int d = static_cast<int>(basis.size());
  auto quad = [&](const std::vector<double>& v, double eps) {
    return (ws.j_shift(v, eps) - 2.0 + ws.j_shift(v, -eps)) / (eps * eps);
  };
  PressureForm pf;
  pf.matrix = Eigen::MatrixXd::Zero(d, d);
  pf.base = ws.base_point();
  pf.step = step;

  std::vector<double> diag(static_cast<std::size_t>(d));
  double scale = 0;
  for (int i = 0; i < d; ++i) {
    double h1 = quad(basis[static_cast<std::size_t>(i)], step);
    double h2 = quad(basis[static_cast<std::size_t>(i)], step / 2);
    diag[static_cast<std::size_t>(i)] = h2;  // finer stencil wins
    pf.quad_residuals.push_back(std::abs(h1 - h2));
    pf.first_residuals.push_back(
        first_derivative_check(ws, basis[static_cast<std::size_t>(i)], step));
    pf.matrix(i, i) = h2;
    scale = std::max(scale, std::abs(h2));
  }
  for (int i = 0; i < d; ++i)
    if (pf.quad_residuals[static_cast<std::size_t>(i)] >
        step_tolerance * std::max(scale, 1e-12))
      throw StepTooLarge("pressure_form: non-quadratic residual on direction " +
                         std::to_string(i + 1));

  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      std::vector<double> plus(ws.base_point().size(), 0.0), minus(plus);
      for (std::size_t k = 0; k < plus.size(); ++k) {
        plus[k] = basis[static_cast<std::size_t>(i)][k] + basis[static_cast<std::size_t>(j)][k];
        minus[k] = basis[static_cast<std::size_t>(i)][k] - basis[static_cast<std::size_t>(j)][k];
      }
      double val = (quad(plus, step / 2) - quad(minus, step / 2)) / 4.0;
      pf.matrix(i, j) = val;
      pf.matrix(j, i) = val;  // structural symmetry
    }
  return pf;
}

struct EntropyDerivative {
  double h0 = 0;
  double dh = 0;  // central difference along the direction
  double k = 0;   // log-type constant: -(1/h) dh
};

// derivative of the counting entropy of a functional family t -> f_t
inline EntropyDerivative entropy_derivative(
    const std::vector<ConjClass>& classes,
    const std::function<std::vector<double>(double)>& column_at, double step) {
  auto table0 = build_orbit_table(classes, {column_at(0.0)}, {"f"});
  auto tp = build_orbit_table(classes, {column_at(step)}, {"f+"});
  auto tm = build_orbit_table(classes, {column_at(-step)}, {"f-"});
  EntropyDerivative d;
  d.h0 = entropy_count(table0, 0).h;
  d.dh = (entropy_count(tp, 0).h - entropy_count(tm, 0).h) / (2 * step);
  d.k = -d.dh / d.h0;
  return d;
}

inline EntropyDerivative entropy_derivative(const FamilyWorkspace& ws,
                                            const std::vector<double>& v, double step) {
  EntropyDerivative d;
  d.h0 = ws.base_entropy();
  double hp = ws.sample(detail::shifted(ws.base_point(), v, step)).h;
  double hm = ws.sample(detail::shifted(ws.base_point(), v, -step)).h;
  d.dh = (hp - hm) / (2 * step);
  d.k = -d.dh / d.h0;
  return d;
}

struct LogTypeResiduals {
  double k = 0;
  std::vector<double> residuals;  // D logL(alpha)(v) - K logL(alpha), per class
  double max_abs = 0;
  double mean_abs = 0;
};

inline LogTypeResiduals log_type_residuals(const FamilyWorkspace& ws,
                                           const std::vector<double>& v, double step) {
  auto sp = ws.sample(detail::shifted(ws.base_point(), v, step));
  auto sm = ws.sample(detail::shifted(ws.base_point(), v, -step));
  const auto& cp = sp.column;
  const auto& cm = sm.column;
  LogTypeResiduals r;
  r.k = -((sp.h - sm.h) / (2 * step)) / ws.base_entropy();
  KahanSum total;
  for (std::size_t i = 0; i < ws.classes().size(); ++i) {
    double deriv = (cp[i] - cm[i]) / (2 * step);
    double res = deriv - r.k * ws.base_column()[i];
    r.residuals.push_back(res);
    r.max_abs = std::max(r.max_abs, std::abs(res));
    total.add(std::abs(res));
  }
  r.mean_abs = total.value() / static_cast<double>(r.residuals.size());
  return r;
}

// Variance route to the diagonal pressure-form entry: with Phi = -h f,
// d^2/dt^2 J = Var(Phi_dot, m_Phi) / h, approximated on an f-period shell.
inline double variance_route_diagonal(const FamilyWorkspace& ws, const std::vector<double>& v,
                                      double step, double shell_t, double shell_dt) {
  auto sp = ws.sample(detail::shifted(ws.base_point(), v, step));
  auto sm = ws.sample(detail::shifted(ws.base_point(), v, -step));
  const auto& f = ws.base_column();
  double h0 = ws.base_entropy();
  double dh = (sp.h - sm.h) / (2 * step);

  auto table = build_orbit_table(ws.classes(), {f}, {"f"});
  std::vector<double> phi(f.size()), phidot(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double fdot = (sp.column[i] - sm.column[i]) / (2 * step);
    phi[i] = -h0 * f[i];
    phidot[i] = -(dh * f[i] + h0 * fdot);
  }
  auto m = equilibrium_weights(table, 0, phi, shell_t, shell_dt);
  return variance_estimate(m, phidot) / h0;
}

}  // namespace preslab
