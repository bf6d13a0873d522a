#pragma once

#include <cmath>
#include <vector>

#include "preslab/errors.hpp"
#include "preslab/representation.hpp"
#include "preslab/word.hpp"

namespace preslab {

// Flag at the fixed points of a proximal element: attracting line and the
// dominant left eigenvector (whose kernel is the repelling hyperplane).
struct FlagPair {
  Eigen::VectorXd line;
  Eigen::VectorXd covector;
};

inline FlagPair flag_pair(const Representation& rep, const ConjClass& c) {
  auto sd = spectral_data(rep, c.rep);
  return {sd.attracting, sd.repelling_covector};
}

// b = <phi|u><psi|v> / (<phi|v><psi|u>), scale-invariant in every argument.
inline double bb(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double pu = phi.dot(u), pv = phi.dot(v);
  double su = psi.dot(u), sv = psi.dot(v);
  double scale_p = phi.norm(), scale_s = psi.norm();
  double scale_u = u.norm(), scale_v = v.norm();
  if (std::abs(pv) < 1e-12 * scale_p * scale_v ||
      std::abs(su) < 1e-12 * scale_s * scale_u)
    throw DegenerateQuad("bb: denominator pairing below tolerance");
  return (pu * sv) / (pv * su);
}

struct CrossRatioQuad {
  double value = 0;
  Eigen::VectorXd phi, psi, u, v;
};

inline void require_coprime(const ConjClass& a, const ConjClass& b,
                            const char* where) {
  if (!are_coprime(a.rep, b.rep))
    throw OutOfDomain(std::string(where) + ": classes share an axis");
}

struct FixedPointCrossRatio {
  double value = 0;              // bb at the four fixed-point flags
  double trace = 0;              // Tr(p(alpha) p(beta)) = value, other route
  double word_trace = 0;         // Tr(p(alpha) rho(beta)): limit of L(a^n b)/L(a)^n
  double discrepancy = 0;        // |value - trace|
};

// b_rho(alpha^-, beta^-, beta^+, alpha^+) = Tr(p(alpha) p(beta))
inline FixedPointCrossRatio fixed_point_cross_ratio(const Representation& rep,
                                                    const ConjClass& alpha,
                                                    const ConjClass& beta) {
  require_coprime(alpha, beta, "fixed_point_cross_ratio");
  auto fa = flag_pair(rep, alpha);
  auto fb = flag_pair(rep, beta);
  FixedPointCrossRatio r;
  r.value = bb(fa.covector, fb.covector, fb.line, fa.line);

  auto pa = fa.line * fa.covector.transpose() / fa.covector.dot(fa.line);
  auto pb = fb.line * fb.covector.transpose() / fb.covector.dot(fb.line);
  if (std::abs(fa.covector.dot(fa.line)) < 1e-12 ||
      std::abs(fb.covector.dot(fb.line)) < 1e-12)
    throw DegeneratePairing("fixed_point_cross_ratio: flag pairing collapsed");
  r.trace = (pa * pb).trace();
  auto smb = rep.evaluate(beta.rep);
  r.word_trace = std::exp(smb.log_scale) * (pa * smb.matrix).trace();
  r.discrepancy = std::abs(r.value - r.trace);
  return r;
}

// signed L(alpha^n beta) / L(alpha)^n for n = 1..n_max; converges to
// Tr(p(alpha) rho(beta))
inline std::vector<double> cr_limit(const Representation& rep, const ConjClass& alpha,
                                    const ConjClass& beta, int n_max) {
  require_coprime(alpha, beta, "cr_limit");
  auto sa = spectral_data(rep, alpha.rep);
  std::vector<double> seq;
  seq.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    Word w = multiply(power(alpha.rep, n), beta.rep);
    auto s = spectral_data(rep, w);
    double sign = s.signed_top * std::pow(sa.signed_top, n);
    seq.push_back(sign * std::exp(s.log_radius - n * sa.log_radius));
  }
  return seq;
}

// signed L(alpha^n beta^n) / (L(alpha)^n L(beta)^n); converges to the
// fixed-point cross-ratio Tr(p(alpha) p(beta))
inline std::vector<double> cr_product_limit(const Representation& rep,
                                            const ConjClass& alpha,
                                            const ConjClass& beta, int n_max) {
  require_coprime(alpha, beta, "cr_product_limit");
  auto sa = spectral_data(rep, alpha.rep);
  auto sb = spectral_data(rep, beta.rep);
  std::vector<double> seq;
  for (int n = 1; n <= n_max; ++n) {
    Word w = multiply(power(alpha.rep, n), power(beta.rep, n));
    auto s = spectral_data(rep, w);
    double sign = s.signed_top * std::pow(sa.signed_top * sb.signed_top, n);
    seq.push_back(sign * std::exp(s.log_radius - n * (sa.log_radius + sb.log_radius)));
  }
  return seq;
}

// chi^p determinant of the p x p matrix b(e_i, e_0, u_j, u_0), normalized by
// the product of row norms (raw determinants scale wildly with dimension)
inline double chi_test(const Representation& rep, const std::vector<ConjClass>& e,
                       const std::vector<ConjClass>& u, int p) {
  if (p < 1 || e.size() < static_cast<std::size_t>(p + 1) ||
      u.size() < static_cast<std::size_t>(p + 1))
    throw ConfigError("chi_test: need p+1 classes on each side");
  // all 2p+2 fixed points pairwise distinct, enforced via coprimality
  for (std::size_t i = 0; i <= static_cast<std::size_t>(p); ++i)
    for (std::size_t j = 0; j <= static_cast<std::size_t>(p); ++j) {
      require_coprime(e[i], u[j], "chi_test");
      if (i < j) {
        require_coprime(e[i], e[j], "chi_test");
        require_coprime(u[i], u[j], "chi_test");
      }
    }

  std::vector<FlagPair> fe, fu;
  for (int i = 0; i <= p; ++i) fe.push_back(flag_pair(rep, e[static_cast<std::size_t>(i)]));
  for (int j = 0; j <= p; ++j) fu.push_back(flag_pair(rep, u[static_cast<std::size_t>(j)]));

  Eigen::MatrixXd m(p, p);
  for (int i = 1; i <= p; ++i)
    for (int j = 1; j <= p; ++j)
      m(i - 1, j - 1) = bb(fe[static_cast<std::size_t>(i)].covector, fe[0].covector,
                           fu[static_cast<std::size_t>(j)].line, fu[0].line);
  double row_scale = 1.0;
  for (int i = 0; i < p; ++i) {
    double rn = m.row(i).norm();
    if (rn == 0) return 0.0;
    row_scale *= rn;
  }
  return m.determinant() / row_scale;
}

// least p with |chi^p| below tol, minus one; if chi never collapses up to
// p_max the scan is inconclusive and p_max is returned as a lower bound
inline int detected_dimension(const Representation& rep, const std::vector<ConjClass>& e,
                              const std::vector<ConjClass>& u, int p_max,
                              double tol = 1e-7) {
  for (int p = 1; p <= p_max; ++p)
    if (std::abs(chi_test(rep, e, u, p)) < tol) return p - 1;
  return p_max;
}

}  // namespace preslab
