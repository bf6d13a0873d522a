#pragma once

// Representations of free groups into SL_m: overflow-safe word evaluation,
// proximal spectral data, projector decompositions, symmetric powers,
// translation lengths, and an empirical Anosov certification.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "util.hpp"
#include "word.hpp"

namespace preslab {

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
struct ScaledMatrixT {
  MatX<Scalar> matrix;   // max-entry-normalized
  double log_scale = 0;  // true matrix = exp(log_scale) * matrix

  void renormalize() {
    double s = matrix.cwiseAbs().maxCoeff();
    if (s == 0.0) throw SingularProduct("ScaledMatrix: zero matrix");
    matrix /= s;
    log_scale += std::log(s);
  }
};

using ScaledMatrix = ScaledMatrixT<double>;
using ScaledMatrixC = ScaledMatrixT<std::complex<double>>;

// Generator-to-matrix map, determinant-normalized on construction.
// images[l] is the image of letter l (generator 2i, inverse 2i+1).
template <class Scalar>
class RepT {
 public:
  RepT() = default;
  RepT(std::vector<MatX<Scalar>> generators, std::string label = "")
      : label_(std::move(label)) {
    if (generators.empty()) throw ConfigError("Representation: no generators");
    dim_ = static_cast<int>(generators[0].rows());
    rank_ = static_cast<int>(generators.size());
    if (rank_ < 2) throw UnsupportedGroup("Representation: free rank must be >= 2");
    images_.resize(static_cast<std::size_t>(2 * rank_));
    for (int i = 0; i < rank_; ++i) {
      MatX<Scalar>& g = generators[static_cast<std::size_t>(i)];
      if (g.rows() != dim_ || g.cols() != dim_)
        throw ConfigError("Representation: generator dimensions disagree");
      Scalar det = g.determinant();
      if (std::abs(det) < 1e-300)
        throw ConfigError("Representation: singular generator image");
      g /= std::pow(Scalar(std::abs(det)), Scalar(1.0 / dim_));
      images_[static_cast<std::size_t>(2 * i)] = g;
      images_[static_cast<std::size_t>(2 * i + 1)] = g.inverse();
    }
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  const std::string& label() const { return label_; }
  const MatX<Scalar>& image(Letter l) const { return images_[static_cast<std::size_t>(l)]; }

  ScaledMatrixT<Scalar> evaluate(const Word& w) const {
    ScaledMatrixT<Scalar> sm;
    sm.matrix = MatX<Scalar>::Identity(dim_, dim_);
    for (Letter l : w.letters()) {
      sm.matrix = sm.matrix * images_[static_cast<std::size_t>(l)];
      sm.renormalize();
    }
    return sm;
  }

 private:
  int dim_ = 0;
  int rank_ = 0;
  std::vector<MatX<Scalar>> images_;
  std::string label_;
};

using Representation = RepT<double>;
using ComplexRep = RepT<std::complex<double>>;

struct SpectralData {
  double log_radius = 0;   // log Lambda(gamma), scale included
  int signed_top = +1;     // sign of the dominant eigenvalue
  Eigen::VectorXd attracting;          // unit right eigenvector
  Eigen::VectorXd repelling_covector;  // unit left eigenvector
  double gap = 0;          // |lambda_2| / |lambda_1|
};

namespace detail {

inline Eigen::VectorXd seed_vector(Eigen::Index m) {
  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v[i] = 1.0 / (1.0 + static_cast<double>(i));
  return v.normalized();
}

struct PowerResult {
  double eigenvalue = 0;
  Eigen::VectorXd vec;
  bool converged = false;
};

// Plain power iteration on an arbitrary linear action.
template <class Apply>
PowerResult power_iterate(Apply&& apply, Eigen::Index m, int max_iter, double tol) {
  PowerResult r;
  r.vec = seed_vector(m);
  double lambda = 0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd av = apply(r.vec);
    lambda = r.vec.dot(av);
    double resid = (av - lambda * r.vec).norm();
    double nrm = av.norm();
    if (nrm == 0.0) return r;
    r.vec = av / nrm;
    if (resid <= tol * std::max(1.0, nrm)) {
      r.eigenvalue = lambda;
      r.converged = true;
      return r;
    }
  }
  r.eigenvalue = lambda;
  return r;
}

// Modulus of the subdominant eigenvalue via deflated power iteration.
inline double second_modulus(const Eigen::MatrixXd& a, double lambda1,
                             const Eigen::VectorXd& v, const Eigen::VectorXd& phi) {
  const double pairing = phi.dot(v);
  Eigen::VectorXd x = seed_vector(a.rows());
  x -= v * (phi.dot(x) / pairing);  // remove dominant component
  double growth = 0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd ax = a * x - lambda1 * v * (phi.dot(x) / pairing);
    double nrm = ax.norm();
    if (nrm < 1e-290) return 0.0;
    double g = nrm / x.norm();
    x = ax / nrm;
    if (it > 10 && std::abs(g - growth) <= 1e-9 * std::max(1.0, g)) return g;
    growth = g;
  }
  return growth;
}

// Dense fallback: full (complex) spectrum of a small matrix.
inline std::optional<SpectralData> dense_eigendata(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  const auto& vals = es.eigenvalues();
  Eigen::Index i1 = 0;
  for (Eigen::Index i = 1; i < vals.size(); ++i)
    if (std::abs(vals[i]) > std::abs(vals[i1])) i1 = i;
  double mod1 = std::abs(vals[i1]);
  if (mod1 == 0.0) return std::nullopt;
  double mod2 = 0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (i != i1) mod2 = std::max(mod2, std::abs(vals[i]));
  // count multiplicity at the top modulus
  if (std::abs(vals[i1].imag()) > 1e-9 * mod1) return std::nullopt;
  SpectralData sd;
  sd.gap = mod2 / mod1;
  sd.signed_top = vals[i1].real() >= 0 ? +1 : -1;
  sd.log_radius = std::log(mod1);
  Eigen::VectorXcd vc = es.eigenvectors().col(i1);
  if (vc.imag().cwiseAbs().maxCoeff() > 1e-8 * vc.norm()) return std::nullopt;
  sd.attracting = vc.real().normalized();

  Eigen::EigenSolver<Eigen::MatrixXd> est(a.transpose().eval());
  const auto& tvals = est.eigenvalues();
  Eigen::Index j1 = 0;
  for (Eigen::Index i = 1; i < tvals.size(); ++i)
    if (std::abs(tvals[i]) > std::abs(tvals[j1])) j1 = i;
  Eigen::VectorXcd wc = est.eigenvectors().col(j1);
  if (wc.imag().cwiseAbs().maxCoeff() > 1e-8 * wc.norm()) return std::nullopt;
  sd.repelling_covector = wc.real().normalized();
  return sd;
}

}  // namespace detail

// Dominant eigendata of a proximal scaled matrix.  Power iteration with a
// dense fallback for small gaps; words of any interesting length have tiny
// gaps, so the fast path almost always wins.
inline SpectralData dominant_eigendata(const ScaledMatrix& sm,
                                       double proximality_tol = 1e-6) {
  const Eigen::MatrixXd& a = sm.matrix;
  const Eigen::Index m = a.rows();
  SpectralData sd;
  bool ok = false;

  auto right = detail::power_iterate([&](const Eigen::VectorXd& x) { return (a * x).eval(); },
                                     m, 200, 1e-13);
  if (right.converged && std::abs(right.eigenvalue) > 1e-280) {
    auto left = detail::power_iterate(
        [&](const Eigen::VectorXd& x) { return (a.transpose() * x).eval(); }, m, 200, 1e-13);
    if (left.converged) {
      double pairing = left.vec.dot(right.vec);
      if (std::abs(pairing) > 1e-12) {
        // two-sided Rayleigh refinement
        double lambda = left.vec.dot(a * right.vec) / pairing;
        double mod2 = detail::second_modulus(a, lambda, right.vec, left.vec);
        sd.log_radius = std::log(std::abs(lambda));
        sd.signed_top = lambda >= 0 ? +1 : -1;
        sd.attracting = right.vec;
        sd.repelling_covector = left.vec;
        sd.gap = mod2 / std::abs(lambda);
        ok = sd.gap < 1.0;
      }
    }
  }
  if (!ok) {
    auto dense = detail::dense_eigendata(a);
    if (!dense)
      throw ProximalityFailure("dominant_eigendata: dominant eigenvalue complex or defective");
    sd = *dense;
  }
  if (1.0 - sd.gap < proximality_tol)
    throw ProximalityFailure("dominant_eigendata: top moduli too close (gap " +
                             std::to_string(sd.gap) + ")");
  sd.log_radius += sm.log_scale;
  return sd;
}

inline SpectralData spectral_data(const Representation& rep, const Word& w) {
  return dominant_eigendata(rep.evaluate(w));
}

struct ProjectorDecomposition {
  Eigen::MatrixXd p;  // rank-one projector onto the attracting line
  Eigen::MatrixXd r;  // residual on the scaled matrix: sm.matrix = L_scaled p + r
  double residual_log_radius = 0;  // scale included
};

inline ProjectorDecomposition projector_decomposition(const ScaledMatrix& sm,
                                                      const SpectralData& sd) {
  const Eigen::VectorXd& v = sd.attracting;
  const Eigen::VectorXd& phi = sd.repelling_covector;
  double pairing = phi.dot(v);
  if (std::abs(pairing) < 1e-12)
    throw DegeneratePairing("projector_decomposition: <covector|attracting> ~ 0");
  ProjectorDecomposition pd;
  pd.p = (v * phi.transpose()) / pairing;
  double l_scaled = sd.signed_top * std::exp(sd.log_radius - sm.log_scale);
  pd.r = sm.matrix - l_scaled * pd.p;
  Eigen::EigenSolver<Eigen::MatrixXd> es(pd.r);
  double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  pd.residual_log_radius = (rho > 0 ? std::log(rho) : -std::numeric_limits<double>::infinity()) +
                           sm.log_scale;
  return pd;
}

// Irreducible m-dimensional representation of SL_2 on the monomial basis
// x^(m-1-j) y^j of degree-(m-1) homogeneous polynomials.
template <class Scalar>
MatX<Scalar> symmetric_power(const Eigen::Matrix<Scalar, 2, 2>& g, int m) {
  if (m < 1) throw ConfigError("symmetric_power: dimension must be >= 1");
  const int n = m - 1;  // symmetric tensor degree
  const Scalar a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  MatX<Scalar> out = MatX<Scalar>::Zero(m, m);
  for (int j = 0; j <= n; ++j) {
    // column j: coefficients of (a e1 + c e2)^(n-j) (b e1 + d e2)^j
    std::vector<Scalar> poly(1, Scalar(1));  // coefficients in e2-degree
    auto mul = [&poly](Scalar u, Scalar w) {  // multiply by (u + w t)
      std::vector<Scalar> next(poly.size() + 1, Scalar(0));
      for (std::size_t i = 0; i < poly.size(); ++i) {
        next[i] += u * poly[i];
        next[i + 1] += w * poly[i];
      }
      poly = std::move(next);
    };
    for (int t = 0; t < n - j; ++t) mul(a, c);
    for (int t = 0; t < j; ++t) mul(b, d);
    for (int i = 0; i <= n; ++i) out(i, j) = poly[static_cast<std::size_t>(i)];
  }
  return out;
}

template <class Scalar>
RepT<Scalar> symmetric_power_rep(const RepT<Scalar>& rep, int m) {
  if (rep.dim() != 2) throw ConfigError("symmetric_power_rep: base must be 2-dimensional");
  std::vector<MatX<Scalar>> gens;
  gens.reserve(static_cast<std::size_t>(rep.rank()));
  for (int i = 0; i < rep.rank(); ++i) {
    Eigen::Matrix<Scalar, 2, 2> g = rep.image(static_cast<Letter>(2 * i));
    gens.push_back(symmetric_power<Scalar>(g, m));
  }
  return RepT<Scalar>(std::move(gens), rep.label() + ":sym" + std::to_string(m));
}

// Hyperbolic translation length 2 log|lambda| of a loxodromic 2x2 matrix.
template <class Scalar>
double translation_length(const ScaledMatrixT<Scalar>& sm) {
  if (sm.matrix.rows() != 2) throw ConfigError("translation_length: need 2x2 input");
  const std::complex<double> tr(sm.matrix.trace());
  const std::complex<double> det(sm.matrix.determinant());
  std::complex<double> disc = std::sqrt(tr * tr - 4.0 * det);
  std::complex<double> l1 = (tr + disc) / 2.0, l2 = (tr - disc) / 2.0;
  double m1 = std::abs(l1), m2 = std::abs(l2);
  if (m1 < m2) std::swap(m1, m2);
  if (m1 - m2 <= 1e-9 * m1)
    throw NotLoxodromic("translation_length: elliptic or parabolic input");
  return 2.0 * (std::log(m1) + sm.log_scale);
}

template <class Scalar>
double translation_length(const RepT<Scalar>& rep, const Word& w) {
  return translation_length(rep.evaluate(w));
}

struct DisplacementFit {
  double k = 1.0;  // slope of log Lambda against word length
  double c = 0.0;  // envelope constant: l/k - c <= log Lambda <= k l + c
  double max_residual = 0.0;  // worst least-squares residual before enveloping
};

inline DisplacementFit fit_displacement(const std::vector<double>& lengths,
                                        const std::vector<double>& values) {
  auto f = linear_fit(lengths, values);
  if (f.slope <= 0)
    throw PositivityViolation("fit_displacement: nonpositive growth slope");
  DisplacementFit d;
  d.k = f.slope;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    double up = values[i] - d.k * lengths[i];
    double dn = lengths[i] / d.k - values[i];
    d.c = std::max({d.c, up, dn});
    d.max_residual = std::max(d.max_residual,
                              std::abs(values[i] - (f.intercept + f.slope * lengths[i])));
  }
  return d;
}

struct CertificationReport {
  std::size_t n_classes = 0;
  std::size_t n_failures = 0;        // ProximalityFailure count
  std::vector<std::string> failed;   // first few failing class words
  double delta = 1.0;                // fitted contraction rate, gap <= delta^l e^c
  double delta_c = 0.0;
  DisplacementFit displacement;
  std::size_t sandwich_violations = 0;  // with the enveloped constants, 0 by construction
  double transversality_margin = 0.0;   // min |<phi_beta|v_alpha>| over sampled coprime pairs
  bool certified = false;
};

inline CertificationReport certify_anosov(const Representation& rep,
                                          const std::vector<ConjClass>& classes,
                                          std::size_t pair_samples = 600) {
  CertificationReport rpt;
  rpt.n_classes = classes.size();
  std::vector<double> lens, logls, loggaps, gaplens;
  std::vector<SpectralData> sds;
  std::vector<std::size_t> sd_index;
  lens.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    try {
      SpectralData sd = spectral_data(rep, classes[i].rep);
      lens.push_back(static_cast<double>(classes[i].length));
      logls.push_back(sd.log_radius);
      if (sd.gap > 0) {
        loggaps.push_back(std::log(sd.gap));
        gaplens.push_back(static_cast<double>(classes[i].length));
      }
      sds.push_back(std::move(sd));
      sd_index.push_back(i);
    } catch (const ProximalityFailure&) {
      ++rpt.n_failures;
      if (rpt.failed.size() < 16) rpt.failed.push_back(classes[i].rep.str());
    }
  }
  if (lens.size() >= 2) {
    rpt.displacement = fit_displacement(lens, logls);
    if (gaplens.size() >= 2) {
      auto gf = linear_fit(gaplens, loggaps);
      rpt.delta = std::exp(gf.slope);
      rpt.delta_c = gf.intercept;
      for (std::size_t i = 0; i < gaplens.size(); ++i)
        rpt.delta_c = std::max(rpt.delta_c, loggaps[i] - gf.slope * gaplens[i]);
    }
  }
  // transversality over sampled coprime pairs
  rpt.transversality_margin = std::numeric_limits<double>::infinity();
  std::size_t budget = pair_samples;
  for (std::size_t i = 0; i < sds.size() && budget > 0; ++i) {
    for (std::size_t j = i + 1; j < sds.size() && budget > 0; ++j) {
      const ConjClass& ci = classes[sd_index[i]];
      const ConjClass& cj = classes[sd_index[j]];
      if (!are_coprime(ci.rep, cj.rep)) continue;
      rpt.transversality_margin =
          std::min(rpt.transversality_margin,
                   std::abs(sds[j].repelling_covector.dot(sds[i].attracting)));
      --budget;
    }
  }
  if (!std::isfinite(rpt.transversality_margin)) rpt.transversality_margin = 0.0;
  rpt.certified = rpt.n_failures == 0 && rpt.delta < 1.0 &&
                  rpt.transversality_margin > 0.0;
  return rpt;
}

}  // namespace preslab
