#include <catch2/catch_amalgamated.hpp>

#include "preslab/representation.hpp"

using namespace preslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Representation schottky() {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 3, 0, 0, 1.0 / 3;
  b << 17.0 / 8, 15.0 / 8, 15.0 / 8, 17.0 / 8;
  return Representation({a, b}, "schottky");
}

// Cusped punctured-torus pair: every element loxodromic except commutator
// powers, which are parabolic.  Used for spot checks only.
Representation cusped_pair() {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 3, 0, 0, 1.0 / 3;
  b << 1.25, 0.75, 0.75, 1.25;
  return Representation({a, b}, "cusped");
}

Eigen::MatrixXd true_matrix(const ScaledMatrix& sm) {
  return std::exp(sm.log_scale) * sm.matrix;
}

}  // namespace

TEST_CASE("evaluate basics") {
  auto rep = schottky();
  auto id = rep.evaluate(Word::identity());
  CHECK(id.log_scale == 0.0);
  CHECK(id.matrix.isIdentity(1e-15));

  auto aa = rep.evaluate(Word::parse("aa"));
  CHECK_THAT(true_matrix(aa)(0, 0), WithinRel(9.0, 1e-12));
  CHECK_THAT(true_matrix(aa)(1, 1), WithinRel(1.0 / 9, 1e-12));
  CHECK(std::abs(aa.matrix.cwiseAbs().maxCoeff() - 1.0) < 1e-15);
}

TEST_CASE("evaluate inverse consistency and homomorphism (property)") {
  auto rep = schottky();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    // short words only: conditioning of rho(w)rho(w^-1)=I degrades like Lambda(w)^2
    Word w = random_word(seed, 1 + static_cast<int>(seed % 10));
    auto fw = rep.evaluate(w);
    auto bw = rep.evaluate(invert(w));
    Eigen::MatrixXd prod = fw.matrix * bw.matrix;
    double scale = std::exp(fw.log_scale + bw.log_scale);
    double cond = std::exp(2 * fw.log_scale);  // ~ Lambda(w)^2 roundoff amplification
    CHECK((scale * prod - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-13 * std::max(1.0, cond));

    // pick w2 so the product does not cancel (cancellation amplifies roundoff)
    Word w2;
    for (std::uint64_t k = 0;; ++k) {
      w2 = random_word(seed + 500 + 7919 * k, 1 + static_cast<int>((seed * 11) % 10));
      if (multiply(w, w2).size() == w.size() + w2.size()) break;
    }
    auto lhs = rep.evaluate(multiply(w, w2));
    auto a = rep.evaluate(w);
    auto b = rep.evaluate(w2);
    // compare scaled products in log domain entry-wise
    Eigen::MatrixXd rhs = a.matrix * b.matrix;
    double ls = a.log_scale + b.log_scale;
    double rel = (std::exp(ls - lhs.log_scale) * rhs - lhs.matrix).cwiseAbs().maxCoeff();
    CHECK(rel < 1e-9);
  }
}

TEST_CASE("dominant eigendata on diagonal matrix") {
  ScaledMatrix sm;
  sm.matrix.resize(2, 2);
  sm.matrix << 2, 0, 0, 0.5;
  auto sd = dominant_eigendata(sm);
  CHECK_THAT(sd.log_radius, WithinAbs(std::log(2.0), 1e-12));
  CHECK(sd.signed_top == +1);
  CHECK_THAT(std::abs(sd.attracting[0]), WithinAbs(1.0, 1e-10));
  CHECK_THAT(std::abs(sd.repelling_covector[0]), WithinAbs(1.0, 1e-10));
  CHECK_THAT(sd.gap, WithinAbs(0.25, 1e-8));
}

TEST_CASE("Lambda(ab) spot checks") {
  // cusped pair: det 1, trace 25/6, lambda = (25+sqrt(481))/12
  auto sd = spectral_data(cusped_pair(), Word::parse("ab"));
  CHECK_THAT(std::exp(sd.log_radius), WithinRel((25.0 + std::sqrt(481.0)) / 12.0, 1e-10));
  CHECK(sd.signed_top == +1);

  // schottky pair: trace 85/12, lambda = (85+sqrt(6649))/24
  auto sd2 = spectral_data(schottky(), Word::parse("ab"));
  CHECK_THAT(std::exp(sd2.log_radius), WithinRel((85.0 + std::sqrt(6649.0)) / 24.0, 1e-10));
  CHECK(sd2.signed_top == +1);
}

TEST_CASE("rotation fails proximality") {
  ScaledMatrix sm;
  sm.matrix.resize(2, 2);
  sm.matrix << 0, -1, 1, 0;
  CHECK_THROWS_AS(dominant_eigendata(sm), ProximalityFailure);
}

TEST_CASE("log Lambda is a class function and scales on powers (property)") {
  auto rep = schottky();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Word w = random_word(seed, 2 + static_cast<int>(seed % 6));
    if (cyclic_reduce(w).empty()) continue;
    double base = spectral_data(rep, w).log_radius;
    for (std::uint64_t g = 0; g < 5; ++g) {
      Word c = random_word(seed * 31 + g, 1 + static_cast<int>(g % 7));
      Word conj = multiply(multiply(c, w), invert(c));
      // roundoff amplification ~ ||rho(c)rho(w)rho(c)^-1|| / Lambda(w)
      double cond = std::exp(rep.evaluate(conj).log_scale - base);
      CHECK_THAT(spectral_data(rep, conj).log_radius,
                 WithinAbs(base, 1e-10 * std::max(1.0, cond)));
    }
    for (long n : {2L, 5L, 10L}) {
      double pw = spectral_data(rep, power(w, n)).log_radius;
      CHECK_THAT(pw, WithinRel(static_cast<double>(n) * base, 1e-9));
    }
  }
}

TEST_CASE("projector decomposition") {
  ScaledMatrix sm;
  sm.matrix.resize(2, 2);
  sm.matrix << 2, 0, 0, 0.5;
  auto sd = dominant_eigendata(sm);
  auto pd = projector_decomposition(sm, sd);
  Eigen::MatrixXd p_expect(2, 2);
  p_expect << 1, 0, 0, 0;
  CHECK((pd.p - p_expect).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((pd.p * pd.p - pd.p).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THAT(pd.residual_log_radius, WithinAbs(std::log(0.5), 1e-9));

  auto rep = schottky();
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    Word w = random_word(seed, 2 + static_cast<int>(seed % 10));
    if (cyclic_reduce(w).empty()) continue;
    auto smw = rep.evaluate(w);
    auto sdw = dominant_eigendata(smw);
    auto pdw = projector_decomposition(smw, sdw);
    double l_scaled = sdw.signed_top * std::exp(sdw.log_radius - smw.log_scale);
    CHECK((smw.matrix - (l_scaled * pdw.p + pdw.r)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(pdw.residual_log_radius < sdw.log_radius);
    CHECK((pdw.p * pdw.p - pdw.p).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("residual contraction over enumerated classes") {
  auto rep = schottky();
  auto classes = enumerate_classes(2, 8);
  std::vector<double> lens, diffs;
  for (const auto& c : classes) {
    auto sm = rep.evaluate(c.rep);
    auto sd = dominant_eigendata(sm);
    auto pd = projector_decomposition(sm, sd);
    lens.push_back(static_cast<double>(c.length));
    diffs.push_back(pd.residual_log_radius - sd.log_radius);
  }
  auto fit = linear_fit(lens, diffs);
  double delta = std::exp(fit.slope);
  CHECK(delta < 1.0);
  // fitted bound with envelope constant holds for every class
  double c0 = -1e18;
  for (std::size_t i = 0; i < lens.size(); ++i)
    c0 = std::max(c0, diffs[i] - fit.slope * lens[i]);
  for (std::size_t i = 0; i < lens.size(); ++i)
    CHECK(diffs[i] <= fit.slope * lens[i] + c0 + 1e-12);
}

TEST_CASE("symmetric power") {
  Eigen::Matrix2d g;
  g << 1.25, 0.75, 0.75, 1.25;
  CHECK((symmetric_power<double>(g, 2) - g).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::Matrix2d d;
  d << 2, 0, 0, 0.5;
  auto t3 = symmetric_power<double>(d, 3);
  Eigen::MatrixXd expect(3, 3);
  expect << 4, 0, 0, 0, 1, 0, 0, 0, 0.25;
  CHECK((t3 - expect).cwiseAbs().maxCoeff() < 1e-14);

  for (int m = 2; m <= 8; ++m) {
    auto tm = symmetric_power<double>(d, m);
    Eigen::EigenSolver<Eigen::MatrixXd> es(tm);
    double top = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK_THAT(std::log(top), WithinRel((m - 1) * std::log(2.0), 1e-10));
  }
}

TEST_CASE("symmetric power multiplicativity (property)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Matrix2d g, h;
    do {
      g << u(rng), u(rng), u(rng), u(rng);
    } while (std::abs(g.determinant()) < 0.05);
    do {
      h << u(rng), u(rng), u(rng), u(rng);
    } while (std::abs(h.determinant()) < 0.05);
    g /= std::sqrt(std::abs(g.determinant()));
    h /= std::sqrt(std::abs(h.determinant()));
    for (int m = 2; m <= 8; ++m) {
      Eigen::MatrixXd lhs = symmetric_power<double>(g, m) * symmetric_power<double>(h, m);
      Eigen::MatrixXd rhs = symmetric_power<double>(Eigen::Matrix2d(g * h), m);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10 * rhs.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("translation length") {
  using C = std::complex<double>;
  Eigen::MatrixXcd d(2, 2);
  d << C(2, 0), C(0, 0), C(0, 0), C(0.5, 0);
  ComplexRep rep({d, d}, "diag");  // rank-2 wrapper for evaluate
  CHECK_THAT(translation_length(rep, Word::parse("a")), WithinRel(2 * std::log(2.0), 1e-12));

  Eigen::MatrixXcd di(2, 2);
  di << C(0, 2), C(0, 0), C(0, 0), C(0, -0.5);
  ComplexRep repi({di, di}, "diagi");
  CHECK_THAT(translation_length(repi, Word::parse("a")), WithinRel(2 * std::log(2.0), 1e-12));

  // real trace 3: lambda = (3+sqrt 5)/2
  Eigen::MatrixXcd t3(2, 2);
  t3 << C(3, 0), C(-1, 0), C(1, 0), C(0, 0);
  ComplexRep rep3({t3, t3}, "tr3");
  CHECK_THAT(translation_length(rep3, Word::parse("a")),
             WithinRel(2 * std::log((3 + std::sqrt(5.0)) / 2), 1e-10));

  Eigen::MatrixXcd rot(2, 2);
  rot << C(0, 0), C(-1, 0), C(1, 0), C(0, 0);
  ComplexRep repr({rot, rot}, "rot");
  CHECK_THROWS_AS(translation_length(repr, Word::parse("a")), NotLoxodromic);
}

TEST_CASE("certification of the Schottky example") {
  auto rep = schottky();
  auto classes = enumerate_classes(2, 10);
  auto rpt = certify_anosov(rep, classes);
  CHECK(rpt.certified);
  CHECK(rpt.n_failures == 0);
  CHECK(rpt.delta < 1.0);
  CHECK(rpt.transversality_margin > 0.0);
  CHECK(rpt.sandwich_violations == 0);
  // enveloped sandwich holds on every class
  for (const auto& c : classes) {
    double v = spectral_data(rep, c.rep).log_radius;
    double l = static_cast<double>(c.length);
    CHECK(v <= rpt.displacement.k * l + rpt.displacement.c + 1e-12);
    CHECK(v >= l / rpt.displacement.k - rpt.displacement.c - 1e-12);
  }
}

TEST_CASE("parabolic generator flagged, not thrown") {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 1, 0, 1;  // parabolic
  b << 1.25, 0.75, 0.75, 1.25;
  Representation rep({a, b}, "parabolic");
  auto classes = enumerate_classes(2, 3);
  auto rpt = certify_anosov(rep, classes);
  CHECK_FALSE(rpt.certified);
  CHECK(rpt.n_failures > 0);
  bool has_a = false;
  for (const auto& s : rpt.failed) has_a |= s == "a";
  CHECK(has_a);
}

TEST_CASE("word-length sandwich refit oracle") {
  auto rep = schottky();
  auto classes = enumerate_classes(2, 9);
  std::vector<double> lens, vals;
  for (const auto& c : classes) {
    lens.push_back(static_cast<double>(c.length));
    vals.push_back(spectral_data(rep, c.rep).log_radius);
  }
  auto fit = fit_displacement(lens, vals);  // envelope construction
  std::size_t violations = 0;
  for (std::size_t i = 0; i < lens.size(); ++i) {
    if (vals[i] > fit.k * lens[i] + fit.c + 1e-12) ++violations;
    if (vals[i] < lens[i] / fit.k - fit.c - 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("signed top sign matches restricted trace") {
  auto rep = schottky();
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Word w = random_word(seed, 2 + static_cast<int>(seed % 8));
    if (cyclic_reduce(w).empty()) continue;
    auto sm = rep.evaluate(w);
    auto sd = dominant_eigendata(sm);
    auto pd = projector_decomposition(sm, sd);
    double restricted = (pd.p.transpose() * sm.matrix * pd.p).trace();
    CHECK(sd.signed_top == (restricted >= 0 ? +1 : -1));
  }
}
