#include <doctest.h>

#include "oracles.hpp"
#include "sktflow/bismut_ricci.hpp"
#include "sktflow/catalog.hpp"
#include "sktflow/connections.hpp"
#include "sktflow/forms.hpp"

using namespace sktflow;

namespace {

unsigned bits(std::initializer_list<int> idx) {
  unsigned m = 0;
  for (int i : idx) m |= 1u << i;
  return m;
}

std::vector<CatalogEntry> small_catalog() {
  return {heisenberg_kt(), inoue_s0(), solvable_2414(), torus(2), random_2step_skt(3, 1)};
}

/// mu(Z1, Z2) = Z3 on C^3 with the standard J.
LieBracket iwasawa() {
  LieBracket mu(3);
  CVector v = CVector::Zero(6);
  v(2) = 1.0;
  mu.set(0, 1, v);
  return mu;
}

/// Tamed form on solvable_2414: metric (x^2, y^2, z), beta_12 = w.
TamedForm solvable_form(double x, double y, Complex z, Complex w) {
  CMatrix g(2, 2);
  g << x * x, z, std::conj(z), y * y;
  CMatrix beta = CMatrix::Zero(2, 2);
  beta(0, 1) = w;
  beta(1, 0) = -w;
  return {HermitianMetric(g), beta};
}

}  // namespace

TEST_CASE("HermitianMetric validation") {
  CMatrix g(2, 2);
  g << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(HermitianMetric{g}, ValidationError);
  g << 1.0, Complex(0.0, 0.5), Complex(0.0, 0.5), 1.0;
  CHECK_THROWS_AS(HermitianMetric{g}, ValidationError);
  CHECK(HermitianMetric::identity(3).min_eigenvalue() == doctest::Approx(1.0));
}

TEST_CASE("fundamental_form") {
  SUBCASE("identity metric gives -i zeta^{11bar} - i zeta^{22bar}") {
    const InvariantForm w = fundamental_form(HermitianMetric::identity(2));
    for (unsigned m : w.masks()) {
      const Complex expected = (m == bits({0, 2}) || m == bits({1, 3})) ? Complex(0, -1) : Complex(0);
      CHECK(w[m] == expected);
    }
    CHECK(w.is_real());
  }

  SUBCASE("off-diagonal metric") {
    const double x = 1.7, y = 0.8;
    const Complex z(0.3, -0.2);
    CMatrix g(2, 2);
    g << x, z, std::conj(z), y;
    const InvariantForm w = fundamental_form(HermitianMetric(g));
    CHECK(w[bits({0, 2})] == Complex(0, -x));
    CHECK(w[bits({1, 3})] == Complex(0, -y));
    CHECK(std::abs(w[bits({0, 3})] - Complex(0, -1) * z) < 1e-16);
    CHECK(std::abs(w[bits({1, 2})] - Complex(0, -1) * std::conj(z)) < 1e-16);
    CHECK(w.bidegree_part(1, 1).max_abs() == w.max_abs());
  }

  SUBCASE("metric_of inverts fundamental_form") {
    oracle::Rng rng(1);
    for (int trial = 0; trial < 10; ++trial) {
      const CMatrix g = rng.positive(3);
      CHECK(oracle::max_diff(metric_of(fundamental_form(HermitianMetric(g))).matrix(), g) < 1e-15);
    }
  }
}

TEST_CASE("d_mu") {
  SUBCASE("constant 0-form") {
    InvariantForm one(2, 0);
    one[0] = 1.0;
    CHECK(d_mu(heisenberg_kt().bracket, one).max_abs() == 0.0);
  }

  SUBCASE("matches the brute-force defining sum") {
    oracle::Rng rng(2);
    for (const auto& e : small_catalog())
      for (int degree = 0; degree < e.bracket.dim(); ++degree) {
        const InvariantForm f = rng.form(e.bracket.n(), degree);
        CHECK(oracle::max_diff(CMatrix(Eigen::Map<const CMatrix>(d_mu(e.bracket, f).coeffs().data(),
                                                              static_cast<Eigen::Index>(f.coeffs().size()), 1)),
                               CMatrix(Eigen::Map<const CMatrix>(
                                   oracle::exterior_derivative(e.bracket, f).coeffs().data(),
                                   static_cast<Eigen::Index>(f.coeffs().size()), 1))) < 1e-13);
      }
  }

  SUBCASE("d o d = 0 in every degree") {
    oracle::Rng rng(3);
    for (const auto& e : small_catalog())
      for (int degree = 0; degree + 1 < e.bracket.dim(); ++degree) {
        const InvariantForm f = rng.form(e.bracket.n(), degree);
        CHECK(d_mu(e.bracket, d_mu(e.bracket, f)).max_abs() < 1e-12);
      }
  }

  SUBCASE("solvable coframe: d zeta1 = -1/2 zeta^{12} + 1/2 zeta^{1 2bar}, d zeta2 = 0") {
    const LieBracket mu = solvable_2414().bracket;
    InvariantForm z1(2, 1), z2(2, 1);
    z1[bits({0})] = 1.0;
    z2[bits({1})] = 1.0;
    const InvariantForm d1 = d_mu(mu, z1);
    for (unsigned m : d1.masks()) {
      const Complex expected = m == bits({0, 1}) ? Complex(-0.5) : m == bits({0, 3}) ? Complex(0.5) : Complex(0);
      CHECK(std::abs(d1[m] - expected) < 1e-16);
    }
    CHECK(d_mu(mu, z2).max_abs() < 1e-16);
  }

  SUBCASE("bidegree bookkeeping: no leakage for integrable brackets") {
    oracle::Rng rng(4);
    for (const auto& e : small_catalog()) {
      const int n = e.bracket.n();
      for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n && p + q < 2 * n; ++q) {
          const InvariantForm f = rng.form(n, p + q).bidegree_part(p, q);
          const InvariantForm df = d_mu(e.bracket, f);
          const InvariantForm kept = df.bidegree_part(p + 1, q) + df.bidegree_part(p, q + 1);
          CHECK((df - kept).max_abs() < 1e-12);
        }
    }
  }
}

TEST_CASE("dolbeault_split") {
  SUBCASE("solvable: d zeta1 splits into -1/2 zeta^{12} and 1/2 zeta^{1 2bar}") {
    InvariantForm z1(2, 1);
    z1[bits({0})] = 1.0;
    const DolbeaultPair s = dolbeault_split(solvable_2414().bracket, z1);
    CHECK(std::abs(s.partial[bits({0, 1})] + 0.5) < 1e-16);
    CHECK(std::abs(s.partial_bar[bits({0, 3})] - 0.5) < 1e-16);
    CHECK(std::abs(s.partial.max_abs() - 0.5) < 1e-16);
    CHECK(std::abs(s.partial_bar.max_abs() - 0.5) < 1e-16);
  }

  SUBCASE("abelian: both parts vanish") {
    oracle::Rng rng(5);
    const DolbeaultPair s = dolbeault_split(LieBracket(2), rng.form(2, 2).bidegree_part(1, 1));
    CHECK(s.partial.max_abs() == 0.0);
    CHECK(s.partial_bar.max_abs() == 0.0);
  }

  SUBCASE("heisenberg: dbar d omega0 vanishes, checked with the brute-force differential") {
    const LieBracket mu = heisenberg_kt().bracket;
    const InvariantForm w = fundamental_form(HermitianMetric::identity(2));
    const InvariantForm dw = oracle::exterior_derivative(mu, w);
    const InvariantForm ddw = oracle::exterior_derivative(mu, dw.bidegree_part(2, 1));
    CHECK(ddw.bidegree_part(2, 2).max_abs() < 1e-15);
    const DolbeaultPair s = dolbeault_split(mu, w);
    CHECK((s.partial - dw.bidegree_part(2, 1)).max_abs() < 1e-15);
    CHECK((s.partial_bar - dw.bidegree_part(1, 2)).max_abs() < 1e-15);
  }

  SUBCASE("errors") {
    CVector v = CVector::Zero(4);
    v(2) = 0.7;
    LieBracket bad(2);
    bad.set(0, 1, v);
    InvariantForm z3(2, 1);
    z3[bits({2})] = 1.0;
    CHECK_THROWS_AS(dolbeault_split(bad, z3), IntegrabilityError);
    oracle::Rng rng(6);
    CHECK_THROWS_AS(dolbeault_split(heisenberg_kt().bracket, rng.form(2, 2)), ValidationError);
  }
}

TEST_CASE("codifferential") {
  SUBCASE("abelian: zero") {
    oracle::Rng rng(7);
    for (int degree = 1; degree <= 4; ++degree)
      CHECK(codifferential(LieBracket(2), HermitianMetric(rng.positive(2)), rng.form(2, degree)).max_abs() == 0.0);
  }

  SUBCASE("adjointness on heisenberg, 50 random pairs") {
    oracle::Rng rng(8);
    const LieBracket mu = heisenberg_kt().bracket;
    const HermitianMetric g(rng.positive(2));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int degree = trial % 4;
      const InvariantForm a = rng.form(2, degree), b = rng.form(2, degree + 1);
      worst = std::max(worst, std::abs(form_inner(g, d_mu(mu, a), b) - form_inner(g, a, codifferential(mu, g, b))));
    }
    CHECK(worst < 1e-12);
  }

  SUBCASE("adjointness on every catalog algebra with random metrics") {
    oracle::Rng rng(9);
    for (const auto& e : small_catalog()) {
      const int n = e.bracket.n();
      for (const auto& g : oracle::metrics(rng, n, 4))
        for (int degree = 0; degree + 1 < e.bracket.dim(); ++degree) {
          const InvariantForm a = rng.form(n, degree), b = rng.form(n, degree + 1);
          const Complex lhs = form_inner(g, d_mu(e.bracket, a), b);
          const Complex rhs = form_inner(g, a, codifferential(e.bracket, g, b));
          CHECK(std::abs(lhs - rhs) < 1e-12 * std::max(1.0, std::abs(lhs)));
        }
    }
  }

  SUBCASE("heisenberg: d* omega0 is nonzero and vanishes off the center") {
    const LieBracket mu = heisenberg_kt().bracket;
    const InvariantForm ds = codifferential(mu, HermitianMetric::identity(2), fundamental_form(HermitianMetric::identity(2)));
    CHECK(ds.max_abs() > 0.1);
    CHECK(std::abs(ds[1u << 0]) < 1e-15);
    CHECK(std::abs(ds[1u << 2]) < 1e-15);
  }
}

TEST_CASE("skt_defect") {
  oracle::Rng rng(10);
  SUBCASE("heisenberg is SKT for every metric") {
    for (const auto& g : oracle::metrics(rng, 2, 10)) CHECK(skt_defect(heisenberg_kt().bracket, g) < 1e-14);
  }
  SUBCASE("torus") { CHECK(skt_defect(LieBracket(3), HermitianMetric(rng.positive(3))) == 0.0); }
  SUBCASE("iwasawa bracket is not SKT; value from the brute-force double differential") {
    const LieBracket mu = iwasawa();
    const HermitianMetric g = HermitianMetric::identity(3);
    const InvariantForm dw = oracle::exterior_derivative(mu, fundamental_form(g));
    const double brute = oracle::exterior_derivative(mu, dw.bidegree_part(2, 1)).bidegree_part(2, 2).max_abs();
    CHECK(brute > 0.1);
    CHECK(skt_defect(mu, g) == doctest::Approx(brute).epsilon(1e-14));
  }
  SUBCASE("invariant under simultaneous change of bracket and metric") {
    for (const auto& e : {heisenberg_kt(), inoue_s0(), random_2step_skt(3, 5)}) {
      const int n = e.bracket.n();
      for (int trial = 0; trial < 5; ++trial) {
        const CMatrix h = rng.invertible(n);
        const CMatrix g = rng.positive(n);
        // (mu, g) is isometric to (h.mu, h^{-T} g h^{-H}): Z_r -> h Z_r.
        const CMatrix hinv = h.inverse();
        const CMatrix moved = hinv.transpose() * g * hinv.conjugate();
        CHECK(std::abs(skt_defect(e.bracket, HermitianMetric(g)) - skt_defect(act(h, e.bracket), HermitianMetric(moved))) <
              1e-10);
      }
    }
    // the max-norm is frame dependent, so only vanishing is invariant
    const LieBracket mu = iwasawa();
    const CMatrix h = rng.invertible(3), g = rng.positive(3);
    const CMatrix hinv = h.inverse();
    CHECK(skt_defect(mu, HermitianMetric(g)) > 1e-3);
    CHECK(skt_defect(act(h, mu), HermitianMetric(hinv.transpose() * g * hinv.conjugate())) > 1e-3);
  }
}

TEST_CASE("lee_form") {
  oracle::Rng rng(11);
  CHECK(lee_form(LieBracket(2), HermitianMetric(rng.positive(2))).max_abs() == 0.0);

  SUBCASE("heisenberg: theta vanishes on the complement of the center") {
    for (const auto& g : oracle::metrics(rng, 2, 5)) {
      const InvariantForm theta = lee_form(heisenberg_kt().bracket, g);
      const RMatrix gr = g.real_matrix();
      const RMatrix zb = real_basis(center(heisenberg_kt().bracket), 2);
      const RMatrix q = RMatrix::Identity(4, 4) - g_orthogonal_projector(zb, gr);
      const std::vector<double> t = real_tensor(theta);
      const RVector tv = Eigen::Map<const RVector>(t.data(), 4);
      CHECK((q.transpose() * tv).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("Inoue: d(J theta) = rho^C - rho^B, g(J theta, alpha) = g(omega, d alpha)") {
    const LieBracket mu = inoue_s0().bracket;
    const HermitianMetric g = HermitianMetric::identity(2);
    const InvariantForm theta = lee_form(mu, g);
    CHECK(theta.max_abs() > 0.1);
    const RicciForms rf = ricci_forms(mu, g);
    CHECK((d_mu(mu, apply_J(theta)) - (rf.rho_c - rho_b(mu, g))).max_abs() < 1e-12);
    const InvariantForm w = fundamental_form(g);
    for (int trial = 0; trial < 5; ++trial) {
      const InvariantForm alpha = rng.form(2, 1, true);
      CHECK(std::abs(form_inner(g, alpha, apply_J(theta)) - form_inner(g, d_mu(mu, alpha), w)) < 1e-12);
    }
  }
}

TEST_CASE("taming_margin") {
  CHECK(taming_margin(TamedForm{HermitianMetric::identity(2), CMatrix::Zero(2, 2)}) == doctest::Approx(1.0));
  CHECK(taming_margin(*torus(2).tamed_seed) == doctest::Approx(1.0));

  SUBCASE("eigenvalues (2, 0.5) with arbitrary beta give 0.5; beta leaves the margin bit-identical") {
    oracle::Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix u = rng.unitary(2);
      CMatrix d = CMatrix::Zero(2, 2);
      d(0, 0) = 2.0;
      d(1, 1) = 0.5;
      const HermitianMetric g(u * d * u.adjoint());
      CMatrix beta = rng.matrix(2, 2);
      beta = beta - beta.transpose().eval();
      const double m0 = taming_margin(TamedForm{g, CMatrix::Zero(2, 2)});
      CHECK(m0 == doctest::Approx(0.5).epsilon(1e-13));
      CHECK(taming_margin(TamedForm{g, beta}) == m0);
      CHECK(taming_margin(to_form(TamedForm{g, 5.0 * beta})) == doctest::Approx(m0).epsilon(1e-13));
    }
  }
}

TEST_CASE("closedness_defect") {
  oracle::Rng rng(13);
  SUBCASE("abelian: zero for any constant form") {
    CMatrix beta = rng.matrix(3, 3);
    beta = beta - beta.transpose().eval();
    CHECK(closedness_defect(LieBracket(3), TamedForm{HermitianMetric(rng.positive(3)), beta}).total == 0.0);
  }

  const LieBracket mu = solvable_2414().bracket;
  SUBCASE("solvable form with w = i z is closed") {
    for (const Complex z : {Complex(0.3), Complex(0.1, 0.2), Complex(-0.4, 0.05)}) {
      const ClosednessReport r = closedness_defect(mu, solvable_form(1.2, 0.9, z, Complex(0, 1) * z));
      CHECK(r.total < 1e-15);
    }
  }

  SUBCASE("w != i z: defect equals the brute-force |d Omega| and the residuals") {
    const TamedForm f = solvable_form(1.0, 1.0, 0.3, 0.5);
    const ClosednessReport r = closedness_defect(mu, f);
    const double brute = oracle::exterior_derivative(mu, to_form(f)).max_abs();
    CHECK(brute > 0.1);
    CHECK(r.total == doctest::Approx(brute).epsilon(1e-14));
    CHECK(r.total == doctest::Approx(std::max(r.residual_11, r.residual_beta)).epsilon(1e-14));
  }

  SUBCASE("residual split on random tamed data over a 3-dimensional algebra") {
    const LieBracket m3 = random_2step_skt(3, 2).bracket;
    CMatrix beta = rng.matrix(3, 3);
    beta = beta - beta.transpose().eval();
    const TamedForm f{HermitianMetric(rng.positive(3)), beta};
    const ClosednessReport r = closedness_defect(m3, f);
    const InvariantForm d = oracle::exterior_derivative(m3, to_form(f));
    CHECK(r.residual_11 == doctest::Approx(d.bidegree_part(2, 1).max_abs()).epsilon(1e-13));
    CHECK(r.residual_beta == doctest::Approx(d.bidegree_part(3, 0).max_abs()).epsilon(1e-13));
    CHECK(r.total == doctest::Approx(d.max_abs()).epsilon(1e-13));
  }
}

TEST_CASE("real tensors round trip") {
  oracle::Rng rng(14);
  for (int degree = 1; degree <= 3; ++degree) {
    const InvariantForm f = rng.form(2, degree, true);
    CHECK((form_from_real(2, degree, real_tensor(f)) - f).max_abs() < 1e-14);
  }
  const InvariantForm w = rng.form(3, 2, true);
  CHECK((form_from_real_matrix(real_matrix(w)) - w).max_abs() < 1e-14);
}
