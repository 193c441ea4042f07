#include "sktflow/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>

#include "sktflow/bismut_ricci.hpp"

namespace sktflow {

namespace {

bool is_solvable(const LieBracket& mu) {
  const int m = mu.dim();
  CMatrix current = CMatrix::Identity(m, m);
  const double threshold = kRankTol * std::max(mu.max_abs(), 1e-300);
  for (int k = 0; k <= m; ++k) {
    if (current.cols() == 0) return true;
    const int d = static_cast<int>(current.cols());
    CMatrix images(m, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) images.col(i * d + j) = mu.apply(current.col(i), current.col(j));
    Eigen::JacobiSVD<CMatrix> svd(images, Eigen::ComputeThinU);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > threshold) ++rank;
    if (rank == d) return false;
    current = svd.matrixU().leftCols(rank);
  }
  return current.cols() == 0;
}

void verify_tags(CatalogEntry& e) {
  const LieBracket& mu = e.bracket;
  const auto step = nilpotency_step(mu);
  if (mu.max_abs() == 0.0) e.tags.push_back("abelian");
  if (step) e.tags.push_back("nilpotent");
  if (step && *step <= 2) e.tags.push_back("two_step");
  if (is_solvable(mu)) e.tags.push_back("solvable");
  if (skt_defect(mu, e.metric_seed) < 1e-10) e.tags.push_back("skt");
  if (d_mu(mu, fundamental_form(e.metric_seed)).max_abs() < 1e-12) e.tags.push_back("kahler");
  if (e.tamed_seed && closedness_defect(mu, *e.tamed_seed).total < 1e-12 && taming_margin(*e.tamed_seed) > 0)
    e.tags.push_back("tamed");
}

CatalogEntry make_entry(std::string name, LieBracket mu, HermitianMetric g) {
  CatalogEntry e{std::move(name), std::move(mu), std::move(g), std::nullopt, {}, {}, {}, {}};
  e.metric_law = [](const CMatrix&, double) { return std::optional<CMatrix>{}; };
  e.bracket_law = [](const LieBracket&, double) { return std::optional<LieBracket>{}; };
  e.tamed_law = [](const TamedState&, double) { return std::optional<TamedState>{}; };
  return e;
}

CVector vec(std::initializer_list<Complex> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto& x : v) out(i++) = x;
  return out;
}

Complex gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

}  // namespace

bool CatalogEntry::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

LieBracket heisenberg_bracket(Complex z) {
  LieBracket mu(2);
  mu.set(0, 2, vec({0.0, z, 0.0, -std::conj(z)}));
  return mu;
}

double heisenberg_x(double x0, double y0, Complex z0, double t) {
  const double zz = std::norm(z0);
  const double d0 = x0 * y0 - zz;
  return (std::sqrt(y0 * y0 * y0 * t + d0 * d0) + zz) / y0;
}

double solvable_radius(double x0, double y0, double r0, double t) {
  if (r0 == 0.0 || t == 0.0) return r0;
  const double x2 = x0 * x0, y2 = y0 * y0;
  auto f = [&](double r) { return y2 * std::log(r / r0) - (r * r - r0 * r0) / (2 * x2) + t / 4; };
  auto df = [&](double r) { return y2 / r - r / x2; };
  // f is increasing on (0, r0] with f(r0) = t/4 > 0
  double lo = r0, hi = r0;
  while (f(lo) > 0) lo *= 0.5;
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double v = f(r);
    if (v > 0) hi = r;
    else lo = r;
    double next = r - v / df(r);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-16 * r) return next;
    r = next;
  }
  return r;
}

CatalogEntry heisenberg_kt() {
  CatalogEntry e = make_entry("heisenberg", heisenberg_bracket(-0.5), HermitianMetric::identity(2));
  e.metric_law = [](const CMatrix& g0, double t) -> std::optional<CMatrix> {
    if (g0.rows() != 2) return std::nullopt;
    CMatrix g = g0;
    g(0, 0) = heisenberg_x(g0(0, 0).real(), g0(1, 1).real(), g0(0, 1), t);
    return g;
  };
  e.bracket_law = [](const LieBracket& mu0, double t) -> std::optional<LieBracket> {
    if (mu0.n() != 2) return std::nullopt;
    const Complex z0 = mu0(0, 2, 1);
    const LieBracket expected = heisenberg_bracket(z0);
    for (std::size_t i = 0; i < mu0.coeffs().size(); ++i)
      if (std::abs(mu0.coeffs()[i] - expected.coeffs()[i]) > 1e-14 * std::max(1.0, std::abs(z0))) return std::nullopt;
    // dz/dt = -2 |z|^2 z keeps the phase
    return heisenberg_bracket(z0 / std::sqrt(1.0 + 4.0 * std::norm(z0) * t));
  };
  verify_tags(e);
  return e;
}

CatalogEntry inoue_s0(double a, double b) {
  if (a == 0.0 || b == 0.0) throw ValidationError("inoue_s0: parameters a and b must be nonzero");
  const Complex lambda(b / 2, a / 2);
  LieBracket mu(2);
  mu.set(0, 1, vec({lambda, 0.0, 0.0, 0.0}));
  mu.set(0, 3, vec({-lambda, 0.0, 0.0, 0.0}));
  mu.set(1, 3, vec({0.0, a * kI, 0.0, a * kI}));
  CatalogEntry e = make_entry("inoue_s0", mu, HermitianMetric::identity(2));
  e.metric_law = [a](const CMatrix& g0, double t) -> std::optional<CMatrix> {
    if (g0.rows() != 2 || std::abs(g0(0, 1)) > 0.0) return std::nullopt;
    CMatrix g = g0;
    g(1, 1) += 3 * a * a * t;
    return g;
  };
  verify_tags(e);
  return e;
}

CatalogEntry solvable_2414() {
  LieBracket mu(2);
  mu.set(0, 3, vec({-0.5, 0.0, 0.0, 0.0}));
  mu.set(0, 1, vec({0.5, 0.0, 0.0, 0.0}));
  CMatrix g(2, 2);
  g << 1.0, 0.3, 0.3, 1.0;
  CatalogEntry e = make_entry("solvable_2414", mu, HermitianMetric(g));
  CMatrix beta = CMatrix::Zero(2, 2);
  beta(0, 1) = 0.3 * kI;
  beta(1, 0) = -0.3 * kI;
  e.tamed_seed = TamedForm{HermitianMetric(g), beta};
  auto evolve = [](const CMatrix& g0, double t) {
    const double x0 = std::sqrt(g0(0, 0).real()), y0 = std::sqrt(g0(1, 1).real());
    const double r0 = std::abs(g0(0, 1));
    CMatrix g = g0;
    if (r0 > 0) {
      g(0, 1) *= solvable_radius(x0, y0, r0, t) / r0;
      g(1, 0) = std::conj(g(0, 1));
    }
    return g;
  };
  e.metric_law = [evolve](const CMatrix& g0, double t) -> std::optional<CMatrix> {
    if (g0.rows() != 2) return std::nullopt;
    return evolve(g0, t);
  };
  e.tamed_law = [evolve](const TamedState& s0, double t) -> std::optional<TamedState> {
    if (s0.g.rows() != 2 || std::abs(s0.beta(0, 1) - kI * s0.g(0, 1)) > 1e-12) return std::nullopt;
    TamedState s{evolve(s0.g, t), s0.beta};
    s.beta(0, 1) = kI * s.g(0, 1);
    s.beta(1, 0) = -s.beta(0, 1);
    return s;
  };
  verify_tags(e);
  return e;
}

CatalogEntry torus(int n) {
  if (n < 1) throw ValidationError("torus: n must be at least 1");
  CatalogEntry e = make_entry("torus", LieBracket(n), HermitianMetric::identity(n));
  CMatrix beta = CMatrix::Zero(n, n);
  if (n >= 2) {
    beta(0, 1) = 1.0;
    beta(1, 0) = -1.0;
  }
  e.tamed_seed = TamedForm{HermitianMetric::identity(n), beta};
  e.metric_law = [](const CMatrix& g0, double) { return std::optional<CMatrix>{g0}; };
  e.bracket_law = [](const LieBracket& mu0, double) -> std::optional<LieBracket> {
    if (mu0.max_abs() != 0.0) return std::nullopt;
    return mu0;
  };
  e.tamed_law = [](const TamedState& s0, double) { return std::optional<TamedState>{s0}; };
  verify_tags(e);
  return e;
}

CatalogEntry random_2step_skt(int n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("random_2step_skt: n must be at least 2");
  std::mt19937_64 rng(seed);
  const HermitianMetric id = HermitianMetric::identity(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const int perp = std::uniform_int_distribution<int>(1, n - 1)(rng);
    LieBracket mu(n);
    for (int c = perp; c < n; ++c) {
      // sigma = beta + lambda alpha ^ conj(alpha) on the complement; mu = -sigma into Z_c
      CVector alpha(perp);
      for (int a = 0; a < perp; ++a) alpha(a) = gaussian(rng);
      const double lambda = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
      CMatrix sigma = CMatrix::Zero(2 * n, 2 * n);
      for (int a = 0; a < perp; ++a)
        for (int b = 0; b < perp; ++b) {
          const Complex v = lambda * alpha(a) * std::conj(alpha(b));
          sigma(a, n + b) += v;
          sigma(n + b, a) -= v;
        }
      for (int a = 0; a < perp; ++a)
        for (int b = a + 1; b < perp; ++b) {
          const Complex v = 0.5 * gaussian(rng);
          sigma(a, b) += v;
          sigma(b, a) -= v;
        }
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
          if (sigma(a, b) == Complex{}) continue;
          mu.set_raw(a, b, c, -sigma(a, b));
          mu.set_raw(conj_index(a, n), conj_index(b, n), n + c, -std::conj(sigma(a, b)));
        }
    }
    CMatrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = gaussian(rng);
    const CMatrix unitary = Eigen::HouseholderQR<CMatrix>(q).householderQ();
    mu = act(unitary, mu.symmetrized());
    mu *= 1.0 / std::sqrt(bracket_norm_sq(mu));

    if (mu.structure_defect() > 1e-12 || jacobi_defect(mu) > 1e-10 || nijenhuis_defect(mu) > 1e-10) continue;
    const auto step = nilpotency_step(mu);
    if (!step || *step != 2) continue;
    if (skt_defect(mu, id) > 1e-10) continue;
    const Subspace xi = center(mu);
    CMatrix jm = CMatrix::Zero(2 * n, 2 * n);
    for (int a = 0; a < 2 * n; ++a) jm(a, a) = is_holomorphic(a, n) ? kI : -kI;
    const CMatrix leak = jm * xi.basis - xi.basis * (xi.basis.adjoint() * jm * xi.basis);
    if (leak.size() && leak.cwiseAbs().maxCoeff() > 1e-10) continue;
    CatalogEntry e = make_entry("random_2step_skt", mu, id);
    verify_tags(e);
    return e;
  }
  throw Error("random_2step_skt: rejection budget exhausted");
}

CatalogEntry lookup(const std::string& name, const std::map<std::string, double>& params) {
  auto param = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto integer = [&](const std::string& key, double fallback) {
    const double v = param(key, fallback);
    if (v != std::floor(v)) throw ValidationError("catalog parameter '" + key + "' must be an integer");
    return v;
  };
  if (name == "heisenberg" || name == "heisenberg_kt") return heisenberg_kt();
  if (name == "inoue_s0") return inoue_s0(param("a", 1.0), param("b", 1.0));
  if (name == "solvable_2414") return solvable_2414();
  if (name == "torus") return torus(static_cast<int>(integer("n", 2)));
  if (name == "random_2step_skt")
    return random_2step_skt(static_cast<int>(integer("n", 3)), static_cast<std::uint64_t>(integer("seed", 0)));
  throw ValidationError("unknown catalog entry: " + name);
}

std::vector<CatalogListing> list_entries() {
  return {
      {"heisenberg", "", "h3 + R, the nilpotent SKT algebra in complex dimension 2"},
      {"inoue_s0", "a, b (nonzero, default 1, 1)", "Inoue S0 solvable algebra"},
      {"solvable_2414", "", "solvable algebra (24, -14, 0, 0) with a tamed symplectic seed"},
      {"torus", "n (default 2)", "abelian C^n, flat Kahler"},
      {"random_2step_skt", "n (default 3), seed (default 0)", "random 2-step nilpotent SKT bracket"},
  };
}

}  // namespace sktflow
