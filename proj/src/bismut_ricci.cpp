#include "sktflow/bismut_ricci.hpp"

#include <algorithm>
#include <cmath>

namespace sktflow {

namespace {

void require_integrable(const LieBracket& mu) {
  if (nijenhuis_defect(mu) > 1e-10 * std::max(1.0, mu.max_abs()))
    throw IntegrabilityError("J0 is not integrable for this bracket");
}

CVector eta_values(const LieBracket& mu, const CMatrix& g) {
  const int n = mu.n();
  const CMatrix ginv = g.inverse();
  // tr_k = sum_{k,r} (g^-1)_{kr} mu(Z_r, Zbar_k)
  CVector trace = CVector::Zero(2 * n);
  for (int k = 0; k < n; ++k)
    for (int r = 0; r < n; ++r) {
      const Complex w = ginv(k, r);
      for (int c = 0; c < 2 * n; ++c) trace(c) += w * mu(r, n + k, c);
    }
  CVector out(2 * n);
  for (int a = 0; a < n; ++a) {
    Complex s{};
    // g(V, Zbar_k) = sum_c V_c g(c, k); g(V, Z_a) = sum_c V_{n+c} g(a, c)
    for (int k = 0; k < n; ++k)
      for (int r = 0; r < n; ++r) {
        Complex gv{};
        for (int c = 0; c < n; ++c) gv += mu(a, r, c) * g(c, k);
        s += -kI * ginv(k, r) * gv;
      }
    Complex gt{};
    for (int c = 0; c < n; ++c) gt += trace(n + c) * g(a, c);
    s += kI * gt;
    out(a) = s;
    out(n + a) = std::conj(s);
  }
  return out;
}

CMatrix eleven_block(const CMatrix& values, int n) {
  // R_ab = i rho(Z_a, Zbar_b)
  return kI * values.topRightCorner(n, n);
}

}  // namespace

InvariantForm eta(const LieBracket& mu, const HermitianMetric& g) {
  require_integrable(mu);
  if (g.n() != mu.n()) throw ValidationError("eta: dimension mismatch");
  const CVector v = eta_values(mu, g.matrix());
  InvariantForm f(mu.n(), 1);
  for (int a = 0; a < mu.dim(); ++a) f[1u << a] = v(a);
  return f;
}

InvariantForm rho_b(const LieBracket& mu, const HermitianMetric& g) { return d_mu(mu, eta(mu, g)); }

CMatrix rho_b_values(const LieBracket& mu, const CMatrix& g) {
  const int m = mu.dim();
  const CVector e = eta_values(mu, g);
  CMatrix out = CMatrix::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      Complex s{};
      for (int c = 0; c < m; ++c) s -= mu(a, b, c) * e(c);
      out(a, b) = s;
      out(b, a) = -s;
    }
  return out;
}

InvariantForm rho_b_2step(const LieBracket& mu, const HermitianMetric& g) {
  const auto step = nilpotency_step(mu);
  if (!step || *step > 2) throw NotTwoStepError("rho_b_2step: bracket is not 2-step nilpotent");
  const int n = mu.n(), m = mu.dim();
  const CMatrix ginv = g.matrix().inverse();
  const CMatrix gf = g.full();
  CVector trace = CVector::Zero(m);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) trace += ginv(k, r) * mu.bracket_of(r, n + k);
  InvariantForm f(n, 2);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      const CVector v = mu.bracket_of(a, b);
      f[(1u << a) | (1u << b)] = -kI * (v.transpose() * gf * trace)(0, 0);
    }
  return f;
}

RMatrix Endomorphism::real() const {
  const int n = static_cast<int>(p.rows());
  const CMatrix frame = adapted_frame(n);
  return (frame * complexify(p) * frame.inverse()).real();
}

CMatrix p_matrix(const LieBracket& mu0, const CMatrix& g) {
  const CMatrix r = eleven_block(rho_b_values(mu0, g), mu0.n());
  return g.transpose().partialPivLu().solve(r.transpose());
}

Endomorphism p_of_bracket(const LieBracket& mu) {
  require_integrable(mu);
  const int n = mu.n();
  return {eleven_block(rho_b_values(mu, CMatrix::Identity(n, n)), n).transpose()};
}

Endomorphism p_of_metric(const LieBracket& mu0, const HermitianMetric& g) {
  require_integrable(mu0);
  if (g.n() != mu0.n()) throw ValidationError("p_of_metric: dimension mismatch");
  return {p_matrix(mu0, g.matrix())};
}

double bismut_scalar(const LieBracket& mu) {
  CVector s = CVector::Zero(mu.dim());
  for (int r = 0; r < mu.n(); ++r) s += mu.bracket_of(r, mu.n() + r);
  return -s.squaredNorm();
}

double static_defect(const LieBracket& mu, const HermitianMetric& g, double r) {
  const InvariantForm rho11 = rho_b(mu, g).bidegree_part(1, 1);
  return (Complex(r) * fundamental_form(g) - rho11).max_abs();
}

StaticFit static_fit(const LieBracket& mu, const HermitianMetric& g) {
  const InvariantForm rho11 = rho_b(mu, g).bidegree_part(1, 1);
  const InvariantForm w = fundamental_form(g);
  double num = 0.0, den = 0.0;
  for (unsigned mask : w.masks()) {
    num += std::real(std::conj(w[mask]) * rho11[mask]);
    den += std::norm(w[mask]);
  }
  StaticFit fit;
  fit.r = num / den;
  fit.residual = (Complex(fit.r) * w - rho11).max_abs();
  return fit;
}

}  // namespace sktflow
