#include "sktflow/connections.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace sktflow {

namespace {

double max_abs(const RMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// gamma[i](l, j) from L(i, j, k) = g(nabla_i e_j, e_k)
std::vector<RMatrix> raise_last(const std::vector<double>& lower, int m, const RMatrix& ginv) {
  std::vector<RMatrix> gamma(m, RMatrix::Zero(m, m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const double v = lower[(static_cast<std::size_t>(i) * m + j) * m + k];
        if (v == 0.0) continue;
        for (int l = 0; l < m; ++l) gamma[i](l, j) += v * ginv(k, l);
      }
  return gamma;
}

void require_integrable(const LieBracket& mu) {
  if (nijenhuis_defect(mu) > 1e-10 * std::max(1.0, mu.max_abs()))
    throw IntegrabilityError("J0 is not integrable for this bracket");
}

// iota(w)X for the functional w = g z: v_j = g([X, e_j], z), mapped into xi^perp.
RMatrix iota_matrix(const RealStructure& rs, const RVector& gz, const RMatrix& q, const RMatrix& ginv) {
  const int m = rs.dim;
  RMatrix v = RMatrix::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int l = 0; l < m; ++l) s += rs.at(a, j, l) * gz(l);
      v(j, a) = s;
    }
  return q * ginv * v * q;
}

}  // namespace

Connection levi_civita(const LieBracket& mu, const HermitianMetric& g) {
  const RealStructure rs = to_real_structure(mu);
  const int m = rs.dim;
  const RMatrix gr = g.real_matrix();
  // gm[(i*m + j)] = g(mu(e_i, e_j), e_k) as a row over k
  std::vector<double> gm(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int l = 0; l < m; ++l) s += rs.at(i, j, l) * gr(l, k);
        gm[(static_cast<std::size_t>(i) * m + j) * m + k] = s;
      }
  auto at = [&](int i, int j, int k) { return gm[(static_cast<std::size_t>(i) * m + j) * m + k]; };
  std::vector<double> lower(gm.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        lower[(static_cast<std::size_t>(i) * m + j) * m + k] = 0.5 * (at(i, j, k) - at(j, k, i) + at(k, i, j));
  Connection c;
  c.gamma = raise_last(lower, m, gr.inverse());
  c.metric_compatible = metric_compatibility_defect(c, gr) < 1e-10 * std::max(1.0, mu.max_abs());
  c.j_parallel = j_parallel_defect(c, standard_complex_structure(mu.n())) < 1e-10 * std::max(1.0, mu.max_abs());
  return c;
}

BismutData bismut(const LieBracket& mu, const HermitianMetric& g) {
  require_integrable(mu);
  const int n = mu.n(), m = mu.dim();
  const InvariantForm domega = d_mu(mu, fundamental_form(g));
  // J Z_A = +-i Z_A, so c(Z_A, Z_B, Z_C) = -(j_A j_B j_C) d omega(Z_A, Z_B, Z_C)
  InvariantForm c(n, 3);
  for (unsigned mask : c.masks()) {
    const auto [p, q] = bidegree_of(mask, n);
    Complex phase = 1.0;
    for (int i = 0; i < p; ++i) phase *= kI;
    for (int i = 0; i < q; ++i) phase *= -kI;
    c[mask] = -phase * domega[mask];
  }
  const std::vector<double> ct = real_tensor(c);
  BismutData out{levi_civita(mu, g), c};
  const RMatrix gr = g.real_matrix();
  const auto extra = raise_last(ct, m, gr.inverse());
  for (int i = 0; i < m; ++i) out.connection.gamma[i] += 0.5 * extra[i];
  const double scale = std::max(1.0, mu.max_abs());
  out.connection.metric_compatible = metric_compatibility_defect(out.connection, gr) < 1e-10 * scale;
  out.connection.j_parallel = j_parallel_defect(out.connection, standard_complex_structure(n)) < 1e-10 * scale;
  return out;
}

CurvatureTensor curvature(const Connection& conn, const LieBracket& mu) {
  const RealStructure rs = to_real_structure(mu);
  const int m = conn.dim();
  if (rs.dim != m) throw ValidationError("curvature: dimension mismatch");
  CurvatureTensor r;
  r.dim = m;
  r.blocks.assign(static_cast<std::size_t>(m) * m, RMatrix::Zero(m, m));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      RMatrix block = conn.gamma[a] * conn.gamma[b] - conn.gamma[b] * conn.gamma[a];
      for (int c = 0; c < m; ++c)
        if (rs.at(a, b, c) != 0.0) block -= rs.at(a, b, c) * conn.gamma[c];
      r.blocks[static_cast<std::size_t>(a) * m + b] = block;
      r.blocks[static_cast<std::size_t>(b) * m + a] = -block;
    }
  return r;
}

BilinearForm ricci_trace(const CurvatureTensor& r) {
  const int m = r.dim;
  RMatrix ric = RMatrix::Zero(m, m);
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      for (int k = 0; k < m; ++k) ric(x, y) += r(k, x)(k, y);
  return {ric, max_abs(ric - ric.transpose()) < 1e-12 * std::max(1.0, max_abs(ric))};
}

RicciForms ricci_forms(const LieBracket& mu, const HermitianMetric& g) {
  require_integrable(mu);
  const int n = mu.n(), m = mu.dim();
  const Connection lc = levi_civita(mu, g);
  const BismutData bm = bismut(mu, g);
  const CurvatureTensor rg = curvature(lc, mu);
  const CurvatureTensor rb = curvature(bm.connection, mu);
  const RMatrix j = standard_complex_structure(n);
  RMatrix rho = RMatrix::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) rho(a, b) = -0.5 * (j * rb(a, b)).trace();
  InvariantForm rho_b = form_from_real_matrix(rho);
  const InvariantForm dstar = codifferential(mu, g, fundamental_form(g));
  InvariantForm rho_c = rho_b + d_mu(mu, dstar);
  return {ricci_trace(rg), ricci_trace(rb), rho_b, rho_c};
}

BilinearForm eberlein_oracle(const LieBracket& mu, const HermitianMetric& g) {
  const auto step = nilpotency_step(mu);
  if (!step || *step > 2) throw NotTwoStepError("eberlein_oracle: bracket is not 2-step nilpotent");
  const int m = mu.dim();
  const RealStructure rs = to_real_structure(mu);
  const RMatrix gr = g.real_matrix();
  const RMatrix ginv = gr.inverse();
  const RMatrix zb = real_basis(center(mu), mu.n());
  const RMatrix pz = g_orthogonal_projector(zb, gr);
  const RMatrix q = RMatrix::Identity(m, m) - pz;
  RMatrix ric = RMatrix::Zero(m, m);
  if (zb.cols() == 0) return {ric, true};
  // g-orthonormal center basis
  const Eigen::LLT<RMatrix> llt(zb.transpose() * gr * zb);
  const RMatrix zo = zb * RMatrix(llt.matrixL()).transpose().inverse();
  RMatrix s = RMatrix::Zero(m, m);
  for (int i = 0; i < zo.cols(); ++i) {
    const RMatrix iz = iota_matrix(rs, gr * zo.col(i), q, ginv);
    s += iz * iz;
  }
  ric += 0.5 * q.transpose() * gr * s * q;
  std::vector<RMatrix> iotas(m);
  for (int a = 0; a < m; ++a) iotas[a] = iota_matrix(rs, gr * pz.col(a), q, ginv);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) ric(a, b) -= 0.25 * (iotas[a] * iotas[b]).trace();
  return {ric, max_abs(ric - ric.transpose()) < 1e-12 * std::max(1.0, max_abs(ric))};
}

double metric_compatibility_defect(const Connection& conn, const RMatrix& g) {
  double worst = 0.0;
  for (const auto& gam : conn.gamma) worst = std::max(worst, max_abs(gam.transpose() * g + g * gam));
  return worst;
}

double j_parallel_defect(const Connection& conn, const RMatrix& J) {
  double worst = 0.0;
  for (const auto& gam : conn.gamma) worst = std::max(worst, max_abs(gam * J - J * gam));
  return worst;
}

std::vector<double> torsion_tensor(const Connection& conn, const LieBracket& mu) {
  const RealStructure rs = to_real_structure(mu);
  const int m = conn.dim();
  std::vector<double> t(static_cast<std::size_t>(m) * m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        t[(static_cast<std::size_t>(i) * m + j) * m + k] =
            conn.gamma[i](k, j) - conn.gamma[j](k, i) - rs.at(i, j, k);
  return t;
}

double torsion_skew_defect(const Connection& conn, const LieBracket& mu, const RMatrix& g) {
  const int m = conn.dim();
  const auto t = torsion_tensor(conn, mu);
  auto c = [&](int i, int j, int k) {
    double s = 0.0;
    for (int l = 0; l < m; ++l) s += t[(static_cast<std::size_t>(i) * m + j) * m + l] * g(l, k);
    return s;
  };
  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) worst = std::max(worst, std::abs(c(i, j, k) + c(i, k, j)));
  return worst;
}

RMatrix real_basis(const Subspace& s, int n) {
  const int m = 2 * n;
  if (s.dim() == 0) return RMatrix(m, 0);
  const CMatrix coords = adapted_frame(n) * s.basis;
  RMatrix stacked(m, 2 * s.dim());
  stacked << coords.real(), coords.imag();
  Eigen::JacobiSVD<RMatrix> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

RMatrix g_orthogonal_projector(const RMatrix& basis, const RMatrix& g) {
  if (basis.cols() == 0) return RMatrix::Zero(g.rows(), g.cols());
  return basis * (basis.transpose() * g * basis).ldlt().solve(basis.transpose() * g);
}

RMatrix part_11(const RMatrix& b, const RMatrix& J) { return 0.5 * (b + J.transpose() * b * J); }

}  // namespace sktflow
