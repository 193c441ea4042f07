#include "sktflow/lie_core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace sktflow {

namespace {

// out[A][B][C] = sum in(E,A) in(F,B) c[E][F][D] out(C,D)
std::vector<Complex> transform3(const std::vector<Complex>& c, int m, const CMatrix& in,
                                const CMatrix& out) {
  const std::size_t mm = static_cast<std::size_t>(m);
  std::vector<Complex> t1(mm * mm * mm, Complex{}), t2(mm * mm * mm, Complex{});
  for (int e = 0; e < m; ++e)
    for (int a = 0; a < m; ++a) {
      const Complex w = in(e, a);
      if (w == Complex{}) continue;
      for (std::size_t fd = 0; fd < mm * mm; ++fd) t1[a * mm * mm + fd] += w * c[e * mm * mm + fd];
    }
  for (int a = 0; a < m; ++a)
    for (int f = 0; f < m; ++f)
      for (int b = 0; b < m; ++b) {
        const Complex w = in(f, b);
        if (w == Complex{}) continue;
        for (int d = 0; d < m; ++d) t2[(a * mm + b) * mm + d] += w * t1[(a * mm + f) * mm + d];
      }
  std::vector<Complex> r(mm * mm * mm, Complex{});
  for (std::size_t ab = 0; ab < mm * mm; ++ab)
    for (int cc = 0; cc < m; ++cc) {
      Complex s{};
      for (int d = 0; d < m; ++d) s += out(cc, d) * t2[ab * mm + d];
      r[ab * mm + cc] = s;
    }
  return r;
}

// Orthonormal basis of the span of `vectors`, singular values <= threshold dropped.
CMatrix orthonormal_span(const CMatrix& vectors, double threshold) {
  if (vectors.cols() == 0) return CMatrix(vectors.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(vectors, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > threshold) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

LieBracket::LieBracket(int n) : n_(n) {
  if (n < 1) throw ValidationError("LieBracket: complex dimension must be positive");
  const std::size_t m = static_cast<std::size_t>(2 * n);
  coeffs_.assign(m * m * m, Complex{});
}

void LieBracket::set(int a, int b, const CVector& v) {
  const int m = dim();
  if (v.size() != m) throw ValidationError("LieBracket::set: vector has wrong length");
  if (a == b) {
    if (v.cwiseAbs().maxCoeff() > 0) throw ValidationError("LieBracket::set: mu(X, X) must vanish");
    return;
  }
  const int ab = conj_index(a, n_), bb = conj_index(b, n_);
  const bool self_conjugate = (ab == b && bb == a);
  for (int c = 0; c < m; ++c) {
    coeffs_[index(a, b, c)] = v(c);
    coeffs_[index(b, a, c)] = -v(c);
  }
  for (int c = 0; c < m; ++c) {
    const int cb = conj_index(c, n_);
    const Complex w = std::conj(v(c));
    if (self_conjugate) {
      // mu(Zbar_b, Zbar_a) = -mu(Z_a, Z_b) must already hold.
      if (std::abs(coeffs_[index(ab, bb, cb)] - w) > 1e-12 * (1.0 + std::abs(w)))
        throw ValidationError("LieBracket::set: self-conjugate pair violates reality");
      continue;
    }
    coeffs_[index(ab, bb, cb)] = w;
    coeffs_[index(bb, ab, cb)] = -w;
  }
}

CVector LieBracket::apply(const CVector& x, const CVector& y) const {
  const int m = dim();
  CVector r = CVector::Zero(m);
  for (int a = 0; a < m; ++a) {
    if (x(a) == Complex{}) continue;
    for (int b = 0; b < m; ++b) {
      const Complex w = x(a) * y(b);
      if (w == Complex{}) continue;
      for (int c = 0; c < m; ++c) r(c) += w * coeffs_[index(a, b, c)];
    }
  }
  return r;
}

CVector LieBracket::bracket_of(int a, int b) const {
  const int m = dim();
  CVector r(m);
  for (int c = 0; c < m; ++c) r(c) = coeffs_[index(a, b, c)];
  return r;
}

LieBracket LieBracket::symmetrized() const {
  const int m = dim();
  LieBracket out(n_);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const int ab = conj_index(a, n_), bb = conj_index(b, n_), cb = conj_index(c, n_);
        const Complex v = 0.25 * ((*this)(a, b, c) - (*this)(b, a, c) +
                                  std::conj((*this)(ab, bb, cb)) - std::conj((*this)(bb, ab, cb)));
        out.coeffs_[index(a, b, c)] = v;
      }
  return out;
}

double LieBracket::structure_defect() const {
  const int m = dim();
  double worst = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const Complex v = (*this)(a, b, c);
        worst = std::max(worst, std::abs(v + (*this)(b, a, c)));
        worst = std::max(worst, std::abs(std::conj(v) -
                                          (*this)(conj_index(a, n_), conj_index(b, n_), conj_index(c, n_))));
      }
  return worst;
}

double LieBracket::max_abs() const {
  double worst = 0.0;
  for (const auto& v : coeffs_) worst = std::max(worst, std::abs(v));
  return worst;
}

LieBracket& LieBracket::operator+=(const LieBracket& o) {
  if (o.n_ != n_) throw ValidationError("LieBracket: dimension mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

LieBracket& LieBracket::operator*=(double s) {
  for (auto& v : coeffs_) v *= s;
  return *this;
}

LieBracket operator-(const LieBracket& a, const LieBracket& b) {
  if (a.n_ != b.n_) throw ValidationError("LieBracket: dimension mismatch");
  LieBracket r = a;
  for (std::size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] -= b.coeffs_[i];
  return r;
}

double jacobi_defect(const LieBracket& mu) {
  const int m = mu.dim();
  // dd[(A*m+B)*m+C] = mu(mu(Z_A, Z_B), Z_C)
  std::vector<CVector> dd(static_cast<std::size_t>(m) * m * m, CVector::Zero(m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d) {
        const Complex w = mu(a, b, d);
        if (w == Complex{}) continue;
        for (int c = 0; c < m; ++c)
          for (int e = 0; e < m; ++e) dd[(a * m + b) * m + c](e) += w * mu(d, c, e);
      }
  double worst = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const CVector s = dd[(a * m + b) * m + c] + dd[(b * m + c) * m + a] + dd[(c * m + a) * m + b];
        worst = std::max(worst, s.cwiseAbs().maxCoeff());
      }
  return worst;
}

std::optional<int> nilpotency_step(const LieBracket& mu, double tol) {
  const int m = mu.dim();
  const double threshold = tol * std::max(mu.max_abs(), 1e-300);
  CMatrix current = CMatrix::Identity(m, m);
  int previous_dim = m;
  for (int k = 1; k <= m; ++k) {
    CMatrix images(m, current.cols() * m);
    for (int i = 0; i < current.cols(); ++i)
      for (int b = 0; b < m; ++b) {
        CVector zb = CVector::Zero(m);
        zb(b) = 1.0;
        images.col(i * m + b) = mu.apply(current.col(i), zb);
      }
    current = orthonormal_span(images, threshold);
    if (current.cols() == 0) return k;
    if (current.cols() == previous_dim) return std::nullopt;
    previous_dim = static_cast<int>(current.cols());
  }
  return std::nullopt;
}

Subspace center(const LieBracket& mu, double tol) {
  const int m = mu.dim();
  CMatrix stacked(m * m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) stacked(b * m + c, a) = mu(a, b, c);
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * smax && smax > 0) ++rank;
  return Subspace{svd.matrixV().rightCols(m - rank)};
}

Subspace derived_algebra(const LieBracket& mu, double tol) {
  const int m = mu.dim();
  CMatrix images(m, m * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) images.col(a * m + b) = mu.bracket_of(a, b);
  return Subspace{orthonormal_span(images, tol * std::max(mu.max_abs(), 1e-300))};
}

double nijenhuis_defect(const LieBracket& mu) {
  const int n = mu.n(), m = mu.dim();
  auto phase = [n](int a) { return is_holomorphic(a, n) ? kI : -kI; };
  double worst = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const Complex factor = phase(a) * phase(b) - phase(c) * phase(a) - phase(c) * phase(b) - 1.0;
        worst = std::max(worst, std::abs(mu(a, b, c) * factor));
      }
  return worst;
}

CMatrix complexify(const CMatrix& h) {
  const int n = static_cast<int>(h.rows());
  CMatrix hc = CMatrix::Zero(2 * n, 2 * n);
  hc.topLeftCorner(n, n) = h;
  hc.bottomRightCorner(n, n) = h.conjugate();
  return hc;
}

LieBracket act(const CMatrix& h, const LieBracket& mu, double max_condition) {
  const int n = mu.n();
  if (h.rows() != n || h.cols() != n) throw ValidationError("act: h must be n x n");
  Eigen::JacobiSVD<CMatrix> svd(h);
  const auto& s = svd.singularValues();
  if (s(n - 1) <= 0.0 || s(0) / s(n - 1) > max_condition)
    throw SingularTransformError("act: basis change is singular or ill-conditioned");
  const CMatrix hc = complexify(h);
  const CMatrix hinv = complexify(h.inverse());
  LieBracket out(n);
  out.mutable_coeffs() = transform3(mu.coeffs(), mu.dim(), hinv, hc);
  return out.symmetrized();
}

double bracket_norm_sq(const LieBracket& mu) {
  double s = 0.0;
  for (const auto& v : mu.coeffs()) s += std::norm(v);
  return s;
}

double bracket_inner(const LieBracket& a, const LieBracket& b) {
  if (a.n() != b.n()) throw ValidationError("bracket_inner: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) s += std::real(std::conj(a.coeffs()[i]) * b.coeffs()[i]);
  return s;
}

double max_principal_angle(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim()) return std::acos(0.0);
  if (a.dim() == 0) return 0.0;
  // sine of the largest angle = ||(I - A A^H) B||_2
  const CMatrix residual = b.basis - a.basis * (a.basis.adjoint() * b.basis);
  Eigen::JacobiSVD<CMatrix> svd(residual);
  return std::asin(std::min(1.0, svd.singularValues()(0)));
}

Subspace span_of(const CMatrix& vectors, double tol) {
  if (vectors.cols() == 0) return Subspace{CMatrix(vectors.rows(), 0)};
  Eigen::JacobiSVD<CMatrix> svd(vectors);
  const double smax = svd.singularValues()(0);
  return Subspace{orthonormal_span(vectors, tol * smax)};
}

CMatrix frame_for(const RMatrix& J) {
  const int m = static_cast<int>(J.rows());
  if (m == 0 || J.cols() != m || m % 2 != 0) throw ValidationError("complex structure must be square of even size");
  if ((J * J + RMatrix::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("complex structure does not satisfy J^2 = -1");
  const int n = m / 2;
  std::vector<int> chosen;
  RMatrix span(m, 0);
  for (int i = 0; i < m && static_cast<int>(chosen.size()) < n; ++i) {
    RMatrix trial(m, span.cols() + 2);
    trial << span, RMatrix::Identity(m, m).col(i), J.col(i);
    Eigen::FullPivLU<RMatrix> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.cols()) {
      chosen.push_back(i);
      span = trial;
    }
  }
  CMatrix frame(m, m);
  for (int k = 0; k < n; ++k) {
    const RVector v = RMatrix::Identity(m, m).col(chosen[k]);
    const RVector jv = J * v;
    frame.col(k) = 0.5 * (v.cast<Complex>() - kI * jv.cast<Complex>());
    frame.col(n + k) = frame.col(k).conjugate();
  }
  return frame;
}

RMatrix standard_complex_structure(int n) {
  RMatrix j = RMatrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    j(n + k, k) = 1.0;
    j(k, n + k) = -1.0;
  }
  return j;
}

CMatrix adapted_frame(int n) { return frame_for(standard_complex_structure(n)); }

LieBracket from_real_structure(const RealStructure& rs) {
  const int m = rs.dim;
  if (m <= 0 || m % 2 != 0) throw ValidationError("real structure: dimension must be positive and even");
  if (static_cast<int>(rs.c.size()) != m * m * m) throw ValidationError("real structure: tensor size mismatch");
  if (rs.complex_structure.rows() != m || rs.complex_structure.cols() != m)
    throw ValidationError("real structure: complex structure has wrong size");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        if (std::abs(rs.at(i, j, k) + rs.at(j, i, k)) > 1e-12)
          throw ValidationError("real structure: constants are not antisymmetric");
  const CMatrix frame = frame_for(rs.complex_structure);
  std::vector<Complex> c(rs.c.begin(), rs.c.end());
  LieBracket out(m / 2);
  out.mutable_coeffs() = transform3(c, m, frame, frame.inverse());
  return out.symmetrized();
}

RealStructure to_real_structure(const LieBracket& mu) {
  const int n = mu.n(), m = mu.dim();
  const CMatrix frame = adapted_frame(n);
  const std::vector<Complex> r = transform3(mu.coeffs(), m, frame.inverse(), frame);
  RealStructure rs;
  rs.dim = m;
  rs.c.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) rs.c[i] = r[i].real();
  rs.complex_structure = standard_complex_structure(n);
  return rs;
}

}  // namespace sktflow
