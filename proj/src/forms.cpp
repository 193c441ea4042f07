#include "sktflow/forms.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace sktflow {

namespace {

constexpr int kMaxDim = 16;

// Sorts `idx` ascending and returns the sign of the permutation, 0 on repeats.
int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  return sign;
}

unsigned mask_of(const std::vector<int>& sorted) {
  unsigned m = 0;
  for (int i : sorted) m |= 1u << i;
  return m;
}

std::vector<int> indices_of(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

// Number of pairs (i in a, j in b) with i > j.
int crossing_parity(unsigned a, unsigned b) {
  int count = 0;
  for (unsigned rest = b; rest; rest &= rest - 1) {
    const unsigned low = rest & (~rest + 1);
    count += std::popcount(a & ~((low << 1) - 1));
  }
  return count & 1;
}

int jphase_sign(int a, int n) { return is_holomorphic(a, n) ? 1 : -1; }

// out[b_1..b_r] = sum_a M(a_1, b_1) ... M(a_r, b_r) in[a_1..a_r], all indices in [0, m).
std::vector<Complex> contract_slots(const std::vector<Complex>& in, int r, int m, const CMatrix& M) {
  std::vector<Complex> cur = in;
  std::size_t stride = 1;
  for (int s = 0; s < r; ++s) stride *= m;
  // slot s has stride m^(r-1-s)
  std::size_t slot_stride = stride;
  for (int s = 0; s < r; ++s) {
    slot_stride /= m;
    std::vector<Complex> next(cur.size(), Complex{});
    for (std::size_t flat = 0; flat < cur.size(); ++flat) {
      if (cur[flat] == Complex{}) continue;
      const int a = static_cast<int>((flat / slot_stride) % m);
      const std::size_t base = flat - a * slot_stride;
      for (int b = 0; b < m; ++b) next[base + b * slot_stride] += M(a, b) * cur[flat];
    }
    cur.swap(next);
  }
  return cur;
}

CMatrix gram_matrix(const HermitianMetric& g, int degree) {
  const int n = g.n(), m = 2 * n;
  const CMatrix ginv = g.full().inverse();
  CMatrix k(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) k(a, b) = ginv(conj_index(a, n), b);
  const auto& masks = masks_of_degree(m, degree);
  const int count = static_cast<int>(masks.size());
  CMatrix gram(count, count);
  if (degree == 0) {
    gram(0, 0) = 1.0;
    return gram;
  }
  for (int i = 0; i < count; ++i) {
    const auto ri = indices_of(masks[i]);
    for (int j = 0; j < count; ++j) {
      const auto rj = indices_of(masks[j]);
      CMatrix sub(degree, degree);
      for (int u = 0; u < degree; ++u)
        for (int v = 0; v < degree; ++v) sub(u, v) = k(ri[u], rj[v]);
      gram(i, j) = sub.determinant();
    }
  }
  return gram;
}

CVector pack(const InvariantForm& f) {
  const auto& masks = f.masks();
  CVector v(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) v(i) = f[masks[i]];
  return v;
}

InvariantForm unpack(int n, int degree, const CVector& v) {
  InvariantForm f(n, degree);
  const auto& masks = f.masks();
  for (std::size_t i = 0; i < masks.size(); ++i) f[masks[i]] = v(i);
  return f;
}

}  // namespace

const std::vector<unsigned>& masks_of_degree(int dim, int degree) {
  static const auto table = [] {
    std::array<std::array<std::vector<unsigned>, kMaxDim + 2>, kMaxDim + 1> t;
    for (int d = 0; d <= kMaxDim; ++d)
      for (unsigned mask = 0; mask < (1u << d); ++mask) t[d][std::popcount(mask)].push_back(mask);
    return t;
  }();
  if (dim < 0 || dim > kMaxDim || degree < 0 || degree > kMaxDim + 1)
    throw ValidationError("form dimension out of supported range");
  return table[dim][degree];
}

std::pair<int, int> bidegree_of(unsigned mask, int n) {
  const unsigned low = (1u << n) - 1;
  return {std::popcount(mask & low), std::popcount(mask >> n)};
}

HermitianMetric::HermitianMetric(const CMatrix& g) {
  if (g.rows() == 0 || g.rows() != g.cols()) throw ValidationError("metric must be a nonempty square matrix");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (!g.allFinite()) throw ValidationError("metric has non-finite entries");
  if ((g - g.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw ValidationError("metric is not Hermitian");
  g_ = 0.5 * (g + g.adjoint());
  if (min_eigenvalue() <= 0.0) throw ValidationError("metric is not positive definite");
}

HermitianMetric HermitianMetric::identity(int n) { return HermitianMetric(CMatrix::Identity(n, n)); }

CMatrix HermitianMetric::full() const {
  const int n = this->n();
  CMatrix f = CMatrix::Zero(2 * n, 2 * n);
  f.topRightCorner(n, n) = g_;
  f.bottomLeftCorner(n, n) = g_.transpose();
  return f;
}

RMatrix HermitianMetric::real_matrix() const {
  const CMatrix p = adapted_frame(n()).inverse();
  return (p.transpose() * full() * p).real();
}

double HermitianMetric::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

InvariantForm::InvariantForm(int n, int degree) : n_(n), degree_(degree) {
  if (n < 1 || 2 * n > kMaxDim) throw ValidationError("form: unsupported dimension");
  if (degree < 0 || degree > 2 * n) throw ValidationError("form: degree out of range");
  coeffs_.assign(std::size_t{1} << (2 * n), Complex{});
}

const std::vector<unsigned>& InvariantForm::masks() const { return masks_of_degree(dim(), degree_); }

Complex InvariantForm::evaluate(const std::vector<int>& indices) const {
  if (static_cast<int>(indices.size()) != degree_) throw ValidationError("form: wrong number of arguments");
  std::vector<int> idx = indices;
  const int sign = sort_with_sign(idx);
  if (sign == 0) return {};
  return static_cast<double>(sign) * coeffs_[mask_of(idx)];
}

Complex InvariantForm::evaluate(const std::vector<CVector>& vectors) const {
  if (static_cast<int>(vectors.size()) != degree_) throw ValidationError("form: wrong number of arguments");
  if (degree_ == 0) return coeffs_[0];
  Complex total{};
  CMatrix sub(degree_, degree_);
  for (unsigned mask : masks()) {
    const Complex c = coeffs_[mask];
    if (c == Complex{}) continue;
    const auto rows = indices_of(mask);
    for (int u = 0; u < degree_; ++u)
      for (int v = 0; v < degree_; ++v) sub(u, v) = vectors[v](rows[u]);
    total += c * sub.determinant();
  }
  return total;
}

void InvariantForm::set(const std::vector<int>& indices, Complex value) {
  if (static_cast<int>(indices.size()) != degree_) throw ValidationError("form: wrong number of arguments");
  std::vector<int> idx = indices;
  const int sign = sort_with_sign(idx);
  if (sign == 0) throw ValidationError("form: repeated index");
  coeffs_[mask_of(idx)] = static_cast<double>(sign) * value;
}

InvariantForm InvariantForm::bidegree_part(int p, int q) const {
  InvariantForm out(n_, degree_);
  for (unsigned mask : masks())
    if (bidegree_of(mask, n_) == std::pair{p, q}) out.coeffs_[mask] = coeffs_[mask];
  return out;
}

InvariantForm InvariantForm::conjugate() const {
  InvariantForm out(n_, degree_);
  const unsigned low = (1u << n_) - 1;
  for (unsigned mask : masks()) {
    const auto [p, q] = bidegree_of(mask, n_);
    const unsigned cm = ((mask & low) << n_) | (mask >> n_);
    out.coeffs_[cm] = ((p * q) % 2 ? -1.0 : 1.0) * std::conj(coeffs_[mask]);
  }
  return out;
}

double InvariantForm::reality_defect() const { return (*this - conjugate()).max_abs(); }

double InvariantForm::max_abs() const {
  double worst = 0.0;
  for (const auto& c : coeffs_) worst = std::max(worst, std::abs(c));
  return worst;
}

void InvariantForm::check_compatible(const InvariantForm& o) const {
  if (o.n_ != n_ || o.degree_ != degree_) throw ValidationError("form: incompatible operands");
}

InvariantForm& InvariantForm::operator+=(const InvariantForm& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

InvariantForm& InvariantForm::operator-=(const InvariantForm& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

InvariantForm& InvariantForm::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

InvariantForm wedge(const InvariantForm& a, const InvariantForm& b) {
  if (a.n() != b.n()) throw ValidationError("wedge: dimension mismatch");
  if (a.degree() + b.degree() > a.dim()) return InvariantForm(a.n(), a.dim());
  InvariantForm out(a.n(), a.degree() + b.degree());
  for (unsigned ma : a.masks()) {
    if (a[ma] == Complex{}) continue;
    for (unsigned mb : b.masks()) {
      if ((ma & mb) || b[mb] == Complex{}) continue;
      out[ma | mb] += (crossing_parity(ma, mb) ? -1.0 : 1.0) * a[ma] * b[mb];
    }
  }
  return out;
}

InvariantForm fundamental_form(const HermitianMetric& g) {
  const int n = g.n();
  InvariantForm w(n, 2);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) w[(1u << r) | (1u << (n + k))] = -kI * g.matrix()(r, k);
  return w;
}

CMatrix hermitian_coefficients(const InvariantForm& form) {
  if (form.degree() != 2) throw ValidationError("hermitian_coefficients: need a 2-form");
  const int n = form.n();
  CMatrix out(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out(j, k) = kI * form[(1u << j) | (1u << (n + k))];
  return out;
}

HermitianMetric metric_of(const InvariantForm& omega) {
  if (omega.degree() != 2) throw ValidationError("metric_of: need a 2-form");
  const double scale = std::max(1.0, omega.max_abs());
  if ((omega - omega.bidegree_part(1, 1)).max_abs() > 1e-12 * scale)
    throw ValidationError("metric_of: form is not of type (1,1)");
  return HermitianMetric(hermitian_coefficients(omega));
}

InvariantForm d_mu(const LieBracket& mu, const InvariantForm& form) {
  const int n = mu.n(), m = mu.dim();
  if (form.n() != n) throw ValidationError("d_mu: dimension mismatch");
  const int r = form.degree();
  if (r >= m) return InvariantForm(n, m);
  // d zeta^C = -sum_{A<B} c_ABC zeta^A ^ zeta^B
  struct Term {
    int a, b;
    Complex v;
  };
  std::vector<std::vector<Term>> dzeta(m);
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (mu(a, b, c) != Complex{}) dzeta[c].push_back({a, b, -mu(a, b, c)});

  InvariantForm out(n, r + 1);
  std::vector<int> seq(r + 1);
  for (unsigned mask : form.masks()) {
    const Complex coef = form[mask];
    if (coef == Complex{}) continue;
    const auto idx = indices_of(mask);
    for (int k = 0; k < r; ++k) {
      const double outer = (k % 2) ? -1.0 : 1.0;
      for (const Term& t : dzeta[idx[k]]) {
        int pos = 0;
        for (int i = 0; i < k; ++i) seq[pos++] = idx[i];
        seq[pos++] = t.a;
        seq[pos++] = t.b;
        for (int i = k + 1; i < r; ++i) seq[pos++] = idx[i];
        std::vector<int> sorted = seq;
        const int sign = sort_with_sign(sorted);
        if (sign == 0) continue;
        out[mask_of(sorted)] += outer * sign * t.v * coef;
      }
    }
  }
  return out;
}

DolbeaultPair dolbeault_split(const LieBracket& mu, const InvariantForm& form, double tol) {
  const int n = form.n();
  const double scale = std::max(1.0, form.max_abs());
  int p = -1, q = -1;
  for (unsigned mask : form.masks()) {
    if (std::abs(form[mask]) <= tol * scale) continue;
    const auto bd = bidegree_of(mask, n);
    if (p >= 0 && bd != std::pair{p, q}) throw ValidationError("dolbeault_split: form is not of pure bidegree");
    p = bd.first;
    q = bd.second;
  }
  const InvariantForm d = d_mu(mu, form);
  if (p < 0) return {InvariantForm(n, d.degree()), InvariantForm(n, d.degree())};
  DolbeaultPair out{d.bidegree_part(p + 1, q), d.bidegree_part(p, q + 1)};
  const double leak = (d - out.partial - out.partial_bar).max_abs();
  if (leak > tol * scale * std::max(1.0, mu.max_abs()))
    throw IntegrabilityError("d_mu leaks outside bidegrees (p+1,q) and (p,q+1)");
  return out;
}

Complex form_inner(const HermitianMetric& g, const InvariantForm& a, const InvariantForm& b) {
  if (a.n() != g.n() || b.n() != g.n() || a.degree() != b.degree())
    throw ValidationError("form_inner: incompatible operands");
  const CMatrix gram = gram_matrix(g, a.degree());
  return (pack(a).adjoint() * gram * pack(b))(0, 0);
}

InvariantForm codifferential(const LieBracket& mu, const HermitianMetric& g, const InvariantForm& form) {
  const int n = mu.n(), r = form.degree();
  if (form.n() != n || g.n() != n) throw ValidationError("codifferential: dimension mismatch");
  if (r < 1) throw ValidationError("codifferential: degree must be positive");
  const auto& lower = masks_of_degree(2 * n, r - 1);
  const auto& upper = masks_of_degree(2 * n, r);
  CMatrix d(upper.size(), lower.size());
  for (std::size_t j = 0; j < lower.size(); ++j) {
    InvariantForm basis(n, r - 1);
    basis[lower[j]] = 1.0;
    d.col(j) = pack(d_mu(mu, basis));
  }
  const CMatrix m_lower = gram_matrix(g, r - 1);
  const CMatrix m_upper = gram_matrix(g, r);
  const CVector v = m_lower.partialPivLu().solve(d.adjoint() * (m_upper * pack(form)));
  return unpack(n, r - 1, v);
}

double skt_defect(const LieBracket& mu, const HermitianMetric& g) {
  const DolbeaultPair first = dolbeault_split(mu, fundamental_form(g));
  return dolbeault_split(mu, first.partial).partial_bar.max_abs();
}

InvariantForm apply_J(const InvariantForm& alpha) {
  if (alpha.degree() != 1) throw ValidationError("apply_J: need a 1-form");
  InvariantForm out(alpha.n(), 1);
  for (int a = 0; a < alpha.dim(); ++a) out[1u << a] = (static_cast<double>(jphase_sign(a, alpha.n())) * kI) * alpha[1u << a];
  return out;
}

InvariantForm lee_form(const LieBracket& mu, const HermitianMetric& g) {
  return Complex(-1.0) * apply_J(codifferential(mu, g, fundamental_form(g)));
}

InvariantForm to_form(const TamedForm& omega) {
  const int n = omega.omega.n();
  const CMatrix& b = omega.beta;
  if (b.rows() != n || b.cols() != n) throw ValidationError("tamed form: beta has wrong size");
  if ((b + b.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    throw ValidationError("tamed form: beta is not antisymmetric");
  InvariantForm f = fundamental_form(omega.omega);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Complex v = 0.5 * (b(i, j) - b(j, i));
      f[(1u << i) | (1u << j)] = v;
      f[(1u << (n + i)) | (1u << (n + j))] = std::conj(v);
    }
  return f;
}

CMatrix beta_of(const InvariantForm& form) {
  if (form.degree() != 2) throw ValidationError("beta_of: need a 2-form");
  const int n = form.n();
  CMatrix b = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) b(i, j) = form.evaluate({i, j});
  return b;
}

double taming_margin(const InvariantForm& omega) {
  // the (2,0) + (0,2) part cancels in the symmetrization; dropping it first
  // keeps the margin independent of beta to the last bit
  const RMatrix r = real_matrix(omega.bidegree_part(1, 1));
  const RMatrix j = standard_complex_structure(omega.n());
  const RMatrix pairing = j.transpose() * r;
  // adapted real vectors have g0-length sqrt(2)
  const RMatrix sym = 0.25 * (pairing + pairing.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double taming_margin(const TamedForm& omega) { return taming_margin(fundamental_form(omega.omega)); }

ClosednessReport closedness_defect(const LieBracket& mu, const TamedForm& omega) {
  const InvariantForm d = d_mu(mu, to_form(omega));
  ClosednessReport rep;
  rep.total = d.max_abs();
  rep.residual_11 = d.bidegree_part(2, 1).max_abs();
  rep.residual_beta = d.bidegree_part(3, 0).max_abs();
  return rep;
}

std::vector<double> real_tensor(const InvariantForm& form) {
  const int m = form.dim(), r = form.degree();
  std::size_t size = 1;
  for (int s = 0; s < r; ++s) size *= m;
  std::vector<Complex> full(size, Complex{});
  std::vector<int> idx(r);
  for (std::size_t flat = 0; flat < size; ++flat) {
    std::size_t rest = flat;
    for (int s = r - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rest % m);
      rest /= m;
    }
    full[flat] = form.evaluate(idx);
  }
  const CMatrix p = adapted_frame(form.n()).inverse();
  const auto out = contract_slots(full, r, m, p);
  std::vector<double> real(size);
  for (std::size_t i = 0; i < size; ++i) real[i] = out[i].real();
  return real;
}

InvariantForm form_from_real(int n, int degree, const std::vector<double>& tensor) {
  const int m = 2 * n;
  std::size_t size = 1;
  for (int s = 0; s < degree; ++s) size *= m;
  if (tensor.size() != size) throw ValidationError("form_from_real: tensor has wrong size");
  std::vector<Complex> in(tensor.begin(), tensor.end());
  const auto full = contract_slots(in, degree, m, adapted_frame(n));
  InvariantForm f(n, degree);
  for (unsigned mask : f.masks()) {
    std::size_t flat = 0;
    for (int i : indices_of(mask)) flat = flat * m + i;
    f[mask] = full[flat];
  }
  return f;
}

RMatrix real_matrix(const InvariantForm& form) {
  if (form.degree() != 2) throw ValidationError("real_matrix: need a 2-form");
  const int m = form.dim();
  const auto t = real_tensor(form);
  RMatrix out(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) out(i, j) = t[i * m + j];
  return out;
}

InvariantForm form_from_real_matrix(const RMatrix& mat) {
  const int m = static_cast<int>(mat.rows());
  std::vector<double> t(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) t[i * m + j] = mat(i, j);
  return form_from_real(m / 2, 2, t);
}

}  // namespace sktflow
