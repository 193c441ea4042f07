#ifndef SKTFLOW_FORMS_HPP
#define SKTFLOW_FORMS_HPP

#include <utility>
#include <vector>

#include "sktflow/lie_core.hpp"
#include "sktflow/types.hpp"

namespace sktflow {

/// Positive-definite Hermitian matrix g_{r kbar} = g(Z_r, Zbar_k) in the
/// adapted (1,0)-frame. The complex-bilinear extension has g(Z_r, Z_k) = 0.
class HermitianMetric {
 public:
  /// Throws ValidationError unless g is square, Hermitian (relative 1e-10)
  /// and positive definite. The stored matrix is exactly Hermitian.
  explicit HermitianMetric(const CMatrix& g);

  static HermitianMetric identity(int n);

  int n() const { return static_cast<int>(g_.rows()); }
  const CMatrix& matrix() const { return g_; }

  /// Complex-bilinear metric on the 2n complexified frame: [[0, g], [g^T, 0]].
  CMatrix full() const;

  /// Real symmetric metric in the adapted real basis e_0..e_{2n-1}.
  RMatrix real_matrix() const;

  double min_eigenvalue() const;

 private:
  CMatrix g_;
};

/// Left-invariant complex r-form on the complexified algebra. The coefficient
/// of zeta^{A_1} ^ ... ^ zeta^{A_r} (A_1 < ... < A_r) is stored at the bitmask
/// with bits A_1..A_r set. Bits below n are (1,0) covectors.
/// Evaluation follows the determinant convention: (zeta^a ^ zeta^b)(Z_a, Z_b) = 1.
class InvariantForm {
 public:
  InvariantForm(int n, int degree);

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  int degree() const { return degree_; }

  Complex operator[](unsigned mask) const { return coeffs_[mask]; }
  Complex& operator[](unsigned mask) { return coeffs_[mask]; }

  /// Value on (Z_{i_1}, ..., Z_{i_r}); indices in any order.
  Complex evaluate(const std::vector<int>& indices) const;

  /// Value on arbitrary complexified vectors (Z-frame coordinates).
  Complex evaluate(const std::vector<CVector>& vectors) const;

  /// Sets the value on (Z_{i_1}, ..., Z_{i_r}); indices in any order.
  void set(const std::vector<int>& indices, Complex value);

  InvariantForm bidegree_part(int p, int q) const;
  InvariantForm conjugate() const;

  /// Max distance between the form and its complex conjugate.
  double reality_defect() const;
  bool is_real(double tol = 1e-12) const { return reality_defect() <= tol; }

  double max_abs() const;

  /// Bitmasks of the basis forms of this degree, ascending.
  const std::vector<unsigned>& masks() const;

  const std::vector<Complex>& coeffs() const { return coeffs_; }

  InvariantForm& operator+=(const InvariantForm& o);
  InvariantForm& operator-=(const InvariantForm& o);
  InvariantForm& operator*=(Complex s);
  friend InvariantForm operator+(InvariantForm a, const InvariantForm& b) { return a += b; }
  friend InvariantForm operator-(InvariantForm a, const InvariantForm& b) { return a -= b; }
  friend InvariantForm operator*(Complex s, InvariantForm a) { return a *= s; }

 private:
  void check_compatible(const InvariantForm& o) const;
  int n_;
  int degree_;
  std::vector<Complex> coeffs_;
};

/// Bitmasks with `degree` bits among the low `dim` bits, ascending.
const std::vector<unsigned>& masks_of_degree(int dim, int degree);

std::pair<int, int> bidegree_of(unsigned mask, int n);

InvariantForm wedge(const InvariantForm& a, const InvariantForm& b);

/// omega = -i sum g_{r kbar} zeta^r ^ zeta^kbar.
InvariantForm fundamental_form(const HermitianMetric& g);

/// The matrix F_{j kbar} = i F(Z_j, Zbar_k) of a 2-form; for omega this is g.
CMatrix hermitian_coefficients(const InvariantForm& form);

/// Inverse of `fundamental_form`; throws ValidationError when the (1,1) part
/// is not positive or the form has other components.
HermitianMetric metric_of(const InvariantForm& omega);

/// Chevalley-Eilenberg differential: d gamma(X_0..X_r) =
/// sum_{i<j} (-1)^{i+j} gamma(mu(X_i, X_j), X_0, .., X_r) with hats omitted.
InvariantForm d_mu(const LieBracket& mu, const InvariantForm& form);

struct DolbeaultPair {
  InvariantForm partial;      // (p+1, q)
  InvariantForm partial_bar;  // (p, q+1)
};

/// Splits d_mu of a pure (p,q)-form. Throws IntegrabilityError when other
/// bidegrees exceed `tol` (relative to the form and bracket scale).
DolbeaultPair dolbeault_split(const LieBracket& mu, const InvariantForm& form, double tol = 1e-10);

/// Hermitian inner product of forms induced by g; counts each unordered basis
/// form once (orthonormal coframe expansion over increasing multi-indices).
Complex form_inner(const HermitianMetric& g, const InvariantForm& a, const InvariantForm& b);

/// Adjoint of d_mu with respect to `form_inner`.
InvariantForm codifferential(const LieBracket& mu, const HermitianMetric& g, const InvariantForm& form);

/// Max-norm of dbar d omega.
double skt_defect(const LieBracket& mu, const HermitianMetric& g);

/// (J alpha)(X) = alpha(J X) on 1-forms.
InvariantForm apply_J(const InvariantForm& alpha);

/// theta = -J d* omega.
InvariantForm lee_form(const LieBracket& mu, const HermitianMetric& g);

/// Omega = omega + beta + conj(beta); beta_{ij} = beta(Z_i, Z_j).
struct TamedForm {
  HermitianMetric omega;
  CMatrix beta;
};

InvariantForm to_form(const TamedForm& omega);

/// Antisymmetric n x n matrix of (2,0) values Omega(Z_i, Z_j).
CMatrix beta_of(const InvariantForm& form);

/// Smallest eigenvalue of the symmetric part of (X, Y) -> Omega(JX, Y) in a
/// g0-orthonormal real basis.
double taming_margin(const TamedForm& omega);
double taming_margin(const InvariantForm& omega);

struct ClosednessReport {
  double total = 0.0;         // max |d Omega|
  double residual_11 = 0.0;   // max |d omega + dbar beta|, the (2,1) part
  double residual_beta = 0.0; // max |d beta|, the (3,0) part
};

ClosednessReport closedness_defect(const LieBracket& mu, const TamedForm& omega);

/// Full antisymmetric tensor of a form on the real adapted basis, row-major
/// over degree indices; the imaginary part is discarded.
std::vector<double> real_tensor(const InvariantForm& form);

/// Inverse of `real_tensor` for an antisymmetric real tensor.
InvariantForm form_from_real(int n, int degree, const std::vector<double>& tensor);

/// 2-form as a real matrix F(e_i, e_j).
RMatrix real_matrix(const InvariantForm& form);
InvariantForm form_from_real_matrix(const RMatrix& m);

}  // namespace sktflow

#endif  // SKTFLOW_FORMS_HPP
