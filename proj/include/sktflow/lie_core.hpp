#ifndef SKTFLOW_LIE_CORE_HPP
#define SKTFLOW_LIE_CORE_HPP

#include <optional>
#include <vector>

#include "sktflow/types.hpp"

namespace sktflow {

/// Structure constants of a Lie bracket on the complexification of a real
/// 2n-dimensional algebra, written in the adapted frame {Z_a, Z_abar}.
///
/// Entry (A, B, C) is the Z_C coefficient of mu(Z_A, Z_B). Stored tensors are
/// always antisymmetric in (A, B) and real (conj(c_ABC) = c_{Abar Bbar Cbar})
/// when built through `set` or `symmetrized`; Jacobi is never assumed.
class LieBracket {
 public:
  explicit LieBracket(int n);

  int n() const { return n_; }
  int dim() const { return 2 * n_; }

  Complex operator()(int a, int b, int c) const { return coeffs_[index(a, b, c)]; }

  /// Sets mu(Z_a, Z_b) = v and completes the entries forced by antisymmetry and
  /// reality. `v` has 2n complex coordinates.
  void set(int a, int b, const CVector& v);

  /// Raw write of a single entry, no symmetry completion.
  void set_raw(int a, int b, int c, Complex v) { coeffs_[index(a, b, c)] = v; }

  /// mu(x, y) for complexified vectors given in the Z-frame.
  CVector apply(const CVector& x, const CVector& y) const;

  /// The vector mu(Z_a, Z_b).
  CVector bracket_of(int a, int b) const;

  /// Projection onto antisymmetric, real tensors.
  LieBracket symmetrized() const;

  /// Max-norm distance from antisymmetry and reality.
  double structure_defect() const;

  double max_abs() const;

  const std::vector<Complex>& coeffs() const { return coeffs_; }
  std::vector<Complex>& mutable_coeffs() { return coeffs_; }

  LieBracket& operator+=(const LieBracket& o);
  LieBracket& operator*=(double s);
  friend LieBracket operator-(const LieBracket& a, const LieBracket& b);

 private:
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * dim() + b) * dim() + c;
  }
  int n_;
  std::vector<Complex> coeffs_;
};

/// A complex-linear subspace of the complexified algebra; `basis` columns are
/// orthonormal in the standard Hermitian product of the Z-frame.
struct Subspace {
  CMatrix basis;
  int dim() const { return static_cast<int>(basis.cols()); }
};

double jacobi_defect(const LieBracket& mu);

/// Smallest k such that the (k+1)-fold bracket [[..[g,g],..],g] vanishes.
std::optional<int> nilpotency_step(const LieBracket& mu, double tol = kRankTol);

/// Kernel of X -> mu(X, .), singular values below tol * sigma_max dropped.
Subspace center(const LieBracket& mu, double tol = kRankTol);

/// Span of all brackets mu(X, Y).
Subspace derived_algebra(const LieBracket& mu, double tol = kRankTol);

double nijenhuis_defect(const LieBracket& mu);

/// Block diag(h, conj(h)): the complexification of a J0-linear map.
CMatrix complexify(const CMatrix& h);

/// h.mu (X, Y) = h mu(h^-1 X, h^-1 Y) for h in GL(n, C).
LieBracket act(const CMatrix& h, const LieBracket& mu, double max_condition = 1e12);

/// Sum over ordered pairs of a g0-orthonormal real basis of |mu(E_i, E_j)|^2.
double bracket_norm_sq(const LieBracket& mu);

/// Real inner product <a, b> matching `bracket_norm_sq`.
double bracket_inner(const LieBracket& a, const LieBracket& b);

/// Largest principal angle between two subspaces (radians); pi/2 when the
/// dimensions differ.
double max_principal_angle(const Subspace& a, const Subspace& b);

/// Orthonormal basis of the column span of `vectors`.
Subspace span_of(const CMatrix& vectors, double tol = kRankTol);

/// Real structure constants on R^dim: c[(i*dim + j)*dim + k] is the e_k
/// coefficient of mu(e_i, e_j); `complex_structure` is J with J^2 = -1.
struct RealStructure {
  int dim = 0;
  std::vector<double> c;
  RMatrix complex_structure;

  double& at(int i, int j, int k) { return c[(static_cast<std::size_t>(i) * dim + j) * dim + k]; }
  double at(int i, int j, int k) const { return c[(static_cast<std::size_t>(i) * dim + j) * dim + k]; }
};

/// Columns are Z_0..Z_{n-1}, conj(Z_0).. in the real basis of `J`, with
/// Z_k = (v_k - i J v_k)/2 for the first basis vectors v_k completing a
/// J-basis. Throws ValidationError when J^2 != -1.
CMatrix frame_for(const RMatrix& J);

/// The frame matrix of the adapted basis (J = J0).
CMatrix adapted_frame(int n);

/// J0 in the real adapted basis.
RMatrix standard_complex_structure(int n);

LieBracket from_real_structure(const RealStructure& rs);

/// Structure constants in the real adapted basis, J = J0.
RealStructure to_real_structure(const LieBracket& mu);

}  // namespace sktflow

#endif  // SKTFLOW_LIE_CORE_HPP
