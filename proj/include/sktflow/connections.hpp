#ifndef SKTFLOW_CONNECTIONS_HPP
#define SKTFLOW_CONNECTIONS_HPP

#include <vector>

#include "sktflow/forms.hpp"
#include "sktflow/lie_core.hpp"

namespace sktflow {

/// Left-invariant connection on the real adapted basis: gamma[i](k, j) is the
/// e_k component of nabla_{e_i} e_j.
struct Connection {
  std::vector<RMatrix> gamma;
  bool metric_compatible = false;
  bool j_parallel = false;

  int dim() const { return static_cast<int>(gamma.size()); }
};

/// R(e_a, e_b) = [nabla_a, nabla_b] - nabla_{[e_a, e_b]} stored as matrices.
struct CurvatureTensor {
  int dim = 0;
  std::vector<RMatrix> blocks;

  const RMatrix& operator()(int a, int b) const { return blocks[static_cast<std::size_t>(a) * dim + b]; }
};

struct BilinearForm {
  RMatrix matrix;
  bool symmetric = false;
};

Connection levi_civita(const LieBracket& mu, const HermitianMetric& g);

struct BismutData {
  Connection connection;
  InvariantForm torsion;  // c(X, Y, Z) = g(X, T(Y, Z)) = -d omega(JX, JY, JZ)
};

/// Throws IntegrabilityError when J0 is not integrable for mu.
BismutData bismut(const LieBracket& mu, const HermitianMetric& g);

CurvatureTensor curvature(const Connection& conn, const LieBracket& mu);

/// ric(X, Y) = tr(Z -> R(Z, X) Y).
BilinearForm ricci_trace(const CurvatureTensor& r);

struct RicciForms {
  BilinearForm ric_g;
  BilinearForm ric_b;
  InvariantForm rho_b_trace;  // -1/2 tr(J R^B(X, Y))
  InvariantForm rho_c;        // rho^B + d d* omega
};

RicciForms ricci_forms(const LieBracket& mu, const HermitianMetric& g);

/// ric^g of a 2-step nilpotent metric Lie algebra from the iota operators of
/// its center. Throws NotTwoStepError otherwise.
BilinearForm eberlein_oracle(const LieBracket& mu, const HermitianMetric& g);

/// max |g(nabla_X Y, Z) + g(Y, nabla_X Z)| over basis triples.
double metric_compatibility_defect(const Connection& conn, const RMatrix& g);

/// max |nabla_X (J Y) - J nabla_X Y|.
double j_parallel_defect(const Connection& conn, const RMatrix& J);

/// max deviation of g(T(X, Y), Z) from total antisymmetry.
double torsion_skew_defect(const Connection& conn, const LieBracket& mu, const RMatrix& g);

/// Torsion T(e_i, e_j) = nabla_i e_j - nabla_j e_i - [e_i, e_j]; entry
/// [(i * dim + j) * dim + k] is the e_k component.
std::vector<double> torsion_tensor(const Connection& conn, const LieBracket& mu);

/// Real orthonormal (Euclidean) basis of the real points of a conjugation
/// invariant complex subspace, in the adapted real basis.
RMatrix real_basis(const Subspace& s, int n);

/// g-orthogonal projector onto the column span of `basis`.
RMatrix g_orthogonal_projector(const RMatrix& basis, const RMatrix& g);

/// b^{1,1}(X, Y) = (b(X, Y) + b(JX, JY)) / 2.
RMatrix part_11(const RMatrix& b, const RMatrix& J);

}  // namespace sktflow

#endif  // SKTFLOW_CONNECTIONS_HPP
