#ifndef SKTFLOW_BISMUT_RICCI_HPP
#define SKTFLOW_BISMUT_RICCI_HPP

#include "sktflow/forms.hpp"
#include "sktflow/lie_core.hpp"

namespace sktflow {

/// Real 1-form with rho^B = d eta:
///   eta_a = -i g^{kbar r} g(mu(Z_a, Z_r), Zbar_k) + i g^{kbar r} g(mu(Z_r, Zbar_k), Z_a),
///   eta_abar = conj(eta_a), where g^{kbar r} = (g^-1)_{kr}.
InvariantForm eta(const LieBracket& mu, const HermitianMetric& g);

/// Bismut Ricci form d_mu(eta).
InvariantForm rho_b(const LieBracket& mu, const HermitianMetric& g);

/// The values rho^B(Z_A, Z_B) = -eta(mu(Z_A, Z_B)) for a raw metric matrix,
/// without validation. Used on hot paths.
CMatrix rho_b_values(const LieBracket& mu, const CMatrix& g);

/// rho^B(X, Y) = -i g^{rbar k} g(mu(X, Y), mu(Z_r, Zbar_k)), valid for
/// 2-step nilpotent brackets. Throws NotTwoStepError otherwise.
InvariantForm rho_b_2step(const LieBracket& mu, const HermitianMetric& g);

/// A J0-commuting endomorphism stored by its action on T^{1,0}:
/// P Z_b = sum_a p(a, b) Z_a.
struct Endomorphism {
  CMatrix p;

  /// The 2n x 2n real matrix on the adapted real basis.
  RMatrix real() const;

  /// Frobenius norm squared of `real()` in a g0-orthonormal basis.
  double norm_sq() const { return 2.0 * p.squaredNorm(); }
};

/// omega0(P_mu X, Y) = (rho^B_mu)^{1,1}(X, Y) with the standard metric.
Endomorphism p_of_bracket(const LieBracket& mu);

/// omega(P X, Y) = (rho^B)^{1,1}(omega)(X, Y) with rho^B computed for (mu0, g).
Endomorphism p_of_metric(const LieBracket& mu0, const HermitianMetric& g);

/// Same as the above for a raw metric matrix (hot path).
CMatrix p_matrix(const LieBracket& mu0, const CMatrix& g);

/// b_mu = -|sum_r mu(Z_r, Zbar_r)|^2 in the standard metric.
double bismut_scalar(const LieBracket& mu);

/// max-norm of r omega - (rho^B)^{1,1}.
double static_defect(const LieBracket& mu, const HermitianMetric& g, double r);

struct StaticFit {
  double r = 0.0;
  double residual = 0.0;  // static_defect at the least-squares r
};

StaticFit static_fit(const LieBracket& mu, const HermitianMetric& g);

}  // namespace sktflow

#endif  // SKTFLOW_BISMUT_RICCI_HPP
