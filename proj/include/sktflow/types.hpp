#ifndef SKTFLOW_TYPES_HPP
#define SKTFLOW_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sktflow {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Default relative tolerance for rank decisions (center, lower central series).
inline constexpr double kRankTol = 1e-9;

// Complexified index convention: for complex dimension n the 2n basis vectors
// are Z_0..Z_{n-1} (type (1,0)) followed by their conjugates. The real adapted
// basis e_0..e_{2n-1} has J0 e_k = e_{n+k} and Z_k = (e_k - i e_{n+k}) / 2.
inline int conj_index(int a, int n) { return a < n ? a + n : a - n; }
inline bool is_holomorphic(int a, int n) { return a < n; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A basis change whose condition number exceeds the configured bound.
class SingularTransformError : public Error {
 public:
  using Error::Error;
};

/// The bracket does not make J0 integrable (Nijenhuis tensor nonzero).
class IntegrabilityError : public Error {
 public:
  using Error::Error;
};

/// An operation restricted to 2-step nilpotent brackets received another.
class NotTwoStepError : public Error {
 public:
  using Error::Error;
};

/// Malformed input: wrong dimensions, non-Hermitian or indefinite metric, etc.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace sktflow

#endif  // SKTFLOW_TYPES_HPP
