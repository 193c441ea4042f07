#ifndef SKTFLOW_INTEGRATOR_HPP
#define SKTFLOW_INTEGRATOR_HPP

#include <functional>

#include "sktflow/types.hpp"

namespace sktflow {

/// Autonomous right-hand side y' = f(y) on a packed complex state.
using Field = std::function<CVector(const CVector&)>;

/// Projection restoring exact structure (Hermitian, antisymmetric, ...).
using Restore = std::function<void(CVector&)>;

struct StepControl {
  double rel_tol = 1e-9;
  int max_halvings = 20;
};

struct StepResult {
  CVector state;
  bool accepted = false;
  int halvings = 0;     // deepest subdivision used
  double error = 0.0;   // largest accepted step-doubling estimate
};

/// One classical fourth-order Runge-Kutta step.
CVector rk4_step(const Field& f, const CVector& y, double h);

/// Advances by `dt` with step-doubling error control: an interval whose
/// full-step and two-half-step results differ by more than
/// rel_tol * max|y| is covered by two halves, recursively. The two-half-step
/// solution is kept. `restore` is applied to the result.
StepResult step(const Field& f, const CVector& y, double dt, const StepControl& control = {},
                const Restore& restore = {});

}  // namespace sktflow

#endif  // SKTFLOW_INTEGRATOR_HPP
