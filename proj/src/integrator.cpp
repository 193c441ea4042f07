#include "sktflow/integrator.hpp"

#include <algorithm>

namespace sktflow {

namespace {

double max_norm(const CVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

CVector rk4_with_k1(const Field& f, const CVector& y, const CVector& k1, double h) {
  const CVector k2 = f(y + (0.5 * h) * k1);
  const CVector k3 = f(y + (0.5 * h) * k2);
  const CVector k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool advance(const Field& f, const CVector& y, double h, int depth, const StepControl& control,
             StepResult& out, CVector& result) {
  const CVector k1 = f(y);
  const CVector full = rk4_with_k1(f, y, k1, h);
  const CVector mid = rk4_with_k1(f, y, k1, 0.5 * h);
  const CVector half = rk4_step(f, mid, 0.5 * h);
  const double err = max_norm(full - half);
  const double scale = std::max(max_norm(y), max_norm(half));
  if (half.allFinite() && err <= control.rel_tol * scale) {
    out.error = std::max(out.error, err);
    out.halvings = std::max(out.halvings, depth);
    result = half;
    return true;
  }
  if (depth >= control.max_halvings) return false;
  CVector first;
  if (!advance(f, y, 0.5 * h, depth + 1, control, out, first)) return false;
  return advance(f, first, 0.5 * h, depth + 1, control, out, result);
}

}  // namespace

CVector rk4_step(const Field& f, const CVector& y, double h) { return rk4_with_k1(f, y, f(y), h); }

StepResult step(const Field& f, const CVector& y, double dt, const StepControl& control, const Restore& restore) {
  StepResult out;
  CVector result;
  out.accepted = advance(f, y, dt, 0, control, out, result);
  out.state = out.accepted ? result : y;
  if (out.accepted && restore) restore(out.state);
  return out;
}

}  // namespace sktflow
