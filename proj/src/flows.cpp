#include "sktflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>

#include "sktflow/bismut_ricci.hpp"

namespace sktflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Channel {
  kSkt,
  kCenterAngle,
  kMinEigenvalue,
  kBracketNorm,
  kClosedness,
  kClosednessDrift,
  kTaming,
  kJacobi,
  kNijenhuis,
  kGauge,
  kReduced,
  kChannelCount
};

void put(CVector& y, Eigen::Index offset, const CMatrix& m) {
  y.segment(offset, m.size()) = Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix take(const CVector& y, Eigen::Index offset, int rows, int cols) {
  return Eigen::Map<const CMatrix>(y.data() + offset, rows, cols);
}

void put_bracket(CVector& y, Eigen::Index offset, const LieBracket& mu) {
  const auto& c = mu.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) y(offset + static_cast<Eigen::Index>(i)) = c[i];
}

LieBracket take_bracket(const CVector& y, Eigen::Index offset, int n) {
  LieBracket mu(n);
  auto& c = mu.mutable_coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = y(offset + static_cast<Eigen::Index>(i));
  return mu;
}

Eigen::Index bracket_size(int n) { return static_cast<Eigen::Index>(8) * n * n * n; }

double min_eig(const CMatrix& g) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

CMatrix p_standard(const LieBracket& mu) {
  const int n = mu.n();
  const CMatrix values = rho_b_values(mu, CMatrix::Identity(n, n));
  return (kI * values.topRightCorner(n, n)).transpose();
}

double relative_diff(const CMatrix& a, const CMatrix& b) {
  const double scale = a.cwiseAbs().maxCoeff();
  const double d = (a - b).cwiseAbs().maxCoeff();
  return scale > 0 ? d / scale : d;
}

double bracket_relative_diff(const LieBracket& a, const LieBracket& b) {
  const double scale = a.max_abs();
  const double d = (a - b).max_abs();
  return scale > 0 ? d / scale : d;
}

bool is_two_step(const LieBracket& mu) {
  const auto s = nilpotency_step(mu);
  return s && *s <= 2;
}

double reduced_defect(const LieBracket& mu0, const HermitianMetric& g) {
  const InvariantForm rho11 = rho_b(mu0, g).bidegree_part(1, 1);
  const InvariantForm dd = d_mu(mu0, codifferential(mu0, g, fundamental_form(g))).bidegree_part(1, 1);
  return (Complex(-1.0) * rho11 - dd).max_abs();
}

template <typename F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct Problem {
  FlowKind kind;
  Field field;
  Restore restore;
  CVector y0;
  std::function<FlowState(const CVector&)> decode;
  std::function<std::vector<double>(const FlowState&)> monitor;
  std::function<std::optional<Termination>(const CVector&)> check;
};

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ValidationError("integrator: dt must be positive");
  if (!(cfg.t_end > 0.0)) throw ValidationError("integrator: t_end must be positive");
  if (cfg.sample_every < 1) throw ValidationError("integrator: sample_every must be at least 1");
  if (!(cfg.positivity_floor > 0.0)) throw ValidationError("integrator: positivity_floor must be positive");
  if (!(cfg.rel_tol > 0.0)) throw ValidationError("integrator: rel_tol must be positive");
  if (cfg.max_halvings < 0) throw ValidationError("integrator: max_halvings must be nonnegative");
}

FlowTrajectory integrate(const Problem& prob, const IntegratorConfig& cfg, double direction = 1.0) {
  validate(cfg);
  FlowTrajectory traj;
  traj.kind = prob.kind;
  traj.monitors.assign(kChannelCount, {});
  auto sample = [&](double t, const CVector& y) {
    FlowState s = prob.decode(y);
    const auto values = prob.monitor(s);
    traj.times.push_back(t);
    traj.states.push_back(std::move(s));
    for (int c = 0; c < kChannelCount; ++c) traj.monitors[c].push_back(values[c]);
  };
  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
  const double h = cfg.t_end / static_cast<double>(steps);
  const StepControl control{cfg.rel_tol, cfg.max_halvings};
  const Field field = direction > 0 ? prob.field : Field([&](const CVector& y) { return CVector(-prob.field(y)); });
  CVector y = prob.y0;
  sample(0.0, y);
  double t = 0.0;
  for (long k = 1; k <= steps; ++k) {
    StepResult r = step(field, y, h, control, prob.restore);
    if (!r.accepted) {
      traj.termination = Termination::StepRejected;
      if (t > traj.times.back()) sample(t, y);
      break;
    }
    y = std::move(r.state);
    t = static_cast<double>(k) * h;
    if (auto stop = prob.check(y)) {
      traj.termination = *stop;
      sample(t, y);
      break;
    }
    if (k % cfg.sample_every == 0 || k == steps) sample(t, y);
  }
  traj.t_final = traj.times.back();
  return traj;
}

std::vector<double> empty_monitors() { return std::vector<double>(kChannelCount, kNaN); }

Restore hermitian_restore(int n, Eigen::Index offset) {
  return [n, offset](CVector& y) {
    const CMatrix g = take(y, offset, n, n);
    put(y, offset, 0.5 * (g + g.adjoint()));
  };
}

}  // namespace

const char* to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::Pluriclosed: return "pluriclosed";
    case FlowKind::Bracket: return "bracket";
    case FlowKind::BracketGauged: return "bracket-gauged";
    case FlowKind::HermitianSymplectic: return "hs";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedEnd: return "reached_t_end";
    case Termination::PositivityFloor: return "positivity_floor";
    case Termination::StepRejected: return "step_rejected";
    case Termination::TamingLost: return "taming_lost";
  }
  return "unknown";
}

const std::vector<std::string>& monitor_channels() {
  static const std::vector<std::string> names = {
      "skt_defect",    "center_principal_angle", "min_eigenvalue", "bracket_norm_sq",
      "closedness_defect", "closedness_drift",   "taming_margin",  "jacobi_defect",
      "nijenhuis_defect",  "gauge_defect",       "reduced_flow_defect"};
  return names;
}

const std::vector<double>& FlowTrajectory::channel(const std::string& name) const {
  const auto& names = monitor_channels();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ValidationError("unknown monitor channel: " + name);
  return monitors[static_cast<std::size_t>(it - names.begin())];
}

CMatrix pluriclosed_field(const LieBracket& mu0, const CMatrix& g) {
  const int n = mu0.n();
  return -kI * rho_b_values(mu0, g).topRightCorner(n, n);
}

CMatrix beta_field(const LieBracket& mu0, const CMatrix& g) {
  const int n = mu0.n();
  return -rho_b_values(mu0, g).topLeftCorner(n, n);
}

LieBracket delta(const LieBracket& mu, const CMatrix& alpha) {
  const int m = mu.dim();
  const CMatrix a = complexify(alpha);
  LieBracket out(mu.n());
  auto& c = out.mutable_coeffs();
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      for (int z = 0; z < m; ++z) {
        Complex s{};
        for (int d = 0; d < m; ++d) s += a(d, x) * mu(d, y, z) + a(d, y) * mu(x, d, z) - mu(x, y, d) * a(z, d);
        c[(static_cast<std::size_t>(x) * m + y) * m + z] = s;
      }
  return out;
}

LieBracket bracket_field(const LieBracket& mu) {
  LieBracket d = delta(mu, p_standard(mu));
  d *= 0.5;
  return d;
}

FlowTrajectory pluriclosed_flow(const LieBracket& mu0, const HermitianMetric& g0, const IntegratorConfig& cfg) {
  const int n = mu0.n();
  if (g0.n() != n) throw ValidationError("pluriclosed_flow: dimension mismatch");
  if (nijenhuis_defect(mu0) > 1e-10 * std::max(1.0, mu0.max_abs()))
    throw IntegrabilityError("pluriclosed_flow: bracket is not integrable");
  const bool two_step = is_two_step(mu0);
  const double floor = cfg.positivity_floor * g0.min_eigenvalue();
  Problem p;
  p.kind = FlowKind::Pluriclosed;
  p.y0 = CVector(n * n);
  put(p.y0, 0, g0.matrix());
  p.field = [&mu0, n](const CVector& y) {
    CVector out(n * n);
    put(out, 0, pluriclosed_field(mu0, take(y, 0, n, n)));
    return out;
  };
  p.restore = hermitian_restore(n, 0);
  p.decode = [n](const CVector& y) { return FlowState{MetricState{take(y, 0, n, n)}}; };
  p.monitor = [&mu0, two_step](const FlowState& s) {
    auto v = empty_monitors();
    const CMatrix& g = std::get<MetricState>(s).g;
    v[kMinEigenvalue] = min_eig(g);
    if (v[kMinEigenvalue] > 0) {
      const HermitianMetric hg(g);
      v[kSkt] = guarded([&] { return skt_defect(mu0, hg); });
      if (two_step) v[kReduced] = guarded([&] { return reduced_defect(mu0, hg); });
    }
    return v;
  };
  p.check = [n, floor](const CVector& y) -> std::optional<Termination> {
    if (min_eig(take(y, 0, n, n)) <= floor) return Termination::PositivityFloor;
    return std::nullopt;
  };
  return integrate(p, cfg);
}

FlowTrajectory bracket_flow(const LieBracket& mu0, const IntegratorConfig& cfg, bool with_gauge) {
  const int n = mu0.n();
  if (nijenhuis_defect(mu0) > 1e-10 * std::max(1.0, mu0.max_abs()))
    throw IntegrabilityError("bracket_flow: bracket is not integrable");
  const Eigen::Index bs = bracket_size(n);
  const Subspace xi0 = center(mu0);
  Problem p;
  p.kind = with_gauge ? FlowKind::BracketGauged : FlowKind::Bracket;
  p.y0 = CVector(bs + (with_gauge ? n * n : 0));
  put_bracket(p.y0, 0, mu0);
  if (with_gauge) put(p.y0, bs, CMatrix::Identity(n, n));
  p.field = [n, bs, with_gauge](const CVector& y) {
    const LieBracket mu = take_bracket(y, 0, n);
    const CMatrix pm = p_standard(mu);
    LieBracket d = delta(mu, pm);
    d *= 0.5;
    CVector out(y.size());
    put_bracket(out, 0, d);
    if (with_gauge) put(out, bs, -0.5 * pm * take(y, bs, n, n));
    return out;
  };
  p.restore = [n](CVector& y) { put_bracket(y, 0, take_bracket(y, 0, n).symmetrized()); };
  p.decode = [n, bs, with_gauge](const CVector& y) {
    if (with_gauge) return FlowState{GaugedState{take_bracket(y, 0, n), take(y, bs, n, n)}};
    return FlowState{BracketState{take_bracket(y, 0, n)}};
  };
  p.monitor = [&mu0, xi0, n](const FlowState& s) {
    auto v = empty_monitors();
    const LieBracket& mu = bracket_of_state(s);
    v[kSkt] = guarded([&] { return skt_defect(mu, HermitianMetric::identity(n)); });
    v[kCenterAngle] = max_principal_angle(center(mu), xi0);
    v[kBracketNorm] = bracket_norm_sq(mu);
    v[kJacobi] = jacobi_defect(mu);
    v[kNijenhuis] = nijenhuis_defect(mu);
    if (const auto* gs = std::get_if<GaugedState>(&s)) {
      const CMatrix g = gs->h.transpose() * gs->h.conjugate();
      v[kMinEigenvalue] = min_eig(g);
      const CMatrix lhs = p_standard(mu);
      const CMatrix rhs = gs->h * p_matrix(mu0, g) * gs->h.inverse();
      v[kGauge] = (lhs - rhs).cwiseAbs().maxCoeff();
    }
    return v;
  };
  p.check = [](const CVector&) -> std::optional<Termination> { return std::nullopt; };
  return integrate(p, cfg);
}

FlowTrajectory hs_flow(const LieBracket& mu0, const TamedForm& omega0, const IntegratorConfig& cfg) {
  const int n = mu0.n();
  if (omega0.omega.n() != n) throw ValidationError("hs_flow: dimension mismatch");
  if (nijenhuis_defect(mu0) > 1e-10 * std::max(1.0, mu0.max_abs()))
    throw IntegrabilityError("hs_flow: bracket is not integrable");
  if (taming_margin(omega0) <= 0.0) throw ValidationError("hs_flow: seed does not tame J");
  const bool two_step = is_two_step(mu0);
  const double floor = cfg.positivity_floor * omega0.omega.min_eigenvalue();
  const InvariantForm d0 = d_mu(mu0, to_form(omega0));
  const Eigen::Index off = n * n;
  Problem p;
  p.kind = FlowKind::HermitianSymplectic;
  p.y0 = CVector(2 * n * n);
  put(p.y0, 0, omega0.omega.matrix());
  put(p.y0, off, 0.5 * (omega0.beta - omega0.beta.transpose()));
  p.field = [&mu0, n, off](const CVector& y) {
    const CMatrix g = take(y, 0, n, n);
    const CMatrix values = rho_b_values(mu0, g);
    CVector out(y.size());
    put(out, 0, -kI * values.topRightCorner(n, n));
    put(out, off, -values.topLeftCorner(n, n));
    return out;
  };
  p.restore = [n, off](CVector& y) {
    const CMatrix g = take(y, 0, n, n);
    const CMatrix b = take(y, off, n, n);
    put(y, 0, 0.5 * (g + g.adjoint()));
    put(y, off, 0.5 * (b - b.transpose()));
  };
  p.decode = [n, off](const CVector& y) { return FlowState{TamedState{take(y, 0, n, n), take(y, off, n, n)}}; };
  p.monitor = [&mu0, d0, two_step](const FlowState& s) {
    auto v = empty_monitors();
    const auto& ts = std::get<TamedState>(s);
    v[kMinEigenvalue] = min_eig(ts.g);
    if (v[kMinEigenvalue] > 0) {
      const TamedForm tf{HermitianMetric(ts.g), ts.beta};
      const InvariantForm omega = to_form(tf);
      v[kSkt] = guarded([&] { return skt_defect(mu0, tf.omega); });
      const InvariantForm d = d_mu(mu0, omega);
      v[kClosedness] = d.max_abs();
      v[kClosednessDrift] = (d - d0).max_abs();
      v[kTaming] = taming_margin(omega);
      if (two_step) v[kReduced] = guarded([&] { return reduced_defect(mu0, tf.omega); });
    }
    return v;
  };
  p.check = [n, floor](const CVector& y) -> std::optional<Termination> {
    const double e = min_eig(take(y, 0, n, n));
    if (e <= 0.0) return Termination::TamingLost;
    if (e <= floor) return Termination::PositivityFloor;
    return std::nullopt;
  };
  return integrate(p, cfg);
}

EquivalenceReport equivalence_check(const FlowTrajectory& metric_run, const FlowTrajectory& gauged_run) {
  if (metric_run.kind != FlowKind::Pluriclosed || gauged_run.kind != FlowKind::BracketGauged)
    throw ValidationError("equivalence_check: need a pluriclosed run and a gauged bracket run");
  if (metric_run.times.size() != gauged_run.times.size())
    throw ValidationError("equivalence_check: time grids differ");
  for (std::size_t i = 0; i < metric_run.times.size(); ++i)
    if (std::abs(metric_run.times[i] - gauged_run.times[i]) > 1e-12 * std::max(1.0, metric_run.times[i]))
      throw ValidationError("equivalence_check: time grids differ");
  const LieBracket& mu0 = bracket_of_state(gauged_run.states.front());
  EquivalenceReport rep;
  for (std::size_t i = 0; i < metric_run.times.size(); ++i) {
    const auto& gs = std::get<GaugedState>(gauged_run.states[i]);
    const CMatrix& g = std::get<MetricState>(metric_run.states[i]).g;
    rep.metric_defect = std::max(rep.metric_defect, relative_diff(g, gs.h.transpose() * gs.h.conjugate()));
    rep.bracket_defect = std::max(rep.bracket_defect, bracket_relative_diff(gs.mu, act(gs.h, mu0)));
  }
  return rep;
}

DecayReport decay_calibration(const std::vector<FlowTrajectory>& bracket_runs, double h) {
  struct Sample {
    double rate, pp, norm4;
  };
  std::vector<Sample> samples;
  const StepControl control;
  for (const auto& run : bracket_runs) {
    if (run.kind != FlowKind::Bracket && run.kind != FlowKind::BracketGauged)
      throw ValidationError("decay_calibration: need bracket-flow runs");
    for (const auto& state : run.states) {
      const LieBracket& mu = bracket_of_state(state);
      const int n = mu.n();
      const double pp = Endomorphism{p_standard(mu)}.norm_sq();
      if (pp < 1e-14) continue;
      CVector y(bracket_size(n));
      put_bracket(y, 0, mu);
      const Field f = [n](const CVector& v) {
        CVector out(v.size());
        put_bracket(out, 0, bracket_field(take_bracket(v, 0, n)));
        return out;
      };
      auto norm_at = [&](double s) { return rk4_step(f, rk4_step(f, y, 0.5 * s), 0.5 * s).squaredNorm(); };
      const double rate = (-norm_at(2 * h) + 8 * norm_at(h) - 8 * norm_at(-h) + norm_at(-2 * h)) / (12 * h);
      const double nn = bracket_norm_sq(mu);
      samples.push_back({rate, pp, nn * nn});
    }
  }
  DecayReport rep;
  rep.samples = static_cast<int>(samples.size());
  if (samples.empty()) return rep;
  double sum = 0.0;
  for (const auto& s : samples) sum += -s.rate / s.pp;
  rep.kappa = sum / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    rep.spread = std::max(rep.spread, std::abs(-s.rate / s.pp - rep.kappa) / std::abs(rep.kappa));
    if (s.rate > -(rep.kappa / 16.0) * s.norm4 + 1e-12 * std::max(1.0, s.norm4)) rep.bound_holds = false;
    rep.max_rate_ratio = std::max(rep.max_rate_ratio, s.rate / s.norm4);
  }
  return rep;
}

BackwardReport backward_existence(const LieBracket& mu0, const HermitianMetric& g0, const IntegratorConfig& cfg,
                                  double t_max) {
  const int n = mu0.n();
  const double floor = cfg.positivity_floor * g0.min_eigenvalue();
  Problem p;
  p.kind = FlowKind::Pluriclosed;
  p.y0 = CVector(n * n);
  put(p.y0, 0, g0.matrix());
  p.field = [&mu0, n](const CVector& y) {
    CVector out(n * n);
    put(out, 0, pluriclosed_field(mu0, take(y, 0, n, n)));
    return out;
  };
  p.restore = hermitian_restore(n, 0);
  p.decode = [n](const CVector& y) { return FlowState{MetricState{take(y, 0, n, n)}}; };
  p.monitor = [](const FlowState& s) {
    auto v = empty_monitors();
    v[kMinEigenvalue] = min_eig(std::get<MetricState>(s).g);
    return v;
  };
  p.check = [n, floor](const CVector& y) -> std::optional<Termination> {
    if (min_eig(take(y, 0, n, n)) <= floor) return Termination::PositivityFloor;
    return std::nullopt;
  };
  IntegratorConfig c = cfg;
  c.t_end = t_max;
  c.sample_every = std::numeric_limits<int>::max();
  const FlowTrajectory traj = integrate(p, c, -1.0);
  return {traj.t_final, traj.termination};
}

CMatrix metric_of_state(const FlowState& s) {
  if (const auto* m = std::get_if<MetricState>(&s)) return m->g;
  if (const auto* t = std::get_if<TamedState>(&s)) return t->g;
  if (const auto* g = std::get_if<GaugedState>(&s)) return g->h.transpose() * g->h.conjugate();
  throw ValidationError("state carries no metric");
}

const LieBracket& bracket_of_state(const FlowState& s) {
  if (const auto* b = std::get_if<BracketState>(&s)) return b->mu;
  if (const auto* g = std::get_if<GaugedState>(&s)) return g->mu;
  throw ValidationError("state carries no bracket");
}

}  // namespace sktflow
