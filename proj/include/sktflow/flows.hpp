#ifndef SKTFLOW_FLOWS_HPP
#define SKTFLOW_FLOWS_HPP

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "sktflow/forms.hpp"
#include "sktflow/integrator.hpp"
#include "sktflow/lie_core.hpp"

namespace sktflow {

enum class FlowKind { Pluriclosed, Bracket, BracketGauged, HermitianSymplectic };

const char* to_string(FlowKind kind);

struct MetricState {
  CMatrix g;
};
struct BracketState {
  LieBracket mu;
};
struct GaugedState {
  LieBracket mu;
  CMatrix h;
};
struct TamedState {
  CMatrix g;
  CMatrix beta;
};

using FlowState = std::variant<MetricState, BracketState, GaugedState, TamedState>;

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int sample_every = 100;
  /// Blow-down when the smallest eigenvalue of g drops below this factor
  /// times its initial value.
  double positivity_floor = 1e-8;
  double rel_tol = 1e-9;
  int max_halvings = 20;
  /// Per-channel thresholds reported as violations by the runner.
  std::map<std::string, double> defect_tolerances = {
      {"skt_defect", 1e-8},      {"center_principal_angle", 1e-8}, {"closedness_drift", 1e-8},
      {"gauge_defect", 1e-8},    {"reduced_flow_defect", 1e-10},   {"jacobi_defect", 1e-8},
      {"nijenhuis_defect", 1e-8}};
};

enum class Termination { ReachedEnd, PositivityFloor, StepRejected, TamingLost };

const char* to_string(Termination t);

/// Monitor channels, in column order. Channels that do not apply to a flow
/// kind hold NaN.
const std::vector<std::string>& monitor_channels();

struct FlowTrajectory {
  FlowKind kind = FlowKind::Pluriclosed;
  std::vector<double> times;
  std::vector<FlowState> states;
  std::vector<std::vector<double>> monitors;  // monitors[channel][sample]
  Termination termination = Termination::ReachedEnd;
  double t_final = 0.0;

  const std::vector<double>& channel(const std::string& name) const;
  std::size_t size() const { return times.size(); }
};

/// dg_{i jbar}/dt = -i rho^B(Z_i, Zbar_j) with mu0 fixed.
CMatrix pluriclosed_field(const LieBracket& mu0, const CMatrix& g);

/// dbeta_{ij}/dt = -rho^B(Z_i, Z_j).
CMatrix beta_field(const LieBracket& mu0, const CMatrix& g);

/// delta_mu(alpha) = mu(alpha ., .) + mu(., alpha .) - alpha mu(., .) for the
/// complexification of a J0-commuting alpha given on T^{1,0}.
LieBracket delta(const LieBracket& mu, const CMatrix& alpha);

/// dmu/dt = delta_mu(P_mu) / 2.
LieBracket bracket_field(const LieBracket& mu);

FlowTrajectory pluriclosed_flow(const LieBracket& mu0, const HermitianMetric& g0, const IntegratorConfig& cfg);

/// With `with_gauge`, co-integrates dh/dt = -P_mu h / 2 from h(0) = 1.
FlowTrajectory bracket_flow(const LieBracket& mu0, const IntegratorConfig& cfg, bool with_gauge);

FlowTrajectory hs_flow(const LieBracket& mu0, const TamedForm& omega0, const IntegratorConfig& cfg);

struct EquivalenceReport {
  double metric_defect = 0.0;   // max_t |g(t) - h^T conj(h)| / |g(t)|
  double bracket_defect = 0.0;  // max_t |mu(t) - h(t).mu0| / |mu(t)|
};

/// Compares a pluriclosed run from the identity metric with a gauged bracket
/// run from the same bracket. Throws ValidationError on grid mismatch.
EquivalenceReport equivalence_check(const FlowTrajectory& metric_run, const FlowTrajectory& gauged_run);

struct DecayReport {
  double kappa = 0.0;        // mean of -(d/dt |mu|^2) / <P, P>
  double spread = 0.0;       // max relative deviation from the mean
  int samples = 0;
  bool bound_holds = true;   // d/dt |mu|^2 <= -(kappa / 16) |mu|^4 at every sample
  double max_rate_ratio = -1e300;  // max of (d/dt |mu|^2) / |mu|^4
};

/// Estimates kappa in d/dt |mu|^2 = -kappa <P_mu, P_mu> from bracket-flow
/// samples by five-point central differences with step `h`.
DecayReport decay_calibration(const std::vector<FlowTrajectory>& bracket_runs, double h = 1e-3);

struct BackwardReport {
  double epsilon = 0.0;
  Termination termination = Termination::ReachedEnd;
};

/// Integrates the pluriclosed flow backwards from g0 until blow-down or
/// `t_max`, reporting the time reached.
BackwardReport backward_existence(const LieBracket& mu0, const HermitianMetric& g0, const IntegratorConfig& cfg,
                                  double t_max);

/// State matrices read from trajectory samples.
CMatrix metric_of_state(const FlowState& s);
const LieBracket& bracket_of_state(const FlowState& s);

}  // namespace sktflow

#endif  // SKTFLOW_FLOWS_HPP
