#ifndef SKTFLOW_RUNNER_HPP
#define SKTFLOW_RUNNER_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "sktflow/catalog.hpp"
#include "sktflow/flows.hpp"
#include "sktflow/run_config.hpp"

namespace sktflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitBlowDown = 3,
  kExitIntegrator = 4,
  kExitParse = 5,
};

/// Algebra and seeds resolved from a RunConfig.
struct Materialized {
  LieBracket mu;
  std::optional<CatalogEntry> entry;
  HermitianMetric metric;
  CMatrix beta;  // zero unless a tamed seed applies
};

/// Resolves the algebra and the seed. Throws ValidationError on unknown
/// catalog names, dimension mismatches, non-positive seeds, non-integrable
/// explicit structures and (for hs) seeds that are not closed and taming.
Materialized materialize(const RunConfig& cfg);

/// Flow output for a materialized config; no files touched.
FlowTrajectory integrate(const RunConfig& cfg, const Materialized& m);

/// Exit code for a termination reason.
int exit_code_for(Termination t);

/// Trajectory table: commented header naming every column, one row per
/// sample, a commented footer with the termination reason.
std::string trajectory_csv(const FlowTrajectory& traj);

/// Column names (without t) of the state part of a trajectory row.
std::vector<std::string> state_columns(const FlowState& s);

nlohmann::json state_json(const FlowState& s);

/// Summary document for a finished run.
nlohmann::json run_summary(const RunConfig& cfg, const Materialized& m, const FlowTrajectory& traj);

/// Max relative deviation of the trajectory from the entry's closed form,
/// or nullopt when the entry has none for this seed and flow.
std::optional<double> closed_form_deviation(const CatalogEntry& entry, const FlowTrajectory& traj);

/// Invariant report for (mu, g) without integrating.
nlohmann::json verify_report(const LieBracket& mu, const HermitianMetric& g);

/// A config fragment with the entry's explicit real structure constants,
/// J0 and metric seed as a runnable pluriclosed config; re-ingesting it
/// reproduces the entry's bracket.
nlohmann::json export_entry(const CatalogEntry& entry);

/// Output directory: SKTFLOW_OUTPUT_DIR when set, else the config's.
std::string resolve_output_dir(const RunConfig& cfg);

/// CLI verbs. Diagnostics go to `err`, reports to `out`; the return value is
/// the process exit code.
int run_command(const std::string& config_path, std::ostream& out, std::ostream& err);
int verify_command(const std::string& config_path, std::ostream& out, std::ostream& err);
int catalog_command(const std::optional<std::string>& export_name, const std::map<std::string, double>& params,
                    std::ostream& out, std::ostream& err);

}  // namespace sktflow

#endif  // SKTFLOW_RUNNER_HPP
