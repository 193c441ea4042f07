#ifndef SKTFLOW_RUN_CONFIG_HPP
#define SKTFLOW_RUN_CONFIG_HPP

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "sktflow/flows.hpp"
#include "sktflow/lie_core.hpp"

namespace sktflow {

/// Malformed configuration document: syntax, missing keys, wrong types.
class ParseError : public Error {
 public:
  using Error::Error;
};

struct AlgebraSource {
  std::optional<std::string> catalog;
  std::map<std::string, double> params;
  std::optional<RealStructure> real;
};

struct RunConfig {
  std::string name = "run";
  AlgebraSource algebra;
  FlowKind flow = FlowKind::Pluriclosed;
  std::optional<CMatrix> metric;
  std::optional<CMatrix> beta;
  IntegratorConfig integrator;
  std::string output_dir = ".";
  std::string trajectory_file = "trajectory.csv";
  std::string summary_file = "summary.json";
};

/// Parses a configuration document. Throws ParseError on structural problems
/// and ValidationError on semantic ones (non-positive dt, both algebra
/// sources given, ...). Seed/algebra dimension agreement is checked when the
/// algebra is materialized.
RunConfig parse_config(const nlohmann::json& doc);

RunConfig load_config(const std::string& path);

FlowKind parse_flow_kind(const std::string& s);

/// Complex matrix from rows of [re, im] pairs.
CMatrix parse_complex_matrix(const nlohmann::json& j, const std::string& what);
nlohmann::json complex_matrix_json(const CMatrix& m);

}  // namespace sktflow

#endif  // SKTFLOW_RUN_CONFIG_HPP
