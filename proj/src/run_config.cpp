#include "sktflow/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sktflow {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ParseError(what + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ParseError(what + ": expected an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) throw ParseError(what + ": expected a string");
  return j.get<std::string>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ParseError(where + ": unknown key '" + it.key() + "'");
  }
}

AlgebraSource parse_algebra(const json& j) {
  if (!j.is_object()) throw ParseError("algebra: expected an object");
  check_keys(j, {"catalog", "params", "structure_constants", "complex_structure"}, "algebra");
  AlgebraSource src;
  const bool has_catalog = j.contains("catalog");
  const bool has_real = j.contains("structure_constants");
  if (has_catalog == has_real)
    throw ValidationError("algebra: give exactly one of 'catalog' or 'structure_constants'");
  if (has_catalog) {
    src.catalog = text(j["catalog"], "algebra.catalog");
    if (j.contains("params")) {
      const json& p = j["params"];
      if (!p.is_object()) throw ParseError("algebra.params: expected an object");
      for (auto it = p.begin(); it != p.end(); ++it) src.params[it.key()] = number(*it, "algebra.params." + it.key());
    }
    if (j.contains("complex_structure")) throw ValidationError("algebra: complex_structure only applies to structure_constants");
    return src;
  }
  const json& sc = j["structure_constants"];
  const int dim = integer(require(sc, "dim", "algebra.structure_constants"), "algebra.structure_constants.dim");
  if (dim <= 0 || dim % 2 != 0 || dim > 16) throw ValidationError("algebra.structure_constants.dim must be even, 2..16");
  RealStructure rs;
  rs.dim = dim;
  rs.c.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  const json& entries = require(sc, "entries", "algebra.structure_constants");
  if (!entries.is_array()) throw ParseError("algebra.structure_constants.entries: expected an array");
  std::vector<std::vector<std::vector<bool>>> seen(dim, std::vector<std::vector<bool>>(dim, std::vector<bool>(dim, false)));
  for (const json& e : entries) {
    if (!e.is_array() || e.size() != 4) throw ParseError("structure constant entry must be [i, j, k, value]");
    const int i = integer(e[0], "entry index"), jj = integer(e[1], "entry index"), k = integer(e[2], "entry index");
    const double v = number(e[3], "entry value");
    if (i < 0 || jj < 0 || k < 0 || i >= dim || jj >= dim || k >= dim)
      throw ValidationError("structure constant index out of range");
    if (i == jj && v != 0.0) throw ValidationError("structure constants: mu(e_i, e_i) must vanish");
    if ((seen[i][jj][k] && rs.at(i, jj, k) != v) || (seen[jj][i][k] && rs.at(jj, i, k) != -v))
      throw ValidationError("structure constants: conflicting entries");
    rs.at(i, jj, k) = v;
    rs.at(jj, i, k) = -v;
    seen[i][jj][k] = seen[jj][i][k] = true;
  }
  if (j.contains("complex_structure")) {
    const json& cj = j["complex_structure"];
    if (!cj.is_array() || static_cast<int>(cj.size()) != dim)
      throw ValidationError("algebra.complex_structure must be a dim x dim matrix");
    rs.complex_structure = RMatrix(dim, dim);
    for (int r = 0; r < dim; ++r) {
      if (!cj[r].is_array() || static_cast<int>(cj[r].size()) != dim)
        throw ValidationError("algebra.complex_structure must be a dim x dim matrix");
      for (int c = 0; c < dim; ++c) rs.complex_structure(r, c) = number(cj[r][c], "complex_structure entry");
    }
  } else {
    rs.complex_structure = standard_complex_structure(dim / 2);
  }
  src.real = std::move(rs);
  return src;
}

void parse_integrator(const json& j, IntegratorConfig& cfg) {
  if (!j.is_object()) throw ParseError("integrator: expected an object");
  check_keys(j, {"dt", "t_end", "sample_every", "positivity_floor", "rel_tol", "max_halvings", "tolerances"},
             "integrator");
  if (j.contains("dt")) cfg.dt = number(j["dt"], "integrator.dt");
  if (j.contains("t_end")) cfg.t_end = number(j["t_end"], "integrator.t_end");
  if (j.contains("sample_every")) cfg.sample_every = integer(j["sample_every"], "integrator.sample_every");
  if (j.contains("positivity_floor")) cfg.positivity_floor = number(j["positivity_floor"], "integrator.positivity_floor");
  if (j.contains("rel_tol")) cfg.rel_tol = number(j["rel_tol"], "integrator.rel_tol");
  if (j.contains("max_halvings")) cfg.max_halvings = integer(j["max_halvings"], "integrator.max_halvings");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ParseError("integrator.tolerances: expected an object");
    const auto& names = monitor_channels();
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (std::find(names.begin(), names.end(), it.key()) == names.end())
        throw ValidationError("integrator.tolerances: unknown channel '" + it.key() + "'");
      cfg.defect_tolerances[it.key()] = number(*it, "integrator.tolerances." + it.key());
    }
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ValidationError("integrator.dt must be positive");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw ValidationError("integrator.t_end must be positive");
  if (cfg.sample_every < 1) throw ValidationError("integrator.sample_every must be at least 1");
  if (!(cfg.positivity_floor > 0.0)) throw ValidationError("integrator.positivity_floor must be positive");
  if (!(cfg.rel_tol > 0.0)) throw ValidationError("integrator.rel_tol must be positive");
  if (cfg.max_halvings < 0) throw ValidationError("integrator.max_halvings must be nonnegative");
}

}  // namespace

FlowKind parse_flow_kind(const std::string& s) {
  if (s == "pluriclosed") return FlowKind::Pluriclosed;
  if (s == "bracket") return FlowKind::Bracket;
  if (s == "bracket-gauged") return FlowKind::BracketGauged;
  if (s == "hs") return FlowKind::HermitianSymplectic;
  throw ValidationError("unknown flow kind: " + s);
}

CMatrix parse_complex_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  CMatrix m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array()) throw ParseError(what + ": each row must be an array of [re, im] pairs");
    if (static_cast<Eigen::Index>(row.size()) != rows) throw ValidationError(what + ": matrix must be square");
    for (Eigen::Index c = 0; c < rows; ++c) {
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2) throw ParseError(what + ": entries must be [re, im] pairs");
      m(r, c) = Complex(number(e[0], what), number(e[1], what));
    }
  }
  return m;
}

json complex_matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

RunConfig parse_config(const json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("config: expected an object");
    check_keys(doc, {"name", "algebra", "flow", "seed", "integrator", "output"}, "config");
    RunConfig cfg;
    if (doc.contains("name")) cfg.name = text(doc["name"], "name");
    cfg.algebra = parse_algebra(require(doc, "algebra", "config"));
    cfg.flow = parse_flow_kind(text(require(doc, "flow", "config"), "flow"));
    if (doc.contains("seed")) {
      const json& s = doc["seed"];
      if (!s.is_object()) throw ParseError("seed: expected an object");
      check_keys(s, {"metric", "beta"}, "seed");
      if (s.contains("metric")) cfg.metric = parse_complex_matrix(s["metric"], "seed.metric");
      if (s.contains("beta")) cfg.beta = parse_complex_matrix(s["beta"], "seed.beta");
    }
    if (doc.contains("integrator")) parse_integrator(doc["integrator"], cfg.integrator);
    if (doc.contains("output")) {
      const json& o = doc["output"];
      if (!o.is_object()) throw ParseError("output: expected an object");
      check_keys(o, {"dir", "trajectory", "summary"}, "output");
      if (o.contains("dir")) cfg.output_dir = text(o["dir"], "output.dir");
      if (o.contains("trajectory")) cfg.trajectory_file = text(o["trajectory"], "output.trajectory");
      if (o.contains("summary")) cfg.summary_file = text(o["summary"], "output.summary");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace sktflow
