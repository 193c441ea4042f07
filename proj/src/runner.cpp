#include "sktflow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>

#include "sktflow/bismut_ricci.hpp"

namespace sktflow {

using nlohmann::json;

namespace {

constexpr double kValidationTol = 1e-10;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void validate_algebra(const LieBracket& mu) {
  const double scale = std::max(1.0, mu.max_abs() * mu.max_abs());
  if (jacobi_defect(mu) > kValidationTol * scale) throw ValidationError("algebra violates the Jacobi identity");
  if (nijenhuis_defect(mu) > kValidationTol * scale) throw ValidationError("complex structure is not integrable");
}

CMatrix checked_beta(const CMatrix& beta, int n) {
  if (beta.rows() != n || beta.cols() != n)
    throw ValidationError("seed.beta must be " + std::to_string(n) + " x " + std::to_string(n));
  if ((beta + beta.transpose()).cwiseAbs().maxCoeff() > kValidationTol * std::max(1.0, beta.cwiseAbs().maxCoeff()))
    throw ValidationError("seed.beta must be antisymmetric");
  return 0.5 * (beta - beta.transpose());
}

/// Bracket whose standard-metric geometry matches (mu, g): act(L^T, mu) with
/// g = L L^H.
LieBracket standardize(const LieBracket& mu, const HermitianMetric& g) {
  const Eigen::LLT<CMatrix> llt(g.matrix());
  const CMatrix l = llt.matrixL();
  return act(l.transpose(), mu);
}

double relative(double diff, double ref) { return diff / std::max(ref, 1e-300); }

double bracket_distance(const LieBracket& a, const LieBracket& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) {
    diff += std::norm(a.coeffs()[i] - b.coeffs()[i]);
    ref += std::norm(b.coeffs()[i]);
  }
  return relative(std::sqrt(diff), std::sqrt(ref));
}

void matrix_columns(const std::string& prefix, Eigen::Index rows, Eigen::Index cols,
                    std::vector<std::string>& out) {
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      for (const char* part : {"re", "im"})
        out.push_back(prefix + "_" + std::to_string(r) + "_" + std::to_string(c) + "_" + part);
}

void matrix_values(const CMatrix& m, std::vector<double>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out.push_back(m(r, c).real());
      out.push_back(m(r, c).imag());
    }
}

/// Bracket entries (A, B, C) with A < B, in lexicographic order.
template <typename F>
void for_bracket_entries(int dim, F&& f) {
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b)
      for (int c = 0; c < dim; ++c) f(a, b, c);
}

std::vector<double> state_values(const FlowState& s) {
  std::vector<double> out;
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, MetricState>) {
          matrix_values(st.g, out);
        } else if constexpr (std::is_same_v<T, TamedState>) {
          matrix_values(st.g, out);
          matrix_values(st.beta, out);
        } else {
          for_bracket_entries(st.mu.dim(), [&](int a, int b, int c) {
            out.push_back(st.mu(a, b, c).real());
            out.push_back(st.mu(a, b, c).imag());
          });
          if constexpr (std::is_same_v<T, GaugedState>) matrix_values(st.h, out);
        }
      },
      s);
  return out;
}

json bracket_json(const LieBracket& mu) {
  json entries = json::array();
  for_bracket_entries(mu.dim(), [&](int a, int b, int c) {
    const Complex v = mu(a, b, c);
    if (v != Complex(0.0)) entries.push_back({a, b, c, v.real(), v.imag()});
  });
  return {{"n", mu.n()}, {"entries", entries}};
}

std::optional<std::string> env_output_dir() {
  const char* v = std::getenv("SKTFLOW_OUTPUT_DIR");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SingularTransformError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IntegrabilityError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIntegrator;
  }
}

}  // namespace

Materialized materialize(const RunConfig& cfg) {
  std::optional<CatalogEntry> entry;
  LieBracket mu(1);
  if (cfg.algebra.catalog) {
    entry = lookup(*cfg.algebra.catalog, cfg.algebra.params);
    mu = entry->bracket;
  } else {
    mu = from_real_structure(*cfg.algebra.real);
    validate_algebra(mu);
  }
  const int n = mu.n();
  if (cfg.metric && (cfg.metric->rows() != n || cfg.metric->cols() != n))
    throw ValidationError("seed.metric must be " + std::to_string(n) + " x " + std::to_string(n));
  if (cfg.beta && cfg.flow != FlowKind::HermitianSymplectic)
    throw ValidationError("seed.beta only applies to the hs flow");

  std::optional<HermitianMetric> metric;
  if (cfg.metric) metric.emplace(*cfg.metric);
  CMatrix beta = CMatrix::Zero(n, n);
  if (cfg.beta) {
    beta = checked_beta(*cfg.beta, n);
  } else if (cfg.flow == FlowKind::HermitianSymplectic && !cfg.metric && entry && entry->tamed_seed) {
    beta = entry->tamed_seed->beta;
  }
  if (!metric) {
    if (cfg.flow == FlowKind::HermitianSymplectic && !cfg.beta && entry && entry->tamed_seed)
      metric.emplace(entry->tamed_seed->omega);
    else if (entry)
      metric.emplace(entry->metric_seed);
    else
      metric.emplace(HermitianMetric::identity(n));
  }
  if (cfg.flow == FlowKind::HermitianSymplectic) {
    const TamedForm seed{*metric, beta};
    const double scale = std::max(1.0, metric->matrix().cwiseAbs().maxCoeff() * mu.max_abs());
    if (closedness_defect(mu, seed).total > 1e-8 * scale)
      throw ValidationError("hs seed is not closed");
    if (!(taming_margin(seed) > 0.0)) throw ValidationError("hs seed does not tame J");
  }
  return Materialized{std::move(mu), std::move(entry), std::move(*metric), std::move(beta)};
}

FlowTrajectory integrate(const RunConfig& cfg, const Materialized& m) {
  switch (cfg.flow) {
    case FlowKind::Pluriclosed:
      return pluriclosed_flow(m.mu, m.metric, cfg.integrator);
    case FlowKind::Bracket:
      return bracket_flow(standardize(m.mu, m.metric), cfg.integrator, false);
    case FlowKind::BracketGauged:
      return bracket_flow(standardize(m.mu, m.metric), cfg.integrator, true);
    case FlowKind::HermitianSymplectic:
      return hs_flow(m.mu, TamedForm{m.metric, m.beta}, cfg.integrator);
  }
  throw ValidationError("unknown flow kind");
}

int exit_code_for(Termination t) {
  switch (t) {
    case Termination::ReachedEnd:
      return kExitOk;
    case Termination::PositivityFloor:
    case Termination::TamingLost:
      return kExitBlowDown;
    case Termination::StepRejected:
      return kExitIntegrator;
  }
  return kExitIntegrator;
}

std::vector<std::string> state_columns(const FlowState& s) {
  std::vector<std::string> out;
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, MetricState>) {
          matrix_columns("g", st.g.rows(), st.g.cols(), out);
        } else if constexpr (std::is_same_v<T, TamedState>) {
          matrix_columns("g", st.g.rows(), st.g.cols(), out);
          matrix_columns("beta", st.beta.rows(), st.beta.cols(), out);
        } else {
          for_bracket_entries(st.mu.dim(), [&](int a, int b, int c) {
            const std::string stem = "mu_" + std::to_string(a) + "_" + std::to_string(b) + "_" + std::to_string(c);
            out.push_back(stem + "_re");
            out.push_back(stem + "_im");
          });
          if constexpr (std::is_same_v<T, GaugedState>) matrix_columns("h", st.h.rows(), st.h.cols(), out);
        }
      },
      s);
  return out;
}

std::string trajectory_csv(const FlowTrajectory& traj) {
  std::ostringstream os;
  os << "# t";
  if (!traj.states.empty())
    for (const auto& c : state_columns(traj.states.front())) os << ',' << c;
  for (const auto& c : monitor_channels()) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << fmt(traj.times[i]);
    for (double v : state_values(traj.states[i])) os << ',' << fmt(v);
    for (const auto& ch : traj.monitors) os << ',' << fmt(ch[i]);
    os << '\n';
  }
  os << "# termination=" << to_string(traj.termination) << " t_final=" << fmt(traj.t_final) << '\n';
  return os.str();
}

json state_json(const FlowState& s) {
  return std::visit(
      [](const auto& st) -> json {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, MetricState>) {
          return {{"metric", complex_matrix_json(st.g)}};
        } else if constexpr (std::is_same_v<T, TamedState>) {
          return {{"metric", complex_matrix_json(st.g)}, {"beta", complex_matrix_json(st.beta)}};
        } else if constexpr (std::is_same_v<T, GaugedState>) {
          return {{"bracket", bracket_json(st.mu)}, {"gauge", complex_matrix_json(st.h)}};
        } else {
          return {{"bracket", bracket_json(st.mu)}};
        }
      },
      s);
}

std::optional<double> closed_form_deviation(const CatalogEntry& entry, const FlowTrajectory& traj) {
  if (traj.states.empty()) return std::nullopt;
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    const FlowState& s = traj.states[i];
    const FlowState& s0 = traj.states.front();
    if (const auto* m = std::get_if<MetricState>(&s)) {
      const auto law = entry.metric_law(std::get<MetricState>(s0).g, t);
      if (!law) return std::nullopt;
      worst = std::max(worst, relative((m->g - *law).norm(), law->norm()));
    } else if (const auto* ts = std::get_if<TamedState>(&s)) {
      const auto law = entry.tamed_law(std::get<TamedState>(s0), t);
      if (!law) return std::nullopt;
      const double ref = std::sqrt(law->g.squaredNorm() + law->beta.squaredNorm());
      const double diff = std::sqrt((ts->g - law->g).squaredNorm() + (ts->beta - law->beta).squaredNorm());
      worst = std::max(worst, relative(diff, ref));
    } else {
      const auto law = entry.bracket_law(bracket_of_state(s0), t);
      if (!law) return std::nullopt;
      if (law->max_abs() == 0.0) {
        worst = std::max(worst, bracket_of_state(s).max_abs());
      } else {
        worst = std::max(worst, bracket_distance(bracket_of_state(s), *law));
      }
    }
  }
  return worst;
}

json run_summary(const RunConfig& cfg, const Materialized& m, const FlowTrajectory& traj) {
  const TamedForm seed{m.metric, m.beta};
  json initial = {
      {"jacobi", jacobi_defect(m.mu)},
      {"nijenhuis", nijenhuis_defect(m.mu)},
      {"skt", skt_defect(m.mu, m.metric)},
      {"closedness", closedness_defect(m.mu, seed).total},
      {"taming", taming_margin(seed)},
  };
  json max_monitors = json::object();
  json violations = json::array();
  const auto& names = monitor_channels();
  for (std::size_t c = 0; c < names.size(); ++c) {
    double worst = std::nan("");
    for (double v : traj.monitors[c])
      if (std::isfinite(v)) worst = std::isfinite(worst) ? std::max(worst, v) : v;
    max_monitors[names[c]] = nullable(worst);
    const auto tol = cfg.integrator.defect_tolerances.find(names[c]);
    if (tol != cfg.integrator.defect_tolerances.end() && std::isfinite(worst) && worst > tol->second)
      violations.push_back({{"channel", names[c]}, {"max", worst}, {"tolerance", tol->second}});
  }
  json summary = {
      {"name", cfg.name},
      {"flow", to_string(cfg.flow)},
      {"algebra", cfg.algebra.catalog ? json(*cfg.algebra.catalog) : json("structure_constants")},
      {"initial_defects", initial},
      {"samples", traj.size()},
      {"t_final", traj.t_final},
      {"termination", to_string(traj.termination)},
      {"final_state", traj.states.empty() ? json(nullptr) : state_json(traj.states.back())},
      {"max_monitors", max_monitors},
      {"tolerance_violations", violations},
      {"closed_form_max_deviation", nullptr},
  };
  if (m.entry) {
    if (const auto dev = closed_form_deviation(*m.entry, traj)) summary["closed_form_max_deviation"] = *dev;
  }
  return summary;
}

json verify_report(const LieBracket& mu, const HermitianMetric& g) {
  const auto step = nilpotency_step(mu);
  const double skt = skt_defect(mu, g);
  const double domega = d_mu(mu, fundamental_form(g)).max_abs();
  const StaticFit fit = static_fit(mu, g);
  return {
      {"jacobi", jacobi_defect(mu)},
      {"nijenhuis", nijenhuis_defect(mu)},
      {"nilpotency_step", step ? json(*step) : json(nullptr)},
      {"nilpotent", step.has_value()},
      {"two_step", step.has_value() && *step <= 2},
      {"center_dim", center(mu).dim()},
      {"skt_defect", skt},
      {"skt", skt < kValidationTol},
      {"d_omega", domega},
      {"kahler", domega < kValidationTol},
      {"static_fit", {{"r", fit.r}, {"residual", fit.residual}}},
      {"static", fit.residual < kValidationTol},
      {"bismut_scalar", bismut_scalar(standardize(mu, g))},
  };
}

json export_entry(const CatalogEntry& entry) {
  const RealStructure rs = to_real_structure(entry.bracket);
  json entries = json::array();
  for (int i = 0; i < rs.dim; ++i)
    for (int j = i + 1; j < rs.dim; ++j)
      for (int k = 0; k < rs.dim; ++k)
        if (rs.at(i, j, k) != 0.0) entries.push_back({i, j, k, rs.at(i, j, k)});
  json J = json::array();
  for (int r = 0; r < rs.dim; ++r) {
    json row = json::array();
    for (int c = 0; c < rs.dim; ++c) row.push_back(rs.complex_structure(r, c));
    J.push_back(row);
  }
  return {
      {"name", entry.name},
      {"algebra", {{"structure_constants", {{"dim", rs.dim}, {"entries", entries}}}, {"complex_structure", J}}},
      {"flow", "pluriclosed"},
      {"seed", {{"metric", complex_matrix_json(entry.metric_seed.matrix())}}},
  };
}

std::string resolve_output_dir(const RunConfig& cfg) { return env_output_dir().value_or(cfg.output_dir); }

int run_command(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(config_path);
    const Materialized m = materialize(cfg);
    const FlowTrajectory traj = integrate(cfg, m);
    const json summary = run_summary(cfg, m, traj);

    const std::filesystem::path dir = resolve_output_dir(cfg);
    std::filesystem::create_directories(dir);
    const auto traj_path = dir / cfg.trajectory_file;
    const auto summary_path = dir / cfg.summary_file;
    {
      std::ofstream f(traj_path, std::ios::binary);
      f << trajectory_csv(traj);
      if (!f) throw Error("cannot write " + traj_path.string());
    }
    {
      std::ofstream f(summary_path, std::ios::binary);
      f << summary.dump(2) << '\n';
      if (!f) throw Error("cannot write " + summary_path.string());
    }
    out << cfg.name << ": " << to_string(traj.termination) << " at t = " << traj.t_final << '\n'
        << "trajectory: " << traj_path.string() << '\n'
        << "summary: " << summary_path.string() << '\n';
    return exit_code_for(traj.termination);
  });
}

int verify_command(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(config_path);
    const Materialized m = materialize(cfg);
    json report = verify_report(m.mu, m.metric);
    if (cfg.flow == FlowKind::HermitianSymplectic) {
      const TamedForm seed{m.metric, m.beta};
      report["closedness"] = closedness_defect(m.mu, seed).total;
      report["taming_margin"] = taming_margin(seed);
    }
    out << report.dump(2) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int catalog_command(const std::optional<std::string>& export_name, const std::map<std::string, double>& params,
                    std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (export_name) {
      out << export_entry(lookup(*export_name, params)).dump(2) << '\n';
      return static_cast<int>(kExitOk);
    }
    for (const auto& e : list_entries()) {
      out << e.name;
      if (!e.parameters.empty()) out << " [" << e.parameters << "]";
      out << "\n    " << e.description << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace sktflow
