#ifndef SKTFLOW_CATALOG_HPP
#define SKTFLOW_CATALOG_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sktflow/flows.hpp"
#include "sktflow/forms.hpp"
#include "sktflow/lie_core.hpp"

namespace sktflow {

struct CatalogEntry {
  std::string name;
  LieBracket bracket;
  HermitianMetric metric_seed;
  std::optional<TamedForm> tamed_seed;
  /// Verified on construction: "nilpotent", "two_step", "solvable",
  /// "abelian", "skt", "kahler", "tamed".
  std::vector<std::string> tags;

  /// Exact pluriclosed solution g(t) from g0 (for this bracket), or nullopt
  /// where no closed form is known for that seed.
  std::function<std::optional<CMatrix>(const CMatrix& g0, double t)> metric_law;
  /// Exact bracket-flow solution from a seed bracket.
  std::function<std::optional<LieBracket>(const LieBracket& mu0, double t)> bracket_law;
  /// Exact HS-flow solution from a tamed seed.
  std::function<std::optional<TamedState>(const TamedState& s0, double t)> tamed_law;

  bool has_tag(const std::string& tag) const;
};

/// h3 + R with J e1 = -e2, J e3 = -e4: mu(Z1, Zbar1) = -(Z2 - Zbar2)/2.
CatalogEntry heisenberg_kt();

/// Inoue S0 algebra with lambda = (b + i a)/2; throws ValidationError when
/// a or b is zero.
CatalogEntry inoue_s0(double a = 1.0, double b = 1.0);

/// Solvable algebra (24, -14, 0, 0) with J e1 = e2, J e3 = e4.
CatalogEntry solvable_2414();

/// Abelian C^n with the flat Kahler seed; n >= 2 also carries the tamed seed
/// omega0 + dz1^dz2 + conj.
CatalogEntry torus(int n);

/// Random 2-step nilpotent SKT bracket for the identity metric with
/// J-invariant center, normalized to <mu, mu> = 1. Deterministic per seed.
/// Throws Error when the rejection budget is exhausted.
CatalogEntry random_2step_skt(int n, std::uint64_t seed);

/// Bracket of the heisenberg family with mu(Z1, Zbar1) = z Z2 - conj(z) Zbar2.
LieBracket heisenberg_bracket(Complex z);

/// Pluriclosed closed form on h3 + R with g0 = [[x0, z0], [conj z0, y0]]:
/// x(t) = (sqrt(y0^3 t + (x0 y0 - |z0|^2)^2) + |z0|^2) / y0.
double heisenberg_x(double x0, double y0, Complex z0, double t);

/// Radius of z(t) for the HS flow on the solvable algebra, from
/// y0^2 log(r / r0) - (r^2 - r0^2) / (2 x0^2) = -t / 4 (x0, y0 are the
/// square roots of the diagonal metric entries).
double solvable_radius(double x0, double y0, double r0, double t);

/// Entry by name with numeric parameters ("a", "b", "n", "seed").
CatalogEntry lookup(const std::string& name, const std::map<std::string, double>& params = {});

struct CatalogListing {
  std::string name;
  std::string parameters;
  std::string description;
};

std::vector<CatalogListing> list_entries();

}  // namespace sktflow

#endif  // SKTFLOW_CATALOG_HPP
