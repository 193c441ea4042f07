#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sktflow/bismut_ricci.hpp"
#include "sktflow/catalog.hpp"
#include "sktflow/flows.hpp"

using namespace sktflow;

namespace {

IntegratorConfig config(double dt, double t_end, int sample_every) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.sample_every = sample_every;
  return c;
}

double relative(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST_CASE("pluriclosed flow") {
  oracle::Rng rng(21);
  SUBCASE("heisenberg from omega0: x = sqrt(1 + t), y and z fixed") {
    const auto traj = pluriclosed_flow(heisenberg_kt().bracket, HermitianMetric::identity(2), config(1e-3, 10, 500));
    CHECK(traj.termination == Termination::ReachedEnd);
    CHECK(traj.size() == 21);
    CHECK(traj.t_final == doctest::Approx(10.0).epsilon(1e-14));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const CMatrix g = metric_of_state(traj.states[i]);
      CHECK(std::abs(g(0, 0).real() / std::sqrt(1 + traj.times[i]) - 1.0) < 1e-10);
      CHECK(std::abs(g(1, 1) - 1.0) < 1e-12);
      CHECK(std::abs(g(0, 1)) < 1e-12);
    }
  }

  SUBCASE("heisenberg general seed follows x(t) = (sqrt(y0^3 t + D0^2) + |z0|^2) / y0") {
    const auto entry = heisenberg_kt();
    for (int trial = 0; trial < 5; ++trial) {
      const CMatrix g0 = rng.positive(2);
      const auto traj = pluriclosed_flow(entry.bracket, HermitianMetric(g0), config(1e-3, 5, 1000));
      for (std::size_t i = 0; i < traj.size(); ++i) {
        const CMatrix g = metric_of_state(traj.states[i]);
        const double x = heisenberg_x(g0(0, 0).real(), g0(1, 1).real(), g0(0, 1), traj.times[i]);
        CHECK(std::abs(g(0, 0).real() / x - 1.0) < 1e-9);
        CHECK(relative(g, *entry.metric_law(g0, traj.times[i])) < 1e-9);
      }
    }
  }

  SUBCASE("flat torus is a fixed point") {
    const CMatrix g0 = rng.positive(3);
    const auto traj = pluriclosed_flow(LieBracket(3), HermitianMetric(g0), config(0.1, 5, 10));
    for (const auto& s : traj.states) CHECK((metric_of_state(s) - g0).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("inoue from diag(1, y0): y grows with slope 3a^2, x and z fixed") {
    for (double a : {0.5, 1.0, 2.0}) {
      CMatrix g0 = CMatrix::Identity(2, 2);
      g0(1, 1) = 1.5;
      const auto traj = pluriclosed_flow(inoue_s0(a, 0.7).bracket, HermitianMetric(g0), config(1e-2, 2, 50));
      for (std::size_t i = 0; i < traj.size(); ++i) {
        const CMatrix g = metric_of_state(traj.states[i]);
        CHECK(g(1, 1).real() == doctest::Approx(1.5 + 3 * a * a * traj.times[i]).epsilon(1e-12));
        CHECK(std::abs(g(0, 0) - 1.0) < 1e-12);
        CHECK(std::abs(g(0, 1)) < 1e-12);
      }
    }
  }

  SUBCASE("monitors on a 2-step run: SKT preserved, reduced identity holds, bracket channels NaN") {
    const auto e = random_2step_skt(3, 3);
    const auto traj = pluriclosed_flow(e.bracket, e.metric_seed, config(1e-2, 3, 30));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      CHECK(traj.channel("skt_defect")[i] < 1e-10);
      CHECK(traj.channel("reduced_flow_defect")[i] < 1e-10);
      CHECK(traj.channel("min_eigenvalue")[i] > 0.0);
      CHECK(std::isnan(traj.channel("bracket_norm_sq")[i]));
      CHECK(std::isnan(traj.channel("gauge_defect")[i]));
    }
    CHECK_THROWS_AS(traj.channel("no_such_channel"), ValidationError);
  }

  SUBCASE("reduced identity is not monitored off the 2-step class") {
    const auto traj = pluriclosed_flow(inoue_s0().bracket, HermitianMetric::identity(2), config(0.1, 0.2, 1));
    for (double v : traj.channel("reduced_flow_defect")) CHECK(std::isnan(v));
  }

  SUBCASE("configuration errors") {
    CHECK_THROWS_AS(pluriclosed_flow(LieBracket(2), HermitianMetric::identity(2), config(0.0, 1, 1)), ValidationError);
    CHECK_THROWS_AS(pluriclosed_flow(LieBracket(2), HermitianMetric::identity(2), config(0.1, -1, 1)), ValidationError);
    CHECK_THROWS_AS(pluriclosed_flow(LieBracket(2), HermitianMetric::identity(2), config(0.1, 1, 0)), ValidationError);
  }
}

TEST_CASE("bracket flow") {
  SUBCASE("heisenberg: z(t) = -1 / (2 sqrt(t + 1)), center preserved") {
    const auto entry = heisenberg_kt();
    const auto traj = bracket_flow(entry.bracket, config(1e-2, 100, 100), false);
    CHECK(traj.termination == Termination::ReachedEnd);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.times[i];
      const LieBracket& mu = bracket_of_state(traj.states[i]);
      const Complex z = mu(0, 2, 1);
      CHECK(std::abs(z / (-0.5 / std::sqrt(t + 1)) - 1.0) < 1e-8);
      CHECK(oracle::max_diff(mu, *entry.bracket_law(entry.bracket, t)) < 1e-9);
      CHECK(traj.channel("center_principal_angle")[i] < 1e-8);
      CHECK(traj.channel("bracket_norm_sq")[i] == doctest::Approx(1.0 / (1 + t)).epsilon(1e-8));
      CHECK(traj.channel("jacobi_defect")[i] < 1e-12);
      CHECK(traj.channel("nijenhuis_defect")[i] < 1e-12);
    }
  }

  SUBCASE("inoue: agrees with a run at a hundredth of the step") {
    const LieBracket mu0 = inoue_s0().bracket;
    const auto coarse = bracket_flow(mu0, config(1e-2, 1, 100), false);
    const auto fine = bracket_flow(mu0, config(1e-4, 1, 10000), false);
    CHECK(oracle::max_diff(bracket_of_state(coarse.states.back()), bracket_of_state(fine.states.back())) < 1e-8);
  }

  SUBCASE("field matches delta_mu(P_mu) / 2 and delta is linear in alpha") {
    oracle::Rng rng(22);
    const LieBracket mu = random_2step_skt(3, 1).bracket;
    LieBracket expected = delta(mu, p_of_bracket(mu).p);
    expected *= 0.5;
    CHECK(oracle::max_diff(bracket_field(mu), expected) < 1e-15);
    const CMatrix a = rng.matrix(3, 3), b = rng.matrix(3, 3);
    LieBracket sum = delta(mu, a);
    sum += delta(mu, b);
    CHECK(oracle::max_diff(delta(mu, a + b), sum) < 1e-13);
    CHECK(oracle::max_diff(delta(mu, CMatrix::Identity(3, 3)), mu) < 1e-14);
  }

  SUBCASE("non-integrable bracket rejected") {
    CVector v = CVector::Zero(4);
    v(2) = 1.0;
    LieBracket bad(2);
    bad.set(0, 1, v);
    CHECK_THROWS_AS(bracket_flow(bad, config(0.1, 1, 1), false), IntegrabilityError);
  }
}

TEST_CASE("metric and bracket flows are equivalent through the gauge") {
  for (const auto& e : {heisenberg_kt(), random_2step_skt(3, 0), inoue_s0(), solvable_2414(), torus(2)}) {
    const IntegratorConfig cfg = config(1e-2, 5, 50);
    const auto metric_run = pluriclosed_flow(e.bracket, HermitianMetric::identity(e.bracket.n()), cfg);
    const auto gauged_run = bracket_flow(e.bracket, cfg, true);
    const EquivalenceReport rep = equivalence_check(metric_run, gauged_run);
    CHECK(rep.metric_defect < 1e-8);
    CHECK(rep.bracket_defect < 1e-8);
    for (double v : gauged_run.channel("gauge_defect")) CHECK(v < 1e-8);
  }

  SUBCASE("grid or kind mismatch is rejected") {
    const LieBracket mu = heisenberg_kt().bracket;
    const auto metric_run = pluriclosed_flow(mu, HermitianMetric::identity(2), config(1e-2, 1, 10));
    const auto other_grid = bracket_flow(mu, config(1e-2, 1, 20), true);
    const auto ungauged = bracket_flow(mu, config(1e-2, 1, 10), false);
    CHECK_THROWS_AS(equivalence_check(metric_run, other_grid), ValidationError);
    CHECK_THROWS_AS(equivalence_check(metric_run, ungauged), ValidationError);
  }
}

TEST_CASE("hermitian-symplectic flow") {
  SUBCASE("torus is constant to the last bit") {
    const auto e = torus(3);
    const auto traj = hs_flow(e.bracket, *e.tamed_seed, config(0.1, 100, 100));
    for (const auto& s : traj.states) {
      const auto& ts = std::get<TamedState>(s);
      CHECK((ts.g - e.tamed_seed->omega.matrix()).cwiseAbs().maxCoeff() == 0.0);
      CHECK((ts.beta - e.tamed_seed->beta).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("solvable seed (1, 1, 0.3): x, y fixed, |z| decreasing along the radial law") {
    const auto e = solvable_2414();
    const auto traj = hs_flow(e.bracket, *e.tamed_seed, config(1e-2, 50, 100));
    CHECK(traj.termination == Termination::ReachedEnd);
    double last = 1.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto& ts = std::get<TamedState>(traj.states[i]);
      CHECK(std::abs(ts.g(0, 0) - 1.0) < 1e-12);
      CHECK(std::abs(ts.g(1, 1) - 1.0) < 1e-12);
      const double r = std::abs(ts.g(0, 1));
      if (i > 0) CHECK(r < last);
      last = r;
      CHECK(std::abs(r - solvable_radius(1, 1, 0.3, traj.times[i])) < 1e-9);
      CHECK(std::abs(ts.beta(0, 1) - Complex(0, 1) * ts.g(0, 1)) < 1e-10);
      CHECK(traj.channel("closedness_drift")[i] < 1e-10);
      CHECK(traj.channel("taming_margin")[i] > 0.0);
    }
    CHECK(last < 0.05 * 0.3);
  }

  SUBCASE("beta equals the quadrature of -rho^B(Z_i, Z_j) along the metric path") {
    const auto e = solvable_2414();
    const auto traj = hs_flow(e.bracket, *e.tamed_seed, config(1e-3, 1, 1));
    CMatrix integral = CMatrix::Zero(2, 2);
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
      const double h = traj.times[i + 1] - traj.times[i];
      integral += 0.5 * h *
                  (beta_field(e.bracket, metric_of_state(traj.states[i])) +
                   beta_field(e.bracket, metric_of_state(traj.states[i + 1])));
    }
    const CMatrix moved = std::get<TamedState>(traj.states.back()).beta - e.tamed_seed->beta;
    CHECK((moved - integral).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(moved.cwiseAbs().maxCoeff() > 1e-3);
  }

  SUBCASE("taming depends on omega alone, so a large beta still runs") {
    TamedForm seed{HermitianMetric::identity(2), CMatrix::Zero(2, 2)};
    seed.beta(0, 1) = 5.0;
    seed.beta(1, 0) = -5.0;
    CHECK(hs_flow(LieBracket(2), seed, config(0.1, 1, 1)).termination == Termination::ReachedEnd);
    CHECK_THROWS_AS(hs_flow(LieBracket(3), seed, config(0.1, 1, 1)), ValidationError);
  }
}

TEST_CASE("integrator") {
  const Field exp_field = [](const CVector& y) { return y; };
  SUBCASE("zero field leaves the state untouched") {
    oracle::Rng rng(23);
    CVector y = rng.matrix(5, 1);
    const Field zero = [](const CVector& v) { return CVector(CVector::Zero(v.size())); };
    const StepResult r = step(zero, y, 0.3);
    CHECK(r.accepted);
    CHECK(r.halvings == 0);
    CHECK((r.state - y).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("rk4 local error scales as h^5") {
    CVector y(1);
    y(0) = 1.0;
    const double e1 = std::abs(rk4_step(exp_field, y, 0.1)(0) - std::exp(0.1));
    const double e2 = std::abs(rk4_step(exp_field, y, 0.05)(0) - std::exp(0.05));
    CHECK(e1 / e2 == doctest::Approx(32.0).epsilon(0.05));
  }

  SUBCASE("step doubling subdivides until the tolerance holds, and restore runs") {
    CVector y(1);
    y(0) = 1.0;
    int restored = 0;
    const Restore count = [&restored](CVector&) { ++restored; };
    const StepResult r = step(exp_field, y, 1.0, StepControl{1e-12, 20}, count);
    CHECK(r.accepted);
    CHECK(r.halvings > 0);
    CHECK(restored >= 1);
    CHECK(std::abs(r.state(0) - std::exp(1.0)) < 1e-10);
  }

  SUBCASE("exhausted halving budget rejects the step") {
    CVector y(1);
    y(0) = 1.0;
    CHECK_FALSE(step(exp_field, y, 1.0, StepControl{1e-300, 2}).accepted);
    IntegratorConfig c = config(0.5, 1, 1);
    c.rel_tol = 1e-300;
    c.max_halvings = 0;
    const auto traj = pluriclosed_flow(heisenberg_kt().bracket, HermitianMetric::identity(2), c);
    CHECK(traj.termination == Termination::StepRejected);
    CHECK(traj.t_final == 0.0);
  }
}

TEST_CASE("bracket-norm decay") {
  std::vector<FlowTrajectory> runs;
  runs.push_back(bracket_flow(heisenberg_kt().bracket, config(1e-2, 10, 200), false));
  for (std::uint64_t s = 0; s < 3; ++s) runs.push_back(bracket_flow(random_2step_skt(3, s).bracket, config(1e-2, 5, 100), false));
  const DecayReport rep = decay_calibration(runs);
  CHECK(rep.samples > 10);
  CHECK(rep.kappa == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rep.spread < 1e-4);
  CHECK(rep.bound_holds);
  // the sharper bound d/dt |mu|^2 <= -1/2 |mu|^4 also holds
  CHECK(rep.max_rate_ratio <= -0.5 + 1e-8);
  CHECK_THROWS_AS(decay_calibration({pluriclosed_flow(LieBracket(2), HermitianMetric::identity(2), config(0.1, 1, 1))}),
                  ValidationError);
}

TEST_CASE("backward existence") {
  SUBCASE("heisenberg from omega0 blows down just before t = -1") {
    const BackwardReport rep =
        backward_existence(heisenberg_kt().bracket, HermitianMetric::identity(2), config(1e-3, 1, 1), 5.0);
    CHECK(rep.termination != Termination::ReachedEnd);
    CHECK(rep.epsilon > 0.9);
    CHECK(rep.epsilon <= 1.0);
  }

  SUBCASE("flat torus exists for all negative time reached") {
    const BackwardReport rep = backward_existence(LieBracket(2), HermitianMetric::identity(2), config(0.1, 1, 1), 3.0);
    CHECK(rep.termination == Termination::ReachedEnd);
    CHECK(rep.epsilon == doctest::Approx(3.0));
  }
}
