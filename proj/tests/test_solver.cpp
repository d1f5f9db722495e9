#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "socdiff/extinction.hpp"
#include "socdiff/solver.hpp"

using namespace socdiff;

namespace {

SimulationConfig base_config(Eigen::Index n) {
  SimulationConfig cfg;
  cfg.grid = make_grid<double>(n);
  cfg.nonlinearity = NonlinearitySpec<double>::linear(1.0, 1.0);
  cfg.lambda = 0.01;
  cfg.dt = 2e-4;
  cfg.t_max = 0.6;
  cfg.initial.kind = InitialKind::SineMode;
  cfg.initial.amplitude = 0.5;
  cfg.initial.mode = 1;
  return cfg;
}

void set_noise(SimulationConfig& cfg, std::initializer_list<double> mus,
               std::uint64_t seed) {
  cfg.noise.n_modes = static_cast<Eigen::Index>(mus.size());
  cfg.noise.mu.resize(cfg.noise.n_modes);
  Eigen::Index i = 0;
  for (double m : mus) cfg.noise.mu[i++] = m;
  cfg.noise.master_seed = seed;
}

BrownianIncrements<double> no_increments() {
  return BrownianIncrements<double>{VectorX<double>::Zero(0)};
}

}  // namespace

TEST_CASE("zero is a fixed point when psi_tilde(0) = 0") {
  auto cfg = base_config(31);
  Stepper stepper(cfg);
  SolverState s = stepper.initial_state();
  s.z.values.setZero();
  s.eta.values.setZero();
  stepper.advance(s, no_increments());
  CHECK(s.z.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.t == doctest::Approx(cfg.dt));
}

TEST_CASE("reflection symmetry about pi/2 is preserved") {
  auto cfg = base_config(63);
  Stepper stepper(cfg);
  SolverState s = stepper.initial_state();
  for (int m = 0; m < 50; ++m) stepper.advance(s, no_increments());
  const Eigen::Index n = cfg.grid.n;
  double asym = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    asym = std::max(asym, std::abs(s.z.values[i] - s.z.values[n - 1 - i]));
  }
  CHECK(asym <= 1e-11);
}

TEST_CASE("linear-regime step matches the closed form") {
  auto cfg = base_config(63);
  cfg.lambda = 0.1;
  cfg.dt = 1e-3;
  // keep every node inside the transition zone: max amplitude 0.9 * lambda
  cfg.initial.amplitude = 0.9 * cfg.lambda;
  Stepper stepper(cfg);
  SolverState s = stepper.initial_state();

  const double slope = cfg.nonlinearity.rho / cfg.lambda + 1.0;
  const double lam1 = discrete_eigenvalue(cfg.grid, 1);
  const double factor = 1.0 / (1.0 + cfg.dt * slope * lam1);
  const VectorX<double> z0 = s.z.values;

  for (int m = 1; m <= 10; ++m) {
    stepper.advance(s, no_increments());
    const VectorX<double> expected = std::pow(factor, m) * z0;
    const double rel = (s.z.values - expected).cwiseAbs().maxCoeff() /
                       expected.cwiseAbs().maxCoeff();
    CHECK(rel <= 1e-10);
  }
  CHECK(max_value(s.z) <= cfg.lambda);  // stayed in the linear regime
}

TEST_CASE("deterministic run extinguishes before the closed-form bound") {
  auto cfg = base_config(127);
  const PathResult r = simulate_path(cfg);
  REQUIRE(r.tau.has_value());
  CHECK(*r.tau <= 0.5);  // well before the horizon

  Stepper probe(cfg);
  const double x_norm = h_minus1_norm(probe.initial_state().z);
  const double bound =
      deterministic_bound(x_norm, cfg.nonlinearity.rho, gamma_constant<double>());
  CHECK(*r.tau <= bound * 1.05 + 2.0 * cfg.dt);

  // refining the step barely moves the extinction time
  auto fine = cfg;
  fine.dt = cfg.dt / 2.0;
  const PathResult rf = simulate_path(fine);
  REQUIRE(rf.tau.has_value());
  CHECK(std::abs(*rf.tau - *r.tau) <= 0.02);
}

TEST_CASE("zero-amplitude noise reproduces the deterministic run bit-exactly") {
  auto det = base_config(63);
  det.t_max = 0.1;
  auto stoch = det;
  set_noise(stoch, {0.0}, 77);

  const PathResult a = simulate_path(det);
  const PathResult b = simulate_path(stoch);
  REQUIRE(a.times.size() == b.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.h_minus1[i] == b.h_minus1[i]);
    CHECK(a.max_v[i] == b.max_v[i]);
  }
  CHECK(a.final_state.values == b.final_state.values);
}

TEST_CASE("absorption clamps the state to zero for good") {
  auto cfg = base_config(63);
  set_noise(cfg, {0.2}, 5);
  cfg.t_max = 0.8;
  const PathResult r = simulate_path(cfg);
  REQUIRE(r.tau.has_value());
  bool saw_post_tau = false;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    if (r.times[i] > *r.tau) {
      saw_post_tau = true;
      CHECK(r.h_minus1[i] == 0.0);
      CHECK(r.l1[i] == 0.0);
      CHECK(r.l2[i] == 0.0);
      CHECK(r.min_v[i] == 0.0);
      CHECK(r.max_v[i] == 0.0);
    }
  }
  CHECK(saw_post_tau);
  CHECK(r.final_state.values.cwiseAbs().maxCoeff() == 0.0);
  // tau is one of the sample times and the first one at/below the threshold
  bool found = false;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    if (r.times[i] == *r.tau) found = true;
    if (r.times[i] < *r.tau) CHECK(r.h_minus1[i] > r.epsilon_used);
  }
  CHECK(found);
}

TEST_CASE("zero initial state is extinct at time zero") {
  auto cfg = base_config(31);
  cfg.initial.kind = InitialKind::Constant;
  cfg.initial.value = 0.0;
  const PathResult r = simulate_path(cfg);
  REQUIRE(r.tau.has_value());
  CHECK(*r.tau == 0.0);
  for (const double v : r.h_minus1) CHECK(v == 0.0);
  for (const double v : r.max_v) CHECK(v == 0.0);
}

TEST_CASE("sample times are strictly increasing") {
  auto cfg = base_config(31);
  cfg.sample_every = 7;
  cfg.t_max = 0.05;
  const PathResult r = simulate_path(cfg);
  for (std::size_t i = 1; i < r.times.size(); ++i) {
    CHECK(r.times[i] > r.times[i - 1]);
  }
}

TEST_CASE("positivity is preserved without clamping") {
  auto cfg = base_config(63);
  cfg.initial.kind = InitialKind::Bump;
  cfg.initial.amplitude = 0.8;
  cfg.t_max = 0.3;
  set_noise(cfg, {0.2, 0.1}, 404);
  double worst = 0.0;
  for (std::uint64_t path = 0; path < 20; ++path) {
    const PathResult r = simulate_path(cfg, path);
    for (const double v : r.min_v) worst = std::min(worst, v);
  }
  CHECK(worst >= -1e-6 * 0.8);
}

TEST_CASE("deterministic flow contracts in H^-1") {
  auto cfg = base_config(63);
  cfg.t_max = 0.579;  // not used by manual stepping below
  auto realize = [&](std::uint32_t which) {
    GridFunction<double> u(cfg.grid);
    for (Eigen::Index i = 0; i < cfg.grid.n; ++i) {
      const double xi = cfg.grid.nodes[i];
      u.values[i] = std::abs(std::sin(xi) +
                             0.4 * rng::standard_normal(900, which, 1, 0) *
                                 std::sin(2.0 * xi) +
                             0.2 * rng::standard_normal(900, which, 2, 0) *
                                 std::sin(3.0 * xi));
    }
    return u;
  };
  const auto x = realize(0);
  const auto y = realize(1);

  auto from = [&](const GridFunction<double>& init) {
    auto c = cfg;
    c.initial.kind = InitialKind::NodeValues;
    c.initial.values = init.values;
    Stepper st(c);
    return std::make_pair(std::move(st), Stepper(c).initial_state());
  };
  Stepper sx(cfg), sy(cfg);
  auto cx = cfg;
  cx.initial.kind = InitialKind::NodeValues;
  cx.initial.values = x.values;
  auto cy = cfg;
  cy.initial.kind = InitialKind::NodeValues;
  cy.initial.values = y.values;
  Stepper stx(cx), sty(cy);
  SolverState a = stx.initial_state();
  SolverState b = sty.initial_state();

  double prev = h_minus1_norm(
      GridFunction<double>(cfg.grid, (a.z.values - b.z.values).eval()));
  for (int m = 0; m < 300; ++m) {
    stx.advance(a, no_increments());
    sty.advance(b, no_increments());
    const double gap = h_minus1_norm(
        GridFunction<double>(cfg.grid, (a.z.values - b.z.values).eval()));
    CHECK(gap <= prev + 1e-8);
    prev = gap;
  }
}

TEST_CASE("newton failure carries diagnostics") {
  auto cfg = base_config(63);
  cfg.newton.max_iterations = 1;
  cfg.lambda = 1e-4;  // strongly nonlinear first step
  Stepper stepper(cfg);
  SolverState s = stepper.initial_state();
  CHECK_THROWS_AS(stepper.advance(s, no_increments()), newton_failure);
  try {
    Stepper st2(cfg);
    SolverState s2 = st2.initial_state();
    st2.advance(s2, no_increments());
  } catch (const newton_failure& e) {
    CHECK(e.time() == doctest::Approx(cfg.dt));
    CHECK(std::string(e.what()).find("dt") != std::string::npos);
  }
}

TEST_CASE("invalid nonlinearity and non-finite initial data are rejected") {
  auto cfg = base_config(31);
  cfg.nonlinearity = NonlinearitySpec<double>::linear(0.0, 1.0);
  CHECK_THROWS_AS(Stepper{cfg}, std::invalid_argument);

  auto cfg2 = base_config(31);
  cfg2.initial.kind = InitialKind::NodeValues;
  cfg2.initial.values = VectorX<double>::Zero(31);
  cfg2.initial.values[3] = std::numeric_limits<double>::quiet_NaN();
  Stepper st(cfg2);
  CHECK_THROWS_AS(st.initial_state(), std::invalid_argument);
}

TEST_CASE("weak-form residual vanishes on the zero path") {
  auto cfg = base_config(31);
  cfg.initial.kind = InitialKind::Constant;
  cfg.initial.value = 0.0;
  cfg.t_max = 0.02;
  const auto [r, hist] = simulate_path_recorded(cfg);
  CHECK(weak_form_residual(hist, 1) == 0.0);
  CHECK(weak_form_residual(hist, 2) == 0.0);
}

TEST_CASE("weak-form residual in the linear regime is O(dt)") {
  auto cfg = base_config(63);
  cfg.lambda = 0.1;
  cfg.dt = 1e-3;
  cfg.t_max = 0.05;
  cfg.initial.amplitude = 0.9 * cfg.lambda;
  const auto [r, hist] = simulate_path_recorded(cfg);
  Stepper probe(cfg);
  const double x_l2 = l2_norm(probe.initial_state().z);
  CHECK(weak_form_residual(hist, 1) <= 10.0 * cfg.dt * x_l2);
}

TEST_CASE("weak-form residual halves with dt on a fixed Brownian path") {
  auto coarse = base_config(63);
  set_noise(coarse, {0.2}, 246);
  coarse.lambda = 0.02;
  coarse.dt = 4e-4;
  coarse.t_max = 0.2;
  coarse.brownian_substeps = 2;

  auto fine = coarse;
  fine.dt = coarse.dt / 2.0;
  fine.brownian_substeps = 1;

  const auto [rc, hc] = simulate_path_recorded(coarse);
  const auto [rf, hf] = simulate_path_recorded(fine);
  for (const Eigen::Index j : {1, 2, 3}) {
    const double res_c = weak_form_residual(hc, j);
    const double res_f = weak_form_residual(hf, j);
    CHECK(res_f > 0.0);
    const double ratio = res_c / res_f;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
}

TEST_CASE("weak-form residual rejects missing histories") {
  StateHistory hist;
  CHECK_THROWS_AS(weak_form_residual(hist, 1), std::invalid_argument);
}

TEST_CASE("free step function leaves extinct states absorbed") {
  auto cfg = base_config(31);
  Stepper stepper(cfg);
  SolverState s = stepper.initial_state();
  s.extinct = true;
  s.tau = 0.1;
  s.z.values.setZero();
  s.eta.values.setZero();
  const SolverState next = step(s, cfg, no_increments());
  CHECK(next.z.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(next.t == doctest::Approx(cfg.dt));
  CHECK(next.extinct);
}
