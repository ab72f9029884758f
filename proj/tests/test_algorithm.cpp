#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "boco/algorithm.hpp"

using namespace boco;

namespace {

ScenarioBounds bounds(double f_bar, double g_bar, double lipschitz) {
  return ScenarioBounds{f_bar, g_bar, lipschitz};
}

// Hand-built parameter block for driven state-machine tests. The dual test
// below relies on beta large enough that a -1 drain runs for many rounds.
AlgoParams drain_params() {
  AlgoParams p;
  p.horizon = 50;
  p.num_constraints = 1;
  p.dim = 1;
  p.eta = 0.1;
  p.rho = 0.1;
  p.epsilon = 0.1;
  p.beta = 0.5;
  p.alpha = 0.25;
  p.dual_cap = 1.0;
  p.gammas = {0.1, 0.05};
  p.bounds = bounds(2.0, 1.0, 1.0);
  p.safe = SafeAction{{0.0}, 0.6};
  return p;
}

}  // namespace

TEST_CASE("derived parameter schedule") {
  auto set = DecisionSet::ball(2, 1.0);  // D = 2, r0 = 1
  auto p = derive_params(10000, 2, set, bounds(1.0, 1.0, 1.0),
                         SafeAction{{0.0, 0.0}, 0.2});

  CHECK(p.eta == 1.0 / std::sqrt(20000.0));
  CHECK(p.eta == doctest::Approx(7.0711e-3).epsilon(1e-4));

  CHECK(p.rho == std::pow(2.0, 1.0 / 3.0) * std::pow(10000.0, -0.25));
  CHECK(p.rho == doctest::Approx(0.125992).epsilon(1e-5));

  CHECK(p.epsilon == 0.01);
  CHECK(p.beta == 1.0 / std::log(10000.0));
  CHECK(p.beta == doctest::Approx(0.108574).epsilon(1e-5));

  // cap times buffer equals the payoff bound by construction
  CHECK(p.dual_cap == std::log(10000.0));
  CHECK(p.dual_cap == doctest::Approx(9.21034).epsilon(1e-5));
  CHECK(p.dual_cap * p.beta == doctest::Approx(1.0).epsilon(1e-12));

  double gamma_max =
      std::pow(2.0, -1.0 / 6.0) * std::sqrt(20001.0) * std::pow(10000.0, -0.75);
  REQUIRE(p.gammas.size() == 8);  // ceil(log2(20001) / 2)
  CHECK(p.gammas[0] == gamma_max);
  CHECK(p.gammas[0] == doctest::Approx(0.126001).epsilon(1e-5));
  for (size_t i = 1; i < p.gammas.size(); ++i)
    CHECK(p.gammas[i] == gamma_max * std::ldexp(1.0, -int(i)));

  CHECK(p.alpha == p.rho);  // min(rho / 1, 0.5)
  CHECK_NOTHROW(p.validate(set));
}

TEST_CASE("schedule rejections") {
  auto set = DecisionSet::ball(2, 1.0);
  auto b = bounds(1.0, 1.0, 1.0);
  CHECK_THROWS_AS(derive_params(2, 2, set, b, SafeAction{{0.0, 0.0}, 0.2}),
                  ConfigError);
  CHECK_THROWS_AS(derive_params(100, 0, set, b, SafeAction{{0.0, 0.0}, 0.2}),
                  ConfigError);

  // beta = 1/ln(100) = 0.217 does not clear a 0.2 margin claim
  CHECK_THROWS_AS(derive_params(100, 1, set, b, SafeAction{{0.0, 0.0}, 0.2}),
                  ConfigError);

  // tiny ball: rho = 16^{-1/4} = 0.5 cannot fit inside alpha * 0.1
  CHECK_THROWS_AS(derive_params(16, 1, DecisionSet::ball(1, 0.1), b,
                                SafeAction{{0.0}, 0.9}),
                  ConfigError);

  // boundary origin: inradius 0 falls back to alpha = 1/2
  auto corner = DecisionSet::box({0.0, 0.0}, {1.0, 1.0});
  auto p = derive_params(1000, 1, corner, b, SafeAction{{0.5, 0.5}, 0.5});
  CHECK(p.alpha == 0.5);
}

TEST_CASE("parameter validation") {
  auto set = DecisionSet::box({-1.0}, {1.0});
  auto good = drain_params();
  CHECK_NOTHROW(good.validate(set));

  auto p = good;
  p.beta = 0.6;  // not strictly below beta_bar
  CHECK_THROWS_AS(p.validate(set), ConfigError);

  p = good;
  p.gammas = {0.1, 0.06};  // not a halving grid
  CHECK_THROWS_AS(p.validate(set), ConfigError);

  p = good;
  p.rho = 0.3;  // exceeds alpha * r0 = 0.25
  CHECK_THROWS_AS(p.validate(set), ConfigError);

  p = good;
  p.alpha = 1.0;
  CHECK_THROWS_AS(p.validate(set), ConfigError);

  p = good;
  p.dim = 2;
  CHECK_THROWS_AS(p.validate(set), ConfigError);

  p = good;
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(set), ConfigError);
}

TEST_CASE("gradient estimate") {
  CHECK(gradient_estimate(1.0, {-0.4}, {0.5}, {0.0, 1.0}, 0.5, 2) ==
        Vec{0.0, 3.2});
  CHECK(gradient_estimate(0.0, {0.3}, {0.0}, {0.6, 0.8}, 0.5, 2) ==
        Vec{0.0, 0.0});
  CHECK(gradient_estimate(2.0, {}, {}, {-1.0}, 1.0, 1) == Vec{-2.0});

  CHECK_THROWS_AS(gradient_estimate(1.0, {0.1, 0.2}, {0.5}, {1.0}, 0.5, 1),
                  UsageError);
  CHECK_THROWS_AS(gradient_estimate(1.0, {0.1}, {0.5}, {1.0}, 0.5, 2),
                  UsageError);

  // norm never exceeds (d/rho)(F_bar + K C G_bar)
  const double f_bar = 1.5, g_bar = 0.8, cap = 3.0, rho = 0.2;
  const int d = 3, K = 2;
  double limit = (d / rho) * (f_bar + K * cap * g_bar);
  RngStream rng(31);
  for (int i = 0; i < 1000; ++i) {
    double f = f_bar * rng.uniform();
    Vec g = {g_bar * (2.0 * rng.uniform() - 1.0),
             g_bar * (2.0 * rng.uniform() - 1.0)};
    Vec lam = {cap * rng.uniform(), cap * rng.uniform()};
    Vec u = sample_unit_sphere(rng, d);
    CHECK(norm(gradient_estimate(f, g, lam, u, rho, d)) <= limit + 1e-9);
  }
}

TEST_CASE("safety stop boundary") {
  // with balances 0, g_bar 1, beta 1/8 the start-of-round margin is
  // beta * (T - 2) - 1: zero at T = 10 (runs), negative at T = 9 (stops)
  auto set = DecisionSet::box({-1.0}, {1.0});
  auto p = drain_params();
  p.beta = 0.125;
  p.safe.beta_bar = 0.2;
  RngStream rng(1);

  p.horizon = 10;
  Algorithm runs(p, set);
  runs.decide(rng);
  CHECK(runs.phase() == Phase::Running);
  CHECK(runs.tau() == 11);

  p.horizon = 9;
  Algorithm stops(p, set);
  const Vec& x = stops.decide(rng);
  CHECK(stops.phase() == Phase::Stopped);
  CHECK(stops.tau() == 1);
  CHECK(x == p.safe.point);
}

TEST_CASE("dual descent clamps into the box") {
  auto set = DecisionSet::box({-1.0}, {1.0});
  auto p = drain_params();
  Algorithm algo(p, set);
  RngStream rng(2);

  // oracle: expected stop round under a constant -1 drain
  int expected_tau = p.horizon + 1;
  for (int t = 1; t <= p.horizon; ++t) {
    double balance = -double(t - 1);
    if (balance - p.bounds.g_bar + p.beta * double(p.horizon - t - 1) < 0.0) {
      expected_tau = t;
      break;
    }
  }
  CHECK(expected_tau == 17);

  double lam = 0.0;
  for (int t = 1; t <= p.horizon; ++t) {
    algo.decide(rng);
    bool was_running = algo.phase() == Phase::Running;
    algo.observe(Feedback{0.5, {-1.0}});
    if (was_running) lam = std::clamp(lam - p.eta * -1.0, 0.0, p.dual_cap);
    CHECK(algo.duals()[0] == lam);
    CHECK(algo.duals()[0] >= 0.0);
    CHECK(algo.duals()[0] <= p.dual_cap);
    if (t == 2) CHECK(algo.duals()[0] == 0.2);
    if (t == 3) CHECK(algo.duals()[0] == doctest::Approx(0.3).epsilon(1e-12));
    if (t >= 11 && t < expected_tau) CHECK(algo.duals()[0] == 1.0);
  }
  CHECK(algo.tau() == expected_tau);
  CHECK(algo.duals()[0] == 1.0);  // frozen at the clipped value
}

TEST_CASE("stopping is absorbing and freezes learning") {
  auto set = DecisionSet::box({-1.0}, {1.0});
  auto p = drain_params();
  p.horizon = 10;
  p.beta = 0.125;
  p.safe.beta_bar = 0.2;
  p.safe.point = {0.25};
  Algorithm algo(p, set);
  RngStream rng(3);

  algo.decide(rng);
  CHECK(algo.phase() == Phase::Running);
  algo.observe(Feedback{1.0, {-1.0}});

  algo.decide(rng);  // balance -1 breaks the buffer
  CHECK(algo.phase() == Phase::Stopped);
  CHECK(algo.tau() == 2);
  algo.observe(Feedback{0.5, {1.0}});

  Vec duals = algo.duals();
  auto experts = algo.expert_points();
  Vec weights = algo.normalized_weights();
  for (int t = 3; t <= 10; ++t) {
    const Vec& x = algo.decide(rng);
    CHECK(x == Vec{0.25});
    // positive feedback rebuilds the balance, yet the stop never reverts
    algo.observe(Feedback{0.5, {1.0}});
    CHECK(algo.phase() == Phase::Stopped);
    CHECK(algo.tau() == 2);
    CHECK(algo.duals() == duals);
    CHECK(algo.expert_points() == experts);
    CHECK(algo.normalized_weights() == weights);
  }
  CHECK(algo.balances()[0] == -1.0 + 9.0);
  CHECK(algo.t() == 11);
}

TEST_CASE("round replay matches an independent reimplementation") {
  auto set = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  AlgoParams p;
  p.horizon = 30;
  p.num_constraints = 1;
  p.dim = 2;
  p.eta = 0.05;
  p.rho = 0.2;
  p.epsilon = 0.5;
  p.beta = 0.2;
  p.alpha = 0.25;
  p.dual_cap = 2.0;
  p.gammas = {0.4, 0.2};
  p.bounds = bounds(3.0, 1.0, 2.0);
  p.safe = SafeAction{{0.0, 0.0}, 0.3};
  Algorithm algo(p, set);

  RngStream algo_rng(77), oracle_rng(77);
  Vec lam = {0.0};
  Vec logw = {0.0, 0.0};
  std::vector<Vec> experts = {{0.0, 0.0}, {0.0, 0.0}};

  const Vec fs = {0.5, 1.2, 0.0, 2.0, 0.7, 1.5, 0.3, 1.0};
  const Vec gs = {-0.3, 0.2, -0.5, 0.4, -0.1, 0.0, -0.4, 0.3};

  for (int r = 0; r < 8; ++r) {
    const Vec& x = algo.decide(algo_rng);

    // mirror the decision: softmax weights, weighted aggregate, perturb
    double m = std::max(logw[0], logw[1]);
    Vec w = {std::exp(logw[0] - m), std::exp(logw[1] - m)};
    double sum = w[0] + w[1];
    w[0] /= sum;
    w[1] /= sum;
    Vec agg(2, 0.0);
    for (int i = 0; i < 2; ++i) axpy(agg, w[i], experts[i]);
    Vec u = sample_unit_sphere(oracle_rng, 2);
    Vec raw = agg;
    axpy(raw, p.rho, u);
    Vec expected_x = project(set, 0.0, raw);
    CHECK(x == expected_x);
    CHECK(algo.aggregate() == agg);

    algo.observe(Feedback{fs[r], {gs[r]}});

    // mirror the update: gradient, weights, per-expert ascent, dual step
    Vec grad = gradient_estimate(fs[r], {gs[r]}, lam, u, p.rho, 2);
    for (int i = 0; i < 2; ++i)
      logw[i] -= p.epsilon * (dot(grad, agg) - dot(grad, experts[i]));
    double shift = std::max(logw[0], logw[1]);
    logw[0] -= shift;
    logw[1] -= shift;
    for (int i = 0; i < 2; ++i) {
      Vec step = experts[i];
      axpy(step, p.gammas[i], grad);
      experts[i] = project(set, p.alpha, step);
    }
    lam[0] = std::clamp(lam[0] - p.eta * gs[r], 0.0, p.dual_cap);

    CHECK(algo.duals() == lam);
    CHECK(algo.expert_points() == experts);
    double m2 = std::max(logw[0], logw[1]);
    Vec nw = {std::exp(logw[0] - m2), std::exp(logw[1] - m2)};
    double s2 = nw[0] + nw[1];
    nw[0] /= s2;
    nw[1] /= s2;
    CHECK(algo.normalized_weights() == nw);
  }
  CHECK(algo.phase() == Phase::Running);
  CHECK(algo.t() == 9);
}

TEST_CASE("expert ascent clamps to the shrunk set") {
  // the update path projects x + gamma * grad onto (1 - alpha) X
  auto box = DecisionSet::box({-1.0}, {1.0});
  CHECK(project(box, 0.1, {0.85 + 0.1 * 2.0}) == Vec{0.9});
}

TEST_CASE("decisions and experts stay feasible over a long run") {
  auto set = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  auto p = derive_params(200, 1, set, bounds(1.0, 1.0, 1.0),
                         SafeAction{{0.0, 0.0}, 0.5});
  Algorithm algo(p, set);
  RngStream rng(41);
  for (int t = 1; t <= 200; ++t) {
    const Vec& x = algo.decide(rng);
    CHECK(set.contains(x, 1e-9));
    for (const auto& e : algo.expert_points())
      CHECK(project(set, p.alpha, e) == e);
    Vec w = algo.normalized_weights();
    double sum = 0.0;
    for (double v : w) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // aggregate equals the weight-combination of the exposed expert points
    Vec agg(2, 0.0);
    for (size_t i = 0; i < w.size(); ++i) axpy(agg, w[i], algo.expert_points()[i]);
    for (int j = 0; j < 2; ++j)
      CHECK(algo.aggregate()[j] == doctest::Approx(agg[j]).epsilon(1e-12));

    algo.observe(Feedback{0.5, {0.05}});
    CHECK(algo.duals()[0] >= 0.0);
    CHECK(algo.duals()[0] <= p.dual_cap);
  }
  CHECK(algo.phase() == Phase::Running);
  CHECK(algo.balances()[0] == doctest::Approx(200 * 0.05).epsilon(1e-12));
}

TEST_CASE("call order and feedback bounds are enforced") {
  auto set = DecisionSet::box({-1.0}, {1.0});
  auto p = drain_params();
  Algorithm algo(p, set);
  RngStream rng(5);

  CHECK_THROWS_AS(algo.observe(Feedback{0.5, {0.0}}), UsageError);
  algo.decide(rng);
  CHECK_THROWS_AS(algo.decide(rng), UsageError);
  CHECK_THROWS_AS(algo.observe(Feedback{0.5, {0.0, 0.0}}), UsageError);

  bool caught = false;
  try {
    algo.observe(Feedback{-0.5, {0.0}});
  } catch (const DataError& e) {
    caught = true;
    CHECK(std::string(e.what()).find("bound") != std::string::npos);
  }
  CHECK(caught);

  caught = false;
  try {
    algo.observe(Feedback{2.5, {0.0}});  // f_bar is 2
  } catch (const DataError& e) {
    caught = true;
    CHECK(std::string(e.what()).find("bound") != std::string::npos);
  }
  CHECK(caught);

  caught = false;
  try {
    algo.observe(Feedback{0.5, {1.5}});  // g_bar is 1
  } catch (const DataError& e) {
    caught = true;
    CHECK(std::string(e.what()).find("bound") != std::string::npos);
  }
  CHECK(caught);

  // the round is still open after rejected feedback
  CHECK_NOTHROW(algo.observe(Feedback{0.5, {0.0}}));
}
