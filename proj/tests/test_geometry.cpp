#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "boco/geometry.hpp"

using namespace boco;

TEST_CASE("box and ball geometry summaries") {
  auto box = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  CHECK(box.diameter() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(box.origin_inradius() == 1.0);

  auto ball = DecisionSet::ball(2, 2.0);
  CHECK(ball.diameter() == 4.0);
  CHECK(ball.origin_inradius() == 2.0);

  auto thin = DecisionSet::box({-0.5}, {1.0});
  CHECK(thin.diameter() == 1.5);
  CHECK(thin.origin_inradius() == 0.5);

  // boundary origin: the inradius collapses to zero
  auto corner = DecisionSet::box({0.0, 0.0}, {1.0, 1.0});
  CHECK(corner.origin_inradius() == 0.0);
}

TEST_CASE("set construction rejects malformed input") {
  CHECK_THROWS_AS(DecisionSet::box({1.0}, {-1.0}), ConfigError);
  CHECK_THROWS_AS(DecisionSet::box({0.5}, {1.0}), ConfigError);   // origin outside
  CHECK_THROWS_AS(DecisionSet::box({-1.0}, {-0.5}), ConfigError); // origin outside
  CHECK_THROWS_AS(DecisionSet::box({}, {}), ConfigError);
  CHECK_THROWS_AS(DecisionSet::box({-1.0, -1.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(DecisionSet::ball(0, 1.0), ConfigError);
  CHECK_THROWS_AS(DecisionSet::ball(2, 0.0), ConfigError);
  CHECK_THROWS_AS(DecisionSet::ball(2, -1.0), ConfigError);
}

TEST_CASE("projection closed forms") {
  auto box = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  CHECK(project(box, 0.0, {2.0, 0.5}) == Vec{1.0, 0.5});
  CHECK(project(box, 0.1, {1.0, 1.0}) == Vec{0.9, 0.9});

  auto ball = DecisionSet::ball(2, 1.0);
  Vec p = project(ball, 0.0, {3.0, 4.0});
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-15));

  CHECK_THROWS_AS(project(box, 0.0, {1.0}), ConfigError);
  CHECK_THROWS_AS(project(box, 1.0, {0.0, 0.0}), UsageError);
  CHECK_THROWS_AS(project(box, -0.1, {0.0, 0.0}), UsageError);
}

TEST_CASE("projection is idempotent and feasible") {
  RngStream rng(11);
  auto box = DecisionSet::box({-0.7, 0.0, -2.0}, {0.3, 1.5, 2.0});
  auto ball = DecisionSet::ball(3, 1.3);
  for (int i = 0; i < 10000; ++i) {
    Vec p = {4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0,
             4.0 * rng.uniform() - 2.0};
    double shrink = 0.5 * rng.uniform();
    for (const auto& set : {box, ball}) {
      Vec q = project(set, shrink, p);
      CHECK(project(set, shrink, q) == q);
      CHECK(set.contains(q, 1e-12));
    }
  }
}

TEST_CASE("shrunk projection plus perturbation stays inside") {
  // with rho <= alpha * r0 the perturbed point never leaves the set
  RngStream rng(12);
  auto box = DecisionSet::box({-1.0, -0.5}, {0.5, 2.0});
  auto ball = DecisionSet::ball(2, 0.8);
  for (const auto& set : {box, ball}) {
    double r0 = set.origin_inradius();
    double alpha = 0.3;
    double rho = alpha * r0;
    for (int i = 0; i < 10000; ++i) {
      Vec p = {6.0 * rng.uniform() - 3.0, 6.0 * rng.uniform() - 3.0};
      Vec base = project(set, alpha, p);
      Vec u = sample_unit_sphere(rng, 2);
      Vec x = base;
      axpy(x, rho, u);
      CHECK(set.contains(x, 1e-9));
    }
  }
}

TEST_CASE("unit sphere sampling") {
  RngStream rng(5);
  Vec one = sample_unit_sphere(rng, 1);
  CHECK((one[0] == 1.0 || one[0] == -1.0));

  for (int d : {2, 3, 7}) {
    for (int i = 0; i < 100; ++i) {
      Vec u = sample_unit_sphere(rng, d);
      CHECK(norm(u) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  // componentwise symmetry: the mean over many draws vanishes
  const int n = 100000;
  Vec mean(3, 0.0);
  for (int i = 0; i < n; ++i) {
    Vec u = sample_unit_sphere(rng, 3);
    for (int j = 0; j < 3; ++j) mean[j] += u[j];
  }
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean[j] / n) < 0.02);

  CHECK_THROWS_AS(sample_unit_sphere(rng, 0), ConfigError);
}

TEST_CASE("sampling is deterministic per seed and stream") {
  RngStream a(42, 1), b(42, 1), c(42, 2);
  Vec ua = sample_unit_sphere(a, 4);
  Vec ub = sample_unit_sphere(b, 4);
  Vec uc = sample_unit_sphere(c, 4);
  CHECK(ua == ub);
  CHECK(ua != uc);
}

TEST_CASE("box vertices enumerate all corners") {
  auto box = DecisionSet::box({-1.0, 0.0}, {2.0, 3.0});
  auto vs = box.vertices();
  REQUIRE(vs.size() == 4);
  // bitmask order: lower/upper per coordinate
  CHECK(vs[0] == Vec{-1.0, 0.0});
  CHECK(vs[1] == Vec{2.0, 0.0});
  CHECK(vs[2] == Vec{-1.0, 3.0});
  CHECK(vs[3] == Vec{2.0, 3.0});
  CHECK_THROWS_AS(DecisionSet::ball(2, 1.0).vertices(), UsageError);
}

TEST_CASE("containment test respects tolerance") {
  auto box = DecisionSet::box({0.0}, {1.0});
  CHECK(box.contains({1.0 + 1e-13}, 1e-12));
  CHECK_FALSE(box.contains({1.0 + 1e-6}, 1e-12));
  auto ball = DecisionSet::ball(2, 1.0);
  CHECK(ball.contains({1.0, 0.0}, 1e-12));
  CHECK_FALSE(ball.contains({1.0, 0.1}, 1e-12));
}
