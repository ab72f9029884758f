#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "boco/scenarios.hpp"

using namespace boco;

namespace {

Vec random_point(const DecisionSet& set, RngStream& rng) {
  Vec x(set.dim());
  if (set.kind() == SetKind::Box) {
    for (int j = 0; j < set.dim(); ++j)
      x[j] = set.lower()[j] +
             (set.upper()[j] - set.lower()[j]) * rng.uniform();
    return x;
  }
  Vec u = sample_unit_sphere(rng, set.dim());
  double r = set.radius() * std::pow(rng.uniform(), 1.0 / set.dim());
  for (int j = 0; j < set.dim(); ++j) x[j] = r * u[j];
  return x;
}

ConcaveFunction two_piece_tent() {
  return ConcaveFunction::min_affine(
      {AffinePiece{{1.0}, 2.0}, AffinePiece{{-1.0}, 2.0}});
}

}  // namespace

TEST_CASE("pointwise evaluation") {
  auto tent = two_piece_tent();
  CHECK(tent.value({0.0}) == 2.0);
  CHECK(tent.value({1.0}) == 1.0);
  CHECK(tent.value({-0.5}) == 1.5);

  // remaining budget after spending the first coordinate
  auto budget = ConcaveFunction::min_affine({AffinePiece{{-1.0, 0.0}, 0.5}});
  CHECK(budget.value({0.3, 0.9}) == 0.5 - 0.3);
  CHECK(budget.value({0.3, 0.9}) == doctest::Approx(0.2).epsilon(1e-15));

  // return-on-spend surplus with f(x) = x_1 and unit target: identically zero
  auto roi = ConcaveFunction::min_affine({AffinePiece{{0.0}, 0.0}});
  CHECK(roi.value({1.0}) == 0.0);

  auto quad = ConcaveFunction::quadratic(
      0.5, {1.0, 0.0}, {{1.0, 0.0}, {0.0, 2.0}});
  CHECK(quad.value({0.0, 0.0}) == 0.5);
  CHECK(quad.value({1.0, 1.0}) == 0.5 + 1.0 - 3.0);

  Scenario s{quad, {budget}};
  auto [fv, gv] = evaluate(s, {0.3, 0.9});
  CHECK(fv == quad.value({0.3, 0.9}));
  REQUIRE(gv.size() == 1);
  CHECK(gv[0] == 0.5 - 0.3);

  CHECK_THROWS_AS(tent.value({1.0, 2.0}), ConfigError);
}

TEST_CASE("construction rejects malformed functions") {
  CHECK_THROWS_AS(ConcaveFunction::min_affine({}), ConfigError);
  CHECK_THROWS_AS(ConcaveFunction::min_affine(
                      {AffinePiece{{1.0}, 0.0}, AffinePiece{{1.0, 2.0}, 0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(ConcaveFunction::quadratic(0.0, {}, {}), ConfigError);
  CHECK_THROWS_AS(ConcaveFunction::quadratic(0.0, {1.0}, {{-1.0}}), ConfigError);
  CHECK_THROWS_AS(
      ConcaveFunction::quadratic(0.0, {1.0, 0.0}, {{1.0, 0.5}, {0.0, 1.0}}),
      ConfigError);
  CHECK_THROWS_AS(ConcaveFunction::quadratic(0.0, {1.0, 0.0}, {{1.0, 0.0}}),
                  ConfigError);
}

TEST_CASE("quadratic view") {
  auto single = ConcaveFunction::min_affine({AffinePiece{{2.0, -1.0}, 0.3}});
  auto q = single.to_quadratic();
  REQUIRE(q.has_value());
  CHECK(q->c0 == 0.3);
  CHECK(q->w == Vec{2.0, -1.0});
  CHECK(q->Q == std::vector<Vec>{{0.0, 0.0}, {0.0, 0.0}});

  CHECK_FALSE(two_piece_tent().to_quadratic().has_value());

  auto quad = ConcaveFunction::quadratic(1.0, {0.0}, {{0.5}});
  auto qq = quad.to_quadratic();
  REQUIRE(qq.has_value());
  CHECK(qq->c0 == 1.0);
  CHECK(qq->Q == std::vector<Vec>{{0.5}});
}

TEST_CASE("bound constants on pinned instances") {
  auto sym = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});

  auto f1 = ConcaveFunction::min_affine({AffinePiece{{1.0, 0.0}, 0.0}});
  auto b1 = compute_bounds({Scenario{f1, {}}}, sym);
  CHECK(b1.f_bar == 1.0);
  CHECK(b1.lipschitz == 1.0);

  auto line = DecisionSet::box({-1.0}, {1.0});
  auto b2 = compute_bounds({Scenario{two_piece_tent(), {}}}, line);
  CHECK(b2.f_bar == 2.0);  // peak of the tent at the origin
  CHECK(b2.lipschitz == 1.0);

  auto bowl = ConcaveFunction::quadratic(
      0.0, {0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  auto b3 = compute_bounds({Scenario{bowl, {}}}, sym);
  // oracle: concave quadratic attains its minimum at a corner, its
  // maximum at the unconstrained stationary point (the origin here)
  double worst = 0.0;
  for (const auto& v : sym.vertices())
    worst = std::max(worst, std::abs(bowl.value(v)));
  worst = std::max(worst, std::abs(bowl.value({0.0, 0.0})));
  CHECK(worst == 2.0);
  CHECK(b3.f_bar == worst);

  // constraints feed the g bound, not the f bound
  auto g = ConcaveFunction::min_affine({AffinePiece{{-3.0, 0.0}, 0.0}});
  auto b4 = compute_bounds({Scenario{f1, {g}}}, sym);
  CHECK(b4.f_bar == 1.0);
  CHECK(b4.g_bar == 3.0);
  CHECK(b4.lipschitz == 3.0);
}

TEST_CASE("exact and grid minima") {
  auto line = DecisionSet::box({-1.0}, {1.0});
  auto m = exact_min(two_piece_tent(), line);
  REQUIRE(m.has_value());
  CHECK(*m == 1.0);

  auto sym = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  auto bowl = ConcaveFunction::quadratic(
      0.0, {0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  auto mb = exact_min(bowl, sym);
  REQUIRE(mb.has_value());
  CHECK(*mb == -2.0);

  auto ball = DecisionSet::ball(2, 1.0);
  CHECK_FALSE(exact_min(bowl, ball).has_value());

  auto f1 = ConcaveFunction::min_affine({AffinePiece{{1.0, 0.0}, 0.0}});
  CHECK(grid_min(f1, sym, 4) == -1.0);
  CHECK(grid_min(bowl, ball, 64) >= -1.0 - 1e-12);
  CHECK_THROWS_AS(grid_min(f1, sym, 0), UsageError);
}

TEST_CASE("certified envelopes bracket the truth") {
  auto ball = DecisionSet::ball(2, 1.0);
  auto bowl = ConcaveFunction::quadratic(
      0.0, {0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  // true range on the unit ball is [-1, 0]
  CHECK(bowl.upper_bound(ball) >= 0.0);
  double lo = bowl.lower_bound(ball);
  CHECK(lo <= -1.0 + 1e-9);
  CHECK(lo >= -1.2);  // Monte Carlo inflation stays modest in 2d
}

TEST_CASE("safe action validation") {
  auto sym = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  auto f = ConcaveFunction::min_affine({AffinePiece{{0.0, 0.0}, 1.0}});
  auto g_half = ConcaveFunction::min_affine({AffinePiece{{-1.0, 0.0}, 0.5}});
  std::vector<Scenario> support = {Scenario{f, {g_half}}};

  auto ok = validate_safe_action(support, sym, {{0.0, 0.0}, 0.4});
  CHECK(ok.ok);
  CHECK(ok.margin == 0.5);

  auto bad = validate_safe_action(support, sym, {{0.0, 0.0}, 0.6});
  CHECK_FALSE(bad.ok);
  CHECK(bad.margin == 0.5);
  CHECK_FALSE(bad.reason.empty());

  auto g_fifth = ConcaveFunction::min_affine({AffinePiece{{-1.0, 0.0}, 0.2}});
  support.push_back(Scenario{f, {g_fifth}});
  auto two = validate_safe_action(support, sym, {{0.0, 0.0}, 0.1});
  CHECK(two.ok);
  CHECK(two.margin == 0.2);

  CHECK_FALSE(validate_safe_action(support, sym, {{2.0, 0.0}, 0.1}).ok);
  CHECK_FALSE(validate_safe_action(support, sym, {{0.0, 0.0}, 0.0}).ok);
  CHECK_FALSE(validate_safe_action(support, sym, {{0.0}, 0.1}).ok);
}

TEST_CASE("support validation") {
  auto sym = DecisionSet::box({-1.0, -1.0}, {1.0, 1.0});
  auto f_neg = ConcaveFunction::min_affine({AffinePiece{{1.0, 0.0}, 0.0}});
  auto g = ConcaveFunction::min_affine({AffinePiece{{-1.0, 0.0}, 0.5}});
  CHECK_THROWS_AS(validate_scenarios({Scenario{f_neg, {g}}}, sym), ConfigError);

  auto bowl = ConcaveFunction::quadratic(
      0.0, {0.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(validate_scenarios({Scenario{bowl, {g}}}, sym), ConfigError);

  auto f_ok = ConcaveFunction::min_affine({AffinePiece{{0.0, 0.0}, 1.0}});
  auto rep = validate_scenarios({Scenario{f_ok, {g}}}, sym);
  CHECK(rep.min_f == 1.0);
  CHECK(rep.constraints_can_bind);  // g dips to 0.5 - 1 = -0.5
  CHECK(rep.min_constraint <= -0.5 + 1e-9);

  auto g_pos = ConcaveFunction::min_affine({AffinePiece{{0.0, 0.0}, 0.7}});
  auto rep2 = validate_scenarios({Scenario{f_ok, {g_pos}}}, sym);
  CHECK_FALSE(rep2.constraints_can_bind);
  CHECK(rep2.min_constraint == 0.7);

  CHECK_THROWS_AS(validate_scenarios({}, sym), ConfigError);
  CHECK_THROWS_AS(validate_scenarios({Scenario{f_ok, {}}}, sym), ConfigError);

  auto f_1d = ConcaveFunction::min_affine({AffinePiece{{0.0}, 1.0}});
  CHECK_THROWS_AS(validate_scenarios({Scenario{f_1d, {g}}}, sym), ConfigError);
}

TEST_CASE("concavity holds along random chords") {
  auto box = DecisionSet::box({-1.0, -0.5}, {1.0, 1.5});
  auto ball = DecisionSet::ball(2, 1.4);
  auto quad = ConcaveFunction::quadratic(
      0.2, {0.5, -0.3}, {{0.8, 0.2}, {0.2, 0.6}});
  auto tent = ConcaveFunction::min_affine(
      {AffinePiece{{1.0, 0.5}, 1.0}, AffinePiece{{-0.7, 0.2}, 1.2},
       AffinePiece{{0.1, -1.0}, 1.5}});
  RngStream rng(21);
  for (const auto* fn : {&quad, &tent}) {
    for (const auto& set : {box, ball}) {
      for (int i = 0; i < 10000; ++i) {
        Vec x = random_point(set, rng);
        Vec y = random_point(set, rng);
        double th = rng.uniform();
        Vec z(2);
        for (int j = 0; j < 2; ++j) z[j] = th * x[j] + (1.0 - th) * y[j];
        double mix = th * fn->value(x) + (1.0 - th) * fn->value(y);
        CHECK(fn->value(z) >= mix - 1e-9);
      }
    }
  }
}

TEST_CASE("lipschitz constants hold along random pairs") {
  auto box = DecisionSet::box({-1.0, -0.5}, {1.0, 1.5});
  auto quad = ConcaveFunction::quadratic(
      0.2, {0.5, -0.3}, {{0.8, 0.2}, {0.2, 0.6}});
  auto tent = ConcaveFunction::min_affine(
      {AffinePiece{{1.0, 0.5}, 1.0}, AffinePiece{{-0.7, 0.2}, 1.2}});
  RngStream rng(22);
  for (const auto* fn : {&quad, &tent}) {
    double L = fn->lipschitz(box);
    for (int i = 0; i < 10000; ++i) {
      Vec x = random_point(box, rng);
      Vec y = random_point(box, rng);
      CHECK(std::abs(fn->value(x) - fn->value(y)) <= L * norm(sub(x, y)) + 1e-9);
    }
  }
}

TEST_CASE("published bounds dominate sampled values") {
  auto box = DecisionSet::box({0.0, 0.0}, {1.0, 1.0});
  auto fA = ConcaveFunction::quadratic(
      0.30, {0.9, 0.5}, {{0.8, 0.0}, {0.0, 0.6}});
  auto g1 = ConcaveFunction::min_affine({AffinePiece{{-1.0, 0.0}, 0.35}});
  auto g2 = ConcaveFunction::quadratic(
      0.30, {-0.1, 0.5}, {{0.8, 0.0}, {0.0, 0.6}});
  auto fC = ConcaveFunction::min_affine({AffinePiece{{-0.5, -0.3}, 0.85}});
  auto gC = ConcaveFunction::min_affine({AffinePiece{{-1.5, -0.3}, 0.85}});
  std::vector<Scenario> support = {Scenario{fA, {g1, g2}},
                                   Scenario{fC, {g1, gC}}};
  auto b = compute_bounds(support, box);
  CHECK(b.f_bar > 0.0);
  CHECK(b.g_bar > 0.0);
  CHECK(b.lipschitz > 0.0);
  RngStream rng(23);
  for (int i = 0; i < 100000; ++i) {
    Vec x = random_point(box, rng);
    for (const auto& s : support) {
      auto [fv, gv] = evaluate(s, x);
      CHECK(std::abs(fv) <= b.f_bar + 1e-9);
      for (double v : gv) CHECK(std::abs(v) <= b.g_bar + 1e-9);
    }
  }
}
