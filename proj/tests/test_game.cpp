#include <gtest/gtest.h>

#include <functional>

#include "fixtures.hpp"
#include "marketlcp/error.hpp"
#include "marketlcp/game.hpp"
#include "marketlcp/perturbation.hpp"

using namespace marketlcp;
using fixtures::block;

namespace {

// 20 MW of supply at 20 $/MWh against 10 MW of demand worth 30 $/MWh, so the
// generator is marginal and the price is 20.
MarketCase one_bus_surplus(double utility = 30.0) {
  MarketCase c;
  c.network = fixtures::single_bus();
  c.generators.push_back(fixtures::generator("g1", 0, {block(20, 20)}));
  c.demands.push_back(fixtures::demand("d1", 0, {block(10, utility)}));
  return c;
}

double max_gap(const EquilibriumCertificate& cert) {
  double m = 0.0;
  for (double g : cert.gaps) m = std::max(m, g);
  return m;
}

}  // namespace

TEST(Players, OrderAndCount) {
  const auto c = fixtures::bundled("ieee30.json");
  const auto ps = players(c);
  ASSERT_EQ(ps.size(), c.generators.size() + c.demands.size() + 1);
  EXPECT_EQ(ps.front().kind, PlayerKind::GenCo);
  EXPECT_EQ(ps.front().id, "g1");
  EXPECT_EQ(ps.back().kind, PlayerKind::Iso);
  const StrategyIndex idx(c);
  EXPECT_EQ(idx.angle(c.network.reference_bus()), -1);
}

TEST(Certify, SingleBusHandCaseHasZeroGaps) {
  const auto c = one_bus_surplus();
  const auto sol = solve_market(c);
  ASSERT_NEAR(sol.lmp[0], 20.0, 1e-9);
  const auto cert = certify_epsilon_equilibrium(c, sol);
  EXPECT_TRUE(cert.is_nash_within);
  EXPECT_LE(max_gap(cert), 1e-9);
}

TEST(Certify, BundledCaseIsNash) {
  const auto c = fixtures::bundled("ieee30.json");
  const auto cert = certify_epsilon_equilibrium(c, solve_market(c));
  EXPECT_TRUE(cert.is_nash_within);
  EXPECT_LE(cert.epsilon, 1e-6);
  EXPECT_EQ(cert.gaps.size(), players(c).size());
}

TEST(Certify, MispricedSolutionHasPositiveGap) {
  const auto c = one_bus_surplus();
  auto sol = solve_market(c);
  sol.lmp[0] += 1.0;
  const auto cert = certify_epsilon_equilibrium(c, sol);
  EXPECT_FALSE(cert.is_nash_within);
  // The generator would now sell its idle 10 MW at a 1 $/MWh margin.
  EXPECT_NEAR(cert.gaps[0], 10.0, 1e-9);
}

TEST(Certify, NoDemandIsTriviallyNash) {
  MarketCase c;
  c.network = fixtures::single_bus();
  c.generators.push_back(fixtures::generator("g1", 0, {block(10, 20)}));
  const auto cert = certify_epsilon_equilibrium(c, solve_market(c));
  EXPECT_EQ(cert.epsilon, 0.0);
}

TEST(Certify, RandomCasesAreNash) {
  Rng rng(51);
  for (int t = 0; t < 25; ++t) {
    const auto c = fixtures::random_case(rng);
    const auto cert = certify_epsilon_equilibrium(c, solve_market(c));
    EXPECT_LE(cert.epsilon, 1e-6) << "case " << t;
  }
}

TEST(BestResponse, VertexAndSimplexAgree) {
  Rng rng(52);
  for (int t = 0; t < 20; ++t) {
    LinearProgram box;
    const int n = 4;
    box.a = Matrix::Zero(n + 1, n);
    box.b = Vector::Zero(n + 1);
    for (int i = 0; i < n; ++i) {
      box.a(i, i) = 1.0;
      box.b(i) = rng.uniform(1, 10);
      box.a(n, i) = 1.0;
    }
    box.b(n) = rng.uniform(5, 20);
    box.sense.assign(n + 1, RowSense::Le);
    box.c = Vector::Zero(n);
    box.free_var.assign(n, false);
    const Vector obj = fixtures::random_vector(rng, n, -3, 3);
    const auto vertex = maximize_over(box, obj);
    LinearProgram lp = box;
    lp.c = -obj;
    const auto simplex = solve_lp(lp);
    ASSERT_EQ(simplex.status, LpStatus::Optimal);
    EXPECT_NEAR(vertex.best_payoff, -simplex.objective, 1e-9);
  }
}

TEST(GameDistance, IdenticalCasesAreZero) {
  const auto c = fixtures::bundled("ieee30.json");
  const auto sol = solve_market(c);
  EXPECT_EQ(game_distance(c, sol, c, sol).alpha, 0.0);
}

TEST(GameDistance, UtilityShiftOnOneBlock) {
  const auto a = one_bus_surplus(30.0);
  const auto b = one_bus_surplus(33.0);
  const auto d = game_distance(a, solve_market(a), b, solve_market(b));
  EXPECT_NEAR(d.alpha, 30.0, 1e-9);
}

TEST(GameDistance, RejectsDifferentPlayerSets) {
  const auto a = one_bus_surplus();
  auto b = a;
  b.demands.push_back(fixtures::demand("d2", 0, {block(5, 25)}));
  try {
    game_distance(a, solve_market(a), b, solve_market(b));
    FAIL() << "expected IncompatibleGames";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleGames);
  }
}

TEST(GameDistance, GrowsWithWindShortfall) {
  const auto c = fixtures::bundled("ieee30.json");
  const auto sol = solve_market(c);
  const int wind = find_generator(c, "g13");
  ASSERT_GE(wind, 0);
  double last = 0.0;
  for (double delta : {0.1, 0.2, 0.3, 0.4}) {
    PerturbationSpec spec;
    set_wind_delta(spec, c, wind, delta);
    const auto p = apply_perturbation(c, spec).perturbed;
    const double alpha = game_distance(c, sol, p, solve_market(p)).alpha;
    EXPECT_GE(alpha, last - 1e-9);
    last = alpha;
  }
  EXPECT_GT(last, 0.0);
}

TEST(TwoAlpha, ZeroPerturbation) {
  const auto c = one_bus_surplus();
  const auto rep = check_two_alpha(c, c, solve_market(c));
  EXPECT_EQ(rep.alpha, 0.0);
  EXPECT_LE(rep.epsilon, 1e-9);
  EXPECT_TRUE(rep.holds);
}

TEST(TwoAlpha, CurtailmentOnlyOnBundledCase) {
  const auto c = fixtures::bundled("ieee30.json");
  PerturbationSpec spec;
  set_curtailment(spec, c, find_demand(c, "d15"), 0.3);
  const auto p = apply_perturbation(c, spec).perturbed;
  const auto rep = check_two_alpha(c, p, solve_market(p));
  EXPECT_TRUE(rep.holds);
  EXPECT_LE(rep.epsilon, 2.0 * rep.alpha + 1e-6);
}

TEST(TwoAlpha, WindOnlyOnBundledCase) {
  const auto c = fixtures::bundled("ieee30.json");
  PerturbationSpec spec;
  set_wind_delta(spec, c, find_generator(c, "g13"), 0.3);
  const auto p = apply_perturbation(c, spec).perturbed;
  const auto rep = check_two_alpha(c, p, solve_market(p));
  EXPECT_TRUE(rep.holds);
  EXPECT_GT(rep.alpha, 0.0);
}

TEST(TwoAlpha, NonEquilibriumInputIsRejected) {
  const auto c = one_bus_surplus();
  auto sol = solve_market(c);
  sol.lmp[0] += 5.0;
  try {
    check_two_alpha(c, c, sol);
    FAIL() << "expected AssertionFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AssertionFailed);
  }
}
