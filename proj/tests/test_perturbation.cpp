#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "fixtures.hpp"
#include "marketlcp/error.hpp"
#include "marketlcp/perturbation.hpp"

using namespace marketlcp;
using fixtures::block;

namespace {

GeneratorUnit ten_mw_wind(double b = 2.0, double c = 4.0) {
  return fixtures::wind("w", 0, {block(10, 3)}, b, c);
}

// Wind and a conventional unit at bus 1, dispatchable demand at bus 2.
MarketCase wind_case() {
  MarketCase c;
  c.name = "wind";
  c.network = fixtures::two_bus(100);
  c.generators.push_back(fixtures::wind("w1", 0, {block(10, 2)}));
  c.generators.push_back(fixtures::generator("g1", 0, {block(30, 20)}));
  c.demands.push_back(fixtures::demand("d1", 1, {block(10, 40), block(15, 25)}, 2.0));
  return c;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::AssertionFailed;
}

}  // namespace

TEST(ReserveCost, QuadraticInShortfall) {
  EXPECT_DOUBLE_EQ(reserve_cost(ten_mw_wind(), 0, 0.5), 60.0);
  EXPECT_NEAR(reserve_cost(ten_mw_wind(), 0, 1e-9), 0.0, 1e-7);
  const auto big = fixtures::wind("w", 0, {block(20, 3)}, 2.0, 4.0);
  EXPECT_DOUBLE_EQ(reserve_cost(big, 0, 0.5), 220.0);
  EXPECT_GT(reserve_cost(big, 0, 0.5), 2.0 * reserve_cost(ten_mw_wind(), 0, 0.5));
}

TEST(ReserveCost, AdderSpreadsOverRemainingCapacity) {
  EXPECT_DOUBLE_EQ(reserve_adder(ten_mw_wind(), 0, 0.5), 60.0 / 5.0);
}

TEST(ReserveCost, Errors) {
  const auto g = fixtures::generator("g", 0, {block(10, 3)});
  EXPECT_EQ(code_of([&] { reserve_cost(g, 0, 0.5); }), ErrorCode::NotWindUnit);
  EXPECT_EQ(code_of([&] { reserve_cost(ten_mw_wind(), 0, 1.0); }), ErrorCode::ValidationError);
  EXPECT_EQ(code_of([&] { reserve_cost(ten_mw_wind(), 0, -0.1); }), ErrorCode::ValidationError);
}

TEST(ApplyPerturbation, EmptySpecIsIdentity) {
  const auto c = wind_case();
  const auto p = apply_perturbation(c, {});
  EXPECT_EQ(p.perturbed, c);
  EXPECT_TRUE(p.delta_m.isZero(0.0));
  EXPECT_TRUE(p.delta_q.isZero(0.0));
  EXPECT_EQ(p.nominal_lcp.m, p.perturbed_lcp.m);
  EXPECT_EQ(p.nominal_lcp.q, p.perturbed_lcp.q);
}

TEST(ApplyPerturbation, CurtailmentShiftsCapacityRow) {
  const auto c = wind_case();
  PerturbationSpec spec;
  spec.curtailments[{0, 0}] = 0.2;
  const auto p = apply_perturbation(c, spec);
  EXPECT_DOUBLE_EQ(p.perturbed.demands[0].blocks[0].size_mw, 8.0);
  const MarketLayout lay(c);
  EXPECT_DOUBLE_EQ(p.delta_q(lay.psi(0, 0)), -2.0);
  EXPECT_TRUE(p.delta_m.isZero(0.0));
  // Minimum demand shrinks with the stack: 2 * 23 / 25.
  EXPECT_DOUBLE_EQ(p.perturbed.demands[0].min_demand_mw, 2.0 * 23.0 / 25.0);
}

TEST(ApplyPerturbation, CurtailmentIsMonotone) {
  const auto c = wind_case();
  double last = c.demands[0].blocks[1].size_mw;
  for (double kappa : {0.1, 0.2, 0.35, 0.5, 0.9}) {
    PerturbationSpec spec;
    spec.curtailments[{0, 1}] = kappa;
    const double size = apply_perturbation(c, spec).perturbed.demands[0].blocks[1].size_mw;
    EXPECT_LT(size, last);
    last = size;
  }
}

TEST(ApplyPerturbation, WindShortfallCutsCapacityAndRaisesBid) {
  const auto c = wind_case();
  PerturbationSpec spec;
  spec.wind_deltas[{0, 0}] = 0.3;
  const auto p = apply_perturbation(c, spec);
  const auto& blk = p.perturbed.generators[0].blocks[0];
  EXPECT_DOUBLE_EQ(blk.size_mw, 7.0);
  EXPECT_DOUBLE_EQ(p.perturbed.generators[0].unit_capacity_mw, 7.0);
  const MarketLayout lay(c);
  EXPECT_DOUBLE_EQ(p.delta_q(lay.phi(0, 0)), -3.0);
  EXPECT_GT(p.delta_q(lay.gen_block(0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(p.delta_q(lay.gen_block(0, 0)), reserve_adder(c.generators[0], 0, 0.3));
}

TEST(ApplyPerturbation, DeltasAreExactDifferences) {
  Rng rng(41);
  fixtures::RandomCaseOptions opts;
  opts.wind = true;
  for (int t = 0; t < 30; ++t) {
    const auto c = fixtures::random_case(rng, opts);
    PerturbationSpec spec;
    set_wind_delta(spec, c, 0, rng.uniform(0.05, 0.5));
    set_curtailment(spec, c, 0, rng.uniform(0.05, 0.5));
    const auto p = apply_perturbation(c, spec);
    const auto again = assemble_lcp(p.perturbed);
    EXPECT_EQ(Matrix(p.nominal_lcp.m + p.delta_m), again.m);
    EXPECT_EQ(Vector(again.q - p.nominal_lcp.q), p.delta_q);
  }
}

TEST(ApplyPerturbation, TargetErrors) {
  auto c = wind_case();
  c.demands.push_back(make_fixed_load("l1", 1, 3));
  PerturbationSpec on_fixed;
  on_fixed.curtailments[{1, 0}] = 0.2;
  EXPECT_EQ(code_of([&] { apply_perturbation(c, on_fixed); }), ErrorCode::SpecTargetsFixedLoad);
  PerturbationSpec on_thermal;
  on_thermal.wind_deltas[{1, 0}] = 0.2;
  EXPECT_EQ(code_of([&] { apply_perturbation(c, on_thermal); }),
            ErrorCode::SpecTargetsConventionalUnit);
  PerturbationSpec negative;
  negative.wind_deltas[{0, 0}] = -0.1;
  EXPECT_EQ(code_of([&] { apply_perturbation(c, negative); }), ErrorCode::ValidationError);
}

TEST(ScaleWind, ScalesOnlyWindUnits) {
  const auto c = wind_case();
  const auto s = scale_wind(c, 2.0);
  EXPECT_DOUBLE_EQ(s.generators[0].blocks[0].size_mw, 20.0);
  EXPECT_DOUBLE_EQ(s.generators[0].mean_power_mw[0], 20.0);
  EXPECT_DOUBLE_EQ(s.generators[0].unit_capacity_mw, 20.0);
  EXPECT_EQ(s.generators[1], c.generators[1]);
  EXPECT_EQ(s.demands, c.demands);
  EXPECT_DOUBLE_EQ(wind_penetration(s), 2.0 * wind_penetration(c));
}

TEST(ShiftAnalysis, EmptySpecHasNoShift) {
  const auto rep = shift_analysis(wind_case(), {});
  EXPECT_EQ(rep.observed_shift, 0.0);
  ASSERT_TRUE(rep.bound.mu.has_value());
  EXPECT_EQ(*rep.bound.mu, 0.0);
  EXPECT_EQ(rep.max_lmp_change, 0.0);
}

TEST(ShiftAnalysis, ReportsLmpMovement) {
  const auto c = wind_case();
  PerturbationSpec spec;
  set_wind_delta(spec, c, 0, 0.4);
  const auto rep = shift_analysis(c, spec);
  EXPECT_EQ(rep.nominal_lmp.size(), 2u);
  EXPECT_GT(rep.observed_shift, 0.0);
  EXPECT_GT(rep.bound.epsilon_q, 0.0);
  EXPECT_EQ(rep.bound.epsilon_m, 0.0);
  EXPECT_NEAR(rep.penetration, 10.0 / 25.0, 1e-12);
}

TEST(Sweep, SingleCellMatchesShiftAnalysis) {
  const auto c = wind_case();
  SweepAxes axes;
  axes.deltas = {0.25};
  const auto table = sweep(c, axes);
  ASSERT_EQ(table.rows.size(), 1u);
  PerturbationSpec spec;
  set_wind_delta(spec, c, 0, 0.25);
  ShiftOptions opts;
  const auto base = assemble_lcp(c);
  BetaOptions sampled;
  sampled.vertex_limit = 0;
  try {
    opts.beta_cache = beta_of(base.m);
  } catch (const Error&) {
    opts.beta_cache = beta_of(base.m, sampled);
  }
  const auto rep = shift_analysis(c, spec, opts);
  const auto& row = table.rows[0];
  EXPECT_TRUE(row.error.empty());
  EXPECT_EQ(row.observed_shift, rep.observed_shift);
  EXPECT_EQ(row.eta, rep.bound.eta);
  EXPECT_EQ(row.mu, rep.bound.mu);
  EXPECT_EQ(row.max_lmp_change, rep.max_lmp_change);
}

TEST(Sweep, GridOrderIsDeltaMajor) {
  const auto c = wind_case();
  SweepAxes axes;
  axes.deltas = {0.1, 0.2, 0.3};
  axes.kappas = {0.1, 0.2, 0.3};
  axes.kappa_unit = 0;
  const auto table = sweep(c, axes);
  ASSERT_EQ(table.rows.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(table.rows[i].delta, axes.deltas[i / 3]);
    EXPECT_EQ(table.rows[i].kappa, axes.kappas[i % 3]);
  }
}

TEST(Sweep, CellErrorsDoNotAbort) {
  const auto c = wind_case();
  SweepAxes axes;
  axes.deltas = {0.2, 1.5};
  const auto table = sweep(c, axes);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_TRUE(table.rows[0].error.empty());
  EXPECT_FALSE(table.rows[1].error.empty());
}

TEST(Sweep, RejectsEmptyAxes) {
  SweepAxes axes;
  axes.deltas.clear();
  EXPECT_EQ(code_of([&] { sweep(wind_case(), axes); }), ErrorCode::ValidationError);
}
