#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thermoflux/error.hpp"
#include "thermoflux/oracle.hpp"
#include "thermoflux/process.hpp"

using namespace thermoflux;
using thermoflux::fixture::context;
using thermoflux::fixture::q;
using thermoflux::fixture::state;

TEST(DeterministicWork, Examples) {
  auto ctx2 = context<Rational>({0, 1});
  EXPECT_EQ(deterministic_work(ctx2.gibbs(), ctx2).factor(), 1);
  auto w = deterministic_work(fixture::pure_ground<Rational>(), ctx2);
  EXPECT_EQ(w.factor(), q(2, 3));
  EXPECT_NEAR(w.value(), 0.584962500721156, 1e-15);
  EXPECT_EQ(deterministic_work(fixture::three_level<Rational>(), context<Rational>({0, 1, 2})).value(), 0.0);
  EXPECT_THROW(deterministic_work(state<Rational>({0, 1}, {q(1, 2), q(0)}), ctx2), Error);
}

TEST(WDelta, Examples) {
  EXPECT_EQ(w_delta(0.7, 0.0, 2.0), 0.7);
  EXPECT_NEAR(w_delta(0.0, 0.5, std::log(2.0)), 1.0, 1e-15);
  EXPECT_NEAR(w_delta(1.0, 0.75, 1.0), 1.0 + std::log(4.0), 1e-15);
  auto beta = InverseTemperature<Rational>::from_log_base(q(2));
  auto shifted = w_delta(Work<Rational>::from_value(0, beta), q(1, 2), beta);
  EXPECT_EQ(shifted.factor(), q(1, 2));
  EXPECT_NEAR(shifted.value(), 1.0, 1e-15);
  EXPECT_THROW(w_delta(0.0, 1.0, 1.0), Error);
}

TEST(Probabilities, Forward) {
  EXPECT_EQ(forward_probability(q(0)), 1);
  EXPECT_EQ(forward_probability(q(1, 10)), q(9, 10));
  EXPECT_EQ(forward_probability(q(1, 4)), q(3, 4));
}

TEST(Ratio, LemmaCase) {
  auto ctx = context<Rational>({0, 1});
  auto rho = fixture::pure_ground<Rational>();
  auto w = deterministic_work(rho, ctx);
  EXPECT_EQ(fluctuation_ratio(rho, ctx, w, q(0), q(0)), 1);
  auto rev = reverse_probability(rho, ctx, w, q(0), q(0));
  EXPECT_EQ(rev.value, 1);
  EXPECT_TRUE(rev.feasible);
}

TEST(Ratio, RunningExampleAtBound) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  auto w = epsilon_work_bound(rho, ctx, q(1, 10));
  EXPECT_EQ(w.factor(), q(62, 63));
  EXPECT_NEAR(w.value(), (std::log(35.0 / 31.0) + std::log(0.9)) / std::log(2.0), 1e-15);
  EXPECT_NEAR(w.value(), 0.02307, 5e-5);
  EXPECT_EQ(fluctuation_ratio(rho, ctx, w, q(1, 10), q(0)), q(9, 10));
  EXPECT_EQ(reverse_probability(rho, ctx, w, q(1, 10), q(0)).value, 1);

  auto fctx = context<double>({0, 1, 2});
  auto frho = fixture::three_level<double>();
  auto fw = epsilon_work_bound(frho, fctx, 0.1);
  EXPECT_NEAR(fw.value(), w.value(), 1e-12);
  EXPECT_NEAR(fluctuation_ratio(frho, fctx, fw, 0.1, 0.0), 0.9, 1e-12);
}

TEST(Ratio, DeltaScalesByInverse) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  auto w = Work<Rational>::from_factor(q(3, 4), ctx.beta());
  const Rational base = fluctuation_ratio(rho, ctx, w, q(1, 10), q(0));
  for (const Rational& d : {q(1, 10), q(1, 2), q(3, 4)}) {
    EXPECT_EQ(fluctuation_ratio(rho, ctx, w, q(1, 10), d), base / (1 - d));
  }
}

TEST(Ratio, ReverseDecaysForLargeWork) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  auto rev = reverse_probability(rho, ctx, Work<Rational>::from_value(60, ctx.beta()), q(0), q(0));
  EXPECT_LT(rev.value, Rational(1, 1000000000));
  EXPECT_TRUE(rev.feasible);
  auto low = reverse_probability(rho, ctx, Work<Rational>::from_value(-1, ctx.beta()), q(0), q(0));
  EXPECT_FALSE(low.feasible);
}

TEST(Bound, ZeroEpsilonIsDeterministic) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = random_instance(rng);
    auto ctx = instance_context<Rational>(inst);
    auto rho = instance_state<Rational>(inst);
    EXPECT_EQ(epsilon_work_bound(rho, ctx, q(0)).factor(), deterministic_work(rho, ctx).factor());
  }
}

TEST(Bound, GibbsAndThermalWorkContent) {
  auto ctx = context<Rational>({0, 1, 2});
  EXPECT_EQ(epsilon_work_bound(ctx.gibbs(), ctx, q(1, 10)).factor(), 1);
  for (const Rational& d : {q(1, 10), q(1, 2), q(3, 4)}) {
    auto w = thermal_work_content(ctx, d);
    EXPECT_EQ(w.factor(), 1 - d);
    EXPECT_NEAR(w.value(), -std::log(1 - to_double(d)) / std::log(2.0), 1e-15);
  }
}

TEST(Currents, WorkedTwoLevelExample) {
  auto ctx = context<Rational>({0, 1});
  auto rho = fixture::pure_ground<Rational>();
  BathModel<Rational> bath(ctx.beta(), q(12));
  auto w = Work<Rational>::from_factor(q(2, 3), ctx.beta());
  auto k = build_transition_currents(rho, ctx, bath, w);
  ASSERT_EQ(k.row_count(), 1u);
  ASSERT_EQ(k.col_count(), 2u);
  EXPECT_EQ(k.row_target(0), 12);
  EXPECT_EQ(k.col_target(0), 8);
  EXPECT_EQ(k.col_target(1), 4);
  EXPECT_EQ(k.at(0, 0), 8);
  EXPECT_EQ(k.at(0, 1), 4);
  EXPECT_TRUE(k.satisfies_marginals());

  auto dist = forward_distribution(k, rho, bath, w);
  ASSERT_EQ(dist.outcomes.size(), 1u);
  EXPECT_EQ(dist.outcomes[0].probability, 1);
  EXPECT_EQ(dist.failure, 0);
  EXPECT_EQ(dist.final_state.input_order_probabilities(), (std::vector<Rational>{q(2, 3), q(1, 3)}));
  EXPECT_EQ(dist.total(), 1);
}

TEST(Currents, GibbsAtZeroWork) {
  auto ctx = context<Rational>({0, 1, 2});
  BathModel<Rational> bath(ctx.beta(), q(4));
  auto k = build_transition_currents(ctx.gibbs(), ctx, bath, Work<Rational>::from_value(0, ctx.beta()));
  for (std::size_t r = 0; r < k.row_count(); ++r) {
    EXPECT_EQ(k.row_target(r), k.col_target(r));
    EXPECT_EQ(k.at(r, r), k.row_target(r));
  }
  EXPECT_TRUE(k.satisfies_marginals());
}

TEST(Currents, NonIntegralTargetsAreRejected) {
  auto ctx = context<Rational>({0, 1});
  BathModel<Rational> bath(ctx.beta(), q(1));
  EXPECT_THROW(build_transition_currents(fixture::pure_ground<Rational>(), ctx, bath,
                                         Work<Rational>::from_factor(q(2, 3), ctx.beta())),
               Error);
}

TEST(Currents, NorthwestCornerRejectsUnequalTotals) {
  try {
    northwest_corner<Rational>({0}, {0, 1}, {q(3)}, {q(1), q(1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Currents, SmoothedInputMovesOneMinusEpsilon) {
  auto ctx = context<Rational>({0, 1, 2});
  auto s = smooth(state<Rational>({0, 1, 2}, {q(1, 2), q(1, 2), q(0)}), ctx, q(1, 10)).smoothed_state;
  auto w = Work<Rational>::from_factor(support_fraction(s, ctx), ctx.beta());
  BathModel<Rational> bath(ctx.beta(), q(28));
  auto dist = forward_distribution(build_transition_currents(s, ctx, bath, w), s, bath, w);
  EXPECT_EQ(dist.outcomes.at(0).probability, q(9, 10));
  EXPECT_EQ(dist.failure, q(1, 10));
}

// The distribution does not depend on which vertex of the transportation
// polytope carries it.
TEST(Currents, VertexIndependence) {
  std::mt19937_64 rng(37);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = random_instance(rng);
    auto ctx = instance_context<Rational>(inst);
    auto rho = instance_state<Rational>(inst);
    auto w = deterministic_work(rho, ctx);
    Integer g = 1;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      g = common_denominator(g, ctx.boltzmann(i));
      g = common_denominator(g, Rational(ctx.boltzmann(i) * w.factor()));
    }
    BathModel<Rational> bath(ctx.beta(), Rational(g));
    auto a = build_transition_currents(rho, ctx, bath, w, CornerOrder::BetaOrder);
    auto b = build_transition_currents(rho, ctx, bath, w, CornerOrder::Reversed);
    EXPECT_TRUE(a.satisfies_marginals());
    EXPECT_TRUE(b.satisfies_marginals());
    auto da = forward_distribution(a, rho, bath, w);
    auto db = forward_distribution(b, rho, bath, w);
    EXPECT_EQ(da.outcomes.at(0).probability, 1);
    EXPECT_EQ(db.outcomes.at(0).probability, 1);
    ++checked;
  }
  EXPECT_EQ(checked, 300);
}
