#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "support.hpp"
#include "thermoflux/error.hpp"
#include "thermoflux/oracle.hpp"
#include "thermoflux/process.hpp"

using namespace thermoflux;
using thermoflux::fixture::context;
using thermoflux::fixture::q;
using thermoflux::fixture::state;

namespace {

OracleOutcome count(const DiagonalState<Rational>& rho, const ThermalContext<Rational>& ctx, const Work<Rational>& w,
                    const Rational& eps, const Rational& delta, const Integer& multiplier = 1) {
  const SmoothingParameters p{eps, delta};
  const FiniteModel model = make_finite_model(rho, ctx, w, std::span(&p, 1), multiplier);
  return oracle_forward_reverse(model, eps, delta);
}

}  // namespace

TEST(Oracle, LemmaTwoLevel) {
  auto ctx = context<Rational>({0, 1});
  auto rho = fixture::pure_ground<Rational>();
  auto out = count(rho, ctx, deterministic_work(rho, ctx), q(0), q(0));
  EXPECT_EQ(out.forward, 1);
  EXPECT_EQ(out.reverse, 1);
  EXPECT_EQ(out.ratio, 1);
  EXPECT_TRUE(out.energy_balanced);
  // Every shell counts, occupied or not: g(E - 1) w-shifted is G/3, so G = 6.
  const SmoothingParameters p{q(0), q(0)};
  auto model = make_finite_model(rho, ctx, deterministic_work(rho, ctx), std::span(&p, 1));
  EXPECT_EQ(model.degeneracy_scale(), 6);
  auto scaled = make_finite_model(rho, ctx, deterministic_work(rho, ctx), std::span(&p, 1), 2);
  EXPECT_EQ(scaled.degeneracy_scale(), 12);
  EXPECT_EQ(scaled.final_shells.at(0).microstates, 8);
  EXPECT_EQ(scaled.final_shells.at(1).microstates, 4);
}

TEST(Oracle, RunningExampleAtBound) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  auto w = epsilon_work_bound(rho, ctx, q(1, 10));
  auto out = count(rho, ctx, w, q(1, 10), q(0));
  EXPECT_EQ(out.forward, q(9, 10));
  EXPECT_EQ(out.reverse, 1);
  EXPECT_EQ(out.ratio, q(9, 10));
  EXPECT_TRUE(out.energy_balanced);
}

TEST(Oracle, DeltaHalvesTheReverseMass) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  auto w = epsilon_work_bound(rho, ctx, q(1, 10));
  auto plain = count(rho, ctx, w, q(1, 10), q(0));
  auto half = count(rho, ctx, w, q(1, 10), q(1, 2));
  EXPECT_EQ(half.reverse, plain.reverse / 2);
  EXPECT_EQ(half.reverse_microstates * 2, plain.reverse_microstates);
  EXPECT_EQ(half.ratio, plain.ratio * 2);
  EXPECT_EQ(half.ratio, fluctuation_ratio(rho, ctx, w, q(1, 10), q(1, 2)));
}

TEST(Oracle, InfeasibleWork) {
  auto ctx = context<Rational>({0, 1});
  auto rho = fixture::pure_ground<Rational>();
  // One energy unit more than the deterministic value cannot be paid.
  auto w = Work<Rational>::from_factor(q(1, 3), ctx.beta());
  try {
    count(rho, ctx, w, q(0), q(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(Oracle, ResourceLimits) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  OracleLimits tiny;
  tiny.max_microstates = 10;
  const SmoothingParameters p{q(1, 10), q(0)};
  try {
    make_finite_model(rho, ctx, epsilon_work_bound(rho, ctx, q(1, 10)), std::span(&p, 1), 1, tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResourceLimit);
  }
  OracleLimits few;
  few.max_levels = 2;
  EXPECT_THROW(oracle_smoothing(rho, ctx, q(0), few), Error);
}

TEST(Oracle, LimitFromEnvironment) {
  ::setenv("THERMOFLUX_MAX_MICROSTATES", "1234", 1);
  EXPECT_EQ(OracleLimits::from_environment().max_microstates, 1234u);
  ::setenv("THERMOFLUX_MAX_MICROSTATES", "lots", 1);
  EXPECT_THROW(OracleLimits::from_environment(), Error);
  ::unsetenv("THERMOFLUX_MAX_MICROSTATES");
  EXPECT_EQ(OracleLimits::from_environment().max_microstates, OracleLimits{}.max_microstates);
}

TEST(OracleSmoothing, Examples) {
  auto ctx = context<Rational>({0, 1, 2});
  auto rho = fixture::three_level<Rational>();
  EXPECT_EQ(oracle_smoothing(rho, ctx, q(0)), d0(rho, ctx));
  EXPECT_EQ(oracle_smoothing(rho, ctx, q(1, 10)), 0.0);
  EXPECT_EQ(oracle_smoothing_fraction(rho, ctx, q(1, 2)), q(3, 7));
  EXPECT_NEAR(oracle_smoothing(rho, ctx, q(1, 2)), std::log(3.0 / 7.0), 1e-15);
}

TEST(Oracle, GScalingAndRelabelling) {
  std::mt19937_64 rng(41);
  int done = 0;
  while (done < 60) {
    const Instance inst = random_instance(rng);
    auto ctx = instance_context<Rational>(inst);
    auto rho = instance_state<Rational>(inst);
    auto w = epsilon_work_bound(rho, ctx, inst.epsilon);
    OracleOutcome base;
    try {
      base = count(rho, ctx, w, inst.epsilon, inst.delta);
    } catch (const Error& e) {
      ASSERT_EQ(e.kind(), ErrorKind::ResourceLimit);
      continue;
    }
    for (long m : {2, 3}) {
      try {
        auto scaled = count(rho, ctx, w, inst.epsilon, inst.delta, m);
        EXPECT_EQ(scaled.forward, base.forward);
        EXPECT_EQ(scaled.reverse, base.reverse);
      } catch (const Error& e) {
        ASSERT_EQ(e.kind(), ErrorKind::ResourceLimit);
      }
    }
    Instance rev = inst;
    std::reverse(rev.energies.begin(), rev.energies.end());
    std::reverse(rev.probabilities.begin(), rev.probabilities.end());
    auto rctx = instance_context<Rational>(rev);
    auto rrho = instance_state<Rational>(rev);
    auto relabelled = count(rrho, rctx, epsilon_work_bound(rrho, rctx, inst.epsilon), inst.epsilon, inst.delta);
    EXPECT_EQ(relabelled.ratio, base.ratio);
    ++done;
  }
}

TEST(Instances, Deterministic) {
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 20; ++i) {
    const Instance x = random_instance(a), y = random_instance(b);
    EXPECT_EQ(x.energies, y.energies);
    EXPECT_EQ(x.probabilities, y.probabilities);
    Rational total = 0;
    for (const auto& p : x.probabilities) total += p;
    EXPECT_EQ(total, 1);
    EXPECT_LE(x.energies.size(), 6u);
  }
  std::mt19937_64 r(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_below(r, 7), 7u);
}

TEST(Verify, InstancesPass) {
  std::mt19937_64 rng(7);
  int done = 0;
  while (done < 40) {
    const Instance inst = random_instance(rng);
    for (bool exact : {true, false}) {
      try {
        const VerificationReport report = verify_instance(inst, exact, rng);
        for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
        ++done;
      } catch (const Error& e) {
        ASSERT_EQ(e.kind(), ErrorKind::ResourceLimit);
      }
    }
  }
}
