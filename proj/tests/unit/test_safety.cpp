#include <gtest/gtest.h>

#include "alp/baselines.hpp"
#include "alp/safety.hpp"
#include "support/oracles.hpp"

namespace alp {
namespace {

using testing::make_aircraft;

Schedule with(std::size_t n, std::initializer_list<std::pair<std::size_t, Seconds>> placed) {
  Schedule s(n);
  for (const auto& [i, t] : placed) s.set(i, t);
  return s;
}

std::vector<double> flat_priority(std::size_t n) { return std::vector<double>(n, 0.5); }

TEST(ValidateSeparation, Examples) {
  const Instance hl({make_aircraft("H", WakeClass::Heavy, 0, 0, 1000), make_aircraft("L", WakeClass::Light, 0, 0, 1000)});
  EXPECT_FALSE(safety::validate_separation(hl, with(2, {{0, 0}}), 1, 100));
  EXPECT_TRUE(safety::validate_separation(hl, with(2, {{0, 0}}), 1, 270));
  EXPECT_TRUE(safety::validate_separation(hl, with(2, {{1, 0}}), 0, 95));
  EXPECT_FALSE(safety::validate_separation(hl, with(2, {{1, 0}}), 0, 85));
  EXPECT_FALSE(safety::validate_separation(hl, with(2, {}), 0, 1001));
}

TEST(AdjustLandingTime, MovesForwardPastConflict) {
  const Instance hh({make_aircraft("H1", WakeClass::Heavy, 0, 0, 1000), make_aircraft("H2", WakeClass::Heavy, 50, 0, 1000)});
  EXPECT_EQ(safety::adjust_landing_time(hh, with(2, {{0, 0}}), 1, 50), 126);
}

TEST(AdjustLandingTime, FallsBackToEarlierSlot) {
  const Instance inst({make_aircraft("A", WakeClass::Medium, 500, 0, 580), make_aircraft("B", WakeClass::Medium, 550, 0, 580)});
  const auto t = safety::adjust_landing_time(inst, with(2, {{0, 500}}), 1, 550);
  EXPECT_LE(t, 500 - 99);
  EXPECT_TRUE(safety::validate_separation(inst, with(2, {{0, 500}}), 1, t));
}

TEST(AdjustLandingTime, BlockedWindowReturnsInput) {
  const Instance inst({make_aircraft("H", WakeClass::Heavy, 0, 0, 1000), make_aircraft("X", WakeClass::Heavy, 30, 10, 60)});
  EXPECT_EQ(safety::adjust_landing_time(inst, with(2, {{0, 0}}), 1, 30), 30);
}

TEST(AssignAll, SingleAircraftKeepsProposal) {
  const Instance inst({make_aircraft("A", WakeClass::Light, 100, 0, 900)});
  EXPECT_EQ(*safety::assign_all(inst, {250}, flat_priority(1))[0], 250);
}

TEST(AssignAll, ProposalClampedToWindow) {
  const Instance inst({make_aircraft("A", WakeClass::Light, 100, 50, 900)});
  EXPECT_EQ(*safety::assign_all(inst, {-40}, flat_priority(1))[0], 50);
}

TEST(AssignAll, SameTimePairSeparated) {
  const Instance inst({make_aircraft("A", WakeClass::Medium, 100, 0, 900), make_aircraft("B", WakeClass::Medium, 100, 0, 900)});
  const auto s = safety::assign_all(inst, {100, 100}, flat_priority(2));
  EXPECT_TRUE(testing::reference_feasible(inst, s));
  EXPECT_EQ(*s[0], 100);
  EXPECT_EQ(*s[1], 199);
}

TEST(AssignAll, AdversarialCluster) {
  std::vector<Aircraft> fleet;
  const WakeClass mix[] = {WakeClass::Heavy, WakeClass::Light, WakeClass::Heavy, WakeClass::Medium, WakeClass::Light};
  for (int k = 0; k < 5; ++k)
    fleet.push_back(make_aircraft("C" + std::to_string(k), mix[k], 1000 + 10 * k, 400 + 10 * k, 1900 + 10 * k));
  const Instance inst(fleet);
  std::vector<Seconds> proposals;
  for (int k = 0; k < 5; ++k) proposals.push_back(1000 + 10 * k);
  const auto s = safety::assign_all(inst, proposals, env::fleet_features(inst).priority);
  EXPECT_TRUE(testing::reference_feasible(inst, s));
}

TEST(AssignAll, FeasibleProposalsUnchanged) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = testing::random_instance(rng, 8, 20);
    const auto x = testing::random_feasible_schedule(inst, rng);
    if (!x) continue;
    const auto s = safety::assign_all(inst, *x, env::fleet_features(inst).priority);
    EXPECT_EQ(s.landing_times(), *x);
  }
}

TEST(AssignAll, RecoversByUnassigning) {
  const Instance inst({make_aircraft("A", WakeClass::Medium, 100, 0, 1000), make_aircraft("B", WakeClass::Medium, 100, 100, 110)});
  const auto r = safety::assign_all(inst, Schedule(2), {}, {{0, 100}, {1, 100}}, {1.0, 0.0});
  EXPECT_GE(r.backtracks, 1u);
  EXPECT_TRUE(testing::reference_feasible(inst, r.schedule));
  EXPECT_GE(*r.schedule[1], 100);
  EXPECT_LE(*r.schedule[1], 110);
}

TEST(AssignAll, ExhaustedBudgetThrows) {
  const Instance inst({make_aircraft("A", WakeClass::Medium, 5, 0, 10), make_aircraft("B", WakeClass::Medium, 5, 0, 10)});
  EXPECT_THROW(safety::assign_all(inst, {5, 5}, flat_priority(2)), InfeasibleInstance);
  safety::AssignmentConfig none;
  none.max_backtracks = 0;
  const Instance tight({make_aircraft("A", WakeClass::Medium, 100, 0, 1000), make_aircraft("B", WakeClass::Medium, 100, 100, 110)});
  EXPECT_THROW(safety::assign_all(tight, Schedule(2), {}, {{0, 100}, {1, 100}}, {1.0, 0.0}, none), InfeasibleInstance);
}

TEST(AssignAll, RespectsPrecedence) {
  const Instance inst({make_aircraft("A", WakeClass::Light, 100, 0, 1000), make_aircraft("B", WakeClass::Light, 500, 0, 1000)},
                      {}, Instance::kDefaultBuffer, {{1, 0}});
  const auto s = safety::assign_all(inst, {100, 500}, {1.0, 0.0});
  EXPECT_TRUE(testing::reference_feasible(inst, s));
  EXPECT_LT(*s[1], *s[0]);
}

TEST(AssignAll, RejectsBadProposals) {
  const Instance inst({make_aircraft("A", WakeClass::Light, 100, 0, 1000)});
  EXPECT_THROW(safety::assign_all(inst, {}, flat_priority(1)), InvalidArgument);
  EXPECT_THROW(safety::assign_all(inst, {std::nan("")}, flat_priority(1)), InvalidArgument);
  EXPECT_THROW(safety::assign_all(inst, with(1, {{0, 100}}), {0}, {{0, 200}}, flat_priority(1)), InvalidArgument);
  safety::AssignmentConfig bad;
  bad.max_attempts = 0;
  EXPECT_THROW(safety::assign_all(inst, {100}, flat_priority(1), bad), InvalidArgument);
}

TEST(AssignAll, KeepsExistingPlacements) {
  const Instance inst({make_aircraft("A", WakeClass::Heavy, 100, 0, 1000), make_aircraft("B", WakeClass::Light, 120, 0, 1000)});
  const auto r = safety::assign_all(inst, with(2, {{0, 100}}), {0}, {{1, 120}}, flat_priority(2));
  EXPECT_EQ(*r.schedule[0], 100);
  EXPECT_TRUE(testing::reference_feasible(inst, r.schedule));
  EXPECT_EQ(r.order, (std::vector<std::size_t>{0, 1}));
}

TEST(AssignAll, RandomInstancesNeverViolate) {
  Rng rng(11);
  std::size_t solved = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.index(30);
    const auto inst = testing::random_instance(rng, n, rng.uniform(10, 40));
    std::vector<Seconds> proposals;
    for (const auto& a : inst.aircraft()) proposals.push_back(rng.uniform(a.earliest - 100, a.latest + 100));
    try {
      const auto s = safety::assign_all(inst, proposals, env::fleet_features(inst).priority);
      ASSERT_TRUE(testing::reference_feasible(inst, s)) << "trial " << trial;
      ++solved;
    } catch (const InfeasibleInstance&) {
      EXPECT_FALSE(validate_schedule(inst, baselines::fcfs(inst)).feasible()) << "trial " << trial;
    }
  }
  EXPECT_GE(solved, 950u);
}

}  // namespace
}  // namespace alp
