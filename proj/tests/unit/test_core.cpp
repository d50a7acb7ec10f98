#include <gtest/gtest.h>

#include "alp/core.hpp"
#include "support/oracles.hpp"

namespace alp {
namespace {

using testing::make_aircraft;

Instance pair_instance(WakeClass a, Seconds xa, WakeClass b, Seconds xb) {
  return Instance({make_aircraft("A", a, xa, 0, 10000), make_aircraft("B", b, xb, 0, 10000)});
}

TEST(Separation, TableLookups) {
  const SeparationMatrix m;
  EXPECT_EQ(required_separation(WakeClass::Heavy, WakeClass::Light, m), 240);
  EXPECT_EQ(required_separation(WakeClass::Medium, WakeClass::Medium, m), 69);
  EXPECT_EQ(required_separation(WakeClass::Light, WakeClass::Heavy, m), 60);
  for (auto lead : kWakeClasses)
    for (auto follow : kWakeClasses)
      EXPECT_EQ(m(lead, follow), testing::table_separation(lead, follow));
}

TEST(Separation, RejectsNonPositiveEntries) {
  SeparationMatrix::Grid g{{{96, 157, 240}, {60, 0, 156}, {60, 69, 82}}};
  EXPECT_THROW(SeparationMatrix{g}, InvalidArgument);
}

TEST(Cost, TieredExamples) {
  EXPECT_EQ(tiered_delay_cost(0, CostProfile::tiered(5, 6, 7, 8)), 0);
  EXPECT_DOUBLE_EQ(tiered_delay_cost(400, CostProfile::tiered(1, 2, 3, 4)), 500);
  EXPECT_DOUBLE_EQ(tiered_delay_cost(2000, CostProfile::tiered(1, 1, 1, 1)), 2000);
  EXPECT_THROW(tiered_delay_cost(-1, CostProfile::tiered(1, 1, 1, 1)), InvalidArgument);
}

TEST(Cost, MatchesTierIntegration) {
  Rng rng(3);
  for (int k = 0; k < 2000; ++k) {
    const auto p = CostProfile::tiered(rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 5));
    const double d = rng.uniform(0, 5000);
    EXPECT_NEAR(tiered_delay_cost(d, p), testing::reference_delay_cost(d, p), 1e-9);
  }
}

TEST(Cost, ContinuousAtTierBoundaries) {
  const auto p = CostProfile::tiered(1.5, 2.5, 4, 9);
  for (double b : {300.0, 900.0, 1800.0}) {
    EXPECT_NEAR(tiered_delay_cost(std::nextafter(b, 0.0), p), tiered_delay_cost(b, p), 1e-9);
    EXPECT_NEAR(tiered_delay_cost(std::nextafter(b, 1e9), p), tiered_delay_cost(b, p), 1e-9);
  }
}

TEST(Cost, NondecreasingInDelay) {
  const auto p = CostProfile::tiered(0.5, 1, 0, 3);
  double prev = 0;
  for (double d = 0; d < 4000; d += 7.5) {
    const double c = tiered_delay_cost(d, p);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(Cost, RejectsNegativeCoefficients) {
  EXPECT_THROW(CostProfile::tiered(1, -1, 1, 1), InvalidArgument);
  EXPECT_THROW(CostProfile::linear(-1, 1), InvalidArgument);
}

TEST(Deviation, SignSplit) {
  EXPECT_EQ(deviation(100, 100).early, 0);
  EXPECT_EQ(deviation(100, 100).late, 0);
  EXPECT_EQ(deviation(90, 100).early, 10);
  EXPECT_EQ(deviation(90, 100).late, 0);
  EXPECT_EQ(deviation(130, 100).early, 0);
  EXPECT_EQ(deviation(130, 100).late, 30);
}

TEST(Validate, SeparationExamples) {
  const auto hh = pair_instance(WakeClass::Heavy, 0, WakeClass::Heavy, 200);
  EXPECT_TRUE(validate_schedule(hh, Schedule::complete({0, 200})).feasible());

  const auto hl = pair_instance(WakeClass::Heavy, 0, WakeClass::Light, 250);
  const auto r = validate_schedule(hl, Schedule::complete({0, 250}));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, Violation::Kind::Separation);
  EXPECT_EQ(r.violations[0].required, 270);
  EXPECT_EQ(r.violations[0].first, "A");
}

TEST(Validate, WindowBoundary) {
  const Instance inst({make_aircraft("A", WakeClass::Medium, 100, 50, 200)});
  EXPECT_TRUE(validate_schedule(inst, Schedule::complete({200})).feasible());
  const auto r = validate_schedule(inst, Schedule::complete({201}));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, Violation::Kind::Window);
  EXPECT_EQ(validate_schedule(inst, Schedule::complete({49})).count(Violation::Kind::Window), 1u);
}

TEST(Validate, LaterLanderFollowsRegardlessOfIndex) {
  const auto inst = pair_instance(WakeClass::Light, 1000, WakeClass::Heavy, 0);
  // Heavy lands first at 0, Light follows: 240 + 30 needed.
  EXPECT_FALSE(validate_schedule(inst, Schedule::complete({260, 0})).feasible());
  EXPECT_TRUE(validate_schedule(inst, Schedule::complete({270, 0})).feasible());
}

TEST(Validate, NonAdjacentPairsChecked) {
  // Heavy, Light, Light: the Heavy-Light gap to the third aircraft also binds.
  const Instance inst({make_aircraft("A", WakeClass::Heavy, 0, 0, 5000),
                       make_aircraft("B", WakeClass::Light, 0, 0, 5000),
                       make_aircraft("C", WakeClass::Light, 0, 0, 5000)});
  EXPECT_FALSE(validate_schedule(inst, Schedule::complete({0, 270, 260})).feasible());
  EXPECT_TRUE(validate_schedule(inst, Schedule::complete({0, 270, 382})).feasible());
}

TEST(Validate, Precedence) {
  Instance inst({make_aircraft("A", WakeClass::Medium, 0, 0, 5000), make_aircraft("B", WakeClass::Medium, 0, 0, 5000)},
                SeparationMatrix{}, 30, {{1, 0}});
  const auto r = validate_schedule(inst, Schedule::complete({0, 500}));
  EXPECT_EQ(r.count(Violation::Kind::Precedence), 1u);
  EXPECT_TRUE(validate_schedule(inst, Schedule::complete({500, 0})).feasible());
}

TEST(Validate, AgreesWithReferenceValidator) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = testing::random_instance(rng, 6, 30);
    std::vector<Seconds> x;
    for (const auto& a : inst.aircraft()) x.push_back(std::round(rng.uniform(a.earliest - 50, a.latest + 50)));
    EXPECT_EQ(validate_schedule(inst, Schedule::complete(x)).feasible(), testing::reference_feasible(inst, x));
  }
}

TEST(TotalCost, Examples) {
  const Instance on_time({make_aircraft("A", WakeClass::Heavy, 100, 0, 900), make_aircraft("B", WakeClass::Light, 500, 0, 900)});
  EXPECT_EQ(total_cost(on_time, Schedule::complete({100, 500})), 0);

  const Instance one({make_aircraft("A", WakeClass::Medium, 100, 0, 900, CostProfile::tiered(2, 5, 5, 5))});
  EXPECT_DOUBLE_EQ(total_cost(one, Schedule::complete({200})), 200);

  const Instance linear({make_aircraft("A", WakeClass::Medium, 100, 0, 900, CostProfile::linear(3, 7))});
  EXPECT_DOUBLE_EQ(total_cost(linear, Schedule::complete({90})), 30);
  EXPECT_DOUBLE_EQ(total_cost(linear, Schedule::complete({110})), 70);
}

TEST(TotalCost, EarlinessFreeUnderTiers) {
  const Instance one({make_aircraft("A", WakeClass::Medium, 1000, 0, 2000)});
  EXPECT_EQ(total_cost(one, Schedule::complete({400})), 0);
}

TEST(Throughput, Examples) {
  EXPECT_EQ(runway_throughput(Schedule::complete({5})), 1);
  EXPECT_EQ(runway_throughput(Schedule::complete({0, 1800, 3599})), 3);
  EXPECT_EQ(runway_throughput(Schedule::complete({0, 3600})), 1);
}

TEST(Throughput, MatchesBruteForceWindow) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Seconds> t;
    const std::size_t n = 1 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) t.push_back(std::round(rng.uniform(0, 10000)));
    int best = 0;
    for (Seconds start : t) {
      int c = 0;
      for (Seconds x : t) c += (x >= start && x < start + 3600);
      best = std::max(best, c);
    }
    EXPECT_EQ(runway_throughput(Schedule::complete(t)), best);
  }
}

TEST(Throughput, EmptyScheduleRejected) {
  EXPECT_THROW(runway_throughput(Schedule(0)), InvalidArgument);
}

TEST(Histogram, Examples) {
  const Instance inst({make_aircraft("A", WakeClass::Medium, 100, 0, 900), make_aircraft("B", WakeClass::Medium, 300, 0, 900)});
  const auto on_time = delay_histogram(inst, Schedule::complete({100, 300}), 60);
  ASSERT_EQ(on_time.counts.size(), 1u);
  EXPECT_EQ(on_time.counts[0], 2u);

  const auto h = delay_histogram(inst, Schedule::complete({130, 390}), 60);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(h.total(), 2u);
  EXPECT_THROW(delay_histogram(inst, Schedule::complete({100, 300}), 0), InvalidArgument);
}

TEST(Instance, RejectsBadInput) {
  EXPECT_THROW(Instance(std::vector<Aircraft>{}), InvalidArgument);
  EXPECT_THROW(Instance({make_aircraft("A", WakeClass::Heavy, 100, 200, 900)}), InvalidArgument);
  EXPECT_THROW(Instance({make_aircraft("A", WakeClass::Heavy, 100, 0, 900), make_aircraft("A", WakeClass::Heavy, 100, 0, 900)}),
               InvalidArgument);
  EXPECT_THROW(Instance({make_aircraft("A", WakeClass::Heavy, 100, 0, 900), make_aircraft("B", WakeClass::Heavy, 100, 0, 900)},
                        SeparationMatrix{}, 30, {{0, 1}, {1, 0}}),
               InvalidArgument);
}

TEST(Instance, BufferIsAddedToSeparation) {
  const auto inst = pair_instance(WakeClass::Heavy, 0, WakeClass::Heavy, 0);
  EXPECT_EQ(inst.required_gap(0, 1), 126);
  EXPECT_EQ(inst.with_buffer(0).required_gap(0, 1), 96);
  EXPECT_THROW(inst.with_buffer(-1), InvalidArgument);
}

TEST(SeparatedAfter, SubtractionKeepsGap) {
  Rng rng(9);
  for (int k = 0; k < 10000; ++k) {
    const Seconds lead = rng.uniform(0, 1e5), gap = rng.uniform(0, 300);
    EXPECT_GE(separated_after(lead, gap) - lead, gap);
    EXPECT_GE(lead - separated_before(lead, gap), gap);
  }
}

}  // namespace
}  // namespace alp
