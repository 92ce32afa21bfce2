#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ospc/simulator.hpp"

namespace {

using namespace ospc;

SimConfig base(double delay, std::int64_t horizon = 20000, std::size_t users = 20) {
  SimConfig cfg;
  cfg.users = users;
  cfg.horizon = horizon;
  cfg.thresholds = ClassThresholds::from_delays(cfg.fading, {delay}, {1.0});
  return cfg;
}

TEST(Run, ZeroThresholdConstantArrivalsHasUnitDelay) {
  const auto m = run(base(1.0, 2000));
  for (const auto& u : m.users) {
    EXPECT_DOUBLE_EQ(u.mean_delay, 1.0);
    EXPECT_DOUBLE_EQ(u.mean_delay_unweighted, 1.0);
    EXPECT_DOUBLE_EQ(u.mean_busy_period, 1.0);
    EXPECT_EQ(u.max_busy_period, 1);
    EXPECT_DOUBLE_EQ(u.selection_frequency, 1.0);
    EXPECT_EQ(u.final_queue, 0.0);
  }
}

TEST(Run, Conservation) {
  for (const auto& law : {ArrivalLaw::constant(), ArrivalLaw::bernoulli_scaled(0.3),
                          ArrivalLaw::uniform_discrete(0, 4)}) {
    auto cfg = base(4.0, 5000);
    cfg.arrival = law;
    const auto m = run(cfg);
    for (const auto& u : m.users) {
      EXPECT_NEAR(u.served + u.final_queue, u.arrived, 1e-9 * std::max(1.0, u.arrived));
    }
    EXPECT_NEAR(m.total_served + m.total_final_queue, m.total_arrived, 1e-9 * m.total_arrived);
  }
}

TEST(Run, DelayAtLeastOneSlot) {
  auto cfg = base(5.0, 5000);
  cfg.arrival = ArrivalLaw::bernoulli_scaled(0.5);
  for (const auto& u : run(cfg).users) {
    EXPECT_GE(u.mean_delay, 1.0);
    EXPECT_GE(u.mean_delay_unweighted, 1.0);
  }
}

TEST(Run, SelectionFrequencyWithinThreeStandardErrors) {
  const auto cfg = base(3.0);
  const auto m = run(cfg);
  const double g = 1.0 / 3.0;
  const double n = static_cast<double>(m.measured_slots);
  for (const auto& u : m.users) {
    EXPECT_NEAR(u.selection_frequency, g, 3.0 * std::sqrt(g * (1 - g) / n));
  }
}

TEST(Run, AccumulatedDemandAtServiceIsOneOverGamma) {
  const auto m = run(base(3.0, 50000));
  double mean = 0.0;
  for (const auto& u : m.users) mean += u.mean_demand_at_service;
  mean /= static_cast<double>(m.users.size());
  EXPECT_NEAR(mean / 3.0, 1.0, 0.02);
}

TEST(Run, MeanDelayNearTarget) {
  const auto m = run(base(3.0, 50000));
  double mean = 0.0;
  for (const auto& u : m.users) mean += u.mean_delay;
  EXPECT_NEAR(mean / static_cast<double>(m.users.size()), 3.0, 0.03);
}

TEST(Run, EfficiencyInvariantToNoise) {
  auto cfg = base(2.0, 3000);
  const auto a = run(cfg);
  cfg.n0 = 10.0;
  const auto b = run(cfg);
  EXPECT_NEAR(b.mean_slot_energy / a.mean_slot_energy, 10.0, 1e-12);
  EXPECT_NEAR(b.energy_efficiency, a.energy_efficiency, 1e-12 * a.energy_efficiency);
}

TEST(Run, DelayInsensitiveToArrivalLaw) {
  auto cfg = base(3.0, 50000);
  const auto c = run(cfg);
  cfg.arrival = ArrivalLaw::bernoulli_scaled(0.5);
  const auto b = run(cfg);
  double dc = 0.0;
  double db = 0.0;
  for (std::size_t i = 0; i < c.users.size(); ++i) {
    dc += c.users[i].mean_delay;
    db += b.users[i].mean_delay;
  }
  EXPECT_NEAR(db / dc, 1.0, 0.03);
}

TEST(Run, SeededReproducibility) {
  auto cfg = base(3.0, 2000);
  cfg.record_energy_series = true;
  const auto a = run(cfg);
  const auto b = run(cfg);
  EXPECT_EQ(a.energy_efficiency, b.energy_efficiency);
  EXPECT_EQ(a.energy_series, b.energy_series);
  cfg.seed = 2;
  EXPECT_NE(run(cfg).energy_efficiency, a.energy_efficiency);
}

TEST(Run, FixedPathLossIsUsed) {
  auto cfg = base(2.0, 500, 3);
  cfg.fixed_pathloss = {1.0, 10.0, 100.0};
  const auto m = run(cfg);
  EXPECT_EQ(m.users[0].pathloss, 1.0);
  EXPECT_EQ(m.users[2].pathloss, 100.0);
}

TEST(Run, WarmupDefault) {
  const auto cfg = base(3.0, 1000);
  EXPECT_EQ(cfg.effective_warmup(), 30);
  EXPECT_EQ(run(cfg).measured_slots, 970);
}

TEST(Run, EnergySeriesLength) {
  auto cfg = base(2.0, 600);
  cfg.record_energy_series = true;
  const auto m = run(cfg);
  EXPECT_EQ(static_cast<std::int64_t>(m.energy_series.size()), m.measured_slots);
  const double mean = std::accumulate(m.energy_series.begin(), m.energy_series.end(), 0.0) /
                      static_cast<double>(m.energy_series.size());
  EXPECT_NEAR(mean, m.mean_slot_energy, 1e-12 * mean);
}

TEST(Run, ClassAssignmentFollowsFractions) {
  SimConfig cfg;
  cfg.users = 10;
  cfg.thresholds = ClassThresholds::from_delays(cfg.fading, {1.0, 2.0, 4.0}, {0.2, 0.5, 0.3});
  const auto cls = cfg.class_assignment();
  EXPECT_EQ(std::count(cls.begin(), cls.end(), 0u), 2);
  EXPECT_EQ(std::count(cls.begin(), cls.end(), 1u), 5);
  EXPECT_EQ(std::count(cls.begin(), cls.end(), 2u), 3);
}

TEST(Run, InvalidConfig) {
  auto cfg = base(2.0);
  cfg.users = 0;
  try {
    run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfigInvalid);
  }
  cfg = base(2.0);
  cfg.n0 = -1.0;
  EXPECT_THROW(run(cfg), Error);
  cfg = base(2.0);
  cfg.warmup = cfg.horizon;
  EXPECT_THROW(run(cfg), Error);
}

TEST(Arrivals, MeansAreOne) {
  Rng rng(3);
  for (const auto& law : {ArrivalLaw::constant(), ArrivalLaw::bernoulli_scaled(0.25),
                          ArrivalLaw::uniform_discrete(0, 2), ArrivalLaw::uniform_discrete(1, 3)}) {
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += law.sample(rng);
    EXPECT_NEAR(sum / n, 1.0, 0.01) << law.describe();
  }
  EXPECT_THROW(ArrivalLaw::bernoulli_scaled(0.0), Error);
  EXPECT_THROW(ArrivalLaw::uniform_discrete(3, 1), Error);
}

TEST(Ensemble, SingleSystem) {
  const auto s = run_ensemble(base(1.0, 300, 8), 1, 5);
  EXPECT_EQ(s.min, s.max);
  EXPECT_EQ(s.min, s.mean);
}

TEST(Ensemble, DeterministicAndThreadIndependent) {
  const auto cfg = base(1.0, 300, 8);
  const auto a = run_ensemble(cfg, 6, 42, 1);
  const auto b = run_ensemble(cfg, 6, 42, 1);
  const auto c = run_ensemble(cfg, 6, 42, 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values, c.values);
  EXPECT_EQ(a.mean, c.mean);
}

TEST(Stability, HalfSelectionProbability) {
  auto cfg = base(2.0, 20000);
  const auto m = run(cfg);
  for (const auto& v : stability_report(m)) {
    EXPECT_NEAR(v.mean_busy_period, 2.0, 0.1);
    EXPECT_FALSE(v.unstable);
  }
}

TEST(Stability, ZeroThresholdBusyPeriodsAreOne) {
  for (const auto& v : stability_report(run(base(1.0, 1000)))) {
    EXPECT_EQ(v.mean_busy_period, 1.0);
    EXPECT_FALSE(v.unstable);
  }
}

TEST(Stability, NeverSelectedIsFlagged) {
  SimConfig cfg;
  cfg.users = 5;
  cfg.horizon = 1000;
  cfg.fading = FadingLaw::bounded_uniform(1.0, 1);
  cfg.thresholds = ClassThresholds::single(cfg.fading, 2.0);
  const auto m = run(cfg);
  for (const auto& v : stability_report(m)) EXPECT_TRUE(v.unstable);
  EXPECT_NEAR(m.total_final_queue, m.total_arrived, 1e-9);
}

}  // namespace
