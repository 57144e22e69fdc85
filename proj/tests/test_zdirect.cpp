#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dirfdr/zdirect.hpp"
#include "oracles.hpp"

using namespace dirfdr;

namespace {

ZSample simulated(std::mt19937_64& rng, std::size_t m, double w, double xi, double v) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> z(m);
  for (auto& x : z) {
    double theta = 0.0;
    if (u(rng) >= w) theta = (u(rng) < v ? xi : -xi) + g(rng);
    x = theta + g(rng);
    if (x == 0.0) x = 1e-3;
  }
  return ZSample::standard(z);
}

std::vector<Pit> pits(const std::vector<double>& u) {
  std::vector<Pit> out;
  for (double x : u) out.push_back(Pit::from_u(x));
  return out;
}

}  // namespace

TEST(CandidateSets, Examples) {
  const std::vector<double> u{0.1, 0.4, 0.8};
  const std::vector<std::size_t> all{0, 1, 2};
  const auto s = candidate_sets(u, all);
  EXPECT_EQ(s.rejection, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(s.acceptance, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(in_rejection_region(0.25));
  EXPECT_TRUE(in_rejection_region(0.75));
  EXPECT_FALSE(in_rejection_region(0.2500001));
  const auto none = candidate_sets(u, std::vector<std::size_t>{});
  EXPECT_TRUE(none.rejection.empty());
  EXPECT_TRUE(none.acceptance.empty());
}

TEST(FdrEstimate, Examples) {
  EXPECT_DOUBLE_EQ(fdr_dir_estimate(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(fdr_dir_estimate(2, 30), 0.1);
  EXPECT_DOUBLE_EQ(fdr_dir_estimate(5, 3), 2.0);
}

TEST(RefitCadence, Default) {
  EXPECT_EQ(default_refit_cadence(1), 1u);
  EXPECT_EQ(default_refit_cadence(200), 1u);
  EXPECT_EQ(default_refit_cadence(201), 2u);
  EXPECT_EQ(default_refit_cadence(1000), 5u);
}

TEST(ZDirect, AllSmallUValuesAreRejectedNegative) {
  std::vector<double> u(20);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.01 * (i + 1);
  const auto p = pits(u);
  ZDirectEngine engine(p, std::vector<NullFamily>(20, Normal{}));
  EXPECT_EQ(engine.masked_count(), 20u);
  EXPECT_EQ(engine.acceptance_count(), 0u);
  EXPECT_DOUBLE_EQ(engine.fdr_estimate(), 0.05);
  const auto run = engine.run(0.1);
  EXPECT_EQ(run.stop_step, 0u);
  ASSERT_EQ(run.decisions.size(), 20u);
  for (const auto& d : run.decisions.items()) EXPECT_EQ(d.sign, Sign::Negative);
}

TEST(ZDirect, AllAcceptanceValuesGiveEmptySet) {
  const auto p = pits(std::vector<double>(10, 0.45));
  ZDirectEngine engine(p, std::vector<NullFamily>(10, Normal{}));
  EXPECT_EQ(engine.masked_count(), 10u);
  EXPECT_EQ(engine.rejection_count(), 0u);
  const auto run = engine.run(0.1);
  EXPECT_TRUE(run.decisions.empty());
  EXPECT_EQ(run.stop_step, 10u);
  EXPECT_EQ(engine.masked_count(), 0u);
}

TEST(ZDirect, LooseLevelStopsImmediately) {
  std::mt19937_64 rng(1);
  const auto s = simulated(rng, 100, 0.3, 2.0, 0.7);
  ZDirectEngine engine(s);
  ASSERT_GT(engine.rejection_count(), 0u);
  const double f = engine.fdr_estimate();
  ASSERT_LT(f, 0.999);
  const auto run = engine.run(std::max(f, 0.5));
  EXPECT_EQ(run.stop_step, 0u);
  EXPECT_EQ(run.decisions.size(), engine.rejection_count());
}

TEST(ZDirect, InitialMaskedSetUsesMaskedValuesOnly) {
  const auto p = pits({0.05, 0.15, 0.3, 0.45, 0.55, 0.7, 0.85, 0.95});
  ZDirectEngine engine(p, std::vector<NullFamily>(8, Normal{}));
  // masked values: 0.05 0.15 0.2 0.05 0.95 0.8 0.85 0.95
  EXPECT_EQ(engine.masked_indices(), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  const auto q = pits({0.21, 0.29, 0.71, 0.79});
  ZDirectEngine e2(q, std::vector<NullFamily>(4, Normal{}));
  EXPECT_EQ(e2.masked_count(), 0u);
}

TEST(ZDirect, StepInvariants) {
  std::mt19937_64 rng(2);
  for (int r = 0; r < 20; ++r) {
    const auto s = simulated(rng, 60 + rng() % 140, 0.5, 1.5, 0.75);
    ZDirectEngine engine(s);
    while (engine.masked_count() > 0 && engine.fdr_estimate() > 0.1) {
      const auto before = engine.masked_indices();
      const std::size_t next = engine.next_unmask_index();
      // argmax of lfsr over the masked set, first index on ties
      double best = -1.0;
      std::size_t arg = 0;
      for (std::size_t i : before)
        if (engine.lfsr(i) > best) {
          best = engine.lfsr(i);
          arg = i;
        }
      EXPECT_EQ(next, arg);
      EXPECT_EQ(engine.unmask_step(), next);
      const auto after = engine.masked_indices();
      EXPECT_EQ(after.size() + 1, before.size());
      EXPECT_FALSE(engine.is_masked(next));
    }
  }
}

TEST(ZDirect, OutputContract) {
  std::mt19937_64 rng(3);
  for (int r = 0; r < 30; ++r) {
    const auto s = simulated(rng, 50 + rng() % 150, 0.2 * (r % 5), 1.0 + 0.5 * (r % 4), 0.5 + 0.25 * (r % 3));
    const auto run = zdirect_run(s, 0.1);
    const auto p = s.pits();
    EXPECT_LE(run.stop_step, s.size());
    EXPECT_EQ(run.unmask_order.size(), run.stop_step);
    std::vector<std::size_t> seen = run.unmask_order;
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
    if (!run.decisions.empty()) {
      EXPECT_LE(run.fdr_estimate, 0.1);
    }
    for (const auto& d : run.decisions.items()) {
      EXPECT_TRUE(in_rejection_region(p[d.index].u));
      EXPECT_EQ(d.sign, sign_of(s.z(d.index)));
      EXPECT_EQ(std::find(run.unmask_order.begin(), run.unmask_order.end(), d.index), run.unmask_order.end());
    }
  }
}

TEST(ZDirect, Deterministic) {
  std::mt19937_64 rng(4);
  const auto s = simulated(rng, 150, 0.2, 2.0, 1.0);
  const auto a = zdirect_run(s, 0.1), b = zdirect_run(s, 0.1);
  EXPECT_EQ(a.decisions, b.decisions);
  EXPECT_EQ(a.unmask_order, b.unmask_order);
}

TEST(ZDirect, FirewallOnRandomInputs) {
  std::mt19937_64 rng(5);
  for (int r = 0; r < 8; ++r) {
    const auto s = simulated(rng, 40 + rng() % 60, 0.5, 2.0, 0.75);
    EXPECT_TRUE(oracle::firewall_holds(s, 100 + r));
  }
}

TEST(ZDirect, ReflectHiddenOnlyMovesTheCounts) {
  const auto p = pits({0.1, 0.3, 0.9});
  ZDirectEngine engine(p, std::vector<NullFamily>(3, Normal{}));
  EXPECT_EQ(engine.masked_count(), 3u);
  EXPECT_EQ(engine.acceptance_count(), 1u);  // 0.3
  const auto before = engine.state().visible_u;
  engine.reflect_hidden(0);  // 0.1 -> 0.4
  EXPECT_EQ(engine.acceptance_count(), 2u);
  EXPECT_EQ(engine.state().visible_u, before);
  engine.reflect_hidden(1);  // 0.3 -> 0.2
  EXPECT_EQ(engine.acceptance_count(), 1u);
  engine.reflect_hidden(0);
  EXPECT_EQ(engine.acceptance_count(), 0u);
  EXPECT_EQ(engine.state().visible_u, before);
}

TEST(ZDirect, SupportsTFamilies) {
  std::mt19937_64 rng(6);
  const auto base = simulated(rng, 120, 0.5, 2.5, 1.0);
  std::vector<NullFamily> fams(base.size(), NoncentralT::laubscher(10.0));
  const ZSample s(std::vector<double>(base.values().begin(), base.values().end()), fams);
  const auto run = zdirect_run(s, 0.1);
  EXPECT_LE(run.stop_step, s.size());
}

TEST(ZDirect, RejectsBadInput) {
  const auto s = ZSample::standard({1.0, 2.0});
  EXPECT_THROW(zdirect(s, 0.0), InputError);
  EXPECT_THROW(zdirect(s, 1.0), InputError);
  ZDirectConfig cfg;
  cfg.refit_cadence = 0;
  EXPECT_THROW(zdirect(s, 0.1, cfg), InputError);
  const auto half = pits({0.5});
  EXPECT_THROW(ZDirectEngine(half, std::vector<NullFamily>(1, Normal{})), InputError);
}
