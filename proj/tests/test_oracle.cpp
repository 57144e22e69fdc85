#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dirfdr/oracle.hpp"
#include "oracles.hpp"

using namespace dirfdr;

TEST(TrueLfsr, Examples) {
  for (double z : {-4.0, 0.3, 2.0}) EXPECT_DOUBLE_EQ(true_lfsr(z, {1.0, 2.0, 0.7}), 1.0);
  EXPECT_NEAR(true_lfsr(1e-300, {0.0, 1.5, 0.5}), 0.5, 1e-12);
  const auto ref = oracle::prior_half_lines(1.3, {0.5, 2.0, 0.75});
  EXPECT_NEAR(true_lfsr(1.3, {0.5, 2.0, 0.75}), ref.lfsr(), 1e-6);
}

TEST(TrueLfsr, MatchesThetaQuadrature) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0), xs(0.3, 3.0), zs(-7.0, 7.0);
  for (int r = 0; r < 1000; ++r) {
    const SimPrior p{u(rng), xs(rng), u(rng)};
    const double z = zs(rng);
    const auto got = true_sign_posterior(z, p);
    const auto ref = oracle::prior_half_lines(z, p);
    EXPECT_NEAR(got.lfsr(), ref.lfsr(), 1e-6) << "w=" << p.w << " xi=" << p.xi << " v=" << p.v << " z=" << z;
    EXPECT_NEAR(got.negative, ref.neg, 1e-6);
    EXPECT_NEAR(got.positive, ref.pos, 1e-6);
  }
}

TEST(OdpSign, Examples) {
  EXPECT_EQ(odp_sign(0.1, 0.7), Sign::Positive);
  EXPECT_EQ(odp_sign(0.6, 0.2), Sign::Negative);
  EXPECT_EQ(odp_sign(0.3, 0.3), Sign::Positive);
}

TEST(OdpSign, SymmetricPriorFollowsZ) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> w(0.0, 0.99), xs(0.3, 3.0), zs(-6.0, 6.0);
  for (int r = 0; r < 1000; ++r) {
    const SimPrior p{w(rng), xs(rng), 0.5};
    const double z = zs(rng);
    if (std::abs(z) < 1e-6) continue;
    const auto post = true_sign_posterior(z, p);
    EXPECT_EQ(odp_sign(post.negative, post.positive), sign_of(z));
  }
}

TEST(LfsrThreshold, Examples) {
  EXPECT_EQ(lfsr_threshold(std::vector<double>{0.02, 0.05, 0.2, 0.9}, 0.1), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(lfsr_threshold(std::vector<double>{0.3, 0.5, 0.2}, 0.1).empty());
  EXPECT_EQ(lfsr_threshold(std::vector<double>{0.1}, 0.1), std::vector<std::size_t>{0});
}

TEST(LfsrThreshold, RunningMeanBound) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < 500; ++r) {
    std::vector<double> l(1 + rng() % 200);
    const double scale = u(rng);
    for (auto& x : l) x = std::pow(u(rng), 3.0) * scale;
    const auto rej = lfsr_threshold(l, 0.1);
    if (rej.empty()) continue;
    double s = 0.0;
    for (std::size_t i : rej) s += l[i];
    EXPECT_LE(s / static_cast<double>(rej.size()), 0.1 + 1e-15);
  }
}

TEST(LfsrOracle, ComposesThePieces) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  const SimPrior prior{0.3, 2.0, 0.75};
  std::vector<double> z(300);
  for (auto& x : z) x = (g(rng) > 0.5 ? 2.0 : -2.0) * 0.8 + g(rng);
  const auto s = ZSample::standard(z);
  const auto d = lfsr_oracle(s, prior, 0.1);
  std::vector<double> lfsr(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) lfsr[i] = true_lfsr(z[i], prior);
  EXPECT_EQ(d.indices(), lfsr_threshold(lfsr, 0.1));
  for (const auto& item : d.items()) {
    const auto post = true_sign_posterior(z[item.index], prior);
    EXPECT_EQ(item.sign, odp_sign(post.negative, post.positive));
  }
  EXPECT_THROW(lfsr_oracle(ZSample({1.0}, {Normal{2.0}}), prior, 0.1), InputError);
}

TEST(Ash, ForcedNullModelRejectsNothing) {
  const auto s = ZSample::standard({-5.0, 4.0, 0.2, 3.0});
  const auto g = unmasked_grid(s, 0.1, std::sqrt(2.0));
  std::vector<double> w(g.columns(), 0.0);
  w[g.K()] = 1.0;
  for (double q : {0.05, 0.5, 0.99}) EXPECT_TRUE(ash_decisions(s, MixtureModel{g, w}, q).empty());
}

TEST(Ash, MonotoneInQAndDeterministic) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> z(200);
  for (auto& x : z) x = (g(rng) > 0 ? 2.5 : 0.0) + g(rng);
  const auto s = ZSample::standard(z);
  const auto model = fit_unmasked_model(s);
  std::vector<std::size_t> prev;
  for (double q : {0.01, 0.05, 0.1, 0.2, 0.4}) {
    const auto cur = ash_decisions(s, model, q).indices();
    EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = cur;
  }
  EXPECT_EQ(ash_procedure(s, 0.1), ash_procedure(s, 0.1));
}

TEST(Ash, GridComesFromUnmaskedValues) {
  const auto s = ZSample::standard({-5.0, 1.0, 0.5});
  const auto g = unmasked_grid(s, 0.1, std::sqrt(2.0));
  EXPECT_NEAR(g.endpoints().back(), 2.0 * std::sqrt(24.0), 1e-12);
}
