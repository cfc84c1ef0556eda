#include <gtest/gtest.h>

#include <cmath>

#include "binderkit/scoring/rank.hpp"
#include "binderkit/scoring/score.hpp"
#include "binderkit/structure/synthetic.hpp"
#include "support/oracles.hpp"

using namespace binderkit;

namespace {

LogProbTable uniform_table(int n, double v = std::log(1.0 / 20)) {
  return LogProbTable(n, std::vector<double>(20, v));
}

LogProbTable random_table(Rng& rng, int n) {
  LogProbTable t(n, std::vector<double>(20));
  for (auto& row : t) {
    double z = 0;
    for (double& v : row)
      z += (v = std::exp(rng.normal()));
    for (double& v : row)
      v = std::log(v / z);
  }
  return t;
}

} // namespace

TEST(ScoreSequence, WildTypeGivesZeroRefAndNoMutatedScores) {
  Rng rng(1);
  std::vector<int> wt = {0, 5, 7, 3};
  LogProbTable b = random_table(rng, 4), u = random_table(rng, 4);
  ScoreReport r = score_sequence(wt, wt, b, u, b, wt);
  EXPECT_EQ(r.n_mutated, 0);
  ASSERT_TRUE(r.ll_ref.has_value());
  EXPECT_EQ(*r.ll_ref, 0.0);
  EXPECT_FALSE(r.ll_mt.has_value());
  EXPECT_FALSE(r.ll_cd_ref.has_value());
}

TEST(ScoreSequence, SingleMutationHandExample) {
  // Position 1 mutated from token 2 to token 4.
  LogProbTable b = uniform_table(3, -5.0), u = uniform_table(3, -5.0);
  b[1][4] = -1.0;
  b[1][2] = -2.0;
  u[1][4] = -3.0;
  u[1][2] = -1.0;
  std::vector<int> wt = {0, 2, 9}, des = {0, 4, 9};
  ScoreReport r = score_sequence(des, wt, b, u, b, des);
  EXPECT_EQ(r.n_mutated, 1);
  EXPECT_DOUBLE_EQ(*r.ll_ref, 1.0);
  EXPECT_DOUBLE_EQ(*r.ll_cd_ref, 3.0);
  EXPECT_DOUBLE_EQ(*r.ll_mt, -1.0);
  EXPECT_DOUBLE_EQ(r.ll, (-5.0 - 1.0 - 5.0) / 3);
  EXPECT_DOUBLE_EQ(r.ll_cd, r.ll - (-5.0 - 3.0 - 5.0) / 3);
}

TEST(ScoreSequence, UniformModelHasZeroContrast) {
  std::vector<int> wt = {1, 2, 3, 4, 5}, des = {1, 7, 3, 8, 5};
  LogProbTable t = uniform_table(5);
  ScoreReport r = score_sequence(des, wt, t, t, uniform_table(12), std::vector<int>(12, 3));
  EXPECT_EQ(r.ll_cd, 0.0);
  EXPECT_EQ(*r.ll_cd_ref, 0.0);
  EXPECT_EQ(r.n_complex, 12);
  EXPECT_NEAR(r.ll_global, std::log(1.0 / 20), 1e-15);
}

TEST(ScoreSequence, ConstantShiftLeavesContrastUnchanged) {
  Rng rng(2);
  std::vector<int> wt = {1, 2, 3, 4, 5, 6}, des = {1, 9, 3, 0, 5, 11};
  LogProbTable b = random_table(rng, 6), u = random_table(rng, 6);
  ScoreReport r0 = score_sequence(des, wt, b, u, b, des);
  for (auto* t : {&b, &u})
    for (auto& row : *t)
      for (double& v : row)
        v += 2.5;
  ScoreReport r1 = score_sequence(des, wt, b, u, b, des);
  EXPECT_NEAR(r1.ll_cd, r0.ll_cd, 1e-12);
  EXPECT_NEAR(*r1.ll_cd_ref, *r0.ll_cd_ref, 1e-12);
  EXPECT_NEAR(r1.ll, r0.ll + 2.5, 1e-12);
}

TEST(ScoreSequence, AllMutatedMakesMtEqualLl) {
  Rng rng(3);
  std::vector<int> wt = {1, 2, 3, 4}, des = {5, 6, 7, 8};
  LogProbTable b = random_table(rng, 4), u = random_table(rng, 4);
  ScoreReport r = score_sequence(des, wt, b, u, b, des);
  EXPECT_NEAR(*r.ll_mt, r.ll, 1e-15);
}

TEST(ScoreSequence, ContractErrors) {
  LogProbTable t = uniform_table(3);
  EXPECT_THROW(score_sequence({1, 2}, {1, 2, 3}, t, t, t, {1, 2, 3}), Error);
  LogProbTable hole = t;
  hole[1].clear();
  try {
    score_sequence({1, 2, 3}, {1, 2, 3}, hole, t, t, {1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Contract);
    EXPECT_NE(std::string(e.what()).find("position 1"), std::string::npos);
  }
}

TEST(ScoreSequence, PerplexityIsExpNegativeLl) {
  for (double ll : {-0.1, -1.7, -2.995732273553991})
    EXPECT_NEAR(perplexity(ll), std::exp(-ll), 1e-9);
  EXPECT_NEAR(perplexity(std::log(1.0 / 20)), 20.0, 1e-9);
}

TEST(ScoreSequence, TablesFromModelAreNormalized) {
  ModelConfig cfg = ModelConfig::toy();
  cfg.width = 16;
  cfg.heads = 2;
  RedNet<double> model = init_model<double>(cfg, 3);
  Structure s = synth::toy_complex("SC", 4, 8, 12);
  ComplexFeatures f = featurize_complex(s, {}, cfg);
  LogProbTable t = logprob_table(model, f, f.native, f.design_positions());
  ASSERT_EQ(t.size(), 8u);
  for (const auto& row : t) {
    double z = 0;
    for (double v : row)
      z += std::exp(v);
    EXPECT_NEAR(z, 1.0, 1e-12);
  }
  EXPECT_EQ(logprob_table(model, f, f.native, f.design_positions()), t);
}

// ---------------------------------------------------------------------------

TEST(RankMetrics, MonotoneAndReversed) {
  std::vector<std::pair<double, double>> up, down;
  for (int i = 0; i < 8; ++i) {
    up.push_back({i * 1.5, i * i + 1.0});
    down.push_back({i * 1.5, -i * 3.0});
  }
  RankMetrics m = rank_metrics(up);
  EXPECT_DOUBLE_EQ(*m.spearman, 1.0);
  EXPECT_DOUBLE_EQ(*m.kendall, 1.0);
  EXPECT_NEAR(*m.ndcg, 1.0, 1e-15);
  RankMetrics r = rank_metrics(down);
  EXPECT_DOUBLE_EQ(*r.spearman, -1.0);
  EXPECT_DOUBLE_EQ(*r.kendall, -1.0);
}

TEST(RankMetrics, FivePointHandExampleMatchesPairCount) {
  std::vector<double> s = {0.3, -1.2, 2.0, 0.3, 1.1};
  std::vector<double> a = {1.0, 2.0, 5.0, 0.5, 2.0};
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 5; ++i)
    pairs.push_back({s[i], a[i]});
  RankMetrics m = rank_metrics(pairs);
  EXPECT_DOUBLE_EQ(*m.kendall, oracle::kendall_tau_b(s, a));
  // Ranks s: 2.5 1 5 2.5 4; a: 2 3.5 5 1 3.5 -> Pearson by hand.
  std::vector<double> rs = {2.5, 1, 5, 2.5, 4}, ra = {2, 3.5, 5, 1, 3.5};
  double ms = 3, ma = 3, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 5; ++i) {
    sab += (rs[i] - ms) * (ra[i] - ma);
    saa += (rs[i] - ms) * (rs[i] - ms);
    sbb += (ra[i] - ma) * (ra[i] - ma);
  }
  EXPECT_NEAR(*m.spearman, sab / std::sqrt(saa * sbb), 1e-15);
}

TEST(RankMetrics, KendallMatchesBruteForceWithTies) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(60));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.index(6));
      y[i] = static_cast<double>(rng.index(6));
    }
    std::optional<double> t = kendall_tau_b(x, y);
    double o = oracle::kendall_tau_b(x, y);
    if (!t)
      EXPECT_TRUE(std::isnan(o));
    else
      EXPECT_NEAR(*t, o, 1e-12);
  }
}

TEST(RankMetrics, MonotoneTransformInvariant) {
  Rng rng(6);
  std::vector<std::pair<double, double>> p, q;
  for (int i = 0; i < 30; ++i) {
    double s = rng.normal(), a = rng.normal() + s;
    p.push_back({s, a});
    q.push_back({std::exp(3 * s) - 7, a});
  }
  RankMetrics m1 = rank_metrics(p), m2 = rank_metrics(q);
  EXPECT_DOUBLE_EQ(*m1.spearman, *m2.spearman);
  EXPECT_DOUBLE_EQ(*m1.kendall, *m2.kendall);
  EXPECT_DOUBLE_EQ(*m1.ndcg, *m2.ndcg);
}

TEST(RankMetrics, ConstantScoresAreAbsent) {
  RankMetrics m = rank_metrics({{1.0, 2.0}, {1.0, 3.0}, {1.0, 0.0}});
  EXPECT_FALSE(m.spearman.has_value());
  EXPECT_FALSE(m.kendall.has_value());
  EXPECT_THROW(rank_metrics({{1.0, 2.0}}), Error);
}

TEST(RankMetrics, NdcgHandExample) {
  // Affinity 0, 0.5, 1 (already normalized); scores rank item 1 first.
  std::vector<double> s = {0.1, 0.9, 0.5}, a = {0.0, 0.5, 1.0};
  const double g0 = 0.0, g1 = std::sqrt(2.0) - 1.0, g2 = 1.0;
  const double dcg = g1 + g2 / std::log2(3.0) + g0 / 2.0;
  const double idcg = g2 + g1 / std::log2(3.0);
  EXPECT_NEAR(*ndcg(s, a), dcg / idcg, 1e-15);
  // Lower-is-better flips the gains.
  NdcgConfig lower;
  lower.higher_is_better = false;
  const double dcg2 = g1 + g0 / std::log2(3.0) + g2 / 2.0;
  EXPECT_NEAR(*ndcg(s, a, lower), dcg2 / idcg, 1e-15);
}
