#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "mn2v/mn2v.hpp"
#include "reference.hpp"

using namespace mn2v;

namespace {

WalkConfig config(double p, double q, std::size_t length = 30) {
  WalkConfig c;
  c.return_p = p;
  c.inout_q = q;
  c.layer_r = 1.0;
  c.walk_length = length;
  return c;
}

MultilayerNetwork star() {
  return ref::single_layer({{"c", "l0", 1.0}, {"c", "l1", 1.0}, {"c", "l2", 1.0}, {"c", "l3", 1.0}});
}

}  // namespace

TEST(AliasTable, EmpiricalFrequencies) {
  std::vector<double> w{1, 1, 2};
  AliasTable t(w);
  Rng rng(7);
  std::vector<double> count(3, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) count[t.sample(rng)] += 1.0;
  EXPECT_NEAR(count[0] / draws, 0.25, 0.01);
  EXPECT_NEAR(count[1] / draws, 0.25, 0.01);
  EXPECT_NEAR(count[2] / draws, 0.5, 0.01);
}

TEST(AliasTable, SingleOutcome) {
  std::vector<double> w{3.0};
  AliasTable t(w);
  for (double u : {0.0, 0.3, 0.999999}) EXPECT_EQ(t.sample(u), 0u);
}

TEST(AliasTable, CliqueRoundTrip) {
  Rng rng(11);
  std::vector<double> w(49);
  for (double& x : w) x = 0.1 + uniform01(rng);
  double total = 0.0;
  for (double x : w) total += x;
  AliasTable t(w);
  auto p = t.probabilities();
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(p[i], w[i] / total, 1e-12);
}

TEST(AliasTable, RejectsBadWeights) {
  EXPECT_THROW(AliasTable(std::vector<double>{1.0, -1.0}), InputError);
  EXPECT_THROW(AliasTable(std::vector<double>{0.0, 0.0}), InputError);
}

TEST(TransitionBias, ThreeCases) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}, {"c", "d", 1.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  const auto& n = net.nodes();
  auto cfg = config(4.0, 0.25);
  EXPECT_EQ(transition_bias(n.at("a"), n.at("a"), n.at("c"), agg, cfg), 0.25);
  EXPECT_EQ(transition_bias(n.at("a"), n.at("b"), n.at("c"), agg, cfg), 1.0);
  EXPECT_EQ(transition_bias(n.at("a"), n.at("d"), n.at("c"), agg, cfg), 4.0);
}

TEST(SampleWalk, PathGraphSupport) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"b", "c", 1.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    auto w = sample_walk(agg, net.nodes().at("b"), config(1, 1, 3), rng);
    ASSERT_EQ(w.size(), 3u);
    for (std::size_t i = 1; i < w.size(); ++i) EXPECT_TRUE(agg.adjacent(w[i - 1], w[i]));
  }
}

TEST(SampleWalk, TwoNodeAlternates) {
  auto net = ref::single_layer({{"a", "b", 1.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  Rng rng(3);
  auto w = sample_walk(agg, 0, config(1, 0.5, 5), rng);
  EXPECT_EQ(w, (Walk{0, 1, 0, 1, 0}));
}

TEST(SampleWalk, IsolatedStart) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"c", "c", 0.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  Rng rng(1);
  try {
    sample_walk(agg, net.nodes().at("c"), config(1, 1), rng);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("no outgoing mass"), std::string::npos);
  }
}

// Large q: from a leaf the walk must go to the center and then onward.
TEST(SampleWalk, StarReturnsToCenterWithLargeQ) {
  auto net = star();
  auto agg = adjusted_aggregate(net, 1.0);
  TransitionTables tables(agg, config(1.0, 1e6, 3));
  const auto c = net.nodes().at("c"), leaf = net.nodes().at("l0");
  std::size_t back = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Rng rng(s);
    auto w = sample_walk(tables, leaf, 3, rng);
    EXPECT_EQ(w[1], c);
    back += w[2] == leaf;
  }
  // every other leaf is at distance 2 from l0 and is all but forbidden
  EXPECT_GT(back, 9990u);
}

TEST(SampleWalk, StarLargePRarelyRevisitsLeaf) {
  auto net = star();
  auto agg = adjusted_aggregate(net, 1.0);
  TransitionTables tables(agg, config(1e6, 1.0, 3));
  const auto leaf = net.nodes().at("l0");
  std::size_t back = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Rng rng(s);
    back += sample_walk(tables, leaf, 3, rng)[2] == leaf;
  }
  EXPECT_LT(back, 100u);
}

TEST(Corpus, TriangleCounts) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  auto cfg = config(1.0, 0.5, 4);
  cfg.walks_per_node = 2;
  auto corpus = generate_corpus(agg, cfg);
  EXPECT_EQ(corpus.walks.size(), 6u);
  EXPECT_EQ(corpus.total_tokens, 24u);
  std::map<NodeIndex, int> starts;
  for (const auto& w : corpus.walks) ++starts[w.front()];
  for (auto [v, count] : starts) EXPECT_EQ(count, 2);
}

TEST(Corpus, MinSamplesRaisesWalkCount) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", 1.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  auto cfg = config(1.0, 0.5, 4);
  cfg.walks_per_node = 2;
  cfg.min_samples_per_node = 5;
  EXPECT_EQ(generate_corpus(agg, cfg).walks.size(), 15u);
}

TEST(Corpus, DeterministicAndThreadIndependent) {
  auto c = ref::random_case(5, 40, 3);
  auto agg = adjusted_aggregate(c.net, 0.5);
  auto cfg = config(1.0, 0.5, 20);
  cfg.seed = 99;
  auto a = generate_corpus(agg, cfg);
  auto b = generate_corpus(agg, cfg);
  cfg.threads = 4;
  auto p = generate_corpus(agg, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, p);
}

TEST(Corpus, SkipsIsolatedAndRejectsAllIsolated) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"c", "c", 0.0}});
  auto agg = adjusted_aggregate(net, 1.0);
  auto corpus = generate_corpus(agg, config(1.0, 1.0, 5));
  for (const auto& w : corpus.walks) EXPECT_NE(w.front(), net.nodes().at("c"));

  auto empty = ref::single_layer({{"a", "a", 0.0}});
  EXPECT_THROW(generate_corpus(adjusted_aggregate(empty, 1.0), config(1, 1)), InputError);
}

TEST(Corpus, EdgeSupportInvariant) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto c = ref::random_case(s, 30, 4);
    auto agg = adjusted_aggregate(c.net, 0.25);
    auto corpus = generate_corpus(agg, config(2.0, 0.5, 15));
    for (const auto& w : corpus.walks)
      for (std::size_t i = 1; i < w.size(); ++i) ASSERT_GT(agg.weight(w[i - 1], w[i]), 0.0);
  }
}

// A cap of zero bytes forces a transient table on every step; outcomes must
// not change.
TEST(TransitionTables, CacheBudgetDoesNotChangeWalks) {
  auto c = ref::random_case(8, 30, 3);
  auto agg = adjusted_aggregate(c.net, 0.5);
  auto cfg = config(0.5, 2.0, 25);
  cfg.seed = 4;
  TransitionTables cached(agg, cfg);
  cfg.alias_cache_bytes = 0;
  TransitionTables uncached(agg, cfg);
  auto a = generate_corpus(cached);
  auto b = generate_corpus(uncached);
  EXPECT_EQ(a, b);
  EXPECT_EQ(uncached.stats().cached_tables, 0u);
  EXPECT_GT(uncached.stats().uncached_builds, 0u);
  EXPECT_GT(cached.stats().cached_tables, 0u);
}

TEST(TransitionTables, MatchesReferenceWalker) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto c = ref::random_case(s + 100, 25, 4);
    auto t = ref::materialize(c.records, c.layers, c.coupling, c.net.nodes());
    auto dense = ref::aggregate(t, 0.5);
    auto agg = adjusted_aggregate(c.net, 0.5);
    auto cfg = config(2.0, 0.5, 20);
    TransitionTables tables(agg, cfg);
    for (NodeIndex v = 0; v < agg.num_nodes(); ++v) {
      if (agg.neighbors(v).empty()) continue;
      Rng r1 = substream(s, v), r2 = substream(s, v);
      ASSERT_EQ(sample_walk(tables, v, 20, r1), ref::second_order_walk(dense, v, 20, 2.0, 0.5, r2));
    }
  }
}

TEST(WalkConfig, Validation) {
  WalkConfig c;
  c.return_p = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = WalkConfig{};
  c.walk_length = 1;
  EXPECT_THROW(c.validate(), InputError);
  c = WalkConfig{};
  c.walks_per_node = 0;
  EXPECT_THROW(c.validate(), InputError);
}

// Larger r lowers the self-transition mass of the one-step kernel.
TEST(TransitionTables, SelfTransitionMassDecreasesWithR) {
  auto net = gen_multilayer_er(12, 4, 0.4, 3);
  double previous = 2.0;
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    auto agg = adjusted_aggregate(net, r);
    double mass = 0.0;
    for (NodeIndex u = 0; u < agg.num_nodes(); ++u)
      mass += agg.weight(u, u) / agg.volume();
    EXPECT_LT(mass, previous);
    previous = mass;
  }
}
