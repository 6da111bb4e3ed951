#include <gtest/gtest.h>

#include <cmath>

#include "mn2v/mn2v.hpp"
#include "reference.hpp"

using namespace mn2v;

namespace {

MultilayerNetwork two_cliques() {
  std::vector<std::tuple<std::string, std::string, double>> edges;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 10; ++i)
      for (int j = i + 1; j < 10; ++j)
        edges.emplace_back(std::to_string(c * 10 + i), std::to_string(c * 10 + j), 1.0);
  return ref::single_layer(edges);
}

NeighborhoodCorpus clique_corpus(std::uint64_t seed) {
  static const auto net = two_cliques();
  static const auto agg = adjusted_aggregate(net, 1.0);
  WalkConfig w;
  w.seed = seed;
  return generate_corpus(agg, w);
}

SkipGramConfig clique_config(std::uint64_t seed) {
  SkipGramConfig c;
  c.dim = 8;
  c.context = 5;
  c.negatives = 5;
  c.epochs = 5;
  c.seed = seed;
  return c;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  return dot(a, b) / std::sqrt(dot(a, a) * dot(b, b));
}

std::vector<double> random_vector(Rng& rng, std::size_t d, double scale) {
  std::vector<double> v(d);
  for (double& x : v) x = (2.0 * uniform01(rng) - 1.0) * scale;
  return v;
}

}  // namespace

TEST(Sgns, LossAtOrigin) {
  std::vector<double> zero(6, 0.0);
  std::vector<std::span<const double>> neg{zero};
  EXPECT_DOUBLE_EQ(sgns_loss(zero, zero, neg), 2.0 * std::log(2.0));

  EmbeddingModel m;
  m.input = DenseMatrix(3, 4);
  m.output = DenseMatrix(3, 4);
  std::vector<NodeIndex> negatives{2};
  EXPECT_DOUBLE_EQ(sgns_pair_update(m, 0, 1, negatives, 0.1), 2.0 * std::log(2.0));
}

TEST(Sgns, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 6;
    auto u = random_vector(rng, d, 1.0), c = random_vector(rng, d, 1.0);
    std::vector<std::vector<double>> negs{random_vector(rng, d, 1.0), random_vector(rng, d, 1.0)};
    auto spans = [&] {
      std::vector<std::span<const double>> s;
      for (auto& n : negs) s.emplace_back(n);
      return s;
    };
    auto g = sgns_gradient(u, c, spans());
    const double h = 1e-5;
    auto check = [&](std::vector<double>& x, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < d; ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = sgns_loss(u, c, spans());
        x[i] = keep - h;
        const double down = sgns_loss(u, c, spans());
        x[i] = keep;
        const double numeric = (up - down) / (2 * h);
        EXPECT_LT(std::abs(numeric - analytic[i]), 1e-4 * std::max(1.0, std::abs(analytic[i])));
      }
    };
    check(u, g.center);
    check(c, g.context);
    check(negs[0], g.negatives[0]);
    check(negs[1], g.negatives[1]);
  }
}

TEST(Sgns, UpdateIsNegativeGradientStep) {
  Rng rng(9);
  EmbeddingModel m;
  m.input = DenseMatrix(5, 4);
  m.output = DenseMatrix(5, 4);
  for (double& x : m.input.data()) x = uniform01(rng) - 0.5;
  for (double& x : m.output.data()) x = uniform01(rng) - 0.5;
  const EmbeddingModel before = m;
  std::vector<NodeIndex> negatives{3, 4};
  const double lr = 0.01;
  auto g = sgns_gradient(before.input.row(0), before.output.row(1),
                         std::vector<std::span<const double>>{before.output.row(3), before.output.row(4)});
  sgns_pair_update(m, 0, 1, negatives, lr);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.input(0, i), before.input(0, i) - lr * g.center[i], 1e-15);
    EXPECT_NEAR(m.output(1, i), before.output(1, i) - lr * g.context[i], 1e-15);
    EXPECT_NEAR(m.output(3, i), before.output(3, i) - lr * g.negatives[0][i], 1e-15);
  }
}

TEST(Sgns, PositivePairScoreIncreases) {
  Rng rng(2);
  EmbeddingModel m;
  m.input = DenseMatrix(4, 6);
  m.output = DenseMatrix(4, 6);
  for (double& x : m.input.data()) x = uniform01(rng) - 0.5;
  for (double& x : m.output.data()) x = uniform01(rng) - 0.5;
  const double before = dot(m.input.row(0), m.output.row(1));
  std::vector<NodeIndex> negatives{2};
  sgns_pair_update(m, 0, 1, negatives, 1e-3);
  EXPECT_GT(dot(m.input.row(0), m.output.row(1)), before);
}

TEST(Sgns, WindowPairCount) {
  for (std::size_t l = 1; l <= 20; ++l)
    for (std::size_t k = 1; k <= 5; ++k) {
      std::size_t brute = 0;
      for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = 0; j < l; ++j)
          if (i != j && (i > j ? i - j : j - i) <= k) ++brute;
      EXPECT_EQ(context_pair_count(l, k), brute);
    }
}

TEST(Train, CliqueHomophily) {
  auto model = train(clique_corpus(1), clique_config(1));
  double within = 0.0, between = 0.0;
  int nw = 0, nb = 0;
  for (NodeIndex i = 0; i < 20; ++i)
    for (NodeIndex j = i + 1; j < 20; ++j) {
      const double c = cosine(model.input.row(i), model.input.row(j));
      if (i / 10 == j / 10) {
        within += c;
        ++nw;
      } else {
        between += c;
        ++nb;
      }
    }
  EXPECT_GE(within / nw - between / nb, 0.3);
}

TEST(Train, CliqueSeparationByKMeans) {
  Partition truth(20);
  for (std::size_t i = 0; i < 20; ++i) truth[i] = i / 10;
  int perfect = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    auto model = train(clique_corpus(s), clique_config(s));
    perfect += adjusted_rand(kmeans(model.input, 2, s).labels, truth) == 1.0;
  }
  EXPECT_GE(perfect, 28);
}

TEST(Train, Deterministic) {
  auto corpus = clique_corpus(3);
  EXPECT_EQ(train(corpus, clique_config(3)).input, train(corpus, clique_config(3)).input);
}

TEST(Train, SelfLoopCorpus) {
  auto net = ref::single_layer({{"a", "a", 1.0}});
  auto corpus = generate_corpus(adjusted_aggregate(net, 1.0), WalkConfig{});
  auto model = train(corpus, clique_config(0));
  for (double x : model.input.data()) EXPECT_TRUE(std::isfinite(x));
}

TEST(Train, ZeroOccurrenceNodesKeepInitialization) {
  auto net = ref::single_layer({{"a", "b", 1.0}, {"c", "c", 0.0}});
  auto corpus = generate_corpus(adjusted_aggregate(net, 1.0), WalkConfig{});
  auto cfg = clique_config(4);
  auto model = train(corpus, cfg);
  ASSERT_EQ(model.zero_occurrence, std::vector<NodeIndex>{2});
  auto init = init_model(3, cfg);
  for (std::size_t i = 0; i < cfg.dim; ++i) EXPECT_EQ(model.input(2, i), init.input(2, i));
}

TEST(Train, DivergenceReported) {
  auto corpus = clique_corpus(0);
  auto cfg = clique_config(0);
  cfg.initial_lr = 1e300;
  EXPECT_THROW(train(corpus, cfg), NumericError);
}

TEST(Train, ConfigValidation) {
  auto cfg = clique_config(0);
  cfg.dim = 0;
  EXPECT_THROW(train(clique_corpus(0), cfg), InputError);
  cfg = clique_config(0);
  cfg.context = 0;
  EXPECT_THROW(train(clique_corpus(0), cfg), InputError);
}

TEST(Train, HogwildStillSeparates) {
  Partition truth(20);
  for (std::size_t i = 0; i < 20; ++i) truth[i] = i / 10;
  auto cfg = clique_config(6);
  cfg.threads = 4;
  auto model = train(clique_corpus(6), cfg);
  EXPECT_EQ(adjusted_rand(kmeans(model.input, 2, 6).labels, truth), 1.0);
}

TEST(ExactLikelihood, ZeroFeatures) {
  auto corpus = clique_corpus(2);
  DenseMatrix zero(20, 4);
  double pairs = 0.0;
  for (const auto& w : corpus.walks) pairs += static_cast<double>(context_pair_count(w.size(), 3));
  EXPECT_NEAR(exact_log_likelihood(zero, corpus, 3), -pairs * std::log(20.0), 1e-9 * pairs);
}

TEST(ExactLikelihood, SingleNode) {
  NeighborhoodCorpus corpus;
  corpus.walks = {{0, 0, 0, 0}};
  corpus.total_tokens = 4;
  corpus.num_nodes = 1;
  DenseMatrix f(1, 3, 0.7);
  EXPECT_DOUBLE_EQ(exact_log_likelihood(f, corpus, 2), 0.0);
}

TEST(ExactLikelihood, GuardsLargeN) {
  NeighborhoodCorpus corpus;
  corpus.walks = {{0, 1}};
  corpus.total_tokens = 2;
  corpus.num_nodes = kExactLikelihoodMaxNodes + 1;
  EXPECT_THROW(exact_log_likelihood(DenseMatrix(kExactLikelihoodMaxNodes + 1, 2), corpus, 1), ResourceError);
}

// Full-softmax gradient ascent with tied weights: the likelihood must not drop.
TEST(ExactLikelihood, AscentIsMonotone) {
  auto net = gen_planted_partition({20, 1, 2, 0.6, 0.1, 5}).network;
  WalkConfig w;
  w.walk_length = 10;
  w.walks_per_node = 2;
  auto corpus = generate_corpus(adjusted_aggregate(net, 1.0), w);
  const std::size_t k = 2, d = 4, n = 20;
  DenseMatrix f(n, d);
  Rng rng(1);
  for (double& x : f.data()) x = 0.1 * (uniform01(rng) - 0.5);

  // counts C(u, c) of (center, context) pairs
  DenseMatrix counts(n, n);
  for (const auto& walk : corpus.walks)
    for (std::size_t i = 0; i < walk.size(); ++i)
      for (std::size_t j = 0; j < walk.size(); ++j)
        if (i != j && (i > j ? i - j : j - i) <= k) counts(walk[i], walk[j]) += 1.0;

  double previous = exact_log_likelihood(f, corpus, k);
  for (int epoch = 0; epoch < 3; ++epoch) {
    DenseMatrix grad(n, d);
    for (std::size_t u = 0; u < n; ++u) {
      double total = 0.0;
      for (std::size_t c = 0; c < n; ++c) total += counts(u, c);
      if (total == 0.0) continue;
      std::vector<double> s(n);
      double mx = -1e300;
      for (std::size_t w2 = 0; w2 < n; ++w2) mx = std::max(mx, s[w2] = dot(f.row(w2), f.row(u)));
      double z = 0.0;
      for (double& x : s) z += (x = std::exp(x - mx));
      for (std::size_t w2 = 0; w2 < n; ++w2) {
        // d/d f_u and d/d f_w of  sum_c C(u,c) f_c.f_u - total log Z_u
        const double coeff = counts(u, w2) - total * s[w2] / z;
        for (std::size_t i = 0; i < d; ++i) {
          grad(u, i) += coeff * f(w2, i);
          grad(w2, i) += coeff * f(u, i);
        }
      }
    }
    for (std::size_t i = 0; i < f.data().size(); ++i) f.data()[i] += 1e-4 * grad.data()[i];
    const double now = exact_log_likelihood(f, corpus, k);
    EXPECT_GE(now, previous);
    previous = now;
  }
}
