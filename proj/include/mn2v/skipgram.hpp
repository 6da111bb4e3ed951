#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mn2v/alias_table.hpp"
#include "mn2v/dense_matrix.hpp"
#include "mn2v/error.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/rng.hpp"
#include "mn2v/walk.hpp"

namespace mn2v {

struct SkipGramConfig {
  std::size_t dim = 100;       // D
  std::size_t context = 10;    // k, window radius
  std::size_t negatives = 5;   // b
  double initial_lr = 0.025;
  std::size_t epochs = 5;
  std::uint64_t seed = 0;
  // 1 is the deterministic mode; more threads train lock-free.
  std::size_t threads = 1;

  void validate() const {
    if (dim < 1) throw InputError("embedding dimension D must be positive");
    if (context < 1) throw InputError("context size k must be positive");
    if (negatives < 1) throw InputError("number of negative samples must be positive");
    if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw InputError("learning rate must be positive");
    if (epochs < 1) throw InputError("epochs must be positive");
  }
};

struct EmbeddingModel {
  DenseMatrix input;   // rows are the features f_u
  DenseMatrix output;  // context vectors
  std::shared_ptr<const NodeRegistry> nodes;
  // Nodes absent from the corpus; their rows keep the initialization.
  std::vector<NodeIndex> zero_occurrence;
  std::vector<double> epoch_loss;  // mean per-pair loss of each epoch

  const DenseMatrix& features() const noexcept { return input; }
  std::size_t num_nodes() const noexcept { return input.rows(); }
  std::size_t dim() const noexcept { return input.cols(); }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -log sigma(x), stable for large |x|.
inline double log1p_exp_neg(double x) {
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Per-pair SGNS loss  -log s(c.u) - sum_n log s(-n.u).
inline double sgns_loss(std::span<const double> center, std::span<const double> context,
                        std::span<const std::span<const double>> negatives) {
  double loss = log1p_exp_neg(dot(context, center));
  for (auto n : negatives) loss += log1p_exp_neg(-dot(n, center));
  return loss;
}

struct SgnsGradient {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

inline SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                                  std::span<const std::span<const double>> negatives) {
  const std::size_t d = center.size();
  SgnsGradient g;
  g.loss = sgns_loss(center, context, negatives);
  g.center.assign(d, 0.0);
  g.context.assign(d, 0.0);
  const double pos = sigmoid(dot(context, center)) - 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    g.center[i] += pos * context[i];
    g.context[i] = pos * center[i];
  }
  for (auto n : negatives) {
    const double neg = sigmoid(dot(n, center));
    std::vector<double> gn(d);
    for (std::size_t i = 0; i < d; ++i) {
      g.center[i] += neg * n[i];
      gn[i] = neg * center[i];
    }
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

namespace detail {

// Element access for the shared-weight (lock-free) training mode.
template <bool Shared>
struct Cell {
  static double load(const double& x) {
    if constexpr (Shared)
      return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
    else return x;
  }
  static void add(double& x, double delta) {
    if constexpr (Shared) {
      std::atomic_ref<double> r(x);
      r.store(r.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
    } else {
      x += delta;
    }
  }
};

// One gradient step on (center, context, negatives) evaluated at the
// pre-update point. `scratch` holds 2*D doubles. Returns the pre-update loss.
template <bool Shared>
double sgns_step(DenseMatrix& input, DenseMatrix& output, NodeIndex center, NodeIndex context,
                 std::span<const NodeIndex> negatives, double lr, std::span<double> scratch) {
  using C = Cell<Shared>;
  const std::size_t d = input.cols();
  std::span<double> f = scratch.first(d);
  std::span<double> grad = scratch.subspan(d, d);
  auto in_row = input.row(center);
  for (std::size_t i = 0; i < d; ++i) {
    f[i] = C::load(in_row[i]);
    grad[i] = 0.0;
  }
  // Scores and gradient coefficients first, so repeated targets see the same point.
  const std::size_t targets = 1 + negatives.size();
  double coeff_buf[64];
  std::vector<double> coeff_heap;
  double* coeff = coeff_buf;
  if (targets > 64) {
    coeff_heap.resize(targets);
    coeff = coeff_heap.data();
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < targets; ++t) {
    const NodeIndex target = t == 0 ? context : negatives[t - 1];
    auto out_row = output.row(target);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += C::load(out_row[i]) * f[i];
    if (t == 0) {
      loss += log1p_exp_neg(s);
      coeff[t] = sigmoid(s) - 1.0;
    } else {
      loss += log1p_exp_neg(-s);
      coeff[t] = sigmoid(s);
    }
    for (std::size_t i = 0; i < d; ++i) grad[i] += coeff[t] * C::load(out_row[i]);
  }
  for (std::size_t t = 0; t < targets; ++t) {
    const NodeIndex target = t == 0 ? context : negatives[t - 1];
    auto out_row = output.row(target);
    const double step = -lr * coeff[t];
    for (std::size_t i = 0; i < d; ++i) C::add(out_row[i], step * f[i]);
  }
  for (std::size_t i = 0; i < d; ++i) C::add(in_row[i], -lr * grad[i]);
  return loss;
}

}  // namespace detail

/// Applies one SGD step of the per-pair loss to the center's input row and the
/// context / negative output rows. Returns the loss before the update.
inline double sgns_pair_update(EmbeddingModel& model, NodeIndex center, NodeIndex context,
                               std::span<const NodeIndex> negatives, double lr) {
  std::vector<double> scratch(2 * model.dim());
  return detail::sgns_step<false>(model.input, model.output, center, context, negatives, lr, scratch);
}

// Number of (center, context) pairs in a walk of `length` tokens with radius k.
inline std::size_t context_pair_count(std::size_t length, std::size_t k) {
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t lo = i >= k ? i - k : 0;
    const std::size_t hi = std::min(length - 1, i + k);
    pairs += hi - lo;
  }
  return pairs;
}

inline EmbeddingModel init_model(std::size_t num_nodes, const SkipGramConfig& cfg,
                                 std::shared_ptr<const NodeRegistry> nodes = nullptr) {
  EmbeddingModel model;
  model.input = DenseMatrix(num_nodes, cfg.dim);
  model.output = DenseMatrix(num_nodes, cfg.dim);
  model.nodes = std::move(nodes);
  Rng rng = substream(cfg.seed, 0x1417);
  const double half = 0.5 / static_cast<double>(cfg.dim);
  for (double& x : model.input.data()) x = (uniform01(rng) * 2.0 - 1.0) * half;
  return model;
}

// Unigram^(3/4) noise distribution over corpus tokens.
inline AliasTable noise_distribution(std::span<const std::size_t> counts) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = std::pow(static_cast<double>(counts[i]), 0.75);
  return AliasTable(w);
}

namespace detail {

// `processed` is the number of center tokens seen before this walk.
template <bool Shared, typename Rate>
double train_walk(EmbeddingModel& model, const Walk& walk, const SkipGramConfig& cfg,
                  const AliasTable& noise, Rng& rng, const Rate& rate, std::size_t processed,
                  std::vector<double>& scratch, std::vector<NodeIndex>& negatives, std::size_t& pairs) {
  double loss = 0.0;
  const std::size_t k = cfg.context;
  for (std::size_t i = 0; i < walk.size(); ++i) {
    const double lr = rate(processed + i);
    const std::size_t lo = i >= k ? i - k : 0;
    const std::size_t hi = std::min(walk.size() - 1, i + k);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j == i) continue;
      negatives.clear();
      for (std::size_t n = 0; n < cfg.negatives; ++n) {
        auto neg = static_cast<NodeIndex>(noise.sample(rng));
        if (neg != walk[j]) negatives.push_back(neg);
      }
      loss += sgns_step<Shared>(model.input, model.output, walk[i], walk[j], negatives, lr, scratch);
      ++pairs;
    }
  }
  return loss;
}

inline void check_finite(const EmbeddingModel& model, std::size_t epoch) {
  for (double x : model.input.data()) {
    if (!std::isfinite(x)) {
      throw NumericError("non-finite embedding weight after epoch " + std::to_string(epoch + 1) +
                         "; the learning rate is likely too high");
    }
  }
  for (double x : model.output.data()) {
    if (!std::isfinite(x)) {
      throw NumericError("non-finite context weight after epoch " + std::to_string(epoch + 1) +
                         "; the learning rate is likely too high");
    }
  }
}

}  // namespace detail

/// Skip-gram with negative sampling over every (center, context) pair with
/// 0 < |i - j| <= k. The learning rate decays linearly per center token from
/// initial_lr to initial_lr / 100 across all epochs.
inline EmbeddingModel train(const NeighborhoodCorpus& corpus, const SkipGramConfig& cfg) {
  cfg.validate();
  if (corpus.walks.empty() || corpus.total_tokens == 0) throw InputError("empty corpus");
  std::size_t n = corpus.num_nodes;
  for (const auto& w : corpus.walks)
    for (NodeIndex v : w) n = std::max<std::size_t>(n, std::size_t{v} + 1);

  std::vector<std::size_t> counts(n, 0);
  for (const auto& w : corpus.walks)
    for (NodeIndex v : w) ++counts[v];

  EmbeddingModel model = init_model(n, cfg, corpus.nodes);
  for (NodeIndex v = 0; v < n; ++v)
    if (counts[v] == 0) model.zero_occurrence.push_back(v);
  const AliasTable noise = noise_distribution(counts);

  const double total = static_cast<double>(cfg.epochs) * static_cast<double>(corpus.total_tokens);
  auto rate = [&](std::size_t processed) {
    return cfg.initial_lr * (1.0 - 0.99 * static_cast<double>(processed) / total);
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::size_t base = epoch * corpus.total_tokens;
    double epoch_loss = 0.0;
    std::size_t epoch_pairs = 0;
    if (cfg.threads <= 1) {
      Rng rng = substream(cfg.seed, 0x5eed, epoch);
      std::vector<double> scratch(2 * cfg.dim);
      std::vector<NodeIndex> negatives;
      negatives.reserve(cfg.negatives);
      std::size_t processed = base;
      for (const auto& walk : corpus.walks) {
        epoch_loss += detail::train_walk<false>(model, walk, cfg, noise, rng, rate, processed, scratch,
                                                negatives, epoch_pairs);
        processed += walk.size();
      }
    } else {
      std::atomic<std::size_t> processed{base};
      std::vector<double> losses(cfg.threads, 0.0);
      std::vector<std::size_t> pair_counts(cfg.threads, 0);
      {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < cfg.threads; ++t) {
          pool.emplace_back([&, t] {
            Rng rng = substream(cfg.seed, 0x5eed + 1 + t, epoch);
            std::vector<double> scratch(2 * cfg.dim);
            std::vector<NodeIndex> negatives;
            for (std::size_t w = t; w < corpus.walks.size(); w += cfg.threads) {
              const auto& walk = corpus.walks[w];
              const std::size_t start = processed.fetch_add(walk.size(), std::memory_order_relaxed);
              losses[t] += detail::train_walk<true>(model, walk, cfg, noise, rng, rate, start, scratch,
                                                    negatives, pair_counts[t]);
            }
          });
        }
      }
      for (std::size_t t = 0; t < cfg.threads; ++t) {
        epoch_loss += losses[t];
        epoch_pairs += pair_counts[t];
      }
    }
    detail::check_finite(model, epoch);
    model.epoch_loss.push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
  }
  return model;
}

inline constexpr std::size_t kExactLikelihoodMaxNodes = 2000;

/// Full-softmax log-likelihood  sum_pairs [f_c.f_u - log sum_w exp(f_w.f_u)]
/// with the input matrix used for both roles. Monitoring oracle only.
inline double exact_log_likelihood(const DenseMatrix& features, const NeighborhoodCorpus& corpus,
                                   std::size_t k) {
  const std::size_t n = features.rows();
  if (n > kExactLikelihoodMaxNodes) {
    throw ResourceError("exact likelihood needs N <= 2000 (got " + std::to_string(n) +
                     "); use the sampled training loss instead");
  }
  std::vector<double> log_z(n, std::numeric_limits<double>::quiet_NaN());
  auto partition = [&](NodeIndex u) {
    if (std::isnan(log_z[u])) {
      double mx = -std::numeric_limits<double>::infinity();
      std::vector<double> s(n);
      for (std::size_t w = 0; w < n; ++w) {
        s[w] = dot(features.row(w), features.row(u));
        mx = std::max(mx, s[w]);
      }
      double acc = 0.0;
      for (double x : s) acc += std::exp(x - mx);
      log_z[u] = mx + std::log(acc);
    }
    return log_z[u];
  };
  double ll = 0.0;
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const std::size_t lo = i >= k ? i - k : 0;
      const std::size_t hi = std::min(walk.size() - 1, i + k);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        ll += dot(features.row(walk[j]), features.row(walk[i])) - partition(walk[i]);
      }
    }
  }
  return ll;
}

inline double exact_log_likelihood(const EmbeddingModel& model, const NeighborhoodCorpus& corpus,
                                   std::size_t k) {
  return exact_log_likelihood(model.input, corpus, k);
}

}  // namespace mn2v
