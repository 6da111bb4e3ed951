#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "mn2v/alias_table.hpp"
#include "mn2v/error.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/rng.hpp"

namespace mn2v {

struct WalkConfig {
  double return_p = 1.0;   // p
  double inout_q = 0.5;    // q
  double layer_r = 0.25;   // r, consumed when the aggregate is built
  std::size_t walk_length = 30;
  std::size_t walks_per_node = 10;
  std::size_t min_samples_per_node = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t alias_cache_bytes = std::size_t{1} << 30;

  void validate() const {
    auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
    if (!positive(return_p)) throw InputError("return parameter p must be positive");
    if (!positive(inout_q)) throw InputError("in-out parameter q must be positive");
    if (!positive(layer_r)) throw InputError("layer walk parameter r must be positive");
    if (walk_length < 2) throw InputError("walk length must be at least 2");
    if (walks_per_node < 1) throw InputError("walks per node must be at least 1");
    if (min_samples_per_node < 1) throw InputError("minimum samples per node must be at least 1");
  }

  std::size_t walks_per_start() const noexcept {
    return std::max(walks_per_node, min_samples_per_node);
  }
  bool first_order() const noexcept { return return_p == 1.0 && inout_q == 1.0; }
};

using Walk = std::vector<NodeIndex>;

struct NeighborhoodCorpus {
  std::vector<Walk> walks;
  std::size_t total_tokens = 0;
  std::size_t num_nodes = 0;
  std::shared_ptr<const NodeRegistry> nodes;

  bool operator==(const NeighborhoodCorpus& o) const {
    return walks == o.walks && total_tokens == o.total_tokens && num_nodes == o.num_nodes;
  }
};

// Search bias beta_pq(t, x) with the distance d(t, x) measured on the support
// of the aggregate: 0 if x == t, 1 if A~_{t,x} > 0, 2 otherwise.
inline double transition_bias(NodeIndex prev, NodeIndex candidate, [[maybe_unused]] NodeIndex current,
                              const AdjustedAggregate& agg, const WalkConfig& cfg) {
  if (candidate == prev) return 1.0 / cfg.return_p;
  if (agg.adjacent(prev, candidate)) return 1.0;
  return 1.0 / cfg.inout_q;
}

struct AliasCacheStats {
  std::size_t cached_tables = 0;
  std::size_t cached_bytes = 0;
  std::size_t uncached_builds = 0;
};

/// First-order alias tables per node plus a lazily filled, byte-capped cache
/// of second-order tables keyed by the directed edge (t -> v) just traversed.
/// Once the cap is reached, uncached edges build a transient table per step,
/// which draws the same outcome the cached table would.
///
/// Safe for concurrent sampling.
class TransitionTables {
 public:
  TransitionTables(const AdjustedAggregate& agg, const WalkConfig& cfg)
      : agg_(&agg), cfg_(cfg), first_(agg.num_nodes()) {
    cfg_.validate();
    for (NodeIndex v = 0; v < agg.num_nodes(); ++v) {
      if (!agg.neighbors(v).empty()) first_[v] = AliasTable(agg.neighbor_weights(v));
    }
    if (!cfg_.first_order()) {
      second_ = std::make_unique<std::atomic<const AliasTable*>[]>(agg.num_nonzeros());
      for (std::size_t e = 0; e < agg.num_nonzeros(); ++e) second_[e].store(nullptr);
    }
  }

  TransitionTables(const TransitionTables&) = delete;
  TransitionTables& operator=(const TransitionTables&) = delete;

  ~TransitionTables() {
    if (!second_) return;
    for (std::size_t e = 0; e < agg_->num_nonzeros(); ++e) delete second_[e].load();
  }

  const AdjustedAggregate& aggregate() const noexcept { return *agg_; }
  const WalkConfig& config() const noexcept { return cfg_; }
  const AliasTable& first_order(NodeIndex v) const { return first_[v]; }

  // Unnormalized second-order weights over neighbors(current), given the
  // previous node.
  std::vector<double> second_order_weights(NodeIndex prev, NodeIndex current) const {
    auto cols = agg_->neighbors(current);
    auto vals = agg_->neighbor_weights(current);
    std::vector<double> w(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) {
      w[k] = transition_bias(prev, cols[k], current, *agg_, cfg_) * vals[k];
    }
    return w;
  }

  // Position within neighbors(current) of the next step. `edge` is the global
  // entry id of (prev -> current).
  std::size_t draw_next(NodeIndex prev, NodeIndex current, std::size_t edge, double u) const {
    if (!second_) return first_[current].sample(u);
    const AliasTable* table = second_[edge].load(std::memory_order_acquire);
    if (table) return table->sample(u);
    auto fresh = std::make_unique<AliasTable>(second_order_weights(prev, current));
    const std::size_t bytes = fresh->memory_bytes();
    std::size_t used = cached_bytes_.load(std::memory_order_relaxed);
    while (used + bytes <= cfg_.alias_cache_bytes) {
      if (cached_bytes_.compare_exchange_weak(used, used + bytes, std::memory_order_relaxed)) {
        const AliasTable* expected = nullptr;
        if (second_[edge].compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel)) {
          cached_tables_.fetch_add(1, std::memory_order_relaxed);
          return fresh.release()->sample(u);
        }
        cached_bytes_.fetch_sub(bytes, std::memory_order_relaxed);
        return expected->sample(u);
      }
    }
    uncached_builds_.fetch_add(1, std::memory_order_relaxed);
    return fresh->sample(u);
  }

  AliasCacheStats stats() const {
    return {cached_tables_.load(), cached_bytes_.load(), uncached_builds_.load()};
  }

 private:
  const AdjustedAggregate* agg_;
  WalkConfig cfg_;
  std::vector<AliasTable> first_;
  std::unique_ptr<std::atomic<const AliasTable*>[]> second_;
  mutable std::atomic<std::size_t> cached_bytes_{0};
  mutable std::atomic<std::size_t> cached_tables_{0};
  mutable std::atomic<std::size_t> uncached_builds_{0};
};

inline std::unique_ptr<TransitionTables> build_alias_tables(const AdjustedAggregate& agg,
                                                            const WalkConfig& cfg) {
  return std::make_unique<TransitionTables>(agg, cfg);
}

/// One truncated second-order walk of at most `length` nodes. The first move
/// is drawn proportional to A~_{start,.}; later moves use the biased weights.
/// Every move consumes exactly one uniform variate from `rng`.
inline Walk sample_walk(const TransitionTables& tables, NodeIndex start, std::size_t length, Rng& rng) {
  const auto& agg = tables.aggregate();
  if (start >= agg.num_nodes()) throw InputError("walk start out of range");
  if (agg.neighbors(start).empty()) {
    throw InputError("no outgoing mass at node '" + agg.nodes().id(start) + "'");
  }
  Walk walk;
  walk.reserve(length);
  walk.push_back(start);
  if (length < 2) return walk;

  std::size_t k = tables.first_order(start).sample(uniform01(rng));
  NodeIndex prev = start;
  NodeIndex cur = agg.neighbors(start)[k];
  std::size_t edge = agg.entry_offset(start) + k;
  walk.push_back(cur);
  while (walk.size() < length) {
    if (agg.neighbors(cur).empty()) break;
    k = tables.draw_next(prev, cur, edge, uniform01(rng));
    NodeIndex next = agg.neighbors(cur)[k];
    edge = agg.entry_offset(cur) + k;
    prev = cur;
    cur = next;
    walk.push_back(cur);
  }
  return walk;
}

inline Walk sample_walk(const AdjustedAggregate& agg, NodeIndex start, const WalkConfig& cfg, Rng& rng) {
  TransitionTables tables(agg, cfg);
  return sample_walk(tables, start, cfg.walk_length, rng);
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      constexpr std::size_t chunk = 64;
      for (;;) {
        std::size_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        std::size_t end = std::min(count, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    });
  }
}

}  // namespace detail

/// Walk schedule: max(s, a) rounds; every round visits each node of positive
/// degree once, in an order shuffled per round from the seed. The walk
/// started at node v in round j draws from the substream (seed, v, j), so the
/// corpus does not depend on the thread count.
inline NeighborhoodCorpus generate_corpus(const TransitionTables& tables) {
  const auto& agg = tables.aggregate();
  const auto& cfg = tables.config();
  std::vector<NodeIndex> starts;
  for (NodeIndex v = 0; v < agg.num_nodes(); ++v) {
    if (!agg.neighbors(v).empty()) starts.push_back(v);
  }
  if (starts.empty()) throw InputError("every node is isolated; nothing to walk");

  const std::size_t rounds = cfg.walks_per_start();
  struct Job {
    NodeIndex start;
    std::uint32_t round;
  };
  std::vector<Job> jobs;
  jobs.reserve(rounds * starts.size());
  std::vector<NodeIndex> order = starts;
  for (std::size_t j = 0; j < rounds; ++j) {
    Rng order_rng = substream(cfg.seed, ~std::uint64_t{0}, j);
    shuffle(std::span<NodeIndex>(order), order_rng);
    for (NodeIndex v : order) jobs.push_back({v, static_cast<std::uint32_t>(j)});
  }

  NeighborhoodCorpus corpus;
  corpus.num_nodes = agg.num_nodes();
  corpus.nodes = agg.node_registry();
  corpus.walks.resize(jobs.size());
  detail::parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    Rng rng = substream(cfg.seed, jobs[i].start, jobs[i].round);
    corpus.walks[i] = sample_walk(tables, jobs[i].start, cfg.walk_length, rng);
  });
  for (const auto& w : corpus.walks) corpus.total_tokens += w.size();
  return corpus;
}

inline NeighborhoodCorpus generate_corpus(const AdjustedAggregate& agg, const WalkConfig& cfg) {
  TransitionTables tables(agg, cfg);
  return generate_corpus(tables);
}

}  // namespace mn2v
