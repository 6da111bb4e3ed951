#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mn2v/error.hpp"
#include "mn2v/evaluation.hpp"
#include "mn2v/generators.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/skipgram.hpp"
#include "mn2v/walk.hpp"

namespace mn2v {

struct EmbedOptions {
  WalkConfig walk;
  SkipGramConfig skipgram;
  double dense_threshold = 0.25;

  void set_seed(std::uint64_t seed) {
    walk.seed = seed;
    skipgram.seed = seed;
  }
  void set_threads(std::size_t n) {
    walk.threads = n;
    skipgram.threads = n;
  }
};

struct PhaseSeconds {
  double build = 0.0;
  double aggregate = 0.0;
  double walk = 0.0;
  double train = 0.0;
  double total() const { return build + aggregate + walk + train; }
};

struct EmbedRun {
  EmbeddingModel model;
  NeighborhoodCorpus corpus;  // emptied unless requested
  std::size_t num_walks = 0;
  std::size_t total_tokens = 0;
  AliasCacheStats cache;
  PhaseSeconds seconds;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// aggregate -> walks -> SGNS. Isolated nodes keep their initial features.
inline EmbedRun run_embedding(const MultilayerNetwork& net, const EmbedOptions& opt, bool keep_corpus = false) {
  opt.walk.validate();
  opt.skipgram.validate();
  EmbedRun run;
  auto t0 = std::chrono::steady_clock::now();
  AdjustedAggregate agg = adjusted_aggregate(net, opt.walk.layer_r, opt.dense_threshold);
  run.seconds.aggregate = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  TransitionTables tables(agg, opt.walk);
  NeighborhoodCorpus corpus = generate_corpus(tables);
  run.cache = tables.stats();
  run.seconds.walk = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  run.model = train(corpus, opt.skipgram);
  run.seconds.train = detail::seconds_since(t0);

  run.num_walks = corpus.walks.size();
  run.total_tokens = corpus.total_tokens;
  if (keep_corpus) run.corpus = std::move(corpus);
  return run;
}

// Intra-layer edges followed by explicit inter-layer edges, as records.
inline std::vector<EdgeRecord> edge_records(const MultilayerNetwork& net) {
  std::vector<EdgeRecord> out;
  const auto& nodes = net.nodes();
  for (LayerIndex l = 0; l < net.num_layers(); ++l)
    for (const auto& e : net.layer_edges(l)) out.push_back({l, nodes.id(e.u), l, nodes.id(e.v), e.weight});
  for (const auto& e : net.inter_edges()) out.push_back({e.layer_u, nodes.id(e.u), e.layer_v, nodes.id(e.v), e.weight});
  return out;
}

// build -> aggregate -> walks -> SGNS, with the build phase timed as well.
inline EmbedRun run_embedding(std::span<const EdgeRecord> records, std::size_t layers, CouplingMode coupling,
                              const EmbedOptions& opt, bool keep_corpus = false) {
  const auto t0 = std::chrono::steady_clock::now();
  MultilayerNetwork net = build_network(records, layers, coupling);
  const double build = detail::seconds_since(t0);
  EmbedRun run = run_embedding(net, opt, keep_corpus);
  run.seconds.build = build;
  return run;
}

// ARI between the planted partition and k-means (k = #communities) on F.
inline double recovery_ari(const GeneratedNetwork& g, const EmbedOptions& opt, std::uint64_t kmeans_seed) {
  auto run = run_embedding(g.network, opt);
  std::size_t c = 0;
  for (auto x : g.partition) c = std::max(c, x + 1);
  auto km = kmeans(run.model.input, c, kmeans_seed);
  return adjusted_rand(km.labels, g.partition);
}

// Mean over categories of the one-vs-all held-out AUC.
inline double mean_one_vs_all_auc(const DenseMatrix& f, const LabelSet& labels, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t c = 0; c < labels.categories.size(); ++c) {
    total += one_vs_all_auc(f, labels, static_cast<int>(c), 0.8, substream_seed(seed, c));
  }
  return total / static_cast<double>(labels.categories.size());
}

// ------------------------------------------------------------------ sweeps

enum class Experiment { snr, layers, context, scale };

inline constexpr std::string_view kExperimentNames = "snr, layers, context, scale";

inline Experiment parse_experiment(std::string_view name) {
  if (name == "snr") return Experiment::snr;
  if (name == "layers") return Experiment::layers;
  if (name == "context") return Experiment::context;
  if (name == "scale") return Experiment::scale;
  throw InputError("unknown experiment '" + std::string(name) + "' (expected one of: " +
                   std::string(kExperimentNames) + ")");
}

struct SweepOptions {
  Experiment experiment = Experiment::snr;
  std::size_t reps = 30;
  std::uint64_t seed = 0;
  EmbedOptions embed;
  std::size_t nodes = 264;
  double p_in = 0.49;
  // Overrides of the default grids; empty keeps the declared grid.
  std::vector<std::size_t> communities;  // snr series
  std::vector<double> p_out;             // layers series
  std::vector<std::size_t> layers;       // snr: single value; layers/context series; scale grid
  std::vector<std::size_t> contexts;     // context grid
  std::vector<double> p_out_fraction;    // snr grid
};

struct SweepCell {
  std::string series;     // e.g. "c=2"
  std::string parameter;  // name of the swept quantity
  double value = 0.0;
  std::string metric;
  std::vector<double> samples;

  double mean() const {
    double s = 0.0;
    for (double x : samples) s += x;
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
  }
  double sd() const {
    if (samples.size() < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double x : samples) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(samples.size() - 1));
  }
};

struct SweepGrid {
  std::vector<std::size_t> communities;
  std::vector<double> p_out;
  std::vector<std::size_t> layers;
  std::vector<std::size_t> contexts;
  std::vector<double> p_out_fraction;
};

// Declared grids, with any explicit overrides from the options applied.
inline SweepGrid sweep_grid(const SweepOptions& o) {
  SweepGrid g;
  auto pick = [](const auto& override_values, auto defaults) {
    return override_values.empty() ? defaults : override_values;
  };
  switch (o.experiment) {
    case Experiment::snr:
      g.communities = pick(o.communities, std::vector<std::size_t>{2, 4, 6, 8, 10, 12, 14});
      g.layers = pick(o.layers, std::vector<std::size_t>{74});
      g.p_out_fraction = pick(o.p_out_fraction, std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
      break;
    case Experiment::layers: {
      std::vector<std::size_t> m;
      for (std::size_t x = 5; x <= 65; x += 5) m.push_back(x);
      m.push_back(74);
      g.layers = pick(o.layers, m);
      g.p_out = pick(o.p_out, std::vector<double>{0.245, 0.196, 0.147});
      g.communities = pick(o.communities, std::vector<std::size_t>{12});
      break;
    }
    case Experiment::context: {
      std::vector<std::size_t> k;
      for (std::size_t x = 8; x <= 20; ++x) k.push_back(x);
      g.contexts = pick(o.contexts, k);
      g.layers = pick(o.layers, std::vector<std::size_t>{5, 15, 25, 50, 74});
      g.p_out = pick(o.p_out, std::vector<double>{0.245});
      g.communities = pick(o.communities, std::vector<std::size_t>{12});
      break;
    }
    case Experiment::scale:
      g.layers = pick(o.layers, std::vector<std::size_t>{10, 100, 1000, 10000, 100000, 1000000});
      g.communities = pick(o.communities, std::vector<std::size_t>{2});
      g.p_out = pick(o.p_out, std::vector<double>{0.245});
      break;
  }
  return g;
}

using SweepProgress = std::function<void(const SweepCell&)>;

/// Runs every cell of the experiment grid `reps` times. Replicate j of cell i
/// uses seed substream_seed(seed, i, j) for both generation and embedding.
/// Cluster experiments report ARI; the scale experiment reports seconds of
/// network build, aggregate construction, walks and training (n = 10, k = D = 5).
inline std::vector<SweepCell> run_sweep(const SweepOptions& o, const SweepProgress& progress = {}) {
  if (o.reps == 0) throw InputError("reps must be at least 1");
  const SweepGrid g = sweep_grid(o);
  std::vector<SweepCell> cells;
  std::size_t cell_index = 0;

  auto run_cell = [&](SweepCell cell, auto&& sample) {
    for (std::size_t j = 0; j < o.reps; ++j) cell.samples.push_back(sample(substream_seed(o.seed, cell_index, j)));
    ++cell_index;
    if (progress) progress(cell);
    cells.push_back(std::move(cell));
  };
  auto ari_sample = [&](PlantedPartitionSpec spec, EmbedOptions opt) {
    return [spec, opt](std::uint64_t s) mutable {
      spec.seed = s;
      opt.set_seed(s);
      return recovery_ari(gen_planted_partition(spec), opt, s);
    };
  };
  auto fmt = [](double x) {
    std::string s = std::to_string(x);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };

  switch (o.experiment) {
    case Experiment::snr:
      for (std::size_t m : g.layers)
        for (std::size_t c : g.communities)
          for (double frac : g.p_out_fraction) {
            PlantedPartitionSpec spec{o.nodes, m, c, o.p_in, frac * o.p_in, 0};
            run_cell({"c=" + std::to_string(c) + ";m=" + std::to_string(m), "snr", spec.snr(), "ari", {}},
                     ari_sample(spec, o.embed));
          }
      break;
    case Experiment::layers:
      for (std::size_t c : g.communities)
        for (double p_out : g.p_out)
          for (std::size_t m : g.layers) {
            PlantedPartitionSpec spec{o.nodes, m, c, o.p_in, p_out, 0};
            run_cell({"p_out=" + fmt(p_out) + ";c=" + std::to_string(c), "layers", static_cast<double>(m), "ari", {}},
                     ari_sample(spec, o.embed));
          }
      break;
    case Experiment::context:
      for (std::size_t c : g.communities)
        for (double p_out : g.p_out)
          for (std::size_t m : g.layers)
            for (std::size_t k : g.contexts) {
              PlantedPartitionSpec spec{o.nodes, m, c, o.p_in, p_out, 0};
              EmbedOptions opt = o.embed;
              opt.skipgram.context = k;
              run_cell({"m=" + std::to_string(m) + ";p_out=" + fmt(p_out) + ";c=" + std::to_string(c), "context",
                        static_cast<double>(k), "ari", {}},
                       ari_sample(spec, opt));
            }
      break;
    case Experiment::scale:
      for (std::size_t m : g.layers) {
        PlantedPartitionSpec spec{10, m, g.communities.front(), o.p_in, g.p_out.front(), 0};
        EmbedOptions opt = o.embed;
        opt.skipgram.context = 5;
        opt.skipgram.dim = 5;
        run_cell({"n=10", "layers", static_cast<double>(m), "seconds", {}}, [spec, opt](std::uint64_t s) mutable {
          spec.seed = s;
          opt.set_seed(s);
          auto g = gen_planted_partition(spec);
          const auto records = edge_records(g.network);
          return run_embedding(records, spec.layers, CouplingMode::identity, opt).seconds.total();
        });
      }
      break;
  }
  return cells;
}

}  // namespace mn2v
