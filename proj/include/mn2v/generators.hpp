#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mn2v/error.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/rng.hpp"

namespace mn2v {

// Community index per node, in registry order.
using Partition = std::vector<std::size_t>;

struct PlantedPartitionSpec {
  std::size_t nodes = 264;
  std::size_t layers = 1;
  std::size_t communities = 2;
  double p_in = 0.49;
  double p_out = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (nodes == 0) throw InputError("planted partition needs at least one node");
    if (layers == 0) throw InputError("planted partition needs at least one layer");
    if (communities == 0 || communities > nodes) {
      throw InputError("number of communities must be in [1, n]");
    }
    if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0)) {
      throw InputError("planted partition needs 0 <= p_out <= p_in <= 1");
    }
  }

  double snr() const { return p_in / p_out - 1.0; }
};

namespace detail {

inline void register_nodes(NetworkBuilder& builder, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) builder.add_node(std::to_string(i));
}

// Independent G(n, p) layer; self-loops excluded, unit weights.
inline void add_random_layer(NetworkBuilder& builder, LayerIndex layer, std::size_t n,
                             const auto& probability, Rng& rng) {
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v = u + 1; v < n; ++v) {
      if (uniform01(rng) < probability(u, v)) builder.add_edge(layer, u, layer, v, 1.0);
    }
  }
}

}  // namespace detail

// Uniformly random assignment into c communities whose sizes differ by at
// most one; the first n mod c communities get the extra node.
inline Partition random_balanced_partition(std::size_t n, std::size_t c, Rng& rng) {
  std::vector<std::size_t> slots(n);
  for (std::size_t i = 0; i < n; ++i) slots[i] = i % c;
  shuffle(std::span<std::size_t>(slots), rng);
  return slots;
}

struct GeneratedNetwork {
  MultilayerNetwork network;
  Partition partition;
};

/// Multilayer planted partition: one shared partition, independent layers,
/// identity inter-layer coupling. Nodes are named "0" .. "n-1".
inline GeneratedNetwork gen_planted_partition(const PlantedPartitionSpec& spec) {
  spec.validate();
  Rng rng = substream(spec.seed, 0x9a27);
  Partition partition = random_balanced_partition(spec.nodes, spec.communities, rng);
  NetworkBuilder builder(spec.layers, CouplingMode::identity);
  detail::register_nodes(builder, spec.nodes);
  auto probability = [&](NodeIndex u, NodeIndex v) {
    return partition[u] == partition[v] ? spec.p_in : spec.p_out;
  };
  for (LayerIndex l = 0; l < spec.layers; ++l) {
    detail::add_random_layer(builder, l, spec.nodes, probability, rng);
  }
  return {std::move(builder).build(), std::move(partition)};
}

inline MultilayerNetwork gen_multilayer_er(std::size_t n, std::size_t m, double p_edge,
                                           std::uint64_t seed) {
  if (!(p_edge >= 0.0 && p_edge <= 1.0)) throw InputError("edge probability must be in [0, 1]");
  if (m == 0) throw InputError("need at least one layer");
  Rng rng = substream(seed, 0xe7d0);
  NetworkBuilder builder(m, CouplingMode::identity);
  detail::register_nodes(builder, n);
  auto probability = [&](NodeIndex, NodeIndex) { return p_edge; };
  for (LayerIndex l = 0; l < m; ++l) detail::add_random_layer(builder, l, n, probability, rng);
  return std::move(builder).build();
}

/// Appends `extra` independent G(n, p_edge) layers over the same registry.
/// The result uses identity coupling across all layers.
inline MultilayerNetwork add_noise_layers(const MultilayerNetwork& net, std::size_t extra,
                                          double p_edge, std::uint64_t seed) {
  if (!(p_edge >= 0.0 && p_edge <= 1.0)) throw InputError("edge probability must be in [0, 1]");
  const std::size_t m = net.num_layers();
  const std::size_t n = net.num_nodes();
  NetworkBuilder builder(m + extra, net.coupling());
  for (const auto& id : net.nodes().ids()) builder.add_node(id);
  for (LayerIndex l = 0; l < m; ++l) {
    for (const auto& e : net.layer_edges(l)) builder.add_edge(l, e.u, l, e.v, e.weight);
  }
  for (const auto& e : net.inter_edges()) builder.add_edge(e.layer_u, e.u, e.layer_v, e.v, e.weight);
  if (extra > 0 && net.coupling() == CouplingMode::explicit_edges) {
    // Extend explicit coupling with identity edges to every new layer.
    for (LayerIndex l = 0; l < m + extra; ++l)
      for (LayerIndex l2 = std::max<LayerIndex>(l + 1, static_cast<LayerIndex>(m)); l2 < m + extra; ++l2)
        for (NodeIndex u = 0; u < n; ++u) builder.add_edge(l, u, l2, u, 1.0);
  }
  Rng rng = substream(seed, 0x0015e);
  auto probability = [&](NodeIndex, NodeIndex) { return p_edge; };
  for (std::size_t b = 0; b < extra; ++b) {
    detail::add_random_layer(builder, static_cast<LayerIndex>(m + b), n, probability, rng);
  }
  return std::move(builder).build();
}

// Mean intra-layer edge density over layers (self-loops excluded).
inline double mean_layer_density(const MultilayerNetwork& net) {
  const double n = static_cast<double>(net.num_nodes());
  if (n < 2) return 0.0;
  const double pairs = n * (n - 1) / 2.0;
  std::size_t edges = 0;
  for (const auto& e : net.intra_edges())
    if (e.u != e.v) ++edges;
  return static_cast<double>(edges) / (pairs * static_cast<double>(net.num_layers()));
}

// Expected per-layer density of a planted partition with the given sizes.
inline double expected_density(const PlantedPartitionSpec& spec) {
  const double n = static_cast<double>(spec.nodes);
  double within = 0.0;
  for (std::size_t c = 0; c < spec.communities; ++c) {
    double size = static_cast<double>(spec.nodes / spec.communities + (c < spec.nodes % spec.communities));
    within += size * (size - 1) / 2.0;
  }
  const double all = n * (n - 1) / 2.0;
  return (within * spec.p_in + (all - within) * spec.p_out) / all;
}

}  // namespace mn2v
