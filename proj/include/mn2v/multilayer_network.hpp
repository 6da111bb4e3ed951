#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mn2v/dense_matrix.hpp"
#include "mn2v/error.hpp"

namespace mn2v {

using NodeIndex = std::uint32_t;
using LayerIndex = std::uint32_t;

// Ordered registry of unique node identifiers. Index order is insertion order.
class NodeRegistry {
 public:
  NodeIndex intern(std::string_view id) {
    std::string key(id);
    auto [it, inserted] = index_.try_emplace(key, static_cast<NodeIndex>(ids_.size()));
    if (inserted) ids_.push_back(std::move(key));
    return it->second;
  }

  std::optional<NodeIndex> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeIndex at(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw InputError("unknown node '" + std::string(id) + "'");
  }

  const std::string& id(NodeIndex i) const { return ids_.at(i); }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const std::string> ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> index_;
};

enum class CouplingMode {
  explicit_edges,
  // w_{l,l'}(u,v) = 1 iff u == v, for every pair of distinct layers.
  identity,
};

// One line of the multilayer edge list.
struct EdgeRecord {
  LayerIndex layer_u = 0;
  std::string node_u;
  LayerIndex layer_v = 0;
  std::string node_v;
  double weight = 0.0;
};

// Undirected intra-layer edge, stored with u <= v.
struct IntraEdge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double weight = 0.0;
};

// Undirected inter-layer edge, stored with (layer_u, u) < (layer_v, v).
struct InterEdge {
  LayerIndex layer_u = 0;
  NodeIndex u = 0;
  LayerIndex layer_v = 0;
  NodeIndex v = 0;
  double weight = 0.0;
};

class MultilayerNetwork {
 public:
  std::size_t num_layers() const noexcept { return num_layers_; }
  std::size_t num_nodes() const noexcept { return nodes_->size(); }
  const NodeRegistry& nodes() const noexcept { return *nodes_; }
  std::shared_ptr<const NodeRegistry> node_registry() const noexcept { return nodes_; }
  CouplingMode coupling() const noexcept { return coupling_; }

  std::span<const IntraEdge> layer_edges(LayerIndex layer) const {
    return std::span<const IntraEdge>(intra_).subspan(
        layer_offsets_.at(layer), layer_offsets_.at(layer + 1) - layer_offsets_[layer]);
  }
  std::span<const IntraEdge> intra_edges() const noexcept { return intra_; }
  std::span<const InterEdge> inter_edges() const noexcept { return inter_; }

  std::size_t num_intra_edges() const noexcept { return intra_.size(); }
  // Records that overwrote an earlier record for the same edge.
  std::size_t duplicate_records() const noexcept { return duplicates_; }

  double intra_weight(LayerIndex layer, NodeIndex u, NodeIndex v) const {
    if (u > v) std::swap(u, v);
    auto edges = layer_edges(layer);
    auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{u, v},
                               [](const IntraEdge& e, const std::pair<NodeIndex, NodeIndex>& k) {
                                 return std::pair{e.u, e.v} < k;
                               });
    if (it != edges.end() && it->u == u && it->v == v) return it->weight;
    return 0.0;
  }

  // w_{l,l'}(u,v) for l != l'.
  double inter_weight(LayerIndex layer_u, NodeIndex u, LayerIndex layer_v, NodeIndex v) const {
    if (layer_u == layer_v) return 0.0;
    if (coupling_ == CouplingMode::identity) return u == v ? 1.0 : 0.0;
    if (std::pair{layer_v, v} < std::pair{layer_u, u}) {
      std::swap(layer_u, layer_v);
      std::swap(u, v);
    }
    auto key = std::tuple{layer_u, u, layer_v, v};
    auto it = std::lower_bound(inter_.begin(), inter_.end(), key,
                               [](const InterEdge& e, const decltype(key)& k) {
                                 return std::tuple{e.layer_u, e.u, e.layer_v, e.v} < k;
                               });
    if (it != inter_.end() && it->layer_u == layer_u && it->u == u && it->layer_v == layer_v &&
        it->v == v)
      return it->weight;
    return 0.0;
  }

 private:
  friend class NetworkBuilder;

  std::size_t num_layers_ = 1;
  std::shared_ptr<NodeRegistry> nodes_ = std::make_shared<NodeRegistry>();
  CouplingMode coupling_ = CouplingMode::explicit_edges;
  std::vector<IntraEdge> intra_;                // sorted by (layer, u, v)
  std::vector<std::size_t> layer_offsets_{0, 0};  // num_layers + 1 entries
  std::vector<InterEdge> inter_;                // sorted lexicographically
  std::size_t duplicates_ = 0;
};

// Accumulates edges, then freezes them into an immutable MultilayerNetwork.
// Later records for the same undirected edge replace earlier ones.
class NetworkBuilder {
 public:
  NetworkBuilder(std::size_t num_layers, CouplingMode coupling)
      : num_layers_(num_layers), coupling_(coupling) {
    if (num_layers == 0) throw InputError("a multilayer network needs at least one layer");
  }

  NodeIndex add_node(std::string_view id) { return nodes_->intern(id); }
  const NodeRegistry& nodes() const noexcept { return *nodes_; }
  std::size_t num_layers() const noexcept { return num_layers_; }

  void add_edge(LayerIndex layer_u, NodeIndex u, LayerIndex layer_v, NodeIndex v, double weight) {
    if (layer_u >= num_layers_ || layer_v >= num_layers_) {
      throw InputError("layer index " + std::to_string(std::max(layer_u, layer_v)) +
                       " out of range for " + std::to_string(num_layers_) + " layers");
    }
    if (u >= nodes_->size() || v >= nodes_->size()) throw InputError("edge references unregistered node");
    if (!std::isfinite(weight)) throw InputError("non-finite weight");
    if (weight < 0.0) throw InputError("negative weight " + std::to_string(weight));
    if (layer_u == layer_v) {
      if (u > v) std::swap(u, v);
      pending_intra_.push_back({layer_u, u, v, weight, sequence_++});
    } else {
      if (coupling_ == CouplingMode::identity) {
        throw InputError("explicit inter-layer edge given for an identity-coupled network");
      }
      if (std::pair{layer_v, v} < std::pair{layer_u, u}) {
        std::swap(layer_u, layer_v);
        std::swap(u, v);
      }
      pending_inter_.push_back({InterEdge{layer_u, u, layer_v, v, weight}, sequence_++});
    }
  }

  void add_edge(const EdgeRecord& r) {
    if (r.layer_u >= num_layers_ || r.layer_v >= num_layers_) {
      throw InputError("layer index " + std::to_string(std::max(r.layer_u, r.layer_v)) +
                       " out of range for " + std::to_string(num_layers_) + " layers");
    }
    if (!std::isfinite(r.weight)) throw InputError("non-finite weight");
    if (r.weight < 0.0) throw InputError("negative weight " + std::to_string(r.weight));
    NodeIndex u = add_node(r.node_u);
    NodeIndex v = add_node(r.node_v);
    add_edge(r.layer_u, u, r.layer_v, v, r.weight);
  }

  MultilayerNetwork build() && {
    MultilayerNetwork net;
    net.num_layers_ = num_layers_;
    net.nodes_ = std::move(nodes_);
    net.coupling_ = coupling_;

    std::stable_sort(pending_intra_.begin(), pending_intra_.end(),
                     [](const PendingIntra& a, const PendingIntra& b) {
                       return std::tie(a.layer, a.u, a.v, a.seq) < std::tie(b.layer, b.u, b.v, b.seq);
                     });
    net.intra_.reserve(pending_intra_.size());
    net.layer_offsets_.assign(num_layers_ + 1, 0);
    for (std::size_t i = 0; i < pending_intra_.size(); ++i) {
      const auto& e = pending_intra_[i];
      bool last = i + 1 == pending_intra_.size() || pending_intra_[i + 1].layer != e.layer ||
                  pending_intra_[i + 1].u != e.u || pending_intra_[i + 1].v != e.v;
      if (!last) {
        ++net.duplicates_;
        continue;
      }
      net.intra_.push_back({e.u, e.v, e.weight});
      ++net.layer_offsets_[e.layer + 1];
    }
    for (std::size_t l = 0; l < num_layers_; ++l) net.layer_offsets_[l + 1] += net.layer_offsets_[l];

    auto key = [](const InterEdge& e) { return std::tuple{e.layer_u, e.u, e.layer_v, e.v}; };
    std::stable_sort(pending_inter_.begin(), pending_inter_.end(),
                     [&](const PendingInter& a, const PendingInter& b) {
                       return std::pair{key(a.edge), a.seq} < std::pair{key(b.edge), b.seq};
                     });
    for (std::size_t i = 0; i < pending_inter_.size(); ++i) {
      bool last = i + 1 == pending_inter_.size() ||
                  key(pending_inter_[i + 1].edge) != key(pending_inter_[i].edge);
      if (!last) {
        ++net.duplicates_;
        continue;
      }
      net.inter_.push_back(pending_inter_[i].edge);
    }
    pending_intra_.clear();
    pending_inter_.clear();
    return net;
  }

 private:
  struct PendingIntra {
    LayerIndex layer;
    NodeIndex u, v;
    double weight;
    std::size_t seq;
  };
  struct PendingInter {
    InterEdge edge;
    std::size_t seq;
  };

  std::size_t num_layers_;
  CouplingMode coupling_;
  std::shared_ptr<NodeRegistry> nodes_ = std::make_shared<NodeRegistry>();
  std::vector<PendingIntra> pending_intra_;
  std::vector<PendingInter> pending_inter_;
  std::size_t sequence_ = 0;
};

inline MultilayerNetwork build_network(std::span<const EdgeRecord> records, std::size_t num_layers,
                                       CouplingMode coupling) {
  NetworkBuilder builder(num_layers, coupling);
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      builder.add_edge(records[i]);
    } catch (const InputError& e) {
      throw InputError("record " + std::to_string(i) + ": " + e.what());
    }
  }
  return std::move(builder).build();
}

/// Adjusted aggregate adjacency
///
///   A~_{u,v}(r) = r^-1 * sum_{l != l'} w_{l,l'}(u,v) + sum_l w_{l,l}(u,v)
///
/// over ordered layer pairs, stored as a symmetric CSR matrix with sorted
/// columns. Rows whose density exceeds the dense threshold are also mirrored
/// into a dense matrix so adjacency tests are O(1).
class AdjustedAggregate {
 public:
  static constexpr double kDefaultDenseThreshold = 0.25;

  double layer_walk_r() const noexcept { return r_; }
  std::size_t num_nodes() const noexcept { return degrees_.size(); }
  std::size_t num_nonzeros() const noexcept { return columns_.size(); }
  const NodeRegistry& nodes() const noexcept { return *nodes_; }
  std::shared_ptr<const NodeRegistry> node_registry() const noexcept { return nodes_; }
  bool has_dense_mirror() const noexcept { return !dense_.empty(); }

  std::span<const NodeIndex> neighbors(NodeIndex u) const {
    return std::span<const NodeIndex>(columns_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
  }
  std::span<const double> neighbor_weights(NodeIndex u) const {
    return std::span<const double>(values_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
  }
  // Global id of the stored entry (u, neighbors(u)[k]).
  std::size_t entry_offset(NodeIndex u) const noexcept { return offsets_[u]; }

  double weight(NodeIndex u, NodeIndex v) const {
    if (!dense_.empty()) return dense_(u, v);
    auto cols = neighbors(u);
    auto it = std::lower_bound(cols.begin(), cols.end(), v);
    if (it == cols.end() || *it != v) return 0.0;
    return values_[offsets_[u] + static_cast<std::size_t>(it - cols.begin())];
  }
  bool adjacent(NodeIndex u, NodeIndex v) const { return weight(u, v) > 0.0; }

  double degree(NodeIndex u) const { return degrees_.at(u); }
  double degree(std::string_view id) const { return degrees_[nodes_->at(id)]; }
  std::span<const double> degrees() const noexcept { return degrees_; }
  double volume() const noexcept { return volume_; }

  DenseMatrix to_dense() const {
    DenseMatrix m(num_nodes(), num_nodes());
    for (NodeIndex u = 0; u < num_nodes(); ++u) {
      auto cols = neighbors(u);
      auto vals = neighbor_weights(u);
      for (std::size_t k = 0; k < cols.size(); ++k) m(u, cols[k]) = vals[k];
    }
    return m;
  }

  // Builds from the upper triangle (u <= v) entries; mirrors to the lower one.
  static AdjustedAggregate from_upper_triangle(
      std::shared_ptr<const NodeRegistry> nodes, double r,
      std::vector<std::tuple<NodeIndex, NodeIndex, double>> upper,
      double dense_threshold = kDefaultDenseThreshold) {
    const std::size_t n = nodes->size();
    AdjustedAggregate agg;
    agg.r_ = r;
    agg.nodes_ = std::move(nodes);
    std::vector<std::tuple<NodeIndex, NodeIndex, double>> entries;
    entries.reserve(upper.size() * 2);
    for (const auto& [u, v, w] : upper) {
      if (w <= 0.0) continue;
      entries.emplace_back(u, v, w);
      if (u != v) entries.emplace_back(v, u, w);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return std::pair{std::get<0>(a), std::get<1>(a)} < std::pair{std::get<0>(b), std::get<1>(b)};
    });
    agg.offsets_.assign(n + 1, 0);
    agg.columns_.reserve(entries.size());
    agg.values_.reserve(entries.size());
    for (const auto& [u, v, w] : entries) {
      ++agg.offsets_[u + 1];
      agg.columns_.push_back(v);
      agg.values_.push_back(w);
    }
    for (std::size_t u = 0; u < n; ++u) agg.offsets_[u + 1] += agg.offsets_[u];
    agg.degrees_.assign(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      double d = 0.0;
      for (std::size_t k = agg.offsets_[u]; k < agg.offsets_[u + 1]; ++k) d += agg.values_[k];
      agg.degrees_[u] = d;
    }
    agg.volume_ = 0.0;
    for (double d : agg.degrees_) agg.volume_ += d;
    if (n > 0 && static_cast<double>(entries.size()) >
                     dense_threshold * static_cast<double>(n) * static_cast<double>(n)) {
      agg.dense_ = agg.to_dense();
    }
    return agg;
  }

 private:
  double r_ = 1.0;
  std::shared_ptr<const NodeRegistry> nodes_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeIndex> columns_;
  std::vector<double> values_;
  std::vector<double> degrees_;
  double volume_ = 0.0;
  DenseMatrix dense_;
};

namespace detail {

inline std::uint64_t pair_key(NodeIndex u, NodeIndex v) {
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Per unordered pair (u <= v): intra sum over layers ascending, and inter sum
// over ordered layer pairs (l, l') ascending, where l is the layer of u.
struct PairSums {
  std::unordered_map<std::uint64_t, double> intra;
  std::unordered_map<std::uint64_t, double> inter;
};

inline PairSums pair_sums(const MultilayerNetwork& net) {
  PairSums sums;
  sums.intra.reserve(net.num_intra_edges());
  for (LayerIndex l = 0; l < net.num_layers(); ++l) {
    for (const auto& e : net.layer_edges(l)) sums.intra[pair_key(e.u, e.v)] += e.weight;
  }
  const std::size_t m = net.num_layers();
  if (net.coupling() == CouplingMode::identity) {
    if (m > 1) {
      const double mass = static_cast<double>(m) * static_cast<double>(m - 1);
      for (NodeIndex u = 0; u < net.num_nodes(); ++u) sums.inter[pair_key(u, u)] = mass;
    }
  } else {
    struct Term {
      NodeIndex u, v;
      LayerIndex lu, lv;
      double w;
    };
    std::vector<Term> terms;
    terms.reserve(net.inter_edges().size() * 2);
    for (const auto& e : net.inter_edges()) {
      if (e.u == e.v) {
        terms.push_back({e.u, e.u, e.layer_u, e.layer_v, e.weight});
        terms.push_back({e.u, e.u, e.layer_v, e.layer_u, e.weight});
      } else if (e.u < e.v) {
        terms.push_back({e.u, e.v, e.layer_u, e.layer_v, e.weight});
      } else {
        terms.push_back({e.v, e.u, e.layer_v, e.layer_u, e.weight});
      }
    }
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
      return std::tie(a.u, a.v, a.lu, a.lv) < std::tie(b.u, b.v, b.lu, b.lv);
    });
    for (const auto& t : terms) sums.inter[pair_key(t.u, t.v)] += t.w;
  }
  return sums;
}

inline std::vector<std::tuple<NodeIndex, NodeIndex, double>> combine(const PairSums& sums,
                                                                     double inter_scale_divisor) {
  std::vector<std::tuple<NodeIndex, NodeIndex, double>> upper;
  upper.reserve(sums.intra.size() + sums.inter.size());
  auto split = [](std::uint64_t k) {
    return std::pair{static_cast<NodeIndex>(k >> 32), static_cast<NodeIndex>(k & 0xffffffffu)};
  };
  for (const auto& [key, intra] : sums.intra) {
    auto it = sums.inter.find(key);
    double inter = it == sums.inter.end() ? 0.0 : it->second;
    auto [u, v] = split(key);
    upper.emplace_back(u, v, inter / inter_scale_divisor + intra);
  }
  for (const auto& [key, inter] : sums.inter) {
    if (sums.intra.contains(key)) continue;
    auto [u, v] = split(key);
    upper.emplace_back(u, v, inter / inter_scale_divisor + 0.0);
  }
  return upper;
}

}  // namespace detail

inline AdjustedAggregate adjusted_aggregate(
    const MultilayerNetwork& net, double r,
    double dense_threshold = AdjustedAggregate::kDefaultDenseThreshold) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InputError("layer walk parameter r must be positive and finite");
  }
  return AdjustedAggregate::from_upper_triangle(
      net.node_registry(), r, detail::combine(detail::pair_sums(net), r), dense_threshold);
}

// The unadjusted aggregate: every w_{l,l'}(u,v) summed with unit weight.
inline AdjustedAggregate plain_aggregate(
    const MultilayerNetwork& net, double dense_threshold = AdjustedAggregate::kDefaultDenseThreshold) {
  auto agg = AdjustedAggregate::from_upper_triangle(
      net.node_registry(), 1.0, detail::combine(detail::pair_sums(net), 1.0), dense_threshold);
  return agg;
}

inline double degree(const AdjustedAggregate& agg, std::string_view node) { return agg.degree(node); }
inline double volume(const AdjustedAggregate& agg) { return agg.volume(); }

}  // namespace mn2v
