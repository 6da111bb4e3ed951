#pragma once

// Closed-form limits of the skip-gram co-occurrence ratio
//   #(w,c) |D| / (#(w) #(c))
// for the second-order walk, plus the empirical counterpart. These are
// verification oracles and only scale to small graphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "mn2v/dense_matrix.hpp"
#include "mn2v/error.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/walk.hpp"

namespace mn2v {

inline constexpr std::size_t kKernelMaxNodes = 200;

namespace detail {

// Connected components over nodes with positive degree. Isolated nodes get -1.
inline std::vector<int> components(const AdjustedAggregate& agg, int& count) {
  const std::size_t n = agg.num_nodes();
  std::vector<int> comp(n, -1);
  count = 0;
  for (NodeIndex s = 0; s < n; ++s) {
    if (comp[s] != -1 || agg.neighbors(s).empty()) continue;
    std::queue<NodeIndex> frontier;
    frontier.push(s);
    comp[s] = count;
    while (!frontier.empty()) {
      NodeIndex v = frontier.front();
      frontier.pop();
      for (NodeIndex x : agg.neighbors(v)) {
        if (comp[x] == -1) {
          comp[x] = count;
          frontier.push(x);
        }
      }
    }
    ++count;
  }
  return comp;
}

inline void require_connected(const AdjustedAggregate& agg) {
  int count = 0;
  auto comp = components(agg, count);
  if (count == 0) throw InputError("aggregate has no edges");
  if (count > 1) {
    std::string msg = "aggregate support is disconnected into " + std::to_string(count) + " components:";
    for (int c = 0; c < count; ++c) {
      msg += " {";
      bool first = true;
      for (NodeIndex v = 0; v < agg.num_nodes(); ++v) {
        if (comp[v] != c) continue;
        msg += (first ? "" : ",") + agg.nodes().id(v);
        first = false;
      }
      msg += "}";
    }
    throw InputError(msg);
  }
}

inline bool is_bipartite(const AdjustedAggregate& agg) {
  const std::size_t n = agg.num_nodes();
  std::vector<int> color(n, -1);
  for (NodeIndex s = 0; s < n; ++s) {
    if (color[s] != -1) continue;
    color[s] = 0;
    std::queue<NodeIndex> frontier;
    frontier.push(s);
    while (!frontier.empty()) {
      NodeIndex v = frontier.front();
      frontier.pop();
      for (NodeIndex x : agg.neighbors(v)) {
        if (color[x] == -1) {
          color[x] = 1 - color[v];
          frontier.push(x);
        } else if (color[x] == color[v]) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace detail

/// Second-order transition law P(next = u | current = v, previous = w).
/// States are the directed support edges (w -> v) of the aggregate, indexed by
/// the aggregate's entry ids; each state's row is aligned with neighbors(v).
class SecondOrderKernel {
 public:
  SecondOrderKernel(const AdjustedAggregate& agg, double p, double q) : agg_(&agg) {
    if (agg.num_nodes() > kKernelMaxNodes) {
      throw ResourceError("second-order kernel limited to N <= 200 nodes (got " +
                          std::to_string(agg.num_nodes()) + ")");
    }
    detail::require_connected(agg);
    WalkConfig cfg;
    cfg.return_p = p;
    cfg.inout_q = q;
    cfg.validate();
    const std::size_t states = agg.num_nonzeros();
    prev_.resize(states);
    cur_.resize(states);
    row_offset_.assign(states + 1, 0);
    for (NodeIndex w = 0; w < agg.num_nodes(); ++w) {
      auto cols = agg.neighbors(w);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::size_t s = agg.entry_offset(w) + k;
        prev_[s] = w;
        cur_[s] = cols[k];
        row_offset_[s + 1] = agg.neighbors(cols[k]).size();
      }
    }
    for (std::size_t s = 0; s < states; ++s) row_offset_[s + 1] += row_offset_[s];
    probs_.resize(row_offset_.back());
    for (std::size_t s = 0; s < states; ++s) {
      const NodeIndex w = prev_[s], v = cur_[s];
      auto cols = agg.neighbors(v);
      auto vals = agg.neighbor_weights(v);
      double z = 0.0;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const double pi = transition_bias(w, cols[k], v, agg, cfg) * vals[k];
        probs_[row_offset_[s] + k] = pi;
        z += pi;
      }
      for (std::size_t k = 0; k < cols.size(); ++k) probs_[row_offset_[s] + k] /= z;
    }
  }

  const AdjustedAggregate& aggregate() const noexcept { return *agg_; }
  std::size_t num_states() const noexcept { return prev_.size(); }
  NodeIndex previous(std::size_t state) const { return prev_[state]; }
  NodeIndex current(std::size_t state) const { return cur_[state]; }

  // Row of the state, aligned with aggregate().neighbors(current(state)).
  std::span<const double> row(std::size_t state) const {
    return std::span<const double>(probs_).subspan(row_offset_[state],
                                                   row_offset_[state + 1] - row_offset_[state]);
  }

  // Entry id of the state (v -> neighbors(v)[k]).
  std::size_t successor(std::size_t state, std::size_t k) const {
    return agg_->entry_offset(cur_[state]) + k;
  }

  std::optional<std::size_t> state_of(NodeIndex current, NodeIndex previous) const {
    auto cols = agg_->neighbors(previous);
    auto it = std::lower_bound(cols.begin(), cols.end(), current);
    if (it == cols.end() || *it != current) return std::nullopt;
    return agg_->entry_offset(previous) + static_cast<std::size_t>(it - cols.begin());
  }

  // P_{u, v, w}; zero outside the support.
  double probability(NodeIndex u, NodeIndex v, NodeIndex w) const {
    auto s = state_of(v, w);
    if (!s) return 0.0;
    auto cols = agg_->neighbors(v);
    auto it = std::lower_bound(cols.begin(), cols.end(), u);
    if (it == cols.end() || *it != u) return 0.0;
    return row(*s)[static_cast<std::size_t>(it - cols.begin())];
  }

  // One step of the chain on a distribution over states.
  std::vector<double> propagate(std::span<const double> x) const {
    std::vector<double> out(num_states(), 0.0);
    for (std::size_t s = 0; s < num_states(); ++s) {
      if (x[s] == 0.0) continue;
      auto r = row(s);
      const std::size_t base = agg_->entry_offset(cur_[s]);
      for (std::size_t k = 0; k < r.size(); ++k) out[base + k] += x[s] * r[k];
    }
    return out;
  }

 private:
  const AdjustedAggregate* agg_;
  std::vector<NodeIndex> prev_;
  std::vector<NodeIndex> cur_;
  std::vector<std::size_t> row_offset_;
  std::vector<double> probs_;
};

inline SecondOrderKernel second_order_kernel(const AdjustedAggregate& agg, double p, double q) {
  return SecondOrderKernel(agg, p, q);
}

/// Stationary law X over (current v, previous w) states.
struct EdgeStationary {
  std::vector<double> mass;  // indexed by kernel state
  std::size_t iterations = 0;
  double residual = 0.0;

  // sum_w X_{v,w}: stationary probability of being at v.
  std::vector<double> node_marginal(const SecondOrderKernel& kernel) const {
    std::vector<double> m(kernel.aggregate().num_nodes(), 0.0);
    for (std::size_t s = 0; s < mass.size(); ++s) m[kernel.current(s)] += mass[s];
    return m;
  }
};

inline constexpr std::size_t kStationaryMaxIterations = 100000;

/// Power iteration from a point mass on the first state until the L1 change
/// drops below `tolerance`.
inline EdgeStationary edge_stationary(const SecondOrderKernel& kernel, double tolerance = 1e-10,
                                      std::size_t max_iterations = kStationaryMaxIterations) {
  const std::size_t states = kernel.num_states();
  if (states == 0) throw InputError("kernel has no states");
  std::vector<double> x(states, 0.0);
  x[0] = 1.0;
  EdgeStationary out;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    auto next = kernel.propagate(x);
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      next[s] /= total;
      change += std::abs(next[s] - x[s]);
    }
    x.swap(next);
    if (change < tolerance) {
      out.mass = std::move(x);
      out.iterations = it;
      out.residual = change;
      return out;
    }
  }
  throw NumericError("edge stationary distribution did not converge after " +
                     std::to_string(max_iterations) + " iterations (bipartite input?)");
}

/// Limit of the co-occurrence ratio for general p, q:
///   (1/2k) sum_{j=1..k} [ sum_u X_{w,u} P^j_{c,w,u} + sum_u X_{c,u} P^j_{w,c,u} ]
///   / ( (sum_u X_{w,u}) (sum_u X_{c,u}) ).
/// Entries with a zero marginal are NaN.
inline DenseMatrix limit_matrix_general(const SecondOrderKernel& kernel, const EdgeStationary& x,
                                        std::size_t k) {
  if (k < 1) throw InputError("window radius k must be positive");
  const std::size_t n = kernel.aggregate().num_nodes();
  const auto marginal = x.node_marginal(kernel);
  // joint(w, c) = sum_j P(walk at w, then at c after j steps)
  DenseMatrix joint(n, n);
  for (NodeIndex w = 0; w < n; ++w) {
    if (marginal[w] == 0.0) continue;
    std::vector<double> y(kernel.num_states(), 0.0);
    for (std::size_t s = 0; s < kernel.num_states(); ++s)
      if (kernel.current(s) == w) y[s] = x.mass[s];
    for (std::size_t j = 1; j <= k; ++j) {
      y = kernel.propagate(y);
      for (std::size_t s = 0; s < kernel.num_states(); ++s) joint(w, kernel.current(s)) += y[s];
    }
  }
  DenseMatrix out(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(k));
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t c = 0; c < n; ++c) {
      if (marginal[w] == 0.0 || marginal[c] == 0.0) {
        out(w, c) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      out(w, c) = scale * (joint(w, c) + joint(c, w)) / (marginal[w] * marginal[c]);
    }
  }
  return out;
}

/// Limit for p = q = 1:  (vol / k) (sum_{x=1..k} P~^x) D~^{-1}, P~ = D~^{-1} A~.
inline DenseMatrix limit_matrix_dw(const AdjustedAggregate& agg, std::size_t k) {
  if (k < 1) throw InputError("window radius k must be positive");
  detail::require_connected(agg);
  for (NodeIndex v = 0; v < agg.num_nodes(); ++v) {
    if (agg.neighbors(v).empty()) throw InputError("aggregate has an isolated node");
  }
  if (detail::is_bipartite(agg)) throw InputError("aggregate is bipartite; the walk is periodic");
  const std::size_t n = agg.num_nodes();
  DenseMatrix transition = agg.to_dense();
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) transition(u, v) /= agg.degree(u);
  DenseMatrix power = transition;
  DenseMatrix sum = transition;
  for (std::size_t x = 2; x <= k; ++x) {
    power = multiply(power, transition);
    for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] += power.data()[i];
  }
  const double scale = agg.volume() / static_cast<double>(k);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) sum(u, v) *= scale / agg.degree(v);
  return sum;
}

/// Shifted log target  log(M) - log(b)  that SGNS implicitly factorizes.
/// Entries of M below `min_ratio` (including zero) are clamped to it first.
inline DenseMatrix sgns_factorization_target(const DenseMatrix& limit, std::size_t negatives,
                                             double min_ratio = 1e-12) {
  DenseMatrix out(limit.rows(), limit.cols());
  const double shift = std::log(static_cast<double>(negatives));
  for (std::size_t i = 0; i < limit.rows(); ++i) {
    for (std::size_t j = 0; j < limit.cols(); ++j) {
      const double m = limit(i, j);
      out(i, j) = std::log(std::isnan(m) ? min_ratio : std::max(m, min_ratio)) - shift;
    }
  }
  return out;
}

/// Window co-occurrence counts. #(w,c) counts every incidence of w and c as a
/// (center, context) pair in either role, so it is symmetric; #(w) and |D|
/// are its marginals and total.
struct CooccurrenceStats {
  DenseMatrix pairs;           // #(w, c)
  std::vector<double> marginal;  // #(w)
  double total = 0.0;          // |D|

  // #(w,c) |D| / (#(w) #(c)); NaN where a marginal is zero.
  DenseMatrix ratio() const {
    const std::size_t n = marginal.size();
    DenseMatrix out(n, n);
    for (std::size_t w = 0; w < n; ++w) {
      for (std::size_t c = 0; c < n; ++c) {
        if (marginal[w] == 0.0 || marginal[c] == 0.0) {
          out(w, c) = std::numeric_limits<double>::quiet_NaN();
        } else {
          out(w, c) = pairs(w, c) * total / (marginal[w] * marginal[c]);
        }
      }
    }
    return out;
  }
};

inline CooccurrenceStats empirical_cooccurrence(const NeighborhoodCorpus& corpus, std::size_t k) {
  if (corpus.walks.empty()) throw InputError("empty corpus");
  std::size_t n = corpus.num_nodes;
  for (const auto& w : corpus.walks)
    for (NodeIndex v : w) n = std::max<std::size_t>(n, std::size_t{v} + 1);
  CooccurrenceStats stats;
  stats.pairs = DenseMatrix(n, n);
  stats.marginal.assign(n, 0.0);
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      const std::size_t hi = std::min(walk.size() - 1, i + k);
      for (std::size_t j = i + 1; j <= hi; ++j) {
        // positions (i, j) are two center-context incidences, each counted
        // for #(u_i, u_j) and #(u_j, u_i)
        stats.pairs(walk[i], walk[j]) += 2.0;
        stats.pairs(walk[j], walk[i]) += 2.0;
      }
    }
  }
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t c = 0; c < n; ++c) stats.marginal[w] += stats.pairs(w, c);
    stats.total += stats.marginal[w];
  }
  return stats;
}

}  // namespace mn2v
