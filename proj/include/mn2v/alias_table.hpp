#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mn2v/error.hpp"
#include "mn2v/rng.hpp"

namespace mn2v {

// Walker/Vose alias table over indices [0, n). Construction is O(n), a draw
// consumes exactly one uniform variate and is O(1).
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) return;
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("alias table weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw InputError("alias table needs positive total weight");

    prob_.resize(n);
    alias_.resize(n);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    const double scale = static_cast<double>(n) / total;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * scale;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      std::uint32_t s = small.back();
      small.pop_back();
      std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding.
    for (std::uint32_t l : large) {
      prob_[l] = 1.0;
      alias_[l] = l;
    }
    for (std::uint32_t s : small) {
      prob_[s] = 1.0;
      alias_[s] = s;
    }
  }

  std::size_t size() const noexcept { return prob_.size(); }
  bool empty() const noexcept { return prob_.empty(); }

  // Maps a uniform variate on [0, 1) to an outcome.
  std::size_t sample(double u) const noexcept {
    const double x = u * static_cast<double>(prob_.size());
    std::size_t column = static_cast<std::size_t>(x);
    if (column >= prob_.size()) column = prob_.size() - 1;
    const double frac = x - static_cast<double>(column);
    return frac < prob_[column] ? column : alias_[column];
  }

  std::size_t sample(Rng& rng) const { return sample(uniform01(rng)); }

  // Probability of each outcome implied by the table.
  std::vector<double> probabilities() const {
    const double n = static_cast<double>(prob_.size());
    std::vector<double> p(prob_.size(), 0.0);
    for (std::size_t i = 0; i < prob_.size(); ++i) {
      p[i] += prob_[i] / n;
      if (alias_[i] != i) p[alias_[i]] += (1.0 - prob_[i]) / n;
    }
    return p;
  }

  std::size_t memory_bytes() const noexcept {
    return sizeof(AliasTable) + prob_.capacity() * sizeof(double) +
           alias_.capacity() * sizeof(std::uint32_t);
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace mn2v
