#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "mn2v/dense_matrix.hpp"
#include "mn2v/error.hpp"
#include "mn2v/generators.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/rng.hpp"

namespace mn2v {

// Category per row; -1 marks an excluded (unlabeled) row.
struct LabelSet {
  std::vector<std::string> categories;
  std::vector<int> row_category;

  std::size_t size() const noexcept { return row_category.size(); }

  std::vector<std::size_t> members(int category) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < row_category.size(); ++i)
      if (row_category[i] == category) rows.push_back(i);
    return rows;
  }

  std::optional<int> category_index(const std::string& name) const {
    auto it = std::find(categories.begin(), categories.end(), name);
    if (it == categories.end()) return std::nullopt;
    return static_cast<int>(it - categories.begin());
  }

  // Aligns node -> label pairs with a registry. Nodes without a label are excluded.
  static LabelSet from_pairs(const NodeRegistry& nodes,
                             std::span<const std::pair<std::string, std::string>> pairs) {
    LabelSet set;
    set.row_category.assign(nodes.size(), -1);
    std::map<std::string, int> index;
    for (const auto& [node, label] : pairs) {
      auto row = nodes.find(node);
      if (!row) continue;
      auto [it, inserted] = index.try_emplace(label, static_cast<int>(set.categories.size()));
      if (inserted) set.categories.push_back(label);
      set.row_category[*row] = it->second;
    }
    return set;
  }

  static LabelSet from_partition(const Partition& p) {
    LabelSet set;
    std::size_t c = 0;
    for (auto x : p) c = std::max(c, x + 1);
    for (std::size_t i = 0; i < c; ++i) set.categories.push_back(std::to_string(i));
    for (auto x : p) set.row_category.push_back(static_cast<int>(x));
    return set;
  }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// ---------------------------------------------------------------- k-means

struct KMeansResult {
  Partition labels;
  DenseMatrix centroids;
  double inertia = 0.0;
  std::vector<double> history;  // objective after each assignment step, best run
};

namespace detail {

inline DenseMatrix kmeanspp_seed(const DenseMatrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  DenseMatrix centers(k, x.cols());
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::size_t first = uniform_index(rng, n);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pick = first;
    if (c > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += dist[i];
      if (total > 0.0) {
        double target = uniform01(rng) * total;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          target -= dist[i];
          if (target < 0.0 && dist[i] > 0.0) {
            pick = i;
            break;
          }
        }
        if (pick == n) {
          for (std::size_t i = n; i-- > 0;)
            if (dist[i] > 0.0) {
              pick = i;
              break;
            }
        }
      } else {
        // All remaining points coincide with a center: lowest unused index.
        pick = 0;
        while (pick < n && chosen[pick]) ++pick;
        if (pick == n) pick = 0;
      }
    }
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], squared_distance(x.row(i), centers.row(c)));
  }
  return centers;
}

// Nearest center; ties go to the lowest center index.
inline double assign(const DenseMatrix& x, const DenseMatrix& centers, Partition& labels) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = squared_distance(x.row(i), centers.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[i] = best;
    inertia += best_d;
  }
  return inertia;
}

}  // namespace detail

/// Lloyd iterations from k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares. Empty clusters keep their previous center.
inline KMeansResult kmeans(const DenseMatrix& x, std::size_t k, std::uint64_t seed,
                           std::size_t restarts = 10, std::size_t max_iterations = 300) {
  const std::size_t n = x.rows();
  if (k == 0 || k > n) throw InputError("k-means needs 1 <= k <= number of rows");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t run = 0; run < std::max<std::size_t>(1, restarts); ++run) {
    Rng rng = substream(seed, 0x4b3, run);
    KMeansResult r;
    r.centroids = detail::kmeanspp_seed(x, k, rng);
    r.labels.assign(n, 0);
    r.inertia = detail::assign(x, r.centroids, r.labels);
    r.history.push_back(r.inertia);
    for (std::size_t it = 0; it < max_iterations; ++it) {
      DenseMatrix sums(k, x.cols());
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[r.labels[i]];
        auto s = sums.row(r.labels[i]);
        auto xi = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) s[j] += xi[j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::size_t j = 0; j < x.cols(); ++j)
          r.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
      }
      Partition previous = r.labels;
      r.inertia = detail::assign(x, r.centroids, r.labels);
      r.history.push_back(r.inertia);
      if (r.labels == previous) break;
    }
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

// ---------------------------------------------------------- adjusted Rand

inline double adjusted_rand(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw InputError("partitions cover different node sets");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : table) index += choose2(c);
  for (const auto& [key, c] : rows) sum_a += choose2(c);
  for (const auto& [key, c] : cols) sum_b += choose2(c);
  const double expected = sum_a * sum_b / choose2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

// -------------------------------------------------------------------- AUC

/// Area under the ROC curve via the Mann-Whitney rank statistic, with
/// midranks for tied scores.
inline double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw InputError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        rank_sum += midrank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw InputError("AUC needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

// ---------------------------------------------------- logistic regression

/// Unregularized logistic regression with an intercept, fit by full-batch
/// gradient descent on standardized features.
class LogisticRegression {
 public:
  struct Options {
    std::size_t iterations = 1000;
    double learning_rate = 0.1;
  };

  LogisticRegression() = default;
  explicit LogisticRegression(Options opts) : opts_(opts) {}

  void fit(const DenseMatrix& x, std::span<const std::size_t> rows, std::span<const std::uint8_t> y) {
    const std::size_t d = x.cols();
    const double n = static_cast<double>(rows.size());
    mean_.assign(d, 0.0);
    scale_.assign(d, 0.0);
    for (auto r : rows)
      for (std::size_t j = 0; j < d; ++j) mean_[j] += x(r, j) / n;
    for (auto r : rows)
      for (std::size_t j = 0; j < d; ++j) scale_[j] += (x(r, j) - mean_[j]) * (x(r, j) - mean_[j]) / n;
    for (double& s : scale_) s = s > 0.0 ? std::sqrt(s) : 1.0;

    DenseMatrix z(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) z(i, j) = (x(rows[i], j) - mean_[j]) / scale_[j];

    weights_.assign(d, 0.0);
    bias_ = 0.0;
    std::vector<double> grad(d);
    for (std::size_t it = 0; it < opts_.iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        double s = bias_;
        for (std::size_t j = 0; j < d; ++j) s += weights_[j] * z(i, j);
        const double err = 1.0 / (1.0 + std::exp(-s)) - (y[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) grad[j] += err * z(i, j);
        grad_b += err;
      }
      for (std::size_t j = 0; j < d; ++j) weights_[j] -= opts_.learning_rate * grad[j] / n;
      bias_ -= opts_.learning_rate * grad_b / n;
    }
  }

  // Linear score; monotone in the predicted probability.
  double decision(std::span<const double> row) const {
    double s = bias_;
    for (std::size_t j = 0; j < weights_.size(); ++j) s += weights_[j] * (row[j] - mean_[j]) / scale_[j];
    return s;
  }
  double probability(std::span<const double> row) const { return 1.0 / (1.0 + std::exp(-decision(row))); }

 private:
  Options opts_;
  std::vector<double> mean_, scale_, weights_;
  double bias_ = 0.0;
};

/// One-versus-all logistic classifier for `target` trained on a random
/// `train_fraction` of the labeled rows; AUC on the held-out rows. Splits
/// lacking either class in train or test are redrawn up to 100 times.
inline double one_vs_all_auc(const DenseMatrix& f, const LabelSet& labels, int target,
                             double train_fraction, std::uint64_t seed) {
  if (labels.size() != f.rows()) throw InputError("label set does not match feature rows");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.row_category[i] >= 0) rows.push_back(i);
  std::size_t members = 0;
  for (auto r : rows) members += labels.row_category[r] == target;
  if (members < 2) throw InputError("target category needs at least two members");

  const std::size_t train_n = static_cast<std::size_t>(std::round(train_fraction * static_cast<double>(rows.size())));
  for (std::size_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng = substream(seed, 0xa0c, attempt);
    std::vector<std::size_t> order = rows;
    shuffle(std::span<std::size_t>(order), rng);
    std::span<const std::size_t> train(order.data(), train_n);
    std::span<const std::size_t> test(order.data() + train_n, order.size() - train_n);
    auto classes = [&](std::span<const std::size_t> part) {
      std::size_t pos = 0;
      for (auto r : part) pos += labels.row_category[r] == target;
      return pos > 0 && pos < part.size();
    };
    if (!classes(train) || !classes(test)) continue;
    std::vector<std::uint8_t> y_train(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) y_train[i] = labels.row_category[train[i]] == target;
    LogisticRegression model;
    model.fit(f, train, y_train);
    std::vector<double> scores;
    std::vector<std::uint8_t> y_test;
    for (auto r : test) {
      scores.push_back(model.decision(f.row(r)));
      y_test.push_back(labels.row_category[r] == target);
    }
    return roc_auc(scores, y_test);
  }
  throw InputError("could not draw a train/test split containing both classes");
}

// -------------------------------------------------------------------- MSD

/// Mean squared deviation of the rows in `region` from their mean row.
inline double msd(const DenseMatrix& f, std::span<const std::size_t> region) {
  if (region.empty()) throw InputError("MSD of an empty region");
  const std::size_t d = f.cols();
  std::vector<double> mean(d, 0.0);
  for (auto r : region)
    for (std::size_t j = 0; j < d; ++j) mean[j] += f(r, j);
  for (double& m : mean) m /= static_cast<double>(region.size());
  double total = 0.0;
  for (auto r : region) total += squared_distance(f.row(r), mean);
  return total / static_cast<double>(region.size());
}

// MSD of every category of the label set, in category order.
inline std::vector<double> msd_profile(const DenseMatrix& f, const LabelSet& labels) {
  std::vector<double> out;
  for (std::size_t c = 0; c < labels.categories.size(); ++c) {
    auto rows = labels.members(static_cast<int>(c));
    out.push_back(rows.empty() ? std::numeric_limits<double>::quiet_NaN() : msd(f, rows));
  }
  return out;
}

struct WelchResult {
  double difference = 0.0;  // mean(first) - mean(second)
  double ci_low = 0.0;
  double ci_high = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool zero_variance = false;
};

/// Welch two-sample two-sided t-test with a (1 - alpha) confidence interval
/// for the difference of means. With zero variance in both samples the
/// result is flagged; p is 1 when the means agree and 0 otherwise.
inline WelchResult welch_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05) {
  if (a.size() < 2 || b.size() < 2) throw InputError("t-test needs at least two samples per group");
  auto moments = [](std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  WelchResult r;
  r.difference = ma - mb;
  const double qa = va / na, qb = vb / nb;
  const double se = std::sqrt(qa + qb);
  if (se == 0.0) {
    r.zero_variance = true;
    r.ci_low = r.ci_high = r.difference;
    r.df = na + nb - 2.0;
    r.t = r.difference == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.difference);
    r.p_value = r.difference == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = r.difference / se;
  r.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  const double crit = boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
  r.ci_low = r.difference - crit * se;
  r.ci_high = r.difference + crit * se;
  return r;
}

inline WelchResult msd_group_test(std::span<const double> first_group, std::span<const double> second_group,
                                  double alpha = 0.05) {
  return welch_test(first_group, second_group, alpha);
}

// ------------------------------------------------- subject classification

enum class SubjectClassifier { knn, logistic };

struct CrossValidationResult {
  double mean_accuracy = 0.0;
  double standard_error = 0.0;
  std::vector<double> fold_accuracy;
  std::size_t best_k = 0;  // k-NN only
};

namespace detail {

inline std::vector<std::size_t> stratified_folds(std::span<const std::uint8_t> y, std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> fold(y.size());
  Rng rng = substream(seed, 0xf01d);
  for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) members.push_back(i);
    shuffle(std::span<std::size_t>(members), rng);
    for (std::size_t i = 0; i < members.size(); ++i) fold[members[i]] = i % folds;
  }
  return fold;
}

inline bool knn_predict(const DenseMatrix& x, std::span<const std::size_t> train, std::span<const std::uint8_t> y,
                        std::span<const double> query, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(train.size());
  for (auto r : train) d.emplace_back(squared_distance(x.row(r), query), r);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::size_t votes = 0;
  for (std::size_t i = 0; i < k; ++i) votes += y[d[i].second];
  // ties go to the negative class
  return 2 * votes > k;
}

}  // namespace detail

/// Stratified k-fold cross validation of a binary classifier on per-subject
/// feature rows. For k-NN, every k in [1, 30] is evaluated and the one with
/// the highest mean accuracy is reported.
inline CrossValidationResult subject_classify(const DenseMatrix& x, std::span<const std::uint8_t> y,
                                              SubjectClassifier method, std::size_t folds = 10,
                                              std::uint64_t seed = 0) {
  if (x.rows() != y.size()) throw InputError("labels do not match feature rows");
  const std::size_t positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
  if (positives < folds || y.size() - positives < folds) {
    throw InputError("each class needs at least " + std::to_string(folds) + " subjects");
  }
  const auto fold = detail::stratified_folds(y, folds, seed);

  auto evaluate = [&](auto&& predict) {
    CrossValidationResult r;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? test : train).push_back(i);
      const auto predictions = predict(train, test);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < test.size(); ++i) correct += predictions[i] == (y[test[i]] != 0);
      r.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
    }
    const double n = static_cast<double>(folds);
    for (double a : r.fold_accuracy) r.mean_accuracy += a;
    r.mean_accuracy /= n;
    double ss = 0.0;
    for (double a : r.fold_accuracy) ss += (a - r.mean_accuracy) * (a - r.mean_accuracy);
    r.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    return r;
  };

  if (method == SubjectClassifier::logistic) {
    return evaluate([&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
      std::vector<std::uint8_t> ytr;
      for (auto i : train) ytr.push_back(y[i]);
      LogisticRegression model;
      model.fit(x, train, ytr);
      std::vector<bool> out;
      for (auto i : test) out.push_back(model.decision(x.row(i)) > 0.0);
      return out;
    });
  }

  CrossValidationResult best;
  best.mean_accuracy = -1.0;
  for (std::size_t k = 1; k <= 30; ++k) {
    auto r = evaluate([&](const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
      std::vector<bool> out;
      for (auto i : test) out.push_back(detail::knn_predict(x, train, y, x.row(i), k));
      return out;
    });
    r.best_k = k;
    if (r.mean_accuracy > best.mean_accuracy) best = std::move(r);
  }
  return best;
}

}  // namespace mn2v
