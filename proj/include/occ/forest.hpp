#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "occ/common.hpp"
#include "occ/mathutil.hpp"

namespace occ {

struct ForestParams {
  int n_trees = 300;
  int mtry = 0;      // features tried per split; 0 -> ceil(sqrt(P))
  int min_leaf = 25;
  int max_depth = 0;  // 0 -> unlimited
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& x) const {
    int k = 0;
    while (nodes[k].feature >= 0)
      k = x[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
    return nodes[k].value;
  }
};

struct ForestModel {
  std::vector<RegressionTree> trees;
  ForestParams params;
  int n_features = 0;

  template <typename Row>
  double predict(const Row& x) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(x);
    return trees.empty() ? 0.0 : s / static_cast<double>(trees.size());
  }

  Eigen::VectorXd predict_matrix(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
    return out;
  }
};

namespace forest_detail {

struct Builder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& w;
  const ForestParams& params;
  int mtry;
  std::mt19937_64 rng;
  std::vector<TreeNode> nodes;
  std::vector<int> feature_pool;

  // weighted SSE about the weighted mean, via sufficient statistics
  static double sse(double sw, double swy, double swy2) {
    return sw > 0 ? swy2 - swy * swy / sw : 0.0;
  }

  int build(std::vector<int>& idx, int lo, int hi, int depth) {
    double sw = 0, swy = 0, swy2 = 0;
    for (int k = lo; k < hi; ++k) {
      int i = idx[k];
      sw += w[i];
      swy += w[i] * y[i];
      swy2 += w[i] * y[i] * y[i];
    }
    const int n_node = hi - lo;
    const double node_sse = sse(sw, swy, swy2);
    const double node_value = sw > 0 ? swy / sw : 0.0;

    auto make_leaf = [&] {
      nodes.push_back({-1, 0, -1, -1, node_value});
      return static_cast<int>(nodes.size()) - 1;
    };
    if (n_node < 2 * params.min_leaf || node_sse <= 1e-12 ||
        (params.max_depth > 0 && depth >= params.max_depth))
      return make_leaf();

    // sample mtry distinct candidate features
    for (int j = 0; j < mtry; ++j) {
      std::uniform_int_distribution<int> pick(j, static_cast<int>(feature_pool.size()) - 1);
      std::swap(feature_pool[j], feature_pool[pick(rng)]);
    }

    int best_feature = -1;
    double best_threshold = 0, best_score = node_sse - 1e-12;
    std::vector<std::pair<double, int>> order(n_node);
    for (int j = 0; j < mtry; ++j) {
      const int f = feature_pool[j];
      for (int k = lo; k < hi; ++k) order[k - lo] = {X(idx[k], f), idx[k]};
      std::sort(order.begin(), order.end());
      double lw = 0, lwy = 0, lwy2 = 0;
      int lcount = 0;
      for (int k = 0; k + 1 < n_node; ++k) {
        const int i = order[k].second;
        lw += w[i];
        lwy += w[i] * y[i];
        lwy2 += w[i] * y[i] * y[i];
        ++lcount;
        if (order[k].first == order[k + 1].first) continue;
        if (lcount < params.min_leaf || n_node - lcount < params.min_leaf) continue;
        double score = sse(lw, lwy, lwy2) + sse(sw - lw, swy - lwy, swy2 - lwy2);
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (order[k].first + order[k + 1].first);
        }
      }
    }
    if (best_feature < 0) return make_leaf();

    auto mid = std::partition(idx.begin() + lo, idx.begin() + hi, [&](int i) {
      return X(i, best_feature) <= best_threshold;
    });
    int split = static_cast<int>(mid - idx.begin());
    if (split == lo || split == hi) return make_leaf();

    int self = static_cast<int>(nodes.size());
    nodes.push_back({best_feature, best_threshold, -1, -1, node_value});
    int l = build(idx, lo, split, depth + 1);
    int r = build(idx, split, hi, depth + 1);
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
  }
};

}  // namespace forest_detail

// Weighted-squared-error regression forest on the latent scale. Each tree has
// its own RNG stream derived from (seed, tree index), so the model does not
// depend on construction order.
inline ForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets,
                              const Eigen::VectorXd& weights, const ForestParams& params) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n == 0 || p == 0) throw Error(ErrorKind::degenerate, "empty forest training data");
  if (!targets.allFinite() || !weights.allFinite())
    throw Error(ErrorKind::degenerate, "non-finite forest targets or weights");

  ForestModel model;
  model.params = params;
  model.n_features = p;
  const int mtry = params.mtry > 0
                       ? std::min(params.mtry, p)
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  model.trees.resize(params.n_trees);

  for (int t = 0; t < params.n_trees; ++t) {
    std::uint64_t stream =
        fnv1a64_mix(fnv1a64_mix(14695981039346656037ull, params.seed), static_cast<std::uint64_t>(t));
    forest_detail::Builder b{X, targets, weights, params, mtry, std::mt19937_64(stream), {}, {}};
    b.feature_pool.resize(p);
    for (int j = 0; j < p; ++j) b.feature_pool[j] = j;

    std::vector<int> idx(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (int i = 0; i < n; ++i) idx[i] = pick(b.rng);
    } else {
      for (int i = 0; i < n; ++i) idx[i] = i;
    }
    b.build(idx, 0, n, 0);
    model.trees[t].nodes = std::move(b.nodes);
  }
  return model;
}

}  // namespace occ
