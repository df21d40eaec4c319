#include "tree_builder.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace aep::detail {
namespace {

struct NodeStats {
  double weight = 0.0;   // sum w
  double sum = 0.0;      // sum w*y
  double sum_sq = 0.0;   // sum w*y^2
  long count = 0;        // bootstrap draws

  void add(double w, double y, int m) {
    weight += w;
    sum += w * y;
    sum_sq += w * y * y;
    count += m;
  }
  double sse() const { return weight > 0.0 ? std::max(0.0, sum_sq - sum * sum / weight) : 0.0; }
  double mean() const { return weight > 0.0 ? sum / weight : 0.0; }
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};


struct Builder {
  const ColumnData& data;
  std::span<const double> targets;
  std::span<const int> multiplicity;
  std::span<const double> weights;
  const TreeParams& params;
  Rng& rng;
  std::vector<double>& decrease;

  Tree tree;
  std::vector<std::size_t> samples;
  std::vector<std::pair<double, std::size_t>> sorted;
  std::vector<int> feature_order;
  double root_weight = 0.0;

  // Higher gain wins; equal gain prefers the lower-ranked key, then lower threshold.
  bool better(const Split& a, const Split& b) const {
    if (b.feature < 0) return true;
    if (a.gain != b.gain) return a.gain > b.gain;
    if (a.feature != b.feature) {
      return data.key_rank[static_cast<std::size_t>(a.feature)] < data.key_rank[static_cast<std::size_t>(b.feature)];
    }
    return a.threshold < b.threshold;
  }

  NodeStats stats(std::size_t begin, std::size_t end) const {
    NodeStats s;
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = samples[k];
      s.add(weights[i], targets[i], multiplicity[i]);
    }
    return s;
  }

  // Returns false when the feature is constant within the node.
  bool best_split_on(int feature, std::size_t begin, std::size_t end, const NodeStats& parent, Split& best) {
    const auto& column = data.columns[static_cast<std::size_t>(feature)];
    sorted.clear();
    for (std::size_t k = begin; k < end; ++k) sorted.emplace_back(column[samples[k]], samples[k]);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front().first == sorted.back().first) return false;

    const double parent_sse = parent.sse();
    NodeStats left;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      const std::size_t i = sorted[k].second;
      left.add(weights[i], targets[i], multiplicity[i]);
      const double lo = sorted[k].first;
      const double hi = sorted[k + 1].first;
      if (lo == hi) continue;
      if (left.count < params.min_samples_leaf || parent.count - left.count < params.min_samples_leaf) continue;
      NodeStats right;
      right.weight = parent.weight - left.weight;
      right.sum = parent.sum - left.sum;
      right.sum_sq = parent.sum_sq - left.sum_sq;
      double threshold = lo + (hi - lo) / 2.0;
      if (threshold >= hi) threshold = lo;
      Split candidate{feature, threshold, parent_sse - left.sse() - right.sse()};
      if (better(candidate, best)) best = candidate;
    }
    return true;
  }

  int make_leaf(const NodeStats& s) {
    TreeNode node;
    node.value = s.mean();
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size() - 1);
  }

  int build(std::size_t begin, std::size_t end, int depth) {
    const NodeStats s = stats(begin, end);
    const bool depth_done = params.max_depth && depth >= *params.max_depth;
    if (depth_done || s.count < 2L * params.min_samples_leaf || s.sse() <= 1e-14 * std::max(1.0, s.weight)) {
      return make_leaf(s);
    }

    // Visit features in random order until enough non-constant ones were seen.
    const int n_features = static_cast<int>(data.columns.size());
    feature_order.resize(static_cast<std::size_t>(n_features));
    std::copy(data.by_key.begin(), data.by_key.end(), feature_order.begin());
    Split best;
    std::size_t informative_seen = 0;
    for (int j = 0; j < n_features && informative_seen < params.features_per_split; ++j) {
      const auto pick = static_cast<std::size_t>(j) + rng.below(static_cast<std::uint64_t>(n_features - j));
      std::swap(feature_order[static_cast<std::size_t>(j)], feature_order[pick]);
      if (best_split_on(feature_order[static_cast<std::size_t>(j)], begin, end, s, best)) ++informative_seen;
    }
    if (best.feature < 0) return make_leaf(s);

    const auto& column = data.columns[static_cast<std::size_t>(best.feature)];
    auto mid_it = std::stable_partition(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                        samples.begin() + static_cast<std::ptrdiff_t>(end),
                                        [&](std::size_t i) { return column[i] <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - samples.begin());

    decrease[static_cast<std::size_t>(best.feature)] += std::max(0.0, best.gain) / root_weight;

    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{best.feature, best.threshold, -1, -1, s.mean()});
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }
};

}  // namespace

ColumnData ColumnData::from(const FeatureMatrix& m) {
  ColumnData d;
  d.n_rows = m.rows();
  d.columns.assign(m.cols(), std::vector<double>(m.rows()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) d.columns[c][r] = m.at(r, c);
  }
  d.by_key.resize(m.cols());
  std::iota(d.by_key.begin(), d.by_key.end(), 0);
  std::stable_sort(d.by_key.begin(), d.by_key.end(), [&](int a, int b) {
    return m.feature_keys[static_cast<std::size_t>(a)] < m.feature_keys[static_cast<std::size_t>(b)];
  });
  d.key_rank.resize(m.cols());
  for (std::size_t i = 0; i < d.by_key.size(); ++i) d.key_rank[static_cast<std::size_t>(d.by_key[i])] = static_cast<int>(i);
  return d;
}

Tree grow_tree(const ColumnData& data, std::span<const double> targets, std::span<const int> multiplicity,
               std::span<const double> weights, const TreeParams& params, Rng& rng,
               std::vector<double>& decrease_out) {
  Builder b{data, targets, multiplicity, weights, params, rng, decrease_out, {}, {}, {}, {}, 0.0};
  for (std::size_t i = 0; i < data.n_rows; ++i) {
    if (multiplicity[i] > 0) b.samples.push_back(i);
  }
  b.root_weight = b.stats(0, b.samples.size()).weight;
  if (b.samples.empty() || b.root_weight <= 0.0) {
    b.tree.nodes.push_back(TreeNode{});
    return std::move(b.tree);
  }
  b.build(0, b.samples.size(), 0);
  return std::move(b.tree);
}

}  // namespace aep::detail
