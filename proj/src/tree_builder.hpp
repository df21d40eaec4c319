#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aep/learn.hpp"
#include "aep/random.hpp"

namespace aep::detail {

// Column-major copy of the training features. `by_key` lists columns in
// feature-key order; feature draws and split tie-breaks work in that order so
// a tree does not depend on where a feature sits in the matrix.
struct ColumnData {
  std::size_t n_rows = 0;
  std::vector<std::vector<double>> columns;
  std::vector<int> by_key;
  std::vector<int> key_rank;  // inverse of by_key

  static ColumnData from(const FeatureMatrix& m);
};

struct TreeParams {
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
  std::size_t features_per_split = 1;
};

// Grows one tree minimizing weighted squared error of `targets`. For 0/1
// targets this is half the weighted gini impurity, so the same routine serves
// classification forests and boosting stages. Leaves hold the weighted mean
// target. `multiplicity` is the bootstrap draw count per row (0 = absent);
// `weights` are total per-row sample weights with the
// multiplicity already folded in. Adds each split's squared-error
// decrease, scaled by 1/root weight, to `decrease_out[feature]`.
Tree grow_tree(const ColumnData& data, std::span<const double> targets, std::span<const int> multiplicity,
               std::span<const double> weights, const TreeParams& params, Rng& rng,
               std::vector<double>& decrease_out);

}  // namespace aep::detail
