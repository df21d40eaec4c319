#include "aep/learn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include <fmt/format.h>

#include "aep/errors.hpp"
#include "aep/parallel.hpp"
#include "aep/random.hpp"
#include "tree_builder.hpp"

namespace aep {
namespace {

constexpr int kDefaultBoostingDepth = 3;
constexpr double kLinearTolerance = 1e-8;
constexpr int kLinearMaxIterations = 10000;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> class_weights(const ClassifierSpec& spec, std::span<const int> labels) {
  std::vector<double> w(labels.size(), 1.0);
  if (spec.class_weight == ClassWeight::kBalanced) {
    const auto n = static_cast<double>(labels.size());
    const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double w_pos = n / (2.0 * pos);
    const double w_neg = n / (2.0 * (n - pos));
    for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] == 1 ? w_pos : w_neg;
  }
  return w;
}

detail::TreeParams tree_params(const ClassifierSpec& spec, std::size_t n_features) {
  detail::TreeParams p;
  p.max_depth = spec.max_depth;
  if (!p.max_depth && spec.kind == ClassifierKind::kGradientBoosting) p.max_depth = kDefaultBoostingDepth;
  p.min_samples_leaf = spec.min_samples_leaf;
  p.features_per_split = spec.features_per_split.resolve(n_features);
  return p;
}

void train_forest(const FeatureMatrix& m, TrainedModel& model) {
  const auto data = detail::ColumnData::from(m);
  const auto params = tree_params(model.spec, m.cols());
  const auto base_weights = class_weights(model.spec, m.labels);
  const std::vector<double> targets(m.labels.begin(), m.labels.end());
  const auto n_trees = static_cast<std::size_t>(model.spec.n_trees);

  model.trees.resize(n_trees);
  std::vector<std::vector<double>> decrease(n_trees, std::vector<double>(m.cols(), 0.0));
  parallel_for(n_trees, [&](std::size_t t) {
    Rng rng(model.spec.seed + t);
    std::vector<int> draws(m.rows(), 0);
    for (std::size_t k = 0; k < m.rows(); ++k) ++draws[rng.below(m.rows())];
    std::vector<double> w(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) w[i] = base_weights[i] * draws[i];
    model.trees[t] = detail::grow_tree(data, targets, draws, w, params, rng, decrease[t]);
  });

  // Squared error on 0/1 targets is half the gini impurity.
  model.impurity_decrease.assign(m.cols(), 0.0);
  for (const auto& per_tree : decrease) {
    for (std::size_t c = 0; c < m.cols(); ++c) model.impurity_decrease[c] += 2.0 * per_tree[c];
  }
  for (double& v : model.impurity_decrease) v /= static_cast<double>(n_trees);
}

void train_boosting(const FeatureMatrix& m, TrainedModel& model) {
  const auto data = detail::ColumnData::from(m);
  const auto params = tree_params(model.spec, m.cols());
  const auto w = class_weights(model.spec, m.labels);
  const std::vector<int> once(m.rows(), 1);

  double w_pos = 0.0;
  double w_all = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    w_all += w[i];
    if (m.labels[i] == 1) w_pos += w[i];
  }
  model.base_score = std::log(w_pos / (w_all - w_pos));

  std::vector<double> score(m.rows(), model.base_score);
  std::vector<double> residual(m.rows());
  std::vector<double> decrease(m.cols(), 0.0);
  model.trees.reserve(static_cast<std::size_t>(model.spec.n_trees));
  for (int t = 0; t < model.spec.n_trees; ++t) {
    for (std::size_t i = 0; i < m.rows(); ++i) residual[i] = m.labels[i] - sigmoid(score[i]);
    Rng rng(model.spec.seed + static_cast<std::uint64_t>(t));
    Tree tree = detail::grow_tree(data, residual, once, w, params, rng, decrease);
    for (std::size_t i = 0; i < m.rows(); ++i) score[i] += model.spec.learning_rate * tree.predict(m.row(i));
    model.trees.push_back(std::move(tree));
  }
  for (double& v : decrease) v /= static_cast<double>(model.spec.n_trees);
  model.impurity_decrease = std::move(decrease);
}

// L2-penalized logistic regression on standardized columns, damped Newton.
void train_linear(const FeatureMatrix& m, TrainedModel& model) {
  const auto n = static_cast<Eigen::Index>(m.rows());
  const auto p = static_cast<Eigen::Index>(m.cols());
  model.feature_mean.assign(m.cols(), 0.0);
  model.feature_scale.assign(m.cols(), 1.0);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) mean += m.at(r, c);
    mean /= static_cast<double>(m.rows());
    double var = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) var += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(m.rows()));
    model.feature_mean[c] = mean;
    model.feature_scale[c] = sd > 0.0 ? sd : 1.0;
  }

  // Column 0 is the unpenalized intercept.
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  const auto cw = class_weights(model.spec, m.labels);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    x(r, 0) = 1.0;
    for (Eigen::Index c = 0; c < p; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      x(r, c + 1) = (m.at(ru, cu) - model.feature_mean[cu]) / model.feature_scale[cu];
    }
    y(r) = m.labels[ru];
    w(r) = cw[ru];
  }
  const double lambda = model.spec.l2_penalty;
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, lambda);
  penalty(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = x * beta;
    double loss = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) loss += w(r) * (softplus(z(r)) - y(r) * z(r));
    return loss + 0.5 * beta.cwiseProduct(penalty).dot(beta);
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  const double total_weight = w.sum();
  double current = objective(beta);
  int iter = 0;
  for (; iter < kLinearMaxIterations; ++iter) {
    const Eigen::VectorXd z = x * beta;
    Eigen::VectorXd prob(n);
    Eigen::VectorXd curvature(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      prob(r) = sigmoid(z(r));
      curvature(r) = w(r) * prob(r) * (1.0 - prob(r));
    }
    const Eigen::VectorXd grad = x.transpose() * (w.cwiseProduct(prob - y)) + penalty.cwiseProduct(beta);
    if (grad.lpNorm<Eigen::Infinity>() <= kLinearTolerance * total_weight) break;

    Eigen::MatrixXd hessian = x.transpose() * curvature.asDiagonal() * x;
    hessian.diagonal() += penalty + Eigen::VectorXd::Constant(p + 1, 1e-10 * total_weight);
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);

    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
      const Eigen::VectorXd candidate = beta - t * step;
      const double value = objective(candidate);
      if (value <= current - 1e-4 * t * grad.dot(step)) {
        beta = candidate;
        current = value;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  model.iterations = iter;
  model.intercept = beta(0);
  model.coefficients.assign(beta.data() + 1, beta.data() + 1 + p);
}

}  // namespace

ClassifierKind parse_classifier_kind(std::string_view name) {
  if (name == "random_forest") return ClassifierKind::kRandomForest;
  if (name == "gradient_boosting") return ClassifierKind::kGradientBoosting;
  if (name == "linear") return ClassifierKind::kLinear;
  throw ConfigError(fmt::format("unknown classifier kind '{}'", name));
}

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRandomForest:
      return "random_forest";
    case ClassifierKind::kGradientBoosting:
      return "gradient_boosting";
    case ClassifierKind::kLinear:
      return "linear";
  }
  return "?";
}

ClassWeight parse_class_weight(std::string_view name) {
  if (name == "none") return ClassWeight::kNone;
  if (name == "balanced") return ClassWeight::kBalanced;
  throw ConfigError(fmt::format("unknown class_weight '{}'", name));
}

const char* to_string(ClassWeight w) { return w == ClassWeight::kNone ? "none" : "balanced"; }

std::size_t FeatureSampling::resolve(std::size_t n_features) const {
  const auto p = static_cast<double>(n_features);
  std::size_t k = n_features;
  switch (rule) {
    case Rule::kSqrt:
      k = static_cast<std::size_t>(std::ceil(std::sqrt(p)));
      break;
    case Rule::kLog2:
      k = static_cast<std::size_t>(std::ceil(std::log2(std::max(p, 1.0))));
      break;
    case Rule::kAll:
      k = n_features;
      break;
    case Rule::kFixed:
      k = static_cast<std::size_t>(std::max(count, 1));
      break;
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_features, 1));
}

std::string FeatureSampling::name() const {
  switch (rule) {
    case Rule::kSqrt:
      return "sqrt";
    case Rule::kLog2:
      return "log2";
    case Rule::kAll:
      return "all";
    case Rule::kFixed:
      return std::to_string(count);
  }
  return "?";
}

FeatureSampling FeatureSampling::parse(std::string_view text) {
  if (text == "sqrt") return {Rule::kSqrt, 0};
  if (text == "log2") return {Rule::kLog2, 0};
  if (text == "all") return {Rule::kAll, 0};
  int k = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
  if (ec != std::errc() || ptr != text.data() + text.size() || k < 1) {
    throw ConfigError(fmt::format("features_per_split must be sqrt, log2, all or a positive integer, got '{}'", text));
  }
  return {Rule::kFixed, k};
}

void ClassifierSpec::validate() const {
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (max_depth && *max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) throw ConfigError("l2_penalty must be >= 0");
}

double Tree::predict(std::span<const double> row) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

std::size_t Tree::split_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature >= 0; }));
}

TrainedModel train(const ClassifierSpec& spec, const FeatureMatrix& matrix) {
  spec.validate();
  if (matrix.cols() == 0) throw DataError("cannot train on a matrix with no feature columns");
  const std::size_t pos = matrix.positives();
  if (pos == 0 || pos == matrix.rows()) throw DataError("training labels contain a single class");

  TrainedModel model;
  model.spec = spec;
  model.feature_keys = matrix.feature_keys;
  switch (spec.kind) {
    case ClassifierKind::kRandomForest:
      train_forest(matrix, model);
      break;
    case ClassifierKind::kGradientBoosting:
      train_boosting(matrix, model);
      break;
    case ClassifierKind::kLinear:
      train_linear(matrix, model);
      break;
  }
  return model;
}

std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& rows) {
  return predict_proba(model, rows.feature_keys, rows.values);
}

std::vector<double> predict_proba(const TrainedModel& model, std::span<const FeatureKey> schema,
                                  std::span<const double> values) {
  const auto& expected = model.feature_keys;
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (c >= schema.size() || schema[c] != expected[c]) {
      throw DataError(fmt::format("schema mismatch at column {}: model expects '{}'", c, expected[c].name()));
    }
  }
  if (schema.size() != expected.size()) {
    throw DataError(fmt::format("schema mismatch: unexpected extra column '{}'", schema[expected.size()].name()));
  }

  const std::size_t p = expected.size();
  const std::size_t n = p == 0 ? 0 : values.size() / p;
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = values.subspan(r * p, p);
    switch (model.spec.kind) {
      case ClassifierKind::kRandomForest: {
        double sum = 0.0;
        for (const auto& tree : model.trees) sum += tree.predict(row);
        out[r] = sum / static_cast<double>(model.trees.size());
        break;
      }
      case ClassifierKind::kGradientBoosting: {
        double score = model.base_score;
        for (const auto& tree : model.trees) score += model.spec.learning_rate * tree.predict(row);
        out[r] = sigmoid(score);
        break;
      }
      case ClassifierKind::kLinear: {
        double z = model.intercept;
        for (std::size_t c = 0; c < p; ++c) {
          z += model.coefficients[c] * (row[c] - model.feature_mean[c]) / model.feature_scale[c];
        }
        out[r] = sigmoid(z);
        break;
      }
    }
  }
  return out;
}

ImportanceVector gini_importances(const TrainedModel& model) {
  if (!model.spec.tree_based()) {
    throw ConfigError(fmt::format("importances undefined for this kind ({})", to_string(model.spec.kind)));
  }
  ImportanceVector out{model.feature_keys, model.impurity_decrease};
  const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0);
  if (total > 0.0) {
    for (double& v : out.values) v /= total;
  } else {
    std::fill(out.values.begin(), out.values.end(), 0.0);
  }
  return out;
}

std::string TrainedModel::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(spec.kind);
  j["name"] = spec.label();
  j["seed"] = spec.seed;
  auto& features = j["features"] = nlohmann::ordered_json::array();
  for (const auto& k : feature_keys) features.push_back(k.name());
  if (spec.tree_based()) {
    j["n_trees"] = spec.n_trees;
    j["base_score"] = base_score;
    auto& trees_json = j["trees"] = nlohmann::ordered_json::array();
    for (const auto& tree : trees) {
      auto nodes = nlohmann::ordered_json::array();
      for (const auto& node : tree.nodes) {
        if (node.feature < 0) {
          nodes.push_back({{"leaf", node.value}});
        } else {
          nodes.push_back({{"feature", node.feature},
                           {"threshold", node.threshold},
                           {"left", node.left},
                           {"right", node.right}});
        }
      }
      trees_json.push_back(std::move(nodes));
    }
  } else {
    j["intercept"] = intercept;
    j["coefficients"] = coefficients;
    j["feature_mean"] = feature_mean;
    j["feature_scale"] = feature_scale;
    j["iterations"] = iterations;
  }
  return j.dump(2);
}

}  // namespace aep
