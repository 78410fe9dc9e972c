#pragma once

// Squared-error gradient boosting over exact-greedy binary regression trees
// with L2-regularised leaves.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pqos/alignment.hpp"

namespace pqos::gbt {

struct GbtConfig {
  int n_rounds = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double subsample = 1.0;
  double l2_leaf_reg = 1.0;
  std::uint64_t seed = 0;
};

/// Throws ConfigError naming the first invalid field.
void validate(const GbtConfig& config);

/// Internal nodes have feature >= 0 and send x[feature] < threshold left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output before learning-rate scaling

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const double> x) const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbtModel {
  double base_prediction = 0.0;
  std::vector<RegressionTree> trees;
  GbtConfig config;
  std::vector<std::string> feature_schema;

  /// base + learning_rate * sum of tree outputs. Throws SchemaError on a
  /// dimension mismatch.
  double predict(std::span<const double> x) const;

  /// Same as predict() but only uses the first n_trees trees.
  double predict_partial(std::span<const double> x, std::size_t n_trees) const;

  std::vector<double> predict_rows(const std::vector<std::vector<double>>& rows) const;
};

/// Throws DomainError on empty input, DataError on non-finite values and
/// SchemaError on ragged rows.
GbtModel fit(const std::vector<std::vector<double>>& rows, std::span<const double> targets,
             std::vector<std::string> feature_schema, const GbtConfig& config);

GbtModel fit(const alignment::SupervisedDataset& dataset, const GbtConfig& config);

/// Versioned JSON document with schema, config, base prediction and trees.
std::string to_json(const GbtModel& model);
GbtModel from_json(const std::string& text);

}  // namespace pqos::gbt
