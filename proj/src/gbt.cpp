#include "pqos/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "pqos/config_json.hpp"
#include "pqos/errors.hpp"

namespace pqos::gbt {
namespace {

constexpr const char* kFormat = "pqos-gbt-model";
constexpr int kVersion = 1;

using Index = std::uint32_t;
using SortedLists = std::vector<std::vector<Index>>;  // one list per feature

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<double>& residual,
              const GbtConfig& config)
      : x_(x), r_(residual), config_(config), goes_left_(x.size(), 0) {}

  RegressionTree build(SortedLists root) {
    tree_ = {};
    grow(std::move(root), 0);
    return std::move(tree_);
  }

 private:
  int grow(SortedLists lists, int depth) {
    const auto& members = lists.front();
    const double n = static_cast<double>(members.size());
    double sum = 0.0, sum_sq = 0.0;
    for (Index i : members) {
      sum += r_[i];
      sum_sq += r_[i] * r_[i];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{.value = sum / (n + config_.l2_leaf_reg)});

    const auto min_leaf = static_cast<std::size_t>(std::max(1, config_.min_samples_leaf));
    if (depth >= config_.max_depth || members.size() < 2 * min_leaf || sum_sq <= 0.0) return id;

    const Split best = find_split(lists, sum, min_leaf, 1e-12 * sum_sq);
    if (best.feature < 0) return id;

    for (Index i : members) goes_left_[i] = x_[i][static_cast<std::size_t>(best.feature)] < best.threshold;
    SortedLists left(lists.size()), right(lists.size());
    for (std::size_t j = 0; j < lists.size(); ++j) {
      for (Index i : lists[j]) (goes_left_[i] ? left[j] : right[j]).push_back(i);
    }
    lists.clear();
    lists.shrink_to_fit();

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    node.value = 0.0;
    return id;
  }

  // Exact greedy search. Scanning features and thresholds in ascending order
  // and replacing only on strictly larger gain resolves ties toward the
  // lowest feature index, then the lowest threshold.
  Split find_split(const SortedLists& lists, double total, std::size_t min_leaf,
                   double min_gain) const {
    const double lambda = config_.l2_leaf_reg;
    const std::size_t n = lists.front().size();
    const double parent = total * total / (static_cast<double>(n) + lambda);
    Split best;
    best.gain = min_gain;
    for (std::size_t j = 0; j < lists.size(); ++j) {
      const auto& order = lists[j];
      double left_sum = 0.0;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        left_sum += r_[order[p]];
        const std::size_t n_left = p + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        const double a = x_[order[p]][j];
        const double b = x_[order[p + 1]][j];
        if (!(a < b)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / (static_cast<double>(n_left) + lambda) +
                            right_sum * right_sum / (static_cast<double>(n - n_left) + lambda) - parent;
        if (gain > best.gain) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold > a)) threshold = b;
          best = Split{static_cast<int>(j), threshold, gain};
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& r_;
  const GbtConfig& config_;
  std::vector<char> goes_left_;
  RegressionTree tree_;
};

}  // namespace

void validate(const GbtConfig& c) {
  if (c.n_rounds < 1) throw ConfigError("n_rounds", "must be >= 1");
  if (c.max_depth < 1) throw ConfigError("max_depth", "must be >= 1");
  if (!(c.learning_rate > 0.0 && c.learning_rate <= 1.0)) {
    throw ConfigError("learning_rate", "must lie in (0, 1]");
  }
  if (c.min_samples_leaf < 1) throw ConfigError("min_samples_leaf", "must be >= 1");
  if (!(c.subsample > 0.0 && c.subsample <= 1.0)) throw ConfigError("subsample", "must lie in (0, 1]");
  if (!(c.l2_leaf_reg >= 0.0) || !std::isfinite(c.l2_leaf_reg)) {
    throw ConfigError("l2_leaf_reg", "must be a non-negative real");
  }
}

double RegressionTree::evaluate(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return deepest;
}

double GbtModel::predict_partial(std::span<const double> x, std::size_t n_trees) const {
  if (x.size() != feature_schema.size()) {
    throw SchemaError("expected " + std::to_string(feature_schema.size()) + " features, got " +
                      std::to_string(x.size()));
  }
  double sum = 0.0;
  const std::size_t n = std::min(n_trees, trees.size());
  for (std::size_t k = 0; k < n; ++k) sum += trees[k].evaluate(x);
  return base_prediction + config.learning_rate * sum;
}

double GbtModel::predict(std::span<const double> x) const { return predict_partial(x, trees.size()); }

std::vector<double> GbtModel::predict_rows(const std::vector<std::vector<double>>& rows) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r));
  return out;
}

GbtModel fit(const std::vector<std::vector<double>>& rows, std::span<const double> targets,
             std::vector<std::string> feature_schema, const GbtConfig& config) {
  validate(config);
  if (rows.empty()) throw DomainError("cannot fit on an empty dataset");
  if (rows.size() != targets.size()) throw DomainError("feature rows and targets differ in length");
  const std::size_t n_features = feature_schema.size();
  if (n_features == 0) throw SchemaError("feature schema is empty");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n_features) {
      throw SchemaError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                        " features, schema has " + std::to_string(n_features));
    }
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw DataError(i, "non-finite feature value");
    }
    if (!std::isfinite(targets[i])) throw DataError(i, "non-finite target");
  }

  GbtModel model;
  model.config = config;
  model.feature_schema = std::move(feature_schema);
  const std::size_t n = rows.size();
  model.base_prediction = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);

  SortedLists presorted(n_features, std::vector<Index>(n));
  for (std::size_t j = 0; j < n_features; ++j) {
    auto& order = presorted[j];
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return rows[a][j] < rows[b][j]; });
  }

  std::vector<double> prediction(n, model.base_prediction);
  std::vector<double> residual(n);
  std::mt19937_64 rng(config.seed);
  std::vector<Index> pool(n);
  std::vector<char> in_sample(n, 1);
  const auto sample_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(config.subsample * static_cast<double>(n))));

  TreeBuilder builder(rows, residual, config);
  model.trees.reserve(static_cast<std::size_t>(config.n_rounds));
  for (int round = 0; round < config.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - prediction[i];

    SortedLists root;
    if (sample_size == n) {
      root = presorted;
    } else {
      std::iota(pool.begin(), pool.end(), Index{0});
      std::fill(in_sample.begin(), in_sample.end(), 0);
      for (std::size_t k = 0; k < sample_size; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n - 1);
        std::swap(pool[k], pool[pick(rng)]);
        in_sample[pool[k]] = 1;
      }
      root.assign(n_features, {});
      for (std::size_t j = 0; j < n_features; ++j) {
        root[j].reserve(sample_size);
        for (Index i : presorted[j]) {
          if (in_sample[i]) root[j].push_back(i);
        }
      }
    }

    auto tree = builder.build(std::move(root));
    for (std::size_t i = 0; i < n; ++i) prediction[i] += config.learning_rate * tree.evaluate(rows[i]);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

GbtModel fit(const alignment::SupervisedDataset& dataset, const GbtConfig& config) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  x.reserve(dataset.rows.size());
  y.reserve(dataset.rows.size());
  for (const auto& r : dataset.rows) {
    x.push_back(r.features);
    y.push_back(r.target_mbps);
  }
  return fit(x, y, dataset.feature_schema, config);
}

std::string to_json(const GbtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  nlohmann::json doc = {{"format", kFormat},
                        {"version", kVersion},
                        {"feature_schema", model.feature_schema},
                        {"config", config::to_json(model.config)},
                        {"base_prediction", model.base_prediction},
                        {"trees", std::move(trees)}};
  return doc.dump(1);
}

GbtModel from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw SchemaError("not a GBT model document");
    if (doc.at("version").get<int>() != kVersion) {
      throw SchemaError("unsupported model version " + doc.at("version").dump());
    }
    GbtModel m;
    m.feature_schema = doc.at("feature_schema").get<std::vector<std::string>>();
    m.config = config::gbt_from_json(doc.at("config"));
    m.base_prediction = doc.at("base_prediction").get<double>();
    const auto n_features = static_cast<int>(m.feature_schema.size());
    for (const auto& jt : doc.at("trees")) {
      RegressionTree tree;
      for (const auto& jn : jt) {
        TreeNode n;
        if (jn.contains("value")) {
          n.value = jn.at("value").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        tree.nodes.push_back(n);
      }
      const auto size = static_cast<int>(tree.nodes.size());
      for (int i = 0; i < size; ++i) {
        const auto& n = tree.nodes[static_cast<std::size_t>(i)];
        if (n.is_leaf()) continue;
        if (n.feature >= n_features) throw SchemaError("split feature index out of range");
        if (n.left <= i || n.right <= i || n.left >= size || n.right >= size) {
          throw SchemaError("malformed tree: child index out of range");
        }
      }
      if (tree.nodes.empty()) throw SchemaError("tree without nodes");
      m.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace pqos::gbt
