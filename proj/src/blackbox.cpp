#include "blimey/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace blimey {

std::vector<int> predict_class(const ProbabilisticModel& model, const Matrix& points) {
  const Matrix proba = model.predict_proba(points);
  std::vector<int> classes(proba.rows());
  for (std::size_t i = 0; i < proba.rows(); ++i) {
    const auto row = proba.row(i);
    classes[i] = static_cast<int>(
        std::max_element(row.begin(), row.end()) - row.begin());
  }
  return classes;
}

namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0) return 0.0;
  double g = 1.0;
  for (double c : counts) {
    const double p = c / total;
    g -= p * p;
  }
  return g;
}

struct TreeBuilder {
  const TabularDataset& dataset;
  const RandomForestConfig& config;
  std::size_t n_classes;
  std::size_t features_per_split;
  RandomStream rng;
  RandomForest::Tree nodes;

  std::vector<double> count_labels(const std::vector<std::size_t>& rows) const {
    std::vector<double> counts(n_classes, 0.0);
    for (std::size_t r : rows) counts[(*dataset.labels)[r]] += 1.0;
    return counts;
  }

  int make_leaf(const std::vector<std::size_t>& rows) {
    nodes.push_back({-1, 0.0, -1, -1, count_labels(rows)});
    return static_cast<int>(nodes.size() - 1);
  }

  std::vector<std::size_t> draw_feature_subset() {
    const std::size_t d = dataset.n_features();
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < features_per_split; ++i) {
      std::swap(all[i], all[i + rng.next_index(d - i)]);
    }
    all.resize(features_per_split);
    std::sort(all.begin(), all.end());  // deterministic split scan order
    return all;
  }

  int build(const std::vector<std::size_t>& rows, std::size_t depth) {
    const auto counts = count_labels(rows);
    const bool pure =
        std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
    if (pure || depth >= config.max_depth || rows.size() < config.min_samples_split) {
      return make_leaf(rows);
    }

    const auto candidates = draw_feature_subset();
    double best_impurity = std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t j : candidates) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {dataset.rows(rows[i], j), (*dataset.labels)[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      std::vector<double> left(n_classes, 0.0);
      std::vector<double> right = counts;
      const double total = static_cast<double>(rows.size());
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left[column[i].second] += 1.0;
        right[column[i].second] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double n_left = static_cast<double>(i + 1);
        const double n_right = total - n_left;
        const double impurity =
            (n_left * gini(left, n_left) + n_right * gini(right, n_right)) / total;
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = j;
          best_threshold = (column[i].first + column[i + 1].first) / 2.0;
        }
      }
    }
    if (!std::isfinite(best_impurity)) return make_leaf(rows);  // all candidates constant

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (dataset.rows(r, best_feature) <= best_threshold ? left_rows : right_rows)
          .push_back(r);
    }
    const int index = static_cast<int>(nodes.size());
    nodes.push_back({static_cast<int>(best_feature), best_threshold, -1, -1, {}});
    nodes[index].left = build(left_rows, depth + 1);
    nodes[index].right = build(right_rows, depth + 1);
    return index;
  }
};

}  // namespace

RandomForest train_random_forest(const TabularDataset& dataset,
                                 const RandomForestConfig& config, RandomStream& rng) {
  if (!dataset.labels) throw MissingLabelsError("dataset has no labels");
  dataset.validate();
  if (config.n_trees < 1 || config.max_depth < 1 || config.min_samples_split < 2) {
    throw ConfigError("forest-config",
                      "need n_trees >= 1, max_depth >= 1, min_samples_split >= 2");
  }
  const std::set<int> distinct(dataset.labels->begin(), dataset.labels->end());
  if (distinct.size() < 2) {
    throw SingleClassError("dataset holds a single class; forest would be degenerate");
  }

  RandomForest forest;
  forest.n_features_ = dataset.n_features();
  forest.n_classes_ = dataset.n_classes();
  forest.config_ = config;
  forest.train_seed_ = rng.seed();

  std::size_t k = config.features_per_split.value_or(static_cast<std::size_t>(
      std::floor(std::sqrt(static_cast<double>(dataset.n_features())))));
  k = std::clamp<std::size_t>(k, 1, dataset.n_features());

  // Per-tree seeds are fixed before any training so the tree order (or a
  // parallel schedule) cannot change the result.
  std::vector<std::uint64_t> tree_seeds(config.n_trees);
  for (auto& s : tree_seeds) s = rng.next_u64();

  for (std::size_t t = 0; t < config.n_trees; ++t) {
    TreeBuilder builder{dataset, config, forest.n_classes_, k,
                        RandomStream(tree_seeds[t], "tree"), {}};
    std::vector<std::size_t> rows(dataset.n_rows());
    if (config.bootstrap) {
      for (auto& r : rows) r = builder.rng.next_index(dataset.n_rows());
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    builder.build(rows, 0);
    forest.trees_.push_back(std::move(builder.nodes));
  }
  return forest;
}

std::vector<double> RandomForest::leaf_distribution(const Tree& tree,
                                                    std::span<const double> point) const {
  int i = 0;
  while (tree[i].feature >= 0) {
    i = point[tree[i].feature] <= tree[i].threshold ? tree[i].left : tree[i].right;
  }
  std::vector<double> dist = tree[i].class_counts;
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (double& d : dist) d /= total;
  return dist;
}

Matrix RandomForest::predict_proba(const Matrix& points) const {
  if (points.rows() == 0) return Matrix(0, n_classes_);
  if (points.cols() != n_features_) {
    throw WidthMismatchError("points have width " + std::to_string(points.cols()) +
                             ", model expects " + std::to_string(n_features_));
  }
  Matrix proba(points.rows(), n_classes_);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (const auto& tree : trees_) {
      const auto dist = leaf_distribution(tree, points.row(i));
      for (std::size_t c = 0; c < n_classes_; ++c) proba(i, c) += dist[c];
    }
    for (std::size_t c = 0; c < n_classes_; ++c) {
      proba(i, c) /= static_cast<double>(trees_.size());
    }
  }
  return proba;
}

Matrix RandomForest::predict_proba_tree(std::size_t tree, const Matrix& points) const {
  if (points.cols() != n_features_ && points.rows() > 0) {
    throw WidthMismatchError("points have width " + std::to_string(points.cols()) +
                             ", model expects " + std::to_string(n_features_));
  }
  Matrix proba(points.rows(), n_classes_);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto dist = leaf_distribution(trees_.at(tree), points.row(i));
    for (std::size_t c = 0; c < n_classes_; ++c) proba(i, c) = dist[c];
  }
  return proba;
}

std::string RandomForest::identifier() const {
  return "random_forest(n_trees=" + std::to_string(config_.n_trees) +
         ",max_depth=" + std::to_string(config_.max_depth) +
         ",seed=" + std::to_string(train_seed_) + ")";
}

nlohmann::ordered_json RandomForest::to_json() const {
  nlohmann::ordered_json j;
  j["type"] = "random_forest";
  j["n_features"] = n_features_;
  j["n_classes"] = n_classes_;
  j["train_seed"] = train_seed_;
  j["config"] = {{"n_trees", config_.n_trees},
                 {"max_depth", config_.max_depth},
                 {"min_samples_split", config_.min_samples_split},
                 {"bootstrap", config_.bootstrap}};
  if (config_.features_per_split) {
    j["config"]["features_per_split"] = *config_.features_per_split;
  }
  j["trees"] = nlohmann::ordered_json::array();
  for (const auto& tree : trees_) {
    nlohmann::ordered_json jt = nlohmann::ordered_json::array();
    for (const auto& node : tree) {
      if (node.feature < 0) {
        jt.push_back({{"counts", node.class_counts}});
      } else {
        jt.push_back({{"feature", node.feature},
                      {"threshold", node.threshold},
                      {"left", node.left},
                      {"right", node.right}});
      }
    }
    j["trees"].push_back(std::move(jt));
  }
  return j;
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  if (j.at("type").get<std::string>() != "random_forest") {
    throw ValueParseError("model file is not a random_forest dump");
  }
  RandomForest forest;
  forest.n_features_ = j.at("n_features").get<std::size_t>();
  forest.n_classes_ = j.at("n_classes").get<std::size_t>();
  forest.train_seed_ = j.value("train_seed", 0ull);
  const auto& jc = j.at("config");
  forest.config_.n_trees = jc.at("n_trees").get<std::size_t>();
  forest.config_.max_depth = jc.at("max_depth").get<std::size_t>();
  forest.config_.min_samples_split = jc.at("min_samples_split").get<std::size_t>();
  forest.config_.bootstrap = jc.value("bootstrap", true);
  if (jc.contains("features_per_split")) {
    forest.config_.features_per_split = jc["features_per_split"].get<std::size_t>();
  }
  for (const auto& jt : j.at("trees")) {
    Tree tree;
    for (const auto& jn : jt) {
      Node node;
      if (jn.contains("counts")) {
        node.class_counts = jn["counts"].get<std::vector<double>>();
      } else {
        node.feature = jn.at("feature").get<int>();
        node.threshold = jn.at("threshold").get<double>();
        node.left = jn.at("left").get<int>();
        node.right = jn.at("right").get<int>();
      }
      tree.push_back(std::move(node));
    }
    forest.trees_.push_back(std::move(tree));
  }
  return forest;
}

}  // namespace blimey
