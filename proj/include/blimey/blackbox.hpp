#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blimey/core.hpp"

#include "json.hpp"

namespace blimey {

/// A black-box probabilistic classifier: points in the original domain in,
/// class-probability rows out. Rows are nonnegative and sum to 1 (1e-9).
class ProbabilisticModel {
 public:
  virtual ~ProbabilisticModel() = default;

  virtual std::size_t n_classes() const = 0;
  virtual std::size_t n_features() const = 0;

  /// One probability row per input row; throws WidthMismatchError when the
  /// point width differs from n_features. Empty input gives an empty matrix.
  virtual Matrix predict_proba(const Matrix& points) const = 0;

  /// Short text identifying the model for explanation provenance.
  virtual std::string identifier() const = 0;
};

/// Argmax class per row; ties resolve to the lowest class index.
std::vector<int> predict_class(const ProbabilisticModel& model, const Matrix& points);

struct RandomForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_samples_split = 2;
  /// Features examined per split; nullopt means floor(sqrt(n_features)).
  std::optional<std::size_t> features_per_split;
  /// Bootstrap resampling (size n_rows). Off fits every tree on the full data.
  bool bootstrap = true;
};

/// Bagged CART classification trees: Gini impurity splits over a random
/// feature subset, midpoint thresholds, leaves holding class counts.
/// Training is deterministic given the stream; each tree draws its own seed
/// from the stream up front, so per-tree work could be parallelised without
/// changing the result.
class RandomForest : public ProbabilisticModel {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> class_counts;  // leaf only
  };
  using Tree = std::vector<Node>;

  std::size_t n_classes() const override { return n_classes_; }
  std::size_t n_features() const override { return n_features_; }
  Matrix predict_proba(const Matrix& points) const override;
  std::string identifier() const override;

  std::size_t n_trees() const { return trees_.size(); }
  /// Probability rows from a single member tree.
  Matrix predict_proba_tree(std::size_t tree, const Matrix& points) const;

  nlohmann::ordered_json to_json() const;
  static RandomForest from_json(const nlohmann::json& j);

  friend RandomForest train_random_forest(const TabularDataset&,
                                          const RandomForestConfig&, RandomStream&);

 private:
  std::vector<double> leaf_distribution(const Tree& tree,
                                        std::span<const double> point) const;

  std::size_t n_features_ = 0;
  std::size_t n_classes_ = 0;
  RandomForestConfig config_;
  std::uint64_t train_seed_ = 0;
  std::vector<Tree> trees_;
};

/// Trains the forest on a labelled dataset. Throws MissingLabelsError when
/// the dataset has no labels and SingleClassError when only one class occurs.
RandomForest train_random_forest(const TabularDataset& dataset,
                                 const RandomForestConfig& config, RandomStream& rng);

}  // namespace blimey
