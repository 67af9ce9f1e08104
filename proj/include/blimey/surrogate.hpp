#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blimey/core.hpp"

#include "json.hpp"

namespace blimey {

/// Width of the exponential distance kernel.
struct KernelSpec {
  double width = 1.0;
};

/// L2 distance from every sample row to x.
std::vector<double> euclidean_distances(const Matrix& sample, const DataPoint& x);

/// w = sqrt(exp(-d^2 / width^2)); 1 at distance 0, strictly decreasing.
std::vector<double> exponential_kernel(const std::vector<double>& distances,
                                       const KernelSpec& kernel);

/// Weighted ridge fit: coefficients are the local importances.
struct LinearSurrogate {
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::vector<std::string> feature_names;
  int target_class = 0;
  /// 2-norm condition number of the regularized normal matrix. Large values
  /// flag strongly dependent features (no threshold is enforced; the
  /// importances of near-collinear features are split arbitrarily).
  double condition_number = 1.0;

  double predict(std::span<const double> x) const;
  std::vector<double> predict_rows(const Matrix& X) const;
};

/// Minimizes sum_i w_i (y_i - beta.x_i - b)^2 + alpha * |beta|^2 with an
/// unpenalized intercept, solved by normal equations + Cholesky. Weights are
/// rescaled to mean 1 first, so uniform weights reduce to the unweighted fit
/// and scaling all weights leaves the solution unchanged.
LinearSurrogate fit_weighted_ridge(const Matrix& X, const std::vector<double>& y,
                                   const std::vector<double>& w, double alpha);

/// Columns shifted to zero mean and unit population deviation (constant
/// columns keep scale 1). Raw tabular features pass through this before a
/// linear fit, which makes the coefficients comparable and cancels any
/// pre-scaling of an input column.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
  Matrix transformed;

  double apply(std::size_t column, double value) const {
    return (value - mean[column]) / scale[column];
  }
};

Standardization standardize_columns(const Matrix& X);

/// First K features to enter the active set of a weighted L1 path
/// (coordinate descent over a geometric grid of 100 penalties from the
/// all-zero lambda down to 1e-4 of it). Features entering at the same grid
/// step rank by larger |coefficient|, then lower index; if the path runs out
/// the remainder fills with the lowest unused indices.
std::vector<std::size_t> k_lasso(const Matrix& X, const std::vector<double>& y,
                                 const std::vector<double>& w, std::size_t K);

/// CART regression tree: greedy weighted-SSE splits, exhaustive over features
/// and midpoints between consecutive distinct values, leaves predicting the
/// weighted mean. Left branch is "<= threshold".
struct TreeSurrogate {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;   // leaf prediction
    double weight = 0.0;  // leaf training weight
  };

  std::vector<Node> nodes;
  std::size_t max_depth = 0;
  std::size_t n_features = 0;
  int target_class = 0;

  double predict(std::span<const double> x) const;
  std::vector<double> predict_rows(const Matrix& X) const;
  /// Node index of the leaf x falls into.
  std::size_t leaf_of(std::span<const double> x) const;
};

TreeSurrogate fit_tree_regressor(const Matrix& X, const std::vector<double>& y,
                                 const std::vector<double>& w, std::size_t max_depth,
                                 std::size_t min_samples_leaf);

/// One interval condition on a feature; adjacent path conditions on the same
/// feature merge into this form ("0.295 < f <= 0.528").
struct RuleCondition {
  std::size_t feature = 0;
  std::optional<double> lower;  // strict: value > lower
  std::optional<double> upper;  // inclusive: value <= upper

  std::string text(const std::vector<std::string>& names) const;
};

/// A leaf of the surrogate tree: the merged conjunction selecting it, its
/// prediction and its share of the training weight.
struct Rule {
  std::vector<RuleCondition> conditions;
  double prediction = 0.0;
  double weight = 0.0;
};

/// The end product: per-feature importances or the rule view of a tree,
/// plus the local-fit diagnostic and enough provenance to re-run the pipeline.
struct Explanation {
  enum class Kind { kImportance, kRules };

  Kind kind = Kind::kImportance;
  int target_class = 0;

  // kind == kImportance: (name, weight) ordered by |weight| descending.
  std::vector<std::pair<std::string, double>> importances;
  double intercept = 0.0;
  double condition_number = 1.0;  // of the linear fit's normal matrix

  // kind == kRules: the explained point's conjunction and the full partition.
  std::vector<RuleCondition> point_conditions;
  double point_prediction = 0.0;
  std::vector<Rule> partition;
  std::vector<std::string> feature_names;

  double fidelity = 0.0;
  nlohmann::ordered_json provenance;

  nlohmann::ordered_json to_json() const;
};

/// Rule view of a tree surrogate at x: the root-to-leaf conjunction with
/// per-feature conditions merged into intervals, plus every leaf's rule.
Explanation tree_rules(const TreeSurrogate& tree, const DataPoint& x,
                       const std::vector<std::string>& names);

/// Weighted R^2 of surrogate outputs against black-box outputs; 1 is perfect
/// local mimicry. Throws DegenerateSampleError when the black-box outputs
/// carry no weighted variance (locally constant model).
double fidelity(const std::vector<double>& predictions_surrogate,
                const std::vector<double>& predictions_blackbox,
                const std::vector<double>& w);

}  // namespace blimey
