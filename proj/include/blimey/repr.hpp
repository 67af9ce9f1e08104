#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blimey/core.hpp"

#include "json.hpp"

namespace blimey {

/// Per-bin statistics fitted from the training rows that fell in the bin.
struct BinStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;  // 0 marks an empty bin
};

/// Fitted transform between the original domain and the discretized domain:
/// each numerical feature becomes the index of its quantile bin, categorical
/// features pass through. Bins are left-closed, right-open, with the top bin
/// open above; the randomized inverse draws from a per-bin clipped normal and
/// never leaves the bin.
class Discretizer {
 public:
  struct Feature {
    bool pass_through = false;        // categorical
    std::vector<double> boundaries;   // strictly increasing; empty = single bin
    std::vector<BinStats> bins;       // boundaries.size() + 1 entries
    double data_min = 0.0;            // training extrema, clip the outer bins
    double data_max = 0.0;
  };

  /// Fits quantile boundaries (default quartiles) and per-bin statistics.
  /// Duplicate quantiles merge, so a feature may end up with fewer bins; a
  /// constant feature collapses to one bin and adds a warning record.
  static Discretizer fit(const TabularDataset& dataset, std::size_t bins_per_feature = 4);

  /// Original point -> bin indices (categoricals unchanged).
  DataPoint discretize(const DataPoint& x) const;

  /// Randomized inverse: per numerical feature a draw from
  /// Normal(bin mean, bin std) clipped into the bin (outer bins clip at the
  /// training extrema). Re-discretizing the result always lands in the same
  /// bin. Throws EmptyBinError for a bin with no fitted statistics.
  DataPoint undiscretize(const DataPoint& x_hat, RandomStream& rng) const;

  std::size_t n_features() const { return per_feature_.size(); }
  /// Bin count of a numerical feature, category count of a categorical one.
  std::size_t n_bins(std::size_t feature) const;
  const Feature& feature(std::size_t j) const { return per_feature_[j]; }
  const std::vector<FeatureMetadata>& feature_metadata() const { return metadata_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  nlohmann::ordered_json to_json() const;
  static Discretizer from_json(const nlohmann::json& j);

 private:
  std::vector<Feature> per_feature_;
  std::vector<FeatureMetadata> metadata_;
  std::vector<std::string> warnings_;
};

/// One-hot encoding of the discretized domain. Column `offset(j) + b` is 1
/// exactly when feature j sits in bin b; every column carries a readable
/// condition string ("2 <= x1 < 7", "x2 >= 0", "colour = red").
class Binarizer {
 public:
  static Binarizer fit(const Discretizer& disc);

  DataPoint binarize(const DataPoint& x_hat) const;
  Matrix binarize_rows(const Matrix& x_hat_rows) const;

  /// One-hot inverse; throws DecodeError unless every group has exactly one
  /// set bit.
  DataPoint decode(const DataPoint& x_prime) const;

  std::size_t width() const { return names_.size(); }
  std::size_t n_groups() const { return offsets_.size(); }
  std::size_t offset(std::size_t feature) const { return offsets_[feature]; }
  std::size_t group_size(std::size_t feature) const { return sizes_[feature]; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> sizes_;
  std::vector<std::string> names_;
};

/// Columns of the binary domain kept after dropping the explained point's
/// zero-valued interpretable features.
struct ReducedSpace {
  std::vector<std::size_t> kept_indices;  // strictly increasing
  std::vector<std::string> names;         // kept interpretable names
};

/// Removes every column where the explained binary point is 0 from both the
/// point's space and the sample. `names`, when given, must match the binary
/// width and provides the kept-column names.
std::pair<ReducedSpace, Matrix> drop_zero_features(
    const DataPoint& x_prime_explained, const Matrix& sample,
    const std::vector<std::string>& names = {});

/// Elementwise XNOR of every sample row against the explained point
/// (1 if same, 0 if different). Inputs must be binary.
Matrix xnor_transform(const DataPoint& x_explained, const Matrix& sample);

/// Bag-of-words over a single sentence: vocabulary in first-occurrence order,
/// presence encoding, and decoding that drops the 0-marked words.
class BagOfWords {
 public:
  static BagOfWords fit(const std::string& sentence);

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

  /// Presence of each vocabulary word in `sentence` (binary domain).
  DataPoint encode(const std::string& sentence) const;

  /// The fitted sentence with every word whose bit is 0 removed.
  std::string decode(const DataPoint& x_prime) const;

 private:
  std::vector<std::string> vocabulary_;  // lowercased, unique
  std::vector<std::string> tokens_;      // fitted sentence tokens, original case
  std::vector<std::size_t> token_ids_;   // vocabulary index per token
};

}  // namespace blimey
