#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blimey/errors.hpp"

namespace blimey {

/// The space a point or sample lives in.
enum class Domain { kOriginal, kDiscretized, kBinary };

enum class FeatureKind { kNumerical, kCategorical };

struct FeatureMetadata {
  std::string name;
  FeatureKind kind = FeatureKind::kNumerical;
  /// Category codes in declaration order; categorical values are stored as
  /// indices into this list. Empty for numerical features.
  std::vector<std::string> categories;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A single point tagged with the domain its values live in.
struct DataPoint {
  std::vector<double> values;
  Domain domain = Domain::kOriginal;

  std::size_t size() const { return values.size(); }
  bool operator==(const DataPoint&) const = default;
};

/// Rows in the original domain with per-feature metadata and optional labels.
struct TabularDataset {
  std::vector<FeatureMetadata> features;
  Matrix rows;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<std::string>> class_names;

  std::size_t n_rows() const { return rows.rows(); }
  std::size_t n_features() const { return features.size(); }
  std::size_t n_classes() const { return class_names ? class_names->size() : 0; }

  /// Row `i` as an original-domain point.
  DataPoint point(std::size_t i) const;

  /// Index of the feature named `name`; throws MetadataMismatchError if absent.
  std::size_t feature_index(const std::string& name) const;

  /// Checks the structural invariants (unique names, category ranges, label
  /// ranges, at least one row) and throws on violation.
  void validate() const;
};

/// Deterministic, platform-independent random stream.
///
/// The sequence is a pure function of (seed, label): the label is hashed
/// (FNV-1a) into the seed and the result expanded with SplitMix64 into
/// xoshiro256++ state. Distinct labels on one seed give decorrelated
/// streams, which keeps independent randomness sources (sampling,
/// reconstruction, tree training) from aliasing each other.
///
/// Single consumer: concurrent users must each own a stream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string label);

  std::uint64_t next_u64();
  /// Uniform draw in [0, 1) with 53 random bits.
  double next_uniform();
  /// Standard normal draw (polar Box-Muller, spare cached).
  double next_gaussian();
  /// Uniform integer in [0, n); n must be positive.
  std::size_t next_index(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::string label_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Loads a dataset from a CSV file (header row, "." decimals, UTF-8) and a
/// metadata JSON file declaring each column's kind. Categorical values map
/// to their index in the declared category order; row order is preserved.
TabularDataset load_dataset(const std::filesystem::path& csv_path,
                            const std::filesystem::path& metadata_path);

/// Writes the dataset back to the CSV + metadata pair accepted by
/// load_dataset; load_dataset(save_dataset(d)) == d.
void save_dataset(const TabularDataset& dataset,
                  const std::filesystem::path& csv_path,
                  const std::filesystem::path& metadata_path);

/// The 150-row Fisher Iris table: four numerical features (cm), three classes.
TabularDataset builtin_iris();

/// Two interleaved half-circle arcs with `n` points split between them
/// (outer arc (cos t, sin t) labelled 0, inner arc (1 - cos t, 0.5 - sin t)
/// labelled 1, t evenly spaced over [0, pi]) plus isotropic Gaussian noise
/// of standard deviation `noise`.
TabularDataset make_two_moons(std::size_t n, double noise, RandomStream& rng);

}  // namespace blimey
