#pragma once

#include <string>

#include "blimey/blackbox.hpp"

namespace blimey::testing {

/// Two-class model: class 1 iff the chosen feature exceeds the threshold.
class ThresholdModel : public ProbabilisticModel {
 public:
  ThresholdModel(std::size_t n_features, std::size_t feature, double threshold)
      : n_features_(n_features), feature_(feature), threshold_(threshold) {}

  std::size_t n_classes() const override { return 2; }
  std::size_t n_features() const override { return n_features_; }
  std::string identifier() const override {
    return "threshold(feature=" + std::to_string(feature_) + ")";
  }
  Matrix predict_proba(const Matrix& points) const override {
    if (points.rows() > 0 && points.cols() != n_features_) {
      throw WidthMismatchError("threshold model width mismatch");
    }
    Matrix p(points.rows(), 2);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      const bool above = points(i, feature_) > threshold_;
      p(i, 0) = above ? 0.05 : 0.95;
      p(i, 1) = above ? 0.95 : 0.05;
    }
    return p;
  }

 private:
  std::size_t n_features_;
  std::size_t feature_;
  double threshold_;
};

/// Predicts one class everywhere.
class ConstantModel : public ProbabilisticModel {
 public:
  explicit ConstantModel(std::size_t n_features, std::size_t n_classes = 2)
      : n_features_(n_features), n_classes_(n_classes) {}

  std::size_t n_classes() const override { return n_classes_; }
  std::size_t n_features() const override { return n_features_; }
  std::string identifier() const override { return "constant"; }
  Matrix predict_proba(const Matrix& points) const override {
    Matrix p(points.rows(), n_classes_);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      p(i, 0) = 1.0;
    }
    return p;
  }

 private:
  std::size_t n_features_;
  std::size_t n_classes_;
};

}  // namespace blimey::testing
