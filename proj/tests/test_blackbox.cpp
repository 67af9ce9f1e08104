#include "blimey/blackbox.hpp"

#include <cmath>

#include "doctest.h"

using namespace blimey;

namespace {

Matrix all_rows(const TabularDataset& ds) { return ds.rows; }

double training_accuracy(const RandomForest& forest, const TabularDataset& ds) {
  const auto predicted = predict_class(forest, all_rows(ds));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (predicted[i] == (*ds.labels)[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.n_rows());
}

/// Wraps a model, applying a strictly monotone map to every probability.
class MonotoneRescale : public ProbabilisticModel {
 public:
  explicit MonotoneRescale(const ProbabilisticModel& inner) : inner_(&inner) {}
  std::size_t n_classes() const override { return inner_->n_classes(); }
  std::size_t n_features() const override { return inner_->n_features(); }
  std::string identifier() const override { return "rescaled"; }
  Matrix predict_proba(const Matrix& points) const override {
    Matrix p = inner_->predict_proba(points);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      for (std::size_t j = 0; j < p.cols(); ++j) {
        p(i, j) = std::exp(3.0 * p(i, j));  // strictly increasing
      }
    }
    return p;
  }

 private:
  const ProbabilisticModel* inner_;
};

}  // namespace

TEST_CASE("forest learns iris") {
  const TabularDataset iris = builtin_iris();
  RandomStream rng(1, "forest");
  const RandomForest forest = train_random_forest(iris, {}, rng);

  SUBCASE("training accuracy is high") {
    CHECK(training_accuracy(forest, iris) >= 0.95);
  }
  SUBCASE("probability rows are normalized and nonnegative") {
    const Matrix proba = forest.predict_proba(all_rows(iris));
    for (std::size_t i = 0; i < proba.rows(); ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < proba.cols(); ++c) {
        CHECK(proba(i, c) >= 0.0);
        sum += proba(i, c);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
  SUBCASE("setosa centroid is predicted with high confidence") {
    Matrix centroid(1, 4);
    std::size_t count = 0;
    for (std::size_t i = 0; i < iris.n_rows(); ++i) {
      if ((*iris.labels)[i] != 0) continue;
      for (std::size_t j = 0; j < 4; ++j) centroid(0, j) += iris.rows(i, j);
      ++count;
    }
    for (std::size_t j = 0; j < 4; ++j) centroid(0, j) /= static_cast<double>(count);
    const Matrix proba = forest.predict_proba(centroid);
    double max_p = 0.0;
    for (std::size_t c = 0; c < 3; ++c) max_p = std::max(max_p, proba(0, c));
    CHECK(max_p >= 0.9);
  }
  SUBCASE("same seed trains an identical forest") {
    RandomStream rng_b(1, "forest");
    const RandomForest again = train_random_forest(iris, {}, rng_b);
    CHECK(again.predict_proba(all_rows(iris)) == forest.predict_proba(all_rows(iris)));
  }
  SUBCASE("empty point list gives an empty matrix") {
    const Matrix empty = forest.predict_proba(Matrix(0, 0));
    CHECK(empty.rows() == 0);
    CHECK(empty.cols() == 3);
  }
  SUBCASE("width mismatch is rejected") {
    CHECK_THROWS_AS(forest.predict_proba(Matrix(1, 2)), WidthMismatchError);
  }
}

TEST_CASE("training rejects degenerate datasets") {
  TabularDataset ds = builtin_iris();
  RandomStream rng(1, "forest");
  SUBCASE("no labels") {
    ds.labels.reset();
    ds.class_names.reset();
    CHECK_THROWS_AS(train_random_forest(ds, {}, rng), MissingLabelsError);
  }
  SUBCASE("single class") {
    for (auto& label : *ds.labels) label = 1;
    CHECK_THROWS_AS(train_random_forest(ds, {}, rng), SingleClassError);
  }
}

TEST_CASE("predict_class is the argmax with low-index ties") {
  const TabularDataset iris = builtin_iris();
  RandomStream rng(3, "forest");
  const RandomForest forest = train_random_forest(iris, {10, 4, 2, {}, true}, rng);

  SUBCASE("agreement with an explicit argmax on random points") {
    RandomStream points_rng(11, "points");
    Matrix points(1000, 4);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        points(i, j) = 8.0 * points_rng.next_uniform();
      }
    }
    const Matrix proba = forest.predict_proba(points);
    const auto classes = predict_class(forest, points);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      int best = 0;
      for (int c = 1; c < 3; ++c) {
        if (proba(i, c) > proba(i, best)) best = c;  // strict: ties keep low index
      }
      CHECK(classes[i] == best);
    }
  }
  SUBCASE("argmax is invariant under a monotone rescale of every row") {
    RandomStream points_rng(13, "points");
    Matrix points(200, 4);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        points(i, j) = 8.0 * points_rng.next_uniform();
      }
    }
    const MonotoneRescale rescaled(forest);
    CHECK(predict_class(forest, points) == predict_class(rescaled, points));
  }
}

TEST_CASE("a one-tree forest without bagging is that tree") {
  const TabularDataset iris = builtin_iris();
  RandomStream rng(5, "forest");
  RandomForestConfig config;
  config.n_trees = 1;
  config.bootstrap = false;
  config.features_per_split = 4;
  const RandomForest forest = train_random_forest(iris, config, rng);
  CHECK(forest.n_trees() == 1);
  CHECK(forest.predict_proba(iris.rows) == forest.predict_proba_tree(0, iris.rows));
}

TEST_CASE("model JSON round-trips predictions") {
  const TabularDataset iris = builtin_iris();
  RandomStream rng(8, "forest");
  const RandomForest forest = train_random_forest(iris, {20, 6, 2, {}, true}, rng);
  const RandomForest back = RandomForest::from_json(forest.to_json());
  CHECK(back.predict_proba(iris.rows) == forest.predict_proba(iris.rows));
  CHECK(back.identifier() == forest.identifier());
}
