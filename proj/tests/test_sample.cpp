#include "blimey/sample.hpp"

#include <cmath>
#include <set>

#include "doctest.h"
#include "stub_models.hpp"

using namespace blimey;
using blimey::testing::ConstantModel;
using blimey::testing::ThresholdModel;

namespace {

TabularDataset two_column(const std::vector<std::array<double, 2>>& rows) {
  TabularDataset ds;
  ds.features = {{"a", FeatureKind::kNumerical, {}}, {"b", FeatureKind::kNumerical, {}}};
  ds.rows = Matrix(rows.size(), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.rows(i, 0) = rows[i][0];
    ds.rows(i, 1) = rows[i][1];
  }
  return ds;
}

double feature_std(const TabularDataset& ds, std::size_t j) {
  double sum = 0.0, sq = 0.0;
  const double n = static_cast<double>(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    sum += ds.rows(i, j);
    sq += ds.rows(i, j) * ds.rows(i, j);
  }
  return std::sqrt(std::max(0.0, sq / n - (sum / n) * (sum / n)));
}

}  // namespace

TEST_CASE("normal sampling around a point") {
  const TabularDataset iris = builtin_iris();
  const DataPoint x = iris.point(0);

  SUBCASE("per-feature means stay close to x") {
    RandomStream rng(1, "sampler");
    const Sample s = sample_normal(iris, x, 150, rng);
    CHECK(s.domain == Domain::kOriginal);
    REQUIRE(s.points.rows() == 150);
    for (std::size_t j = 0; j < 4; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < 150; ++i) mean += s.points(i, j) / 150.0;
      const double sigma = feature_std(iris, j);
      CHECK(std::abs(mean - x.values[j]) <= 3.0 * sigma / std::sqrt(150.0));
    }
  }
  SUBCASE("constant feature pins every sample to x") {
    const TabularDataset flat = two_column({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}});
    RandomStream rng(2, "sampler");
    const Sample s = sample_normal(flat, {{5.0, 2.0}, Domain::kOriginal}, 50, rng);
    for (std::size_t i = 0; i < 50; ++i) CHECK(s.points(i, 0) == 5.0);
  }
  SUBCASE("fixed seed reproduces the matrix") {
    RandomStream a(3, "sampler"), b(3, "sampler");
    CHECK(sample_normal(iris, x, 50, a).points == sample_normal(iris, x, 50, b).points);
  }
  SUBCASE("categorical features draw from category frequencies") {
    TabularDataset ds;
    ds.features = {{"c", FeatureKind::kCategorical, {"p", "q"}}};
    ds.rows = Matrix(4, 1);
    ds.rows(1, 0) = 1.0;  // frequencies: p 3/4, q 1/4
    RandomStream rng(4, "sampler");
    const Sample s = sample_normal(ds, {{0.0}, Domain::kOriginal}, 4000, rng);
    double ones = 0.0;
    for (std::size_t i = 0; i < s.points.rows(); ++i) ones += s.points(i, 0);
    CHECK(ones / 4000.0 == doctest::Approx(0.25).epsilon(0.15));
  }
}

TEST_CASE("truncated normal sampling") {
  const TabularDataset iris = builtin_iris();
  SUBCASE("all outputs sit inside the per-feature data range") {
    RandomStream rng(5, "sampler");
    const Sample s = sample_truncated_normal(iris, iris.point(0), 300, rng);
    for (std::size_t j = 0; j < 4; ++j) {
      double lo = iris.rows(0, j), hi = lo;
      for (std::size_t i = 0; i < iris.n_rows(); ++i) {
        lo = std::min(lo, iris.rows(i, j));
        hi = std::max(hi, iris.rows(i, j));
      }
      for (std::size_t i = 0; i < s.points.rows(); ++i) {
        CHECK(s.points(i, j) >= lo);
        CHECK(s.points(i, j) <= hi);
      }
    }
  }
  SUBCASE("a point at the feature maximum piles mass on the bound") {
    // x at the sepal-length max: around half of the draws clip to it.
    DataPoint x = iris.point(0);
    double hi = iris.rows(0, 0);
    for (std::size_t i = 0; i < iris.n_rows(); ++i) hi = std::max(hi, iris.rows(i, 0));
    x.values[0] = hi;
    RandomStream rng(6, "sampler");
    const Sample s = sample_truncated_normal(iris, x, 200, rng);
    std::size_t at_bound = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      CHECK(s.points(i, 0) <= hi);
      if (s.points(i, 0) == hi) ++at_bound;
    }
    CHECK(at_bound > 50);
  }
  SUBCASE("equals plain normal sampling draw-for-draw when nothing clips") {
    // Two far-out rows widen the range enough that no draw reaches a bound.
    std::vector<std::array<double, 2>> rows(200, {0.0, 0.0});
    RandomStream fill(7, "fill");
    for (auto& r : rows) r = {fill.next_gaussian(), fill.next_gaussian()};
    rows[0] = {-1000.0, -1000.0};
    rows[1] = {1000.0, 1000.0};
    const TabularDataset wide = two_column(rows);
    RandomStream a(8, "sampler"), b(8, "sampler");
    const DataPoint x{{0.0, 0.0}, Domain::kOriginal};
    CHECK(sample_truncated_normal(wide, x, 300, a).points ==
          sample_normal(wide, x, 300, b).points);
  }
}

TEST_CASE("mixup sampling") {
  const TabularDataset ds = two_column({{0.0, 0.0}, {1.0, 2.0}, {4.0, -2.0}});
  const DataPoint x{{2.0, 1.0}, Domain::kOriginal};

  SUBCASE("blend endpoints") {
    CHECK(mixup_blend(ds, x, 1, 1.0).values == x.values);
    CHECK(mixup_blend(ds, x, 1, 0.0).values == std::vector<double>{1.0, 2.0});
  }
  SUBCASE("every sample lies on a segment between x and some dataset row") {
    RandomStream rng(9, "sampler");
    const Sample s = sample_mixup(ds, x, 200, rng);
    for (std::size_t i = 0; i < s.points.rows(); ++i) {
      bool on_some_segment = false;
      for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        // Solve for lambda on each feature; membership needs agreement.
        double lambda = -1.0;
        bool consistent = true;
        for (std::size_t j = 0; j < 2 && consistent; ++j) {
          const double denom = x.values[j] - ds.rows(r, j);
          if (std::abs(denom) < 1e-12) continue;
          const double lj = (s.points(i, j) - ds.rows(r, j)) / denom;
          if (lambda < 0.0) {
            lambda = lj;
          } else if (std::abs(lambda - lj) > 1e-9) {
            consistent = false;
          }
        }
        if (consistent && lambda >= -1e-12 && lambda <= 1.0 + 1e-12) {
          on_some_segment = true;
          break;
        }
      }
      CHECK(on_some_segment);
    }
  }
  SUBCASE("categorical features pick x when lambda >= 0.5") {
    TabularDataset cat;
    cat.features = {{"c", FeatureKind::kCategorical, {"u", "v"}}};
    cat.rows = Matrix(2, 1);
    cat.rows(1, 0) = 1.0;
    CHECK(mixup_blend(cat, {{1.0}, Domain::kOriginal}, 0, 0.7).values[0] == 1.0);
    CHECK(mixup_blend(cat, {{1.0}, Domain::kOriginal}, 0, 0.3).values[0] == 0.0);
  }
}

TEST_CASE("growing spheres finds the boundary") {
  const ThresholdModel model(2, 0, 1.0);
  const DataPoint x{{0.0, 0.0}, Domain::kOriginal};

  SUBCASE("reaches past the boundary and keeps every shell") {
    RandomStream rng(10, "sampler");
    const Sample s = sample_growing_spheres(model, x, 100, rng, 0.1, 2.0, 20);
    REQUIRE(s.points.rows() >= 100);
    CHECK(s.points.rows() % 100 == 0);

    const auto classes = predict_class(model, s.points);
    CHECK(std::set<int>(classes.begin(), classes.end()).size() == 2);

    // Radii grow 0.1, 0.2, ...; the first radius past the threshold is 1.6.
    const std::size_t rounds = s.points.rows() / 100;
    const double final_radius = 0.1 * std::pow(2.0, static_cast<double>(rounds - 1));
    CHECK(final_radius > 1.0);
    CHECK(0.1 * std::pow(2.0, static_cast<double>(rounds) - 2.0) <= 1.0);
    for (std::size_t i = 0; i < s.points.rows(); ++i) {
      CHECK(std::hypot(s.points(i, 0), s.points(i, 1)) <= final_radius + 1e-9);
    }
  }
  SUBCASE("constant model exhausts the rounds") {
    const ConstantModel constant(2);
    RandomStream rng(11, "sampler");
    CHECK_THROWS_AS(sample_growing_spheres(constant, x, 20, rng, 0.1, 2.0, 5),
                    NoBoundaryError);
  }
}

TEST_CASE("class discovery sampling") {
  std::vector<std::array<double, 2>> rows;
  RandomStream fill(12, "fill");
  for (int i = 0; i < 100; ++i) rows.push_back({fill.next_gaussian(), fill.next_gaussian()});
  const TabularDataset ds = two_column(rows);
  const ThresholdModel model(2, 0, 1.0);

  SUBCASE("a successful call returns n points covering >= 2 classes") {
    RandomStream rng(13, "sampler");
    const DataPoint x{{0.0, 0.0}, Domain::kOriginal};
    const Sample s = sample_class_discovery(model, ds, x, 150, rng);
    REQUIRE(s.points.rows() == 150);
    const auto classes = predict_class(model, s.points);
    CHECK(std::set<int>(classes.begin(), classes.end()).size() >= 2);
  }
  SUBCASE("a point adjacent to the boundary terminates in round one") {
    const DataPoint x{{0.99, 0.0}, Domain::kOriginal};
    RandomStream a(14, "sampler"), b(14, "sampler");
    const Sample full = sample_class_discovery(model, ds, x, 150, a);
    const Sample one_round = sample_class_discovery(model, ds, x, 150, b, 2.0, 1);
    CHECK(full.points == one_round.points);
  }
  SUBCASE("constant model raises") {
    const ConstantModel constant(2);
    RandomStream rng(15, "sampler");
    CHECK_THROWS_AS(
        sample_class_discovery(constant, ds, {{0.0, 0.0}, Domain::kOriginal}, 50, rng),
        NoBoundaryError);
  }
}

TEST_CASE("binary sampling") {
  SUBCASE("n=0 gives an empty matrix") {
    RandomStream rng(16, "sampler");
    const Sample s = sample_binary({{1, 0, 1}, Domain::kBinary}, 0, rng);
    CHECK(s.points.rows() == 0);
    CHECK(s.domain == Domain::kBinary);
  }
  SUBCASE("all-zero point stays all zero") {
    RandomStream rng(17, "sampler");
    const Sample s = sample_binary({{0, 0, 0, 0}, Domain::kBinary}, 25, rng);
    for (std::size_t i = 0; i < s.points.rows(); ++i) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(s.points(i, j) == 0.0);
    }
  }
  SUBCASE("fair coin on an all-ones point") {
    RandomStream rng(18, "sampler");
    DataPoint ones{std::vector<double>(10, 1.0), Domain::kBinary};
    const Sample s = sample_binary(ones, 10000, rng, 0.5);
    double mean = 0.0;
    for (std::size_t i = 0; i < s.points.rows(); ++i) {
      for (std::size_t j = 0; j < 10; ++j) mean += s.points(i, j);
    }
    mean /= 10000.0 * 10.0;
    CHECK(std::abs(mean - 0.5) < 0.02);
  }
  SUBCASE("non-binary point is rejected") {
    RandomStream rng(19, "sampler");
    CHECK_THROWS_AS(sample_binary({{0.5}, Domain::kBinary}, 1, rng), NonBinaryInputError);
  }
}

TEST_CASE("bin-frequency sampling") {
  const TabularDataset iris = builtin_iris();
  const Discretizer disc = Discretizer::fit(iris, 4);
  const Binarizer binz = Binarizer::fit(disc);

  SUBCASE("every sampled row one-hot encodes cleanly") {
    RandomStream rng(20, "sampler");
    const Sample s = sample_bin_frequency(disc, iris, 500, rng);
    CHECK(s.domain == Domain::kDiscretized);
    CHECK_NOTHROW(binz.binarize_rows(s.points));
  }
  SUBCASE("sampled frequencies track the training frequencies") {
    RandomStream rng(21, "sampler");
    const Sample s = sample_bin_frequency(disc, iris, 10000, rng);
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<double> training(disc.n_bins(j), 0.0);
      for (std::size_t i = 0; i < iris.n_rows(); ++i) {
        training[static_cast<std::size_t>(
            disc.discretize(iris.point(i)).values[j])] += 1.0 / 150.0;
      }
      std::vector<double> sampled(disc.n_bins(j), 0.0);
      for (std::size_t i = 0; i < s.points.rows(); ++i) {
        sampled[static_cast<std::size_t>(s.points(i, j))] += 1.0 / 10000.0;
      }
      for (std::size_t b = 0; b < training.size(); ++b) {
        CHECK(std::abs(training[b] - sampled[b]) < 0.02);
      }
    }
  }
  SUBCASE("a single-bin feature always samples bin 0") {
    TabularDataset flat = two_column({{3.0, 1.0}, {3.0, 2.0}, {3.0, 5.0}, {3.0, 9.0}});
    const Discretizer d = Discretizer::fit(flat, 4);
    RandomStream rng(22, "sampler");
    const Sample s = sample_bin_frequency(d, flat, 100, rng);
    for (std::size_t i = 0; i < 100; ++i) CHECK(s.points(i, 0) == 0.0);
  }
}

TEST_CASE("sampler spec validation") {
  SamplerSpec spec;
  SUBCASE("binary_uniform demands the binary domain") {
    spec.kind = SamplerKind::kBinaryUniform;
    spec.domain = Domain::kOriginal;
    CHECK_THROWS_AS(validate_sampler_spec(spec), ConfigError);
    spec.domain = Domain::kBinary;
    CHECK_NOTHROW(validate_sampler_spec(spec));
  }
  SUBCASE("bin_frequency demands the discretized domain") {
    spec.kind = SamplerKind::kBinFrequency;
    spec.domain = Domain::kBinary;
    CHECK_THROWS_AS(validate_sampler_spec(spec), ConfigError);
  }
  SUBCASE("boundary-seeking samplers demand the original domain") {
    spec.kind = SamplerKind::kGrowingSpheres;
    spec.domain = Domain::kDiscretized;
    CHECK_THROWS_AS(validate_sampler_spec(spec), ConfigError);
  }
  SUBCASE("kind names round-trip") {
    for (SamplerKind k :
         {SamplerKind::kNormal, SamplerKind::kTruncatedNormal, SamplerKind::kMixup,
          SamplerKind::kGrowingSpheres, SamplerKind::kClassDiscovery,
          SamplerKind::kBinaryUniform, SamplerKind::kBinFrequency}) {
      CHECK(sampler_kind_from_name(sampler_kind_name(k)) == k);
    }
    CHECK_THROWS_AS(sampler_kind_from_name("bogus"), ConfigError);
  }
}

TEST_CASE("class counts summarize a sample") {
  const ThresholdModel model(1, 0, 0.0);
  Matrix points(5, 1);
  points(0, 0) = -1.0;
  points(1, 0) = -0.5;
  points(2, 0) = 0.5;
  points(3, 0) = 1.0;
  points(4, 0) = 2.0;
  const auto counts = class_counts(model, points);
  CHECK(counts == std::vector<std::size_t>{2, 3});
}
