#include "blimey/pipeline.hpp"

#include <cmath>

#include "doctest.h"
#include "stub_models.hpp"

using namespace blimey;
using blimey::testing::ThresholdModel;

namespace {

const TabularDataset& iris() {
  static const TabularDataset ds = builtin_iris();
  return ds;
}

const RandomForest& iris_forest() {
  static const RandomForest forest = [] {
    RandomStream rng(1, "forest");
    return train_random_forest(iris(), {25, 6, 2, {}, true}, rng);
  }();
  return forest;
}

}  // namespace

TEST_CASE("build_pipeline guardrails") {
  SUBCASE("presets build") {
    CHECK_NOTHROW(build_pipeline(lime_tabular_default(), iris(), iris_forest()));
    CHECK_NOTHROW(build_pipeline(tree_tabular_default(), iris(), iris_forest()));
  }
  SUBCASE("binary sampler without a representation") {
    PipelineConfig config = tree_tabular_default();
    config.sampler = {SamplerKind::kBinaryUniform, Domain::kBinary};
    try {
      build_pipeline(config, iris(), iris_forest());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.constraint() == "sampler-needs-representation");
      CHECK(std::string(e.what()).find("interpretable domain") != std::string::npos);
    }
  }
  SUBCASE("bin-frequency sampler without a representation") {
    PipelineConfig config = tree_tabular_default();
    config.sampler = {SamplerKind::kBinFrequency, Domain::kDiscretized};
    try {
      build_pipeline(config, iris(), iris_forest());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.constraint() == "sampler-needs-discretizer");
    }
  }
  SUBCASE("bag of words must transform before sampling") {
    PipelineConfig config = lime_tabular_default();
    config.representation = Representation::kBagOfWords;
    config.sampling_order = SamplingOrder::kSampleThenTransform;
    config.sampler = {SamplerKind::kNormal, Domain::kOriginal};
    try {
      build_pipeline(config, iris(), iris_forest());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.constraint() == "text-sampling-order");
    }
  }
  SUBCASE("binary sampling of a discretized representation cannot be inverted") {
    PipelineConfig config = lime_tabular_default();
    config.sampler = {SamplerKind::kBinaryUniform, Domain::kBinary};
    try {
      build_pipeline(config, iris(), iris_forest());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.constraint() == "binary-inversion");
    }
  }
  SUBCASE("the A3 shape builds: no representation, normal sampler, tree surrogate") {
    PipelineConfig config = tree_tabular_default();
    CHECK(config.representation == Representation::kNone);
    CHECK(config.sampler.kind == SamplerKind::kNormal);
    CHECK_NOTHROW(build_pipeline(config, iris(), iris_forest()));
  }
  SUBCASE("tiny sample budgets are rejected") {
    PipelineConfig config = lime_tabular_default();
    config.n_samples = 5;
    CHECK_THROWS_AS(build_pipeline(config, iris(), iris_forest()), ConfigError);
  }
  SUBCASE("representation-free ridge without K-LASSO warns") {
    PipelineConfig config = tree_tabular_default();
    config.surrogate = RidgeSurrogateConfig{1.0, std::nullopt};
    const Explainer explainer = build_pipeline(config, iris(), iris_forest());
    REQUIRE_FALSE(explainer.warnings().empty());
    CHECK(explainer.warnings()[0].find("standardized") != std::string::npos);
  }
}

TEST_CASE("lime pipeline on iris") {
  PipelineConfig config = lime_tabular_default();
  config.seed = 7;
  const DataPoint x = iris().point(0);

  SUBCASE("same config and seed give byte-identical explanations") {
    const Explanation a = explain_lime_tabular(iris(), iris_forest(), x, config);
    const Explanation b = explain_lime_tabular(iris(), iris_forest(), x, config);
    CHECK(a.to_json().dump(2) == b.to_json().dump(2));
  }
  SUBCASE("a black box thresholding feature 0 ranks a feature-0 bin first") {
    // Threshold at the sepal-length median so both sides are populated.
    const ThresholdModel model(4, 0, 5.8);
    const Explanation expl = explain_lime_tabular(iris(), model, x, config);
    REQUIRE_FALSE(expl.importances.empty());
    CHECK(expl.importances[0].first.find("sepal length") != std::string::npos);
  }
  SUBCASE("K-LASSO caps the explanation size") {
    PipelineConfig k2 = config;
    k2.surrogate = RidgeSurrogateConfig{1.0, 2};
    const Explanation expl = explain_lime_tabular(iris(), iris_forest(), x, k2);
    CHECK(expl.importances.size() == 2);
  }
  SUBCASE("interpretable names round-trip through the JSON") {
    const Explanation expl = explain_lime_tabular(iris(), iris_forest(), x, config);
    const auto j = expl.to_json();
    REQUIRE(j.contains("importances"));
    bool found_condition = false;
    for (const auto& item : j["importances"]) {
      const auto name = item["name"].get<std::string>();
      if (name.find("<=") != std::string::npos || name.find('<') != std::string::npos ||
          name.find(">=") != std::string::npos) {
        found_condition = true;
      }
    }
    CHECK(found_condition);
  }
  SUBCASE("the reduced space is narrower than the full binary width") {
    const Explainer explainer = build_pipeline(config, iris(), iris_forest());
    const std::size_t full_width = explainer.binarizer()->width();
    const Explanation expl = explainer.explain(x);
    CHECK(expl.importances.size() == 4);  // one kept bin per feature
    CHECK(expl.importances.size() < full_width);
  }
}

TEST_CASE("tree pipeline") {
  SUBCASE("an axis-aligned threshold is recovered by a depth-1 tree") {
    const ThresholdModel model(4, 2, 2.45);  // petal length split
    PipelineConfig config = tree_tabular_default();
    config.surrogate = TreeSurrogateConfig{1, 5};
    config.seed = 3;
    const Explanation expl = explain_tree_tabular(iris(), model, iris().point(0), config);
    REQUIRE(expl.kind == Explanation::Kind::kRules);
    REQUIRE(expl.partition.size() == 2);
    REQUIRE(expl.partition[0].conditions.size() == 1);
    const RuleCondition& split = expl.partition[0].conditions[0];
    CHECK(split.feature == 2);
    const double threshold = split.upper ? *split.upper : *split.lower;
    CHECK(std::abs(threshold - 2.45) < 0.25);
  }
  SUBCASE("fidelity stays in (-inf, 1]") {
    PipelineConfig config = tree_tabular_default();
    config.seed = 5;
    const Explanation expl =
        explain_tree_tabular(iris(), iris_forest(), iris().point(70), config);
    CHECK(expl.fidelity <= 1.0);
  }
  SUBCASE("two-moons reference point needs both features") {
    RandomStream moons_rng(1, "two-moons");
    const TabularDataset moons = make_two_moons(1000, 0.1, moons_rng);
    RandomStream forest_rng(1, "forest");
    const RandomForest forest = train_random_forest(moons, {}, forest_rng);
    PipelineConfig config = tree_tabular_default();
    config.seed = 1;
    const DataPoint reference{{0.45, 0.40}, Domain::kOriginal};
    const Explanation expl = explain_tree_tabular(moons, forest, reference, config);
    bool uses_x = false, uses_y = false;
    for (const auto& c : expl.point_conditions) {
      if (c.feature == 0) uses_x = true;
      if (c.feature == 1) uses_y = true;
    }
    CHECK(uses_x);
    CHECK(uses_y);
  }
}

TEST_CASE("explain dispatch and provenance") {
  SUBCASE("preset names resolve") {
    CHECK(std::holds_alternative<RidgeSurrogateConfig>(preset_config("lime").surrogate));
    CHECK(std::holds_alternative<TreeSurrogateConfig>(preset_config("tree").surrogate));
    CHECK_THROWS_AS(preset_config("bogus"), ConfigError);
  }
  SUBCASE("lime preset emits importances, tree preset emits rules") {
    const DataPoint x = iris().point(10);
    const Explanation lime =
        build_pipeline(preset_config("lime"), iris(), iris_forest()).explain(x);
    CHECK(lime.kind == Explanation::Kind::kImportance);
    const Explanation tree =
        build_pipeline(preset_config("tree"), iris(), iris_forest()).explain(x);
    CHECK(tree.kind == Explanation::Kind::kRules);
  }
  SUBCASE("reference pipelines equal their preset-built explainers") {
    const DataPoint x = iris().point(42);
    PipelineConfig lime = lime_tabular_default();
    lime.seed = 21;
    CHECK(explain_lime_tabular(iris(), iris_forest(), x, lime).to_json().dump() ==
          build_pipeline(lime, iris(), iris_forest()).explain(x).to_json().dump());
    PipelineConfig tree = tree_tabular_default();
    tree.seed = 21;
    CHECK(explain_tree_tabular(iris(), iris_forest(), x, tree).to_json().dump() ==
          build_pipeline(tree, iris(), iris_forest()).explain(x).to_json().dump());
  }
  SUBCASE("an explanation reproduces exactly from its provenance") {
    PipelineConfig config = lime_tabular_default();
    config.seed = 99;
    config.surrogate = RidgeSurrogateConfig{1.0, 3};
    const DataPoint x = iris().point(120);
    const Explanation original =
        build_pipeline(config, iris(), iris_forest()).explain(x);

    const PipelineConfig rebuilt = config_from_json(original.provenance["config"]);
    const DataPoint replay{
        original.provenance["explained_point"].get<std::vector<double>>(),
        Domain::kOriginal};
    const Explanation again =
        build_pipeline(rebuilt, iris(), iris_forest()).explain(replay);
    CHECK(original.to_json().dump() == again.to_json().dump());
  }
  SUBCASE("explicit target class out of range is rejected") {
    PipelineConfig config = lime_tabular_default();
    config.target_class = 5;
    const Explainer explainer = build_pipeline(config, iris(), iris_forest());
    CHECK_THROWS_AS(explainer.explain(iris().point(0)), ConfigError);
  }
  SUBCASE("class-balance reweighting changes the fit and is recorded") {
    PipelineConfig plain = lime_tabular_default();
    plain.seed = 31;
    PipelineConfig balanced = plain;
    balanced.balance_classes = true;
    // Near the versicolor/virginica overlap the sample is class-imbalanced.
    const DataPoint x = iris().point(70);
    const Explanation a = build_pipeline(plain, iris(), iris_forest()).explain(x);
    const Explanation b = build_pipeline(balanced, iris(), iris_forest()).explain(x);
    CHECK(a.to_json().dump() != b.to_json().dump());
    CHECK(b.provenance["config"]["balance_classes"] == true);
    CHECK(b.fidelity <= 1.0);
  }
  SUBCASE("config JSON round-trips") {
    PipelineConfig config = tree_tabular_default();
    config.sampler = {SamplerKind::kMixup, Domain::kOriginal};
    config.sampler.alpha = 0.4;
    config.kernel_width = 1.25;
    config.target_class = 2;
    config.n_samples = 77;
    config.balance_classes = true;
    config.seed = 1234;
    const PipelineConfig back = config_from_json(config_to_json(config));
    CHECK(config_to_json(back).dump() == config_to_json(config).dump());
  }
  SUBCASE("width mismatch at explain time") {
    const Explainer explainer =
        build_pipeline(lime_tabular_default(), iris(), iris_forest());
    CHECK_THROWS_AS(explainer.explain({{4.0, 2.0}, Domain::kOriginal}),
                    WidthMismatchError);
  }
}

TEST_CASE("standardized ridge coefficients ignore column pre-scaling") {
  // The representation-free linear route standardizes raw columns before the
  // fit, so pre-scaling any input column is undone and the coefficients
  // cannot move. Exercised on the same standardize-then-fit sequence the
  // pipeline runs after sampling.
  RandomStream rng(2, "scaling");
  Matrix sample(120, 3);
  std::vector<double> y(120), w(120);
  for (std::size_t i = 0; i < 120; ++i) {
    for (std::size_t j = 0; j < 3; ++j) sample(i, j) = rng.next_gaussian();
    y[i] = 0.8 * sample(i, 0) - 1.3 * sample(i, 2) + 0.05 * rng.next_gaussian();
    w[i] = 0.1 + rng.next_uniform();
  }
  const LinearSurrogate base =
      fit_weighted_ridge(standardize_columns(sample).transformed, y, w, 1.0);

  for (const double factor : {40.0, 1e-3}) {
    Matrix scaled = sample;
    for (std::size_t i = 0; i < scaled.rows(); ++i) scaled(i, 1) *= factor;
    const LinearSurrogate refit =
        fit_weighted_ridge(standardize_columns(scaled).transformed, y, w, 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(refit.coefficients[j] == doctest::Approx(base.coefficients[j]).epsilon(1e-9));
    }
    CHECK(refit.intercept == doctest::Approx(base.intercept).epsilon(1e-9));
  }
}
