#include "blimey/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

namespace blimey {

namespace {

std::uint64_t point_hash(const DataPoint& x) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto absorb = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  absorb(static_cast<std::uint64_t>(x.domain));
  for (double v : x.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    absorb(bits);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const char* representation_name(Representation r) {
  switch (r) {
    case Representation::kDiscretizeBinarize: return "discretize_binarize";
    case Representation::kNone: return "none";
    case Representation::kBagOfWords: return "bag_of_words";
  }
  return "?";
}

const char* order_name(SamplingOrder o) {
  return o == SamplingOrder::kSampleThenTransform ? "sample_then_transform"
                                                  : "transform_then_sample";
}

const char* distance_domain_name(DistanceDomain d) {
  return d == DistanceDomain::kOriginal ? "original" : "reduced";
}

bool original_domain_sampler(SamplerKind kind) {
  return kind == SamplerKind::kNormal || kind == SamplerKind::kTruncatedNormal ||
         kind == SamplerKind::kMixup || kind == SamplerKind::kGrowingSpheres ||
         kind == SamplerKind::kClassDiscovery;
}

}  // namespace

// ---------------------------------------------------------------------------
// Presets and config JSON
// ---------------------------------------------------------------------------

PipelineConfig lime_tabular_default() {
  PipelineConfig config;
  config.representation = Representation::kDiscretizeBinarize;
  config.sampler = {SamplerKind::kBinFrequency, Domain::kDiscretized};
  config.sampling_order = SamplingOrder::kTransformThenSample;
  config.distance_domain = DistanceDomain::kReduced;
  config.surrogate = RidgeSurrogateConfig{1.0, std::nullopt};
  return config;
}

PipelineConfig tree_tabular_default() {
  PipelineConfig config;
  config.representation = Representation::kNone;
  config.sampler = {SamplerKind::kNormal, Domain::kOriginal};
  config.sampling_order = SamplingOrder::kSampleThenTransform;
  config.distance_domain = DistanceDomain::kOriginal;
  config.surrogate = TreeSurrogateConfig{3, 5};
  return config;
}

PipelineConfig preset_config(const std::string& name) {
  if (name == "lime") return lime_tabular_default();
  if (name == "tree") return tree_tabular_default();
  throw ConfigError("preset", "unknown preset '" + name + "' (expected lime or tree)");
}

nlohmann::ordered_json config_to_json(const PipelineConfig& config) {
  nlohmann::ordered_json j;
  j["representation"] = representation_name(config.representation);
  j["sampler"] = {{"kind", sampler_kind_name(config.sampler.kind)},
                  {"domain", domain_name(config.sampler.domain)},
                  {"alpha", config.sampler.alpha},
                  {"p_flip", config.sampler.p_flip},
                  {"r0", config.sampler.r0},
                  {"growth", config.sampler.growth},
                  {"max_rounds", config.sampler.max_rounds}};
  j["sampling_order"] = order_name(config.sampling_order);
  if (config.kernel_width) {
    j["kernel_width"] = *config.kernel_width;
  } else {
    j["kernel_width"] = nullptr;
  }
  j["distance_domain"] = distance_domain_name(config.distance_domain);
  if (const auto* ridge = std::get_if<RidgeSurrogateConfig>(&config.surrogate)) {
    j["surrogate"] = {{"type", "ridge"}, {"alpha", ridge->alpha}};
    if (ridge->k_lasso) {
      j["surrogate"]["k_lasso"] = *ridge->k_lasso;
    } else {
      j["surrogate"]["k_lasso"] = nullptr;
    }
  } else {
    const auto& tree = std::get<TreeSurrogateConfig>(config.surrogate);
    j["surrogate"] = {{"type", "tree"},
                      {"max_depth", tree.max_depth},
                      {"min_samples_leaf", tree.min_samples_leaf}};
  }
  if (config.target_class) {
    j["target_class"] = *config.target_class;
  } else {
    j["target_class"] = "predicted";
  }
  j["n_samples"] = config.n_samples;
  j["bins_per_feature"] = config.bins_per_feature;
  j["balance_classes"] = config.balance_classes;
  j["seed"] = config.seed;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig config;
  const std::string repr = j.value("representation", "discretize_binarize");
  if (repr == "discretize_binarize") {
    config.representation = Representation::kDiscretizeBinarize;
  } else if (repr == "none") {
    config.representation = Representation::kNone;
  } else if (repr == "bag_of_words") {
    config.representation = Representation::kBagOfWords;
  } else {
    throw ConfigError("representation", "unknown representation '" + repr + "'");
  }
  if (j.contains("sampler")) {
    const auto& js = j["sampler"];
    config.sampler.kind = sampler_kind_from_name(js.value("kind", "bin_frequency"));
    if (js.contains("domain")) {
      config.sampler.domain = domain_from_name(js["domain"].get<std::string>());
    } else {
      config.sampler.domain = config.sampler.kind == SamplerKind::kBinFrequency
                                  ? Domain::kDiscretized
                              : config.sampler.kind == SamplerKind::kBinaryUniform
                                  ? Domain::kBinary
                                  : Domain::kOriginal;
    }
    config.sampler.alpha = js.value("alpha", 1.0);
    config.sampler.p_flip = js.value("p_flip", 0.5);
    config.sampler.r0 = js.value("r0", 0.1);
    config.sampler.growth = js.value("growth", 2.0);
    config.sampler.max_rounds = js.value("max_rounds", 0);
  }
  const std::string order = j.value("sampling_order", order_name(config.sampling_order));
  if (order == "sample_then_transform") {
    config.sampling_order = SamplingOrder::kSampleThenTransform;
  } else if (order == "transform_then_sample") {
    config.sampling_order = SamplingOrder::kTransformThenSample;
  } else {
    throw ConfigError("sampling-order", "unknown sampling order '" + order + "'");
  }
  if (j.contains("kernel_width") && !j["kernel_width"].is_null()) {
    config.kernel_width = j["kernel_width"].get<double>();
  }
  const std::string dist =
      j.value("distance_domain", distance_domain_name(config.distance_domain));
  if (dist == "original") {
    config.distance_domain = DistanceDomain::kOriginal;
  } else if (dist == "reduced") {
    config.distance_domain = DistanceDomain::kReduced;
  } else {
    throw ConfigError("distance-domain", "unknown distance domain '" + dist + "'");
  }
  if (j.contains("surrogate")) {
    const auto& js = j["surrogate"];
    const std::string type = js.value("type", "ridge");
    if (type == "ridge") {
      RidgeSurrogateConfig ridge;
      ridge.alpha = js.value("alpha", 1.0);
      if (js.contains("k_lasso") && !js["k_lasso"].is_null()) {
        ridge.k_lasso = js["k_lasso"].get<std::size_t>();
      }
      config.surrogate = ridge;
    } else if (type == "tree") {
      TreeSurrogateConfig tree;
      tree.max_depth = js.value("max_depth", 3);
      tree.min_samples_leaf = js.value("min_samples_leaf", 5);
      config.surrogate = tree;
    } else {
      throw ConfigError("surrogate", "unknown surrogate type '" + type + "'");
    }
  }
  if (j.contains("target_class") && !j["target_class"].is_null() &&
      !j["target_class"].is_string()) {
    config.target_class = j["target_class"].get<int>();
  }
  config.n_samples = j.value("n_samples", config.n_samples);
  config.bins_per_feature = j.value("bins_per_feature", config.bins_per_feature);
  config.balance_classes = j.value("balance_classes", config.balance_classes);
  config.seed = j.value("seed", config.seed);
  return config;
}

// ---------------------------------------------------------------------------
// build_pipeline
// ---------------------------------------------------------------------------

Explainer::Explainer(PipelineConfig config, const TabularDataset& dataset,
                     const ProbabilisticModel& model)
    : config_(std::move(config)), dataset_(&dataset), model_(&model) {}

Explainer build_pipeline(const PipelineConfig& config, const TabularDataset& dataset,
                         const ProbabilisticModel& model) {
  dataset.validate();
  if (dataset.n_features() != model.n_features()) {
    throw WidthMismatchError("dataset width " + std::to_string(dataset.n_features()) +
                             " != model width " + std::to_string(model.n_features()));
  }
  if (config.n_samples < 10) {
    throw ConfigError("n-samples", "n_samples must be >= 10");
  }
  validate_sampler_spec(config.sampler);

  if (config.representation == Representation::kBagOfWords &&
      config.sampling_order == SamplingOrder::kSampleThenTransform) {
    throw ConfigError("text-sampling-order",
                      "text data must be sampled in the interpretable domain: "
                      "there is no original-domain sampler for sentences");
  }
  if (config.representation == Representation::kNone) {
    if (config.sampler.kind == SamplerKind::kBinaryUniform) {
      throw ConfigError("sampler-needs-representation",
                        "sampler requires interpretable domain: binary sampling "
                        "is undefined without a binary representation");
    }
    if (config.sampler.kind == SamplerKind::kBinFrequency) {
      throw ConfigError("sampler-needs-discretizer",
                        "bin-frequency sampling requires the discretized domain, "
                        "which representation=none does not provide");
    }
  }
  if (config.representation == Representation::kDiscretizeBinarize) {
    if (config.sampler.kind == SamplerKind::kBinaryUniform) {
      throw ConfigError("binary-inversion",
                        "binary-domain samples of discretized tabular data cannot "
                        "be uniquely inverted; sample the discretized domain "
                        "(bin_frequency) instead");
    }
    if (config.sampling_order == SamplingOrder::kTransformThenSample &&
        config.sampler.kind != SamplerKind::kBinFrequency) {
      throw ConfigError("sampling-order",
                        "transform-then-sample over a tabular representation "
                        "samples the discretized domain; use bin_frequency or "
                        "switch to sample_then_transform");
    }
    if (config.sampling_order == SamplingOrder::kSampleThenTransform &&
        !original_domain_sampler(config.sampler.kind)) {
      throw ConfigError("sampling-order",
                        "sample-then-transform draws in the original domain; "
                        "pick an original-domain sampler");
    }
  }

  Explainer explainer(config, dataset, model);
  if (config.representation == Representation::kDiscretizeBinarize) {
    explainer.discretizer_ = Discretizer::fit(dataset, config.bins_per_feature);
    explainer.binarizer_ = Binarizer::fit(*explainer.discretizer_);
    for (const auto& warning : explainer.discretizer_->warnings()) {
      explainer.warnings_.push_back(warning);
    }
  }
  if (config.representation == Representation::kNone &&
      std::holds_alternative<RidgeSurrogateConfig>(config.surrogate) &&
      !std::get<RidgeSurrogateConfig>(config.surrogate).k_lasso) {
    explainer.warnings_.push_back(
        "representation-free linear surrogate without K-LASSO: importances are "
        "comparable only because features are standardized before fitting; "
        "consider K-LASSO to sparsify the explanation");
  }
  return explainer;
}

// ---------------------------------------------------------------------------
// Explainer
// ---------------------------------------------------------------------------

int Explainer::resolve_target(const DataPoint& x) const {
  const int n_classes = static_cast<int>(model_->n_classes());
  if (config_.target_class) {
    if (*config_.target_class < 0 || *config_.target_class >= n_classes) {
      throw ConfigError("target-class",
                        "target class " + std::to_string(*config_.target_class) +
                            " out of range [0, " + std::to_string(n_classes) + ")");
    }
    return *config_.target_class;
  }
  Matrix one(1, x.size());
  std::copy(x.values.begin(), x.values.end(), one.row(0).begin());
  return predict_class(*model_, one)[0];
}

Sample Explainer::draw_original_sample(const DataPoint& x, RandomStream& rng) const {
  const auto& spec = config_.sampler;
  switch (spec.kind) {
    case SamplerKind::kNormal:
      return sample_normal(*dataset_, x, config_.n_samples, rng);
    case SamplerKind::kTruncatedNormal:
      return sample_truncated_normal(*dataset_, x, config_.n_samples, rng);
    case SamplerKind::kMixup:
      return sample_mixup(*dataset_, x, config_.n_samples, rng, spec.alpha);
    case SamplerKind::kGrowingSpheres:
      return sample_growing_spheres(*model_, x, config_.n_samples, rng, spec.r0,
                                    spec.growth, spec.effective_max_rounds());
    case SamplerKind::kClassDiscovery:
      return sample_class_discovery(*model_, *dataset_, x, config_.n_samples, rng,
                                    spec.growth, spec.effective_max_rounds());
    default:
      throw ConfigError("sampler-domain", "sampler does not draw in the original domain");
  }
}

nlohmann::ordered_json Explainer::provenance(const DataPoint& x, int target,
                                             double kernel_width) const {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(config_);
  j["explained_point"] = x.values;
  j["blackbox"] = model_->identifier();
  j["resolved_target_class"] = target;
  if (dataset_->class_names && target < static_cast<int>(dataset_->class_names->size())) {
    j["resolved_target_name"] = (*dataset_->class_names)[target];
  }
  j["resolved_kernel_width"] = kernel_width;
  return j;
}

Explanation Explainer::explain(const DataPoint& x) const {
  return explain_detailed(x).explanation;
}

Explainer::Result Explainer::explain_detailed(const DataPoint& x) const {
  if (x.domain != Domain::kOriginal) {
    throw ConfigError("domain", "explain expects a point in the original domain");
  }
  if (x.size() != dataset_->n_features()) {
    throw WidthMismatchError("point width " + std::to_string(x.size()) +
                             " != dataset width " +
                             std::to_string(dataset_->n_features()));
  }
  switch (config_.representation) {
    case Representation::kDiscretizeBinarize:
      return explain_interpretable(x);
    case Representation::kNone:
      return explain_original(x);
    case Representation::kBagOfWords:
      throw ConfigError("text-pipeline",
                        "bag-of-words pipelines are not wired to a tabular black "
                        "box; use the representation components directly");
  }
  throw ConfigError("representation", "unreachable");
}

namespace {

/// Column selection helper.
Matrix select_columns(const Matrix& X, const std::vector<std::size_t>& columns) {
  Matrix out(X.rows(), columns.size());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) out(i, k) = X(i, columns[k]);
  }
  return out;
}

std::vector<double> column_of(const Matrix& M, std::size_t col) {
  std::vector<double> out(M.rows());
  for (std::size_t i = 0; i < M.rows(); ++i) out[i] = M(i, col);
  return out;
}

/// Inverse predicted-class frequency multiplied into the kernel weights, so
/// each class present in the sample contributes equal total weight.
void balance_by_class(const Matrix& proba, std::vector<double>& weights) {
  std::vector<std::size_t> classes(proba.rows());
  std::vector<double> counts(proba.cols(), 0.0);
  for (std::size_t i = 0; i < proba.rows(); ++i) {
    const auto row = proba.row(i);
    classes[i] = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    counts[classes[i]] += 1.0;
  }
  const double total = static_cast<double>(proba.rows());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] *= total / counts[classes[i]];
  }
}

}  // namespace

Explainer::Result Explainer::explain_interpretable(const DataPoint& x) const {
  const std::string suffix = hex64(point_hash(x));
  RandomStream sampler_rng(config_.seed, "sample/" + suffix);
  RandomStream inverse_rng(config_.seed, "inverse/" + suffix);

  // Step 1: interpretable representation of the explained point.
  const DataPoint x_hat = discretizer_->discretize(x);
  const DataPoint x_prime = binarizer_->binarize(x_hat);

  // Step 2: a local sample, plus its original-domain twin for prediction.
  Matrix sample_original;
  Matrix sample_binary;
  if (config_.sampling_order == SamplingOrder::kTransformThenSample) {
    const Sample hat = sample_bin_frequency(*discretizer_, *dataset_,
                                            config_.n_samples, sampler_rng);
    sample_binary = binarizer_->binarize_rows(hat.points);
    // Step 3a: reverse sampling, the one deliberately random inversion.
    sample_original = Matrix(hat.points.rows(), dataset_->n_features());
    for (std::size_t i = 0; i < hat.points.rows(); ++i) {
      const auto row = hat.points.row(i);
      const DataPoint back = discretizer_->undiscretize(
          DataPoint{{row.begin(), row.end()}, Domain::kDiscretized}, inverse_rng);
      std::copy(back.values.begin(), back.values.end(), sample_original.row(i).begin());
    }
  } else {
    // Original-domain sampling first; both representations then exist and no
    // inversion is needed.
    Sample drawn = draw_original_sample(x, sampler_rng);
    sample_original = std::move(drawn.points);
    Matrix hat(sample_original.rows(), dataset_->n_features());
    for (std::size_t i = 0; i < sample_original.rows(); ++i) {
      const auto row = sample_original.row(i);
      const DataPoint d = discretizer_->discretize(
          DataPoint{{row.begin(), row.end()}, Domain::kOriginal});
      std::copy(d.values.begin(), d.values.end(), hat.row(i).begin());
    }
    sample_binary = binarizer_->binarize_rows(hat);
  }

  // Step 3b: black-box predictions for the target class.
  const int target = resolve_target(x);
  const Matrix proba = model_->predict_proba(sample_original);
  const std::vector<double> y = column_of(proba, static_cast<std::size_t>(target));

  // Step 4: drop the explained point's zero-valued interpretable features.
  auto [space, reduced] = drop_zero_features(x_prime, sample_binary, binarizer_->names());
  if (space.kept_indices.empty()) {
    throw DegenerateSampleError("reduced interpretable space is empty");
  }
  DataPoint x_tilde{std::vector<double>(space.kept_indices.size(), 1.0), Domain::kBinary};
  for (std::size_t k : space.kept_indices) {
    if (x_prime.values[k] != 1.0) {
      throw std::logic_error("zero-feature drop kept a zero column");
    }
  }

  // Step 5: kernelised distances.
  const bool reduced_distances = config_.distance_domain == DistanceDomain::kReduced;
  const std::vector<double> distances =
      reduced_distances ? euclidean_distances(reduced, x_tilde)
                        : euclidean_distances(sample_original, x);
  const double width = config_.kernel_width.value_or(
      0.75 * std::sqrt(static_cast<double>(reduced_distances ? reduced.cols()
                                                             : dataset_->n_features())));
  std::vector<double> weights = exponential_kernel(distances, {width});
  if (config_.balance_classes) balance_by_class(proba, weights);

  // Step 6: XNOR against the explained point, the identity here since the
  // reduced explained point is all ones.
  const Matrix xnor = xnor_transform(x_tilde, reduced);
  if (xnor != reduced) {
    throw std::logic_error("XNOR against an all-ones point must be the identity");
  }

  // Step 7: optional K-LASSO, then the weighted ridge (or a tree).
  Result result;
  Explanation& expl = result.explanation;
  expl.target_class = target;

  if (const auto* ridge = std::get_if<RidgeSurrogateConfig>(&config_.surrogate)) {
    std::vector<std::size_t> selected(xnor.cols());
    std::iota(selected.begin(), selected.end(), 0);
    if (ridge->k_lasso) {
      selected = k_lasso(xnor, y, weights, *ridge->k_lasso);
    }
    const Matrix fit_matrix = select_columns(xnor, selected);
    LinearSurrogate fit = fit_weighted_ridge(fit_matrix, y, weights, ridge->alpha);
    fit.target_class = target;
    expl.kind = Explanation::Kind::kImportance;
    expl.intercept = fit.intercept;
    expl.condition_number = fit.condition_number;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      expl.importances.emplace_back(space.names[selected[k]], fit.coefficients[k]);
    }
    std::stable_sort(expl.importances.begin(), expl.importances.end(),
                     [](const auto& a, const auto& b) {
                       return std::abs(a.second) > std::abs(b.second);
                     });
    expl.fidelity = fidelity(fit.predict_rows(fit_matrix), y, weights);
  } else {
    const auto& tree_config = std::get<TreeSurrogateConfig>(config_.surrogate);
    TreeSurrogate tree = fit_tree_regressor(xnor, y, weights, tree_config.max_depth,
                                            tree_config.min_samples_leaf);
    tree.target_class = target;
    Explanation rules = tree_rules(tree, x_tilde, space.names);
    rules.target_class = target;
    rules.fidelity = fidelity(tree.predict_rows(xnor), y, weights);
    expl = std::move(rules);
  }
  expl.provenance = provenance(x, target, width);
  return result;
}

Explainer::Result Explainer::explain_original(const DataPoint& x) const {
  const std::string suffix = hex64(point_hash(x));
  RandomStream sampler_rng(config_.seed, "sample/" + suffix);

  Sample drawn = draw_original_sample(x, sampler_rng);
  const Matrix& sample = drawn.points;

  const int target = resolve_target(x);
  const Matrix proba = model_->predict_proba(sample);
  const std::vector<double> y = column_of(proba, static_cast<std::size_t>(target));

  // Distances always live in the original domain here; there is no reduced
  // space without a representation.
  const std::vector<double> distances = euclidean_distances(sample, x);
  const double width = config_.kernel_width.value_or(
      0.75 * std::sqrt(static_cast<double>(dataset_->n_features())));
  std::vector<double> weights = exponential_kernel(distances, {width});
  if (config_.balance_classes) balance_by_class(proba, weights);

  std::vector<std::string> names;
  for (const auto& f : dataset_->features) names.push_back(f.name);

  Result result;
  Explanation& expl = result.explanation;
  expl.target_class = target;

  if (const auto* ridge = std::get_if<RidgeSurrogateConfig>(&config_.surrogate)) {
    // Standardize columns so the reported importances are comparable; the
    // fit is invariant to any pre-scaling of a raw column.
    const Standardization standard = standardize_columns(sample);

    std::vector<std::size_t> selected(sample.cols());
    std::iota(selected.begin(), selected.end(), 0);
    if (ridge->k_lasso) {
      selected = k_lasso(standard.transformed, y, weights, *ridge->k_lasso);
    }
    const Matrix fit_matrix = select_columns(standard.transformed, selected);
    LinearSurrogate fit = fit_weighted_ridge(fit_matrix, y, weights, ridge->alpha);
    fit.target_class = target;

    expl.kind = Explanation::Kind::kImportance;
    expl.intercept = fit.intercept;
    expl.condition_number = fit.condition_number;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      expl.importances.emplace_back(names[selected[k]], fit.coefficients[k]);
    }
    std::stable_sort(expl.importances.begin(), expl.importances.end(),
                     [](const auto& a, const auto& b) {
                       return std::abs(a.second) > std::abs(b.second);
                     });
    expl.fidelity = fidelity(fit.predict_rows(fit_matrix), y, weights);

    result.surrogate_original = [fit, mean = standard.mean, scale = standard.scale,
                                 selected](std::span<const double> p) {
      double v = fit.intercept;
      for (std::size_t k = 0; k < selected.size(); ++k) {
        const std::size_t j = selected[k];
        v += fit.coefficients[k] * (p[j] - mean[j]) / scale[j];
      }
      return v;
    };
  } else {
    const auto& tree_config = std::get<TreeSurrogateConfig>(config_.surrogate);
    TreeSurrogate tree = fit_tree_regressor(sample, y, weights, tree_config.max_depth,
                                            tree_config.min_samples_leaf);
    tree.target_class = target;
    Explanation rules = tree_rules(tree, x, names);
    rules.target_class = target;
    rules.fidelity = fidelity(tree.predict_rows(sample), y, weights);
    expl = std::move(rules);
    result.surrogate_original = [tree = std::move(tree)](std::span<const double> p) {
      return tree.predict(p);
    };
  }
  expl.provenance = provenance(x, target, width);
  return result;
}

// ---------------------------------------------------------------------------
// Reference pipelines
// ---------------------------------------------------------------------------

Explanation explain_lime_tabular(const TabularDataset& dataset,
                                 const ProbabilisticModel& model, const DataPoint& x,
                                 const PipelineConfig& config) {
  if (!std::holds_alternative<RidgeSurrogateConfig>(config.surrogate)) {
    throw ConfigError("lime-surrogate", "the lime pipeline uses a ridge surrogate");
  }
  PipelineConfig shaped = config;
  shaped.representation = Representation::kDiscretizeBinarize;
  shaped.sampling_order = SamplingOrder::kTransformThenSample;
  shaped.sampler = {SamplerKind::kBinFrequency, Domain::kDiscretized};
  shaped.distance_domain = DistanceDomain::kReduced;
  return build_pipeline(shaped, dataset, model).explain(x);
}

Explanation explain_tree_tabular(const TabularDataset& dataset,
                                 const ProbabilisticModel& model, const DataPoint& x,
                                 const PipelineConfig& config) {
  if (!std::holds_alternative<TreeSurrogateConfig>(config.surrogate)) {
    throw ConfigError("tree-surrogate", "the tree pipeline uses a tree surrogate");
  }
  PipelineConfig shaped = config;
  shaped.representation = Representation::kNone;
  shaped.sampling_order = SamplingOrder::kSampleThenTransform;
  if (!original_domain_sampler(shaped.sampler.kind)) {
    shaped.sampler = {SamplerKind::kNormal, Domain::kOriginal};
  }
  shaped.distance_domain = DistanceDomain::kOriginal;
  return build_pipeline(shaped, dataset, model).explain(x);
}

}  // namespace blimey
