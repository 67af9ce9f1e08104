#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blimey/blackbox.hpp"
#include "blimey/core.hpp"
#include "blimey/repr.hpp"
#include "blimey/sample.hpp"
#include "blimey/surrogate.hpp"

namespace blimey {

enum class Representation { kDiscretizeBinarize, kNone, kBagOfWords };
enum class SamplingOrder { kSampleThenTransform, kTransformThenSample };
enum class DistanceDomain { kOriginal, kReduced };

struct RidgeSurrogateConfig {
  double alpha = 1.0;
  std::optional<std::size_t> k_lasso;  // nullopt keeps every feature
};

struct TreeSurrogateConfig {
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 5;
};

/// Everything an explainer needs; validated by build_pipeline.
struct PipelineConfig {
  Representation representation = Representation::kDiscretizeBinarize;
  SamplerSpec sampler;
  SamplingOrder sampling_order = SamplingOrder::kTransformThenSample;
  /// nullopt resolves to 0.75 * sqrt(width of the distance space) at fit time.
  std::optional<double> kernel_width;
  DistanceDomain distance_domain = DistanceDomain::kReduced;
  std::variant<RidgeSurrogateConfig, TreeSurrogateConfig> surrogate =
      RidgeSurrogateConfig{};
  std::optional<int> target_class;  // nullopt = class predicted at x
  std::size_t n_samples = 150;
  std::size_t bins_per_feature = 4;
  /// Multiply inverse predicted-class frequencies into the kernel weights,
  /// countering class imbalance in the local sample. Off by default.
  bool balance_classes = false;
  std::uint64_t seed = 42;
};

/// The tabular recreation of the classic local-surrogate recipe:
/// quartile discretization, one-hot encoding, bin-frequency sampling,
/// reverse sampling, zero-feature drop, XNOR, kernel-weighted ridge.
PipelineConfig lime_tabular_default();

/// Representation-free tree explainer: normal sampling in the original
/// domain, kernel weighting, CART regression surrogate, rule extraction.
PipelineConfig tree_tabular_default();

/// Preset by name ("lime" or "tree"); unknown names raise ConfigError.
PipelineConfig preset_config(const std::string& name);

nlohmann::ordered_json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

/// A validated, ready-to-run composition of representation, sampler, kernel
/// and surrogate over one dataset and black box. Immutable once built; the
/// referenced dataset and model must outlive it. Concurrent explain calls
/// are safe: each derives its streams from (seed, explained point).
class Explainer {
 public:
  struct Result {
    Explanation explanation;
    /// Surrogate evaluator over the original domain; empty for pipelines
    /// with an interpretable representation (their surrogate lives in the
    /// reduced binary space).
    std::function<double(std::span<const double>)> surrogate_original;
  };

  Explanation explain(const DataPoint& x) const;
  Result explain_detailed(const DataPoint& x) const;

  const PipelineConfig& config() const { return config_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const Discretizer* discretizer() const {
    return discretizer_ ? &*discretizer_ : nullptr;
  }
  const Binarizer* binarizer() const { return binarizer_ ? &*binarizer_ : nullptr; }

  friend Explainer build_pipeline(const PipelineConfig&, const TabularDataset&,
                                  const ProbabilisticModel&);

 private:
  Explainer(PipelineConfig config, const TabularDataset& dataset,
            const ProbabilisticModel& model);

  Result explain_interpretable(const DataPoint& x) const;
  Result explain_original(const DataPoint& x) const;
  int resolve_target(const DataPoint& x) const;
  Sample draw_original_sample(const DataPoint& x, RandomStream& rng) const;
  nlohmann::ordered_json provenance(const DataPoint& x, int target,
                                    double kernel_width) const;

  PipelineConfig config_;
  const TabularDataset* dataset_;
  const ProbabilisticModel* model_;
  std::optional<Discretizer> discretizer_;
  std::optional<Binarizer> binarizer_;
  std::vector<std::string> warnings_;
};

/// Validates the configuration and assembles the explainer. Invalid module
/// combinations raise ConfigError with a distinct constraint tag:
///   "text-sampling-order"       bag-of-words sampled outside the
///                               interpretable domain,
///   "sampler-needs-representation"  binary-domain sampler without an
///                               interpretable representation,
///   "sampler-needs-discretizer" bin-frequency sampler without one,
///   "binary-inversion"          binary-domain sampling of discretized
///                               tabular data (not uniquely invertible).
Explainer build_pipeline(const PipelineConfig& config, const TabularDataset& dataset,
                         const ProbabilisticModel& model);

/// The seven-step reference pipeline over an interpretable representation;
/// equivalent to build_pipeline with a lime-shaped config. The surrogate
/// must be ridge.
Explanation explain_lime_tabular(const TabularDataset& dataset,
                                 const ProbabilisticModel& model, const DataPoint& x,
                                 const PipelineConfig& config);

/// Representation-free tree-surrogate pipeline (rules + leaf partition).
Explanation explain_tree_tabular(const TabularDataset& dataset,
                                 const ProbabilisticModel& model, const DataPoint& x,
                                 const PipelineConfig& config);

}  // namespace blimey
