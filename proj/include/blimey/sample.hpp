#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "blimey/blackbox.hpp"
#include "blimey/core.hpp"
#include "blimey/repr.hpp"

namespace blimey {

enum class SamplerKind {
  kNormal,
  kTruncatedNormal,
  kMixup,
  kGrowingSpheres,
  kClassDiscovery,
  kBinaryUniform,
  kBinFrequency,
};

/// Sampler choice plus the domain its output lives in. Kind-specific
/// parameters share the struct; irrelevant ones are ignored.
struct SamplerSpec {
  SamplerKind kind = SamplerKind::kBinFrequency;
  Domain domain = Domain::kDiscretized;
  double alpha = 1.0;       // mixup Beta(alpha, alpha)
  double p_flip = 0.5;      // binary_uniform per-bit drop probability
  double r0 = 0.1;          // growing_spheres initial radius
  double growth = 2.0;      // growing_spheres / class_discovery factor
  std::size_t max_rounds = 0;  // 0 = kind default (20 spheres, 10 discovery)

  std::size_t effective_max_rounds() const {
    if (max_rounds > 0) return max_rounds;
    return kind == SamplerKind::kGrowingSpheres ? 20 : 10;
  }
};

const char* sampler_kind_name(SamplerKind kind);
SamplerKind sampler_kind_from_name(const std::string& name);
const char* domain_name(Domain domain);
Domain domain_from_name(const std::string& name);

/// Enforces kind/domain compatibility (binary_uniform needs the binary
/// domain, bin_frequency the discretized one, growing_spheres and
/// class_discovery the original domain). Throws ConfigError.
void validate_sampler_spec(const SamplerSpec& spec);

/// A sampler output: points plus the domain they live in.
struct Sample {
  Matrix points;
  Domain domain = Domain::kOriginal;
};

/// Per-feature normal draws around x with the standard deviation of each
/// feature taken over the whole dataset; categorical features are drawn
/// from their empirical category frequencies.
Sample sample_normal(const TabularDataset& dataset, const DataPoint& x, std::size_t n,
                     RandomStream& rng);

/// sample_normal clipped to each feature's dataset [min, max]; draw-for-draw
/// identical to sample_normal before the clip.
Sample sample_truncated_normal(const TabularDataset& dataset, const DataPoint& x,
                               std::size_t n, RandomStream& rng);

/// Convex combination of x with one dataset row at lambda ~ Beta(alpha, alpha);
/// a categorical feature takes x's value when lambda >= 0.5, the row's otherwise.
Sample sample_mixup(const TabularDataset& dataset, const DataPoint& x, std::size_t n,
                    RandomStream& rng, double alpha = 1.0);

/// The deterministic blend sample_mixup builds from (row, lambda).
DataPoint mixup_blend(const TabularDataset& dataset, const DataPoint& x, std::size_t row,
                      double lambda);

/// Uniform draws in concentric shells of radius r0, r0*growth, ... around x,
/// keeping every point drawn and stopping at the first round whose points
/// carry >= 2 distinct predicted classes. Returns >= n points (rounds of n).
/// Throws NoBoundaryError when max_rounds pass with a single class.
Sample sample_growing_spheres(const ProbabilisticModel& model, const DataPoint& x,
                              std::size_t n, RandomStream& rng, double r0 = 0.1,
                              double growth = 2.0, std::size_t max_rounds = 20);

/// Normal sampling with the per-feature deviation scaled by 0.1 and grown by
/// `growth` each round until the n freshest points carry >= 2 predicted
/// classes; those n points are returned, so a successful call always covers
/// at least two classes. Throws NoBoundaryError when max_rounds pass.
Sample sample_class_discovery(const ProbabilisticModel& model,
                              const TabularDataset& dataset, const DataPoint& x,
                              std::size_t n, RandomStream& rng, double growth = 2.0,
                              std::size_t max_rounds = 10);

/// Binary-domain sampling: every 1-bit of x keeps its value with probability
/// 1 - p_flip and drops to 0 otherwise; 0-bits stay 0.
Sample sample_binary(const DataPoint& x_prime, std::size_t n, RandomStream& rng,
                     double p_flip = 0.5);

/// Discretized-domain sampling: each feature's bin index is drawn from its
/// empirical bin frequency over the training data (categorical features from
/// category frequencies). Every row one-hot encodes cleanly by construction.
Sample sample_bin_frequency(const Discretizer& disc, const TabularDataset& dataset,
                            std::size_t n, RandomStream& rng);

/// Predicted-class histogram of a sample (the class-imbalance report).
std::vector<std::size_t> class_counts(const ProbabilisticModel& model,
                                      const Matrix& points);

}  // namespace blimey
