#include "blimey/sample.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace blimey {

const char* sampler_kind_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kNormal: return "normal";
    case SamplerKind::kTruncatedNormal: return "truncated_normal";
    case SamplerKind::kMixup: return "mixup";
    case SamplerKind::kGrowingSpheres: return "growing_spheres";
    case SamplerKind::kClassDiscovery: return "class_discovery";
    case SamplerKind::kBinaryUniform: return "binary_uniform";
    case SamplerKind::kBinFrequency: return "bin_frequency";
  }
  return "?";
}

SamplerKind sampler_kind_from_name(const std::string& name) {
  for (SamplerKind k :
       {SamplerKind::kNormal, SamplerKind::kTruncatedNormal, SamplerKind::kMixup,
        SamplerKind::kGrowingSpheres, SamplerKind::kClassDiscovery,
        SamplerKind::kBinaryUniform, SamplerKind::kBinFrequency}) {
    if (name == sampler_kind_name(k)) return k;
  }
  throw ConfigError("sampler-kind", "unknown sampler '" + name + "'");
}

const char* domain_name(Domain domain) {
  switch (domain) {
    case Domain::kOriginal: return "original";
    case Domain::kDiscretized: return "discretized";
    case Domain::kBinary: return "binary";
  }
  return "?";
}

Domain domain_from_name(const std::string& name) {
  for (Domain d : {Domain::kOriginal, Domain::kDiscretized, Domain::kBinary}) {
    if (name == domain_name(d)) return d;
  }
  throw ConfigError("domain", "unknown domain '" + name + "'");
}

void validate_sampler_spec(const SamplerSpec& spec) {
  const auto need = [&](Domain d) {
    if (spec.domain != d) {
      throw ConfigError("sampler-domain",
                        std::string("sampler '") + sampler_kind_name(spec.kind) +
                            "' requires the " + domain_name(d) + " domain, got " +
                            domain_name(spec.domain));
    }
  };
  switch (spec.kind) {
    case SamplerKind::kBinaryUniform:
      need(Domain::kBinary);
      if (!(spec.p_flip > 0.0 && spec.p_flip < 1.0)) {
        throw ConfigError("sampler-params", "p_flip must lie in (0, 1)");
      }
      break;
    case SamplerKind::kBinFrequency:
      need(Domain::kDiscretized);
      break;
    case SamplerKind::kMixup:
      need(Domain::kOriginal);
      if (!(spec.alpha > 0.0)) {
        throw ConfigError("sampler-params", "mixup alpha must be > 0");
      }
      break;
    case SamplerKind::kGrowingSpheres:
      need(Domain::kOriginal);
      if (!(spec.r0 > 0.0) || !(spec.growth > 1.0)) {
        throw ConfigError("sampler-params", "growing_spheres needs r0 > 0, growth > 1");
      }
      break;
    case SamplerKind::kClassDiscovery:
      need(Domain::kOriginal);
      if (!(spec.growth > 1.0)) {
        throw ConfigError("sampler-params", "class_discovery needs growth > 1");
      }
      break;
    default:
      need(Domain::kOriginal);
  }
}

namespace {

struct DatasetStats {
  std::vector<double> stddev;  // population, 0 for categoricals
  std::vector<double> min;
  std::vector<double> max;
  // Per categorical feature: cumulative category frequencies.
  std::vector<std::vector<double>> category_cdf;

  explicit DatasetStats(const TabularDataset& ds) {
    const std::size_t d = ds.n_features();
    const double n = static_cast<double>(ds.n_rows());
    stddev.assign(d, 0.0);
    min.assign(d, 0.0);
    max.assign(d, 0.0);
    category_cdf.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      double sum = 0.0, sq = 0.0;
      min[j] = max[j] = ds.rows(0, j);
      for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const double v = ds.rows(i, j);
        sum += v;
        sq += v * v;
        min[j] = std::min(min[j], v);
        max[j] = std::max(max[j], v);
      }
      const double mean = sum / n;
      stddev[j] = std::sqrt(std::max(0.0, sq / n - mean * mean));
      if (ds.features[j].kind == FeatureKind::kCategorical) {
        std::vector<double> counts(ds.features[j].categories.size(), 0.0);
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
          counts[static_cast<std::size_t>(ds.rows(i, j))] += 1.0;
        }
        double acc = 0.0;
        for (double c : counts) {
          acc += c / n;
          category_cdf[j].push_back(acc);
        }
        category_cdf[j].back() = 1.0;
      }
    }
  }
};

double draw_from_cdf(const std::vector<double>& cdf, RandomStream& rng) {
  const double u = rng.next_uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<double>(std::min<std::ptrdiff_t>(
      it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

void check_point(const TabularDataset& dataset, const DataPoint& x, Domain expected) {
  if (x.domain != expected) {
    throw ConfigError("domain", "sampler expects a point in the " +
                                    std::string(domain_name(expected)) + " domain");
  }
  if (x.size() != dataset.n_features()) {
    throw WidthMismatchError("point width " + std::to_string(x.size()) +
                             " != dataset width " + std::to_string(dataset.n_features()));
  }
}

Sample normal_like(const TabularDataset& dataset, const DataPoint& x, std::size_t n,
                   RandomStream& rng, double scale, bool truncate) {
  check_point(dataset, x, Domain::kOriginal);
  if (n < 1) throw EmptyInputError("need n >= 1 samples");
  const DatasetStats stats(dataset);
  Matrix out(n, dataset.n_features());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
      if (dataset.features[j].kind == FeatureKind::kCategorical) {
        out(i, j) = draw_from_cdf(stats.category_cdf[j], rng);
      } else {
        double v = x.values[j] + scale * stats.stddev[j] * rng.next_gaussian();
        if (truncate) v = std::clamp(v, stats.min[j], stats.max[j]);
        out(i, j) = v;
      }
    }
  }
  return {std::move(out), Domain::kOriginal};
}

// Marsaglia-Tsang gamma draw, shape boosted below 1.
double next_gamma(RandomStream& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.next_uniform();
    return next_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = rng.next_gaussian();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_uniform();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double next_beta(RandomStream& rng, double alpha) {
  const double a = next_gamma(rng, alpha);
  const double b = next_gamma(rng, alpha);
  return a + b > 0.0 ? a / (a + b) : 0.5;
}

}  // namespace

Sample sample_normal(const TabularDataset& dataset, const DataPoint& x, std::size_t n,
                     RandomStream& rng) {
  return normal_like(dataset, x, n, rng, 1.0, false);
}

Sample sample_truncated_normal(const TabularDataset& dataset, const DataPoint& x,
                               std::size_t n, RandomStream& rng) {
  return normal_like(dataset, x, n, rng, 1.0, true);
}

DataPoint mixup_blend(const TabularDataset& dataset, const DataPoint& x, std::size_t row,
                      double lambda) {
  DataPoint out{std::vector<double>(dataset.n_features()), Domain::kOriginal};
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    if (dataset.features[j].kind == FeatureKind::kCategorical) {
      out.values[j] = lambda >= 0.5 ? x.values[j] : dataset.rows(row, j);
    } else {
      out.values[j] = lambda * x.values[j] + (1.0 - lambda) * dataset.rows(row, j);
    }
  }
  return out;
}

Sample sample_mixup(const TabularDataset& dataset, const DataPoint& x, std::size_t n,
                    RandomStream& rng, double alpha) {
  check_point(dataset, x, Domain::kOriginal);
  if (n < 1) throw EmptyInputError("need n >= 1 samples");
  if (!(alpha > 0.0)) throw ConfigError("sampler-params", "mixup alpha must be > 0");
  Matrix out(n, dataset.n_features());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = rng.next_index(dataset.n_rows());
    const double lambda = next_beta(rng, alpha);
    const DataPoint blended = mixup_blend(dataset, x, row, lambda);
    std::copy(blended.values.begin(), blended.values.end(), out.row(i).begin());
  }
  return {std::move(out), Domain::kOriginal};
}

Sample sample_growing_spheres(const ProbabilisticModel& model, const DataPoint& x,
                              std::size_t n, RandomStream& rng, double r0, double growth,
                              std::size_t max_rounds) {
  if (x.domain != Domain::kOriginal) {
    throw ConfigError("domain", "growing_spheres samples the original domain");
  }
  if (x.size() != model.n_features()) {
    throw WidthMismatchError("point width " + std::to_string(x.size()) +
                             " != model width " + std::to_string(model.n_features()));
  }
  if (n < 1) throw EmptyInputError("need n >= 1 samples");
  const std::size_t dim = x.size();
  std::vector<std::vector<double>> accumulated;

  double inner = 0.0;
  double outer = r0;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    Matrix shell(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
      // Uniform direction, then a radius with density ~ r^(dim-1) in the shell.
      double norm = 0.0;
      std::vector<double> dir(dim);
      do {
        norm = 0.0;
        for (auto& v : dir) {
          v = rng.next_gaussian();
          norm += v * v;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      const double u = rng.next_uniform();
      const double lo = std::pow(inner, static_cast<double>(dim));
      const double hi = std::pow(outer, static_cast<double>(dim));
      const double radius = std::pow(lo + u * (hi - lo), 1.0 / static_cast<double>(dim));
      for (std::size_t j = 0; j < dim; ++j) {
        shell(i, j) = x.values[j] + radius * dir[j] / norm;
      }
    }
    const auto classes = predict_class(model, shell);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = shell.row(i);
      accumulated.emplace_back(row.begin(), row.end());
    }
    if (std::set<int>(classes.begin(), classes.end()).size() >= 2) {
      Matrix out(accumulated.size(), dim);
      for (std::size_t i = 0; i < accumulated.size(); ++i) {
        std::copy(accumulated[i].begin(), accumulated[i].end(), out.row(i).begin());
      }
      return {std::move(out), Domain::kOriginal};
    }
    inner = outer;
    outer *= growth;
  }
  throw NoBoundaryError("no decision boundary discovered after " +
                        std::to_string(max_rounds) + " rounds");
}

Sample sample_class_discovery(const ProbabilisticModel& model,
                              const TabularDataset& dataset, const DataPoint& x,
                              std::size_t n, RandomStream& rng, double growth,
                              std::size_t max_rounds) {
  check_point(dataset, x, Domain::kOriginal);
  if (x.size() != model.n_features()) {
    throw WidthMismatchError("point width != model width");
  }
  if (n < 1) throw EmptyInputError("need n >= 1 samples");
  double scale = 0.1;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    // A fresh draw each round; the candidate return set is exactly this
    // round's n points, so a success always covers >= 2 classes.
    Sample candidate = normal_like(dataset, x, n, rng, scale, false);
    const auto classes = predict_class(model, candidate.points);
    if (std::set<int>(classes.begin(), classes.end()).size() >= 2) {
      return candidate;
    }
    scale *= growth;
  }
  throw NoBoundaryError("no decision boundary discovered after " +
                        std::to_string(max_rounds) + " rounds");
}

Sample sample_binary(const DataPoint& x_prime, std::size_t n, RandomStream& rng,
                     double p_flip) {
  if (x_prime.domain != Domain::kBinary) {
    throw ConfigError("domain", "binary sampling expects a binary-domain point");
  }
  if (!(p_flip > 0.0 && p_flip < 1.0)) {
    throw ConfigError("sampler-params", "p_flip must lie in (0, 1)");
  }
  for (double v : x_prime.values) {
    if (v != 0.0 && v != 1.0) {
      throw NonBinaryInputError("binary sampling got a non-binary value");
    }
  }
  Matrix out(n, x_prime.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < x_prime.size(); ++j) {
      // Draws are consumed for 1-bits only; 0-bits stay 0.
      out(i, j) = x_prime.values[j] == 1.0 && rng.next_uniform() >= p_flip ? 1.0 : 0.0;
    }
  }
  return {std::move(out), Domain::kBinary};
}

Sample sample_bin_frequency(const Discretizer& disc, const TabularDataset& dataset,
                            std::size_t n, RandomStream& rng) {
  if (disc.n_features() != dataset.n_features()) {
    throw WidthMismatchError("discretizer width != dataset width");
  }
  if (n < 1) throw EmptyInputError("need n >= 1 samples");
  const double n_rows = static_cast<double>(dataset.n_rows());

  // Empirical bin (or category) frequency per feature, from the training data.
  std::vector<std::vector<double>> counts(dataset.n_features());
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    counts[j].assign(disc.n_bins(j), 0.0);
  }
  for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
    const DataPoint x_hat = disc.discretize(dataset.point(i));
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
      counts[j][static_cast<std::size_t>(x_hat.values[j])] += 1.0;
    }
  }
  std::vector<std::vector<double>> cdf(dataset.n_features());
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    double acc = 0.0;
    for (double c : counts[j]) {
      acc += c / n_rows;
      cdf[j].push_back(acc);
    }
    cdf[j].back() = 1.0;
  }

  Matrix out(n, dataset.n_features());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
      out(i, j) = draw_from_cdf(cdf[j], rng);
    }
  }
  return {std::move(out), Domain::kDiscretized};
}

std::vector<std::size_t> class_counts(const ProbabilisticModel& model,
                                      const Matrix& points) {
  std::vector<std::size_t> counts(model.n_classes(), 0);
  for (int c : predict_class(model, points)) ++counts[c];
  return counts;
}

}  // namespace blimey
