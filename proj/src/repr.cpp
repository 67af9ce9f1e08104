#include "blimey/repr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

namespace blimey {

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Type-7 (linear interpolation) empirical quantile on sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::size_t bin_of(const std::vector<double>& boundaries, double v) {
  // Left-closed bins: the bin index is the count of boundaries <= v.
  return static_cast<std::size_t>(
      std::upper_bound(boundaries.begin(), boundaries.end(), v) - boundaries.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Discretizer
// ---------------------------------------------------------------------------

Discretizer Discretizer::fit(const TabularDataset& dataset, std::size_t bins_per_feature) {
  if (bins_per_feature < 2) {
    throw ConfigError("bins", "bins_per_feature must be >= 2");
  }
  dataset.validate();

  Discretizer disc;
  disc.metadata_ = dataset.features;
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    Feature f;
    if (dataset.features[j].kind == FeatureKind::kCategorical) {
      f.pass_through = true;
      disc.per_feature_.push_back(std::move(f));
      continue;
    }
    std::vector<double> values(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) values[i] = dataset.rows(i, j);
    std::sort(values.begin(), values.end());
    f.data_min = values.front();
    f.data_max = values.back();

    if (f.data_min == f.data_max) {
      disc.warnings_.push_back("feature '" + dataset.features[j].name +
                               "' is constant; using a single bin");
    } else {
      for (std::size_t k = 1; k < bins_per_feature; ++k) {
        const double b = quantile_sorted(
            values, static_cast<double>(k) / static_cast<double>(bins_per_feature));
        // Duplicate quantiles merge; the bin count shrinks.
        if (f.boundaries.empty() || b > f.boundaries.back()) f.boundaries.push_back(b);
      }
    }

    f.bins.assign(f.boundaries.size() + 1, BinStats{});
    std::vector<double> sums(f.bins.size(), 0.0);
    std::vector<double> sq_sums(f.bins.size(), 0.0);
    for (double v : values) {
      const std::size_t b = bin_of(f.boundaries, v);
      auto& bin = f.bins[b];
      if (bin.count == 0) {
        bin.min = bin.max = v;
      } else {
        bin.min = std::min(bin.min, v);
        bin.max = std::max(bin.max, v);
      }
      sums[b] += v;
      sq_sums[b] += v * v;
      ++bin.count;
    }
    for (std::size_t b = 0; b < f.bins.size(); ++b) {
      auto& bin = f.bins[b];
      if (bin.count == 0) {
        disc.warnings_.push_back("feature '" + dataset.features[j].name + "', bin " +
                                 std::to_string(b) + " holds no training data");
        continue;
      }
      bin.mean = sums[b] / static_cast<double>(bin.count);
      const double var =
          std::max(0.0, sq_sums[b] / static_cast<double>(bin.count) - bin.mean * bin.mean);
      bin.stddev = std::sqrt(var);
    }
    disc.per_feature_.push_back(std::move(f));
  }
  return disc;
}

std::size_t Discretizer::n_bins(std::size_t feature) const {
  const auto& f = per_feature_[feature];
  if (f.pass_through) return metadata_[feature].categories.size();
  return f.boundaries.size() + 1;
}

DataPoint Discretizer::discretize(const DataPoint& x) const {
  if (x.domain != Domain::kOriginal) {
    throw ConfigError("domain", "discretize expects an original-domain point");
  }
  if (x.size() != per_feature_.size()) {
    throw WidthMismatchError("point width " + std::to_string(x.size()) +
                             " != discretizer width " + std::to_string(per_feature_.size()));
  }
  DataPoint out{x.values, Domain::kDiscretized};
  for (std::size_t j = 0; j < per_feature_.size(); ++j) {
    const auto& f = per_feature_[j];
    if (f.pass_through) continue;
    out.values[j] = static_cast<double>(bin_of(f.boundaries, x.values[j]));
  }
  return out;
}

DataPoint Discretizer::undiscretize(const DataPoint& x_hat, RandomStream& rng) const {
  if (x_hat.domain != Domain::kDiscretized) {
    throw ConfigError("domain", "undiscretize expects a discretized-domain point");
  }
  if (x_hat.size() != per_feature_.size()) {
    throw WidthMismatchError("point width " + std::to_string(x_hat.size()) +
                             " != discretizer width " + std::to_string(per_feature_.size()));
  }
  DataPoint out{x_hat.values, Domain::kOriginal};
  for (std::size_t j = 0; j < per_feature_.size(); ++j) {
    const auto& f = per_feature_[j];
    if (f.pass_through) continue;
    const double raw = x_hat.values[j];
    if (raw != std::floor(raw) || raw < 0 ||
        raw >= static_cast<double>(f.bins.size())) {
      throw InvalidBinError("feature " + std::to_string(j) + ": bin " +
                            format_value(raw) + " out of range");
    }
    const std::size_t b = static_cast<std::size_t>(raw);
    const auto& stats = f.bins[b];
    if (stats.count == 0) {
      throw EmptyBinError("feature '" + metadata_[j].name + "', bin " +
                          std::to_string(b) + " holds no training data");
    }
    const double lo = b == 0 ? f.data_min : f.boundaries[b - 1];
    // Bins are right-open, so the clip ceiling is the largest double below
    // the boundary; the top bin is closed at the training maximum.
    const double hi = b == f.boundaries.size()
                          ? f.data_max
                          : std::nextafter(f.boundaries[b], lo);
    const double draw = stats.mean + stats.stddev * rng.next_gaussian();
    out.values[j] = std::clamp(draw, lo, hi);
  }
  return out;
}

nlohmann::ordered_json Discretizer::to_json() const {
  nlohmann::ordered_json j;
  j["features"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < per_feature_.size(); ++i) {
    const auto& f = per_feature_[i];
    const auto& m = metadata_[i];
    nlohmann::ordered_json jf;
    jf["name"] = m.name;
    jf["kind"] = m.kind == FeatureKind::kNumerical ? "numerical" : "categorical";
    if (m.kind == FeatureKind::kCategorical) {
      jf["categories"] = m.categories;
    } else {
      jf["boundaries"] = f.boundaries;
      jf["data_min"] = f.data_min;
      jf["data_max"] = f.data_max;
      jf["bins"] = nlohmann::ordered_json::array();
      for (const auto& b : f.bins) {
        jf["bins"].push_back({{"mean", b.mean},
                              {"stddev", b.stddev},
                              {"min", b.min},
                              {"max", b.max},
                              {"count", b.count}});
      }
    }
    j["features"].push_back(std::move(jf));
  }
  j["warnings"] = warnings_;
  return j;
}

Discretizer Discretizer::from_json(const nlohmann::json& j) {
  Discretizer disc;
  for (const auto& jf : j.at("features")) {
    FeatureMetadata m;
    m.name = jf.at("name").get<std::string>();
    Feature f;
    if (jf.at("kind").get<std::string>() == "categorical") {
      m.kind = FeatureKind::kCategorical;
      m.categories = jf.at("categories").get<std::vector<std::string>>();
      f.pass_through = true;
    } else {
      m.kind = FeatureKind::kNumerical;
      f.boundaries = jf.at("boundaries").get<std::vector<double>>();
      f.data_min = jf.at("data_min").get<double>();
      f.data_max = jf.at("data_max").get<double>();
      for (const auto& jb : jf.at("bins")) {
        f.bins.push_back({jb.at("mean").get<double>(), jb.at("stddev").get<double>(),
                          jb.at("min").get<double>(), jb.at("max").get<double>(),
                          jb.at("count").get<std::size_t>()});
      }
    }
    disc.metadata_.push_back(std::move(m));
    disc.per_feature_.push_back(std::move(f));
  }
  if (j.contains("warnings")) {
    disc.warnings_ = j["warnings"].get<std::vector<std::string>>();
  }
  return disc;
}

// ---------------------------------------------------------------------------
// Binarizer
// ---------------------------------------------------------------------------

Binarizer Binarizer::fit(const Discretizer& disc) {
  Binarizer binz;
  for (std::size_t j = 0; j < disc.n_features(); ++j) {
    const auto& meta = disc.feature_metadata()[j];
    const auto& f = disc.feature(j);
    binz.offsets_.push_back(binz.names_.size());
    binz.sizes_.push_back(disc.n_bins(j));
    if (f.pass_through) {
      for (const auto& cat : meta.categories) {
        binz.names_.push_back(meta.name + " = " + cat);
      }
      continue;
    }
    const auto& b = f.boundaries;
    if (b.empty()) {
      binz.names_.push_back(meta.name);
      continue;
    }
    binz.names_.push_back(meta.name + " < " + format_value(b.front()));
    for (std::size_t k = 1; k < b.size(); ++k) {
      binz.names_.push_back(format_value(b[k - 1]) + " <= " + meta.name + " < " +
                            format_value(b[k]));
    }
    binz.names_.push_back(meta.name + " >= " + format_value(b.back()));
  }
  return binz;
}

DataPoint Binarizer::binarize(const DataPoint& x_hat) const {
  if (x_hat.domain != Domain::kDiscretized) {
    throw ConfigError("domain", "binarize expects a discretized-domain point");
  }
  if (x_hat.size() != offsets_.size()) {
    throw WidthMismatchError("point width " + std::to_string(x_hat.size()) +
                             " != binarizer feature count " +
                             std::to_string(offsets_.size()));
  }
  DataPoint out{std::vector<double>(width(), 0.0), Domain::kBinary};
  for (std::size_t j = 0; j < offsets_.size(); ++j) {
    const double raw = x_hat.values[j];
    if (raw != std::floor(raw) || raw < 0 || raw >= static_cast<double>(sizes_[j])) {
      throw InvalidBinError("feature " + std::to_string(j) + ": bin " +
                            format_value(raw) + " out of range [0, " +
                            std::to_string(sizes_[j]) + ")");
    }
    out.values[offsets_[j] + static_cast<std::size_t>(raw)] = 1.0;
  }
  return out;
}

Matrix Binarizer::binarize_rows(const Matrix& x_hat_rows) const {
  Matrix out(x_hat_rows.rows(), width());
  for (std::size_t i = 0; i < x_hat_rows.rows(); ++i) {
    const auto r = x_hat_rows.row(i);
    const DataPoint enc =
        binarize(DataPoint{{r.begin(), r.end()}, Domain::kDiscretized});
    std::copy(enc.values.begin(), enc.values.end(), out.row(i).begin());
  }
  return out;
}

DataPoint Binarizer::decode(const DataPoint& x_prime) const {
  if (x_prime.size() != width()) {
    throw WidthMismatchError("point width " + std::to_string(x_prime.size()) +
                             " != binary width " + std::to_string(width()));
  }
  DataPoint out{std::vector<double>(offsets_.size(), 0.0), Domain::kDiscretized};
  for (std::size_t j = 0; j < offsets_.size(); ++j) {
    std::size_t set_bits = 0;
    for (std::size_t k = 0; k < sizes_[j]; ++k) {
      const double v = x_prime.values[offsets_[j] + k];
      if (v != 0.0 && v != 1.0) {
        throw NonBinaryInputError("value " + format_value(v) + " is not binary");
      }
      if (v == 1.0) {
        out.values[j] = static_cast<double>(k);
        ++set_bits;
      }
    }
    if (set_bits != 1) {
      throw DecodeError("feature " + std::to_string(j) + ": one-hot group has " +
                        std::to_string(set_bits) + " set bits");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reduced space and XNOR
// ---------------------------------------------------------------------------

namespace {

void require_binary(double v) {
  if (v != 0.0 && v != 1.0) {
    throw NonBinaryInputError("value " + format_value(v) + " is not binary");
  }
}

}  // namespace

std::pair<ReducedSpace, Matrix> drop_zero_features(
    const DataPoint& x_prime_explained, const Matrix& sample,
    const std::vector<std::string>& names) {
  if (sample.rows() > 0 && sample.cols() != x_prime_explained.size()) {
    throw WidthMismatchError("sample width " + std::to_string(sample.cols()) +
                             " != point width " +
                             std::to_string(x_prime_explained.size()));
  }
  if (!names.empty() && names.size() != x_prime_explained.size()) {
    throw WidthMismatchError("name count != point width");
  }
  ReducedSpace space;
  for (std::size_t j = 0; j < x_prime_explained.size(); ++j) {
    require_binary(x_prime_explained.values[j]);
    if (x_prime_explained.values[j] == 1.0) {
      space.kept_indices.push_back(j);
      space.names.push_back(names.empty() ? "f" + std::to_string(j) : names[j]);
    }
  }
  Matrix reduced(sample.rows(), space.kept_indices.size());
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    for (std::size_t k = 0; k < space.kept_indices.size(); ++k) {
      reduced(i, k) = sample(i, space.kept_indices[k]);
    }
  }
  return {std::move(space), std::move(reduced)};
}

Matrix xnor_transform(const DataPoint& x_explained, const Matrix& sample) {
  if (sample.rows() > 0 && sample.cols() != x_explained.size()) {
    throw WidthMismatchError("sample width " + std::to_string(sample.cols()) +
                             " != point width " + std::to_string(x_explained.size()));
  }
  for (double v : x_explained.values) require_binary(v);
  Matrix out(sample.rows(), sample.cols());
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    for (std::size_t j = 0; j < sample.cols(); ++j) {
      require_binary(sample(i, j));
      out(i, j) = sample(i, j) == x_explained.values[j] ? 1.0 : 0.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bag of words
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : sentence) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

BagOfWords BagOfWords::fit(const std::string& sentence) {
  BagOfWords bow;
  bow.tokens_ = tokenize(sentence);
  if (bow.tokens_.empty()) throw EmptyInputError("sentence has no words");
  for (const auto& token : bow.tokens_) {
    const std::string word = lowercase(token);
    auto it = std::find(bow.vocabulary_.begin(), bow.vocabulary_.end(), word);
    if (it == bow.vocabulary_.end()) {
      bow.vocabulary_.push_back(word);
      bow.token_ids_.push_back(bow.vocabulary_.size() - 1);
    } else {
      bow.token_ids_.push_back(static_cast<std::size_t>(it - bow.vocabulary_.begin()));
    }
  }
  return bow;
}

DataPoint BagOfWords::encode(const std::string& sentence) const {
  DataPoint out{std::vector<double>(vocabulary_.size(), 0.0), Domain::kBinary};
  for (const auto& token : tokenize(sentence)) {
    const std::string word = lowercase(token);
    auto it = std::find(vocabulary_.begin(), vocabulary_.end(), word);
    if (it != vocabulary_.end()) {
      out.values[static_cast<std::size_t>(it - vocabulary_.begin())] = 1.0;
    }
  }
  return out;
}

std::string BagOfWords::decode(const DataPoint& x_prime) const {
  if (x_prime.size() != vocabulary_.size()) {
    throw WidthMismatchError("vector width " + std::to_string(x_prime.size()) +
                             " != vocabulary size " + std::to_string(vocabulary_.size()));
  }
  for (double v : x_prime.values) require_binary(v);
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (x_prime.values[token_ids_[i]] != 1.0) continue;
    if (!out.empty()) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

}  // namespace blimey
