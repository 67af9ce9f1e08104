#include "blimey/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace blimey {

namespace {

#include "iris_data.inc"

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::string format_double(double v) {
  // Shortest representation that parses back to the same double.
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

// ---------------------------------------------------------------------------
// TabularDataset
// ---------------------------------------------------------------------------

DataPoint TabularDataset::point(std::size_t i) const {
  auto r = rows.row(i);
  return DataPoint{{r.begin(), r.end()}, Domain::kOriginal};
}

std::size_t TabularDataset::feature_index(const std::string& name) const {
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (features[j].name == name) return j;
  }
  throw MetadataMismatchError("no feature named '" + name + "'");
}

void TabularDataset::validate() const {
  if (n_rows() == 0) throw EmptyInputError("dataset has no rows");
  if (rows.cols() != features.size()) {
    throw WidthMismatchError("row width " + std::to_string(rows.cols()) +
                             " != feature count " + std::to_string(features.size()));
  }
  std::set<std::string> names;
  for (const auto& f : features) {
    if (!names.insert(f.name).second) {
      throw MetadataMismatchError("duplicate feature name '" + f.name + "'");
    }
    if (f.kind == FeatureKind::kCategorical && f.categories.empty()) {
      throw MetadataMismatchError("categorical feature '" + f.name +
                                  "' lists no categories");
    }
  }
  for (std::size_t i = 0; i < n_rows(); ++i) {
    for (std::size_t j = 0; j < n_features(); ++j) {
      const auto& f = features[j];
      if (f.kind != FeatureKind::kCategorical) continue;
      double v = rows(i, j);
      if (v != std::floor(v) || v < 0 || v >= static_cast<double>(f.categories.size())) {
        throw UnknownCategoryError("row " + std::to_string(i) + ", feature '" + f.name +
                                   "': value " + format_double(v) +
                                   " is not a category index");
      }
    }
  }
  if (labels) {
    if (labels->size() != n_rows()) {
      throw WidthMismatchError("label count != row count");
    }
    if (!class_names) {
      throw MetadataMismatchError("labels present but class names missing");
    }
    for (int c : *labels) {
      if (c < 0 || c >= static_cast<int>(class_names->size())) {
        throw UnknownCategoryError("label index " + std::to_string(c) + " out of range");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// RandomStream
// ---------------------------------------------------------------------------

RandomStream::RandomStream(std::uint64_t seed, std::string label)
    : seed_(seed), label_(std::move(label)) {
  std::uint64_t sm = seed ^ fnv1a64(label_);
  for (auto& word : state_) word = splitmix64(sm);
  // xoshiro state must not be all zero; SplitMix64 cannot emit four zeros
  // from distinct counters, so this is unreachable but cheap to keep exact.
  if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
    state_[0] = 1;
  }
}

std::uint64_t RandomStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

std::size_t RandomStream::next_index(std::size_t n) {
  // Lemire multiply-shift; bias is < 2^-64 per draw.
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

// ---------------------------------------------------------------------------
// CSV + metadata ingestion
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding spaces only; values keep internal whitespace.
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || p != cell.data() + cell.size()) {
    throw ValueParseError("row " + std::to_string(row) + ", column '" + column +
                          "': cannot parse '" + cell + "' as a number");
  }
  return v;
}

}  // namespace

TabularDataset load_dataset(const std::filesystem::path& csv_path,
                            const std::filesystem::path& metadata_path) {
  std::ifstream meta_in(metadata_path);
  if (!meta_in) throw EmptyInputError("cannot open " + metadata_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ValueParseError("metadata " + metadata_path.string() + ": " + e.what());
  }

  TabularDataset ds;
  for (const auto& jf : meta.at("features")) {
    FeatureMetadata f;
    f.name = jf.at("name").get<std::string>();
    const auto kind = jf.at("kind").get<std::string>();
    if (kind == "numerical") {
      f.kind = FeatureKind::kNumerical;
    } else if (kind == "categorical") {
      f.kind = FeatureKind::kCategorical;
      f.categories = jf.at("categories").get<std::vector<std::string>>();
    } else {
      throw MetadataMismatchError("feature '" + f.name + "': unknown kind '" + kind + "'");
    }
    ds.features.push_back(std::move(f));
  }
  std::string label_name;
  if (meta.contains("label")) {
    label_name = meta["label"].at("name").get<std::string>();
    ds.class_names = meta["label"].at("classes").get<std::vector<std::string>>();
    ds.labels.emplace();
  }

  std::ifstream csv_in(csv_path);
  if (!csv_in) throw EmptyInputError("cannot open " + csv_path.string());
  std::string line;
  if (!std::getline(csv_in, line) || line.empty()) {
    throw EmptyInputError(csv_path.string() + " is empty");
  }
  const auto header = split_csv_line(line);

  // Map every declared column to its CSV position.
  std::vector<std::size_t> feature_col(ds.features.size());
  auto find_col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw MetadataMismatchError("metadata column '" + name + "' not in CSV header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  for (std::size_t j = 0; j < ds.features.size(); ++j) {
    feature_col[j] = find_col(ds.features[j].name);
  }
  std::size_t label_col = 0;
  if (ds.labels) label_col = find_col(label_name);
  std::size_t declared = ds.features.size() + (ds.labels ? 1 : 0);
  if (header.size() != declared) {
    throw MetadataMismatchError("CSV has " + std::to_string(header.size()) +
                                " columns, metadata declares " + std::to_string(declared));
  }

  std::vector<double> values;
  std::size_t n_rows = 0;
  for (std::size_t row = 0; std::getline(csv_in, line); ++row) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValueParseError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < ds.features.size(); ++j) {
      const auto& f = ds.features[j];
      const auto& cell = cells[feature_col[j]];
      if (f.kind == FeatureKind::kNumerical) {
        values.push_back(parse_number(cell, row, f.name));
      } else {
        auto it = std::find(f.categories.begin(), f.categories.end(), cell);
        if (it == f.categories.end()) {
          throw UnknownCategoryError("row " + std::to_string(row) + ", column '" +
                                     f.name + "': category '" + cell + "' not declared");
        }
        values.push_back(static_cast<double>(it - f.categories.begin()));
      }
    }
    if (ds.labels) {
      const auto& cell = cells[label_col];
      auto it = std::find(ds.class_names->begin(), ds.class_names->end(), cell);
      if (it == ds.class_names->end()) {
        throw UnknownCategoryError("row " + std::to_string(row) + ", column '" +
                                   label_name + "': class '" + cell + "' not declared");
      }
      ds.labels->push_back(static_cast<int>(it - ds.class_names->begin()));
    }
    ++n_rows;
  }
  if (n_rows == 0) throw EmptyInputError(csv_path.string() + " has no data rows");

  ds.rows = Matrix(n_rows, ds.features.size());
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < ds.features.size(); ++j) {
      ds.rows(i, j) = values[i * ds.features.size() + j];
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const TabularDataset& dataset,
                  const std::filesystem::path& csv_path,
                  const std::filesystem::path& metadata_path) {
  dataset.validate();
  auto safe_name = [](const std::string& s) {
    if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos) {
      throw ValueParseError("name '" + s + "' contains a CSV delimiter");
    }
    return s;
  };

  nlohmann::ordered_json meta;
  meta["features"] = nlohmann::ordered_json::array();
  for (const auto& f : dataset.features) {
    nlohmann::ordered_json jf;
    jf["name"] = safe_name(f.name);
    jf["kind"] = f.kind == FeatureKind::kNumerical ? "numerical" : "categorical";
    if (f.kind == FeatureKind::kCategorical) jf["categories"] = f.categories;
    meta["features"].push_back(jf);
  }
  std::string label_name;
  if (dataset.labels) {
    label_name = "class";
    // Avoid colliding with a feature also named "class".
    while (std::any_of(dataset.features.begin(), dataset.features.end(),
                       [&](const auto& f) { return f.name == label_name; })) {
      label_name += "_";
    }
    meta["label"] = {{"name", label_name}, {"classes", *dataset.class_names}};
  }
  std::ofstream meta_out(metadata_path);
  if (!meta_out) throw EmptyInputError("cannot write " + metadata_path.string());
  meta_out << meta.dump(2) << '\n';

  std::ofstream csv_out(csv_path);
  if (!csv_out) throw EmptyInputError("cannot write " + csv_path.string());
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    if (j) csv_out << ',';
    csv_out << safe_name(dataset.features[j].name);
  }
  if (dataset.labels) csv_out << ',' << label_name;
  csv_out << '\n';
  for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
      const auto& f = dataset.features[j];
      if (j) csv_out << ',';
      if (f.kind == FeatureKind::kCategorical) {
        csv_out << safe_name(f.categories[static_cast<std::size_t>(dataset.rows(i, j))]);
      } else {
        csv_out << format_double(dataset.rows(i, j));
      }
    }
    if (dataset.labels) {
      csv_out << ',' << safe_name((*dataset.class_names)[(*dataset.labels)[i]]);
    }
    csv_out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Built-in datasets
// ---------------------------------------------------------------------------

TabularDataset builtin_iris() {
  TabularDataset ds;
  ds.features = {
      {"sepal length (cm)", FeatureKind::kNumerical, {}},
      {"sepal width (cm)", FeatureKind::kNumerical, {}},
      {"petal length (cm)", FeatureKind::kNumerical, {}},
      {"petal width (cm)", FeatureKind::kNumerical, {}},
  };
  ds.rows = Matrix(150, 4);
  ds.labels.emplace(150);
  ds.class_names = {{"setosa", "versicolor", "virginica"}};
  for (std::size_t i = 0; i < 150; ++i) {
    for (std::size_t j = 0; j < 4; ++j) ds.rows(i, j) = kIrisTable[i][j];
    (*ds.labels)[i] = static_cast<int>(kIrisTable[i][4]);
  }
  return ds;
}

TabularDataset make_two_moons(std::size_t n, double noise, RandomStream& rng) {
  if (n < 2) throw EmptyInputError("two moons needs n >= 2");
  if (noise < 0) throw ValueParseError("noise must be >= 0");
  const std::size_t n_outer = (n + 1) / 2;
  const std::size_t n_inner = n / 2;

  TabularDataset ds;
  ds.features = {{"x", FeatureKind::kNumerical, {}}, {"y", FeatureKind::kNumerical, {}}};
  ds.rows = Matrix(n, 2);
  ds.labels.emplace(n);
  ds.class_names = {{"outer", "inner"}};

  auto arc_t = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) /
                           static_cast<double>(count - 1)
                     : 0.0;
  };
  std::size_t row = 0;
  for (std::size_t i = 0; i < n_outer; ++i, ++row) {
    const double t = arc_t(i, n_outer);
    ds.rows(row, 0) = std::cos(t) + noise * rng.next_gaussian();
    ds.rows(row, 1) = std::sin(t) + noise * rng.next_gaussian();
    (*ds.labels)[row] = 0;
  }
  for (std::size_t i = 0; i < n_inner; ++i, ++row) {
    const double t = arc_t(i, n_inner);
    ds.rows(row, 0) = 1.0 - std::cos(t) + noise * rng.next_gaussian();
    ds.rows(row, 1) = 0.5 - std::sin(t) + noise * rng.next_gaussian();
    (*ds.labels)[row] = 1;
  }
  return ds;
}

}  // namespace blimey
