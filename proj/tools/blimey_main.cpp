#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blimey/blackbox.hpp"
#include "blimey/core.hpp"
#include "blimey/pipeline.hpp"
#include "blimey/repr.hpp"
#include "blimey/sample.hpp"
#include "blimey/surrogate.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Shipped reference point for the two-moons demo: close to the bend where
/// the inner moon tucks under the outer one, so the local boundary is
/// genuinely two-dimensional.
constexpr double kMoonsReferenceX = 0.45;
constexpr double kMoonsReferenceY = 0.40;

// -- shared flag bundles ------------------------------------------------------

struct DatasetFlags {
  std::string builtin;
  std::string csv_path;
  std::string meta_path;
  std::size_t moons_n = 1000;
  double moons_noise = 0.1;
};

struct ForestFlags {
  std::size_t trees = 100;
  std::size_t depth = 8;
  std::string model_in;
  std::string model_out;
};

struct CommonFlags {
  std::uint64_t seed = 42;
  std::string out_dir;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BLIMEY_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw blimey::ConfigError("seed",
                                std::string("BLIMEY_SEED is not a number: ") + env);
    }
  }
  return 42;
}

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw blimey::EmptyInputError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Collects the inputs/outputs of a run and writes manifest.json last.
struct RunManifest {
  std::string command;
  ordered_json flags = ordered_json::object();
  std::uint64_t seed = 0;
  ordered_json inputs = ordered_json::array();
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void add_input(const fs::path& path) {
    inputs.push_back({{"path", path.string()}, {"fnv1a64", hex64(fnv1a_file(path))}});
  }

  void write(const fs::path& out_dir) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    ordered_json j;
    j["command"] = command;
    j["flags"] = flags;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["wall_time_seconds"] = elapsed;
    std::ofstream out(out_dir / "manifest.json");
    out << j.dump(2) << '\n';
  }
};

fs::path prepare_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) throw blimey::ConfigError("out", "--out directory is required");
  fs::create_directories(out_dir);
  return out_dir;
}

/// Output paths must stay inside --out.
fs::path out_file(const fs::path& out_dir, const std::string& name,
                  RunManifest& manifest) {
  const fs::path p(name);
  if (p.is_absolute() || name.find("..") != std::string::npos) {
    throw blimey::ConfigError("out", "output '" + name + "' would escape --out");
  }
  manifest.outputs.push_back(name);
  return out_dir / p;
}

blimey::TabularDataset resolve_dataset(const DatasetFlags& flags, std::uint64_t seed,
                                       RunManifest& manifest) {
  if (!flags.builtin.empty()) {
    manifest.flags["builtin"] = flags.builtin;
    if (flags.builtin == "iris") return blimey::builtin_iris();
    if (flags.builtin == "two-moons") {
      blimey::RandomStream rng(seed, "two-moons");
      return blimey::make_two_moons(flags.moons_n, flags.moons_noise, rng);
    }
    throw blimey::ConfigError("builtin", "unknown builtin '" + flags.builtin +
                                             "' (expected iris or two-moons)");
  }
  if (flags.csv_path.empty() || flags.meta_path.empty()) {
    throw blimey::ConfigError("dataset", "provide --builtin or both --dataset and --meta");
  }
  manifest.add_input(flags.csv_path);
  manifest.add_input(flags.meta_path);
  manifest.flags["dataset"] = flags.csv_path;
  manifest.flags["meta"] = flags.meta_path;
  return blimey::load_dataset(flags.csv_path, flags.meta_path);
}

blimey::RandomForest obtain_forest(const blimey::TabularDataset& dataset,
                                   const ForestFlags& flags, std::uint64_t seed,
                                   const fs::path& out_dir, RunManifest& manifest) {
  blimey::RandomForest forest = [&] {
    if (!flags.model_in.empty()) {
      manifest.add_input(flags.model_in);
      manifest.flags["model_in"] = flags.model_in;
      std::ifstream in(flags.model_in);
      if (!in) throw blimey::EmptyInputError("cannot open " + flags.model_in);
      nlohmann::json j;
      in >> j;
      return blimey::RandomForest::from_json(j);
    }
    blimey::RandomForestConfig config;
    config.n_trees = flags.trees;
    config.max_depth = flags.depth;
    blimey::RandomStream rng(seed, "forest");
    return blimey::train_random_forest(dataset, config, rng);
  }();
  if (!flags.model_out.empty()) {
    std::ofstream out(out_file(out_dir, flags.model_out, manifest));
    out << forest.to_json().dump(2) << '\n';
    manifest.flags["model_out"] = flags.model_out;
  }
  return forest;
}

blimey::DataPoint resolve_point(const blimey::TabularDataset& dataset, int point_index,
                                const std::string& point_text) {
  if (!point_text.empty()) {
    std::vector<double> values;
    std::stringstream ss(point_text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (...) {
        throw blimey::ConfigError("point", "cannot parse --point value '" + cell + "'");
      }
    }
    return {values, blimey::Domain::kOriginal};
  }
  if (point_index < 0 || static_cast<std::size_t>(point_index) >= dataset.n_rows()) {
    throw blimey::ConfigError("point", "--point-index " + std::to_string(point_index) +
                                           " out of range [0, " +
                                           std::to_string(dataset.n_rows()) + ")");
  }
  return dataset.point(static_cast<std::size_t>(point_index));
}

std::optional<int> resolve_class_flag(const std::string& text, std::size_t n_classes) {
  if (text.empty() || text == "predicted") return std::nullopt;
  int value = 0;
  try {
    value = std::stoi(text);
  } catch (...) {
    throw blimey::ConfigError("target-class", "--class must be an index or 'predicted'");
  }
  if (value < 0 || static_cast<std::size_t>(value) >= n_classes) {
    throw blimey::ConfigError("target-class", "--class " + text + " out of range [0, " +
                                                  std::to_string(n_classes) + ")");
  }
  return value;
}

void emit_number(std::ofstream& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, static_cast<std::streamsize>(end - buf));
}

void write_csv_sample(const fs::path& path, const blimey::TabularDataset& dataset,
                      const blimey::Matrix& points, const std::vector<int>& classes) {
  std::ofstream out(path);
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    out << dataset.features[j].name << ',';
  }
  out << "predicted_class\n";
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < points.cols(); ++j) {
      emit_number(out, points(i, j));
      out << ',';
    }
    out << (*dataset.class_names)[classes[i]] << '\n';
  }
}

// -- explain ------------------------------------------------------------------

struct ExplainFlags {
  DatasetFlags dataset;
  ForestFlags forest;
  CommonFlags common;
  std::string pipeline = "lime";
  int point_index = 0;
  std::string point_text;
  std::string target_class;
  std::optional<std::size_t> n_samples;
  std::optional<std::size_t> k_lasso;
  std::optional<double> alpha;
  std::optional<std::size_t> tree_depth;
  std::optional<std::size_t> min_leaf;
  std::optional<double> kernel_width;
  std::optional<std::size_t> bins;
  bool balance_classes = false;
};

int cmd_explain(const ExplainFlags& flags) {
  RunManifest manifest;
  manifest.command = "explain";
  manifest.seed = flags.common.seed;
  const fs::path out_dir = prepare_out_dir(flags.common.out_dir);

  const blimey::TabularDataset dataset =
      resolve_dataset(flags.dataset, flags.common.seed, manifest);
  const blimey::RandomForest forest =
      obtain_forest(dataset, flags.forest, flags.common.seed, out_dir, manifest);

  blimey::PipelineConfig config;
  if (flags.pipeline == "lime" || flags.pipeline == "tree") {
    config = blimey::preset_config(flags.pipeline);
  } else {
    manifest.add_input(flags.pipeline);
    std::ifstream in(flags.pipeline);
    if (!in) throw blimey::EmptyInputError("cannot open " + flags.pipeline);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw blimey::ConfigError("pipeline",
                                "bad pipeline config: " + std::string(e.what()));
    }
    config = blimey::config_from_json(j);
  }
  config.seed = flags.common.seed;
  config.target_class = resolve_class_flag(flags.target_class, forest.n_classes());
  if (flags.n_samples) config.n_samples = *flags.n_samples;
  if (flags.bins) config.bins_per_feature = *flags.bins;
  if (flags.kernel_width) config.kernel_width = *flags.kernel_width;
  if (flags.balance_classes) config.balance_classes = true;
  if (auto* ridge = std::get_if<blimey::RidgeSurrogateConfig>(&config.surrogate)) {
    if (flags.alpha) ridge->alpha = *flags.alpha;
    if (flags.k_lasso) ridge->k_lasso = *flags.k_lasso;
  }
  if (auto* tree = std::get_if<blimey::TreeSurrogateConfig>(&config.surrogate)) {
    if (flags.tree_depth) tree->max_depth = *flags.tree_depth;
    if (flags.min_leaf) tree->min_samples_leaf = *flags.min_leaf;
  }
  manifest.flags["pipeline"] = flags.pipeline;
  manifest.flags["config"] = blimey::config_to_json(config);

  const blimey::DataPoint x = resolve_point(dataset, flags.point_index, flags.point_text);
  manifest.flags["point"] = x.values;

  const blimey::Explainer explainer = blimey::build_pipeline(config, dataset, forest);
  for (const auto& warning : explainer.warnings()) {
    std::cerr << "warning: " << warning << '\n';
  }
  const blimey::Explanation explanation = explainer.explain(x);

  std::ofstream out(out_file(out_dir, "explanation.json", manifest));
  out << explanation.to_json().dump(2) << '\n';
  manifest.write(out_dir);
  return 0;
}

// -- compare-samplers ---------------------------------------------------------

struct CompareFlags {
  DatasetFlags dataset;
  ForestFlags forest;
  CommonFlags common;
  std::string samplers = "normal,truncated,mixup,class-discovery";
  std::size_t n = 150;
  int point_index = 0;
  std::string point_text;
  std::string features;
};

blimey::SamplerKind sampler_alias(const std::string& name) {
  if (name == "normal") return blimey::SamplerKind::kNormal;
  if (name == "truncated" || name == "truncated-normal") {
    return blimey::SamplerKind::kTruncatedNormal;
  }
  if (name == "mixup") return blimey::SamplerKind::kMixup;
  if (name == "class-discovery") return blimey::SamplerKind::kClassDiscovery;
  if (name == "growing-spheres") return blimey::SamplerKind::kGrowingSpheres;
  throw blimey::ConfigError("sampler-kind", "unknown sampler '" + name + "'");
}

int cmd_compare_samplers(const CompareFlags& flags) {
  RunManifest manifest;
  manifest.command = "compare-samplers";
  manifest.seed = flags.common.seed;
  const fs::path out_dir = prepare_out_dir(flags.common.out_dir);

  const blimey::TabularDataset dataset =
      resolve_dataset(flags.dataset, flags.common.seed, manifest);
  if (!dataset.labels) {
    throw blimey::ConfigError("dataset", "compare-samplers needs a labelled dataset");
  }
  const blimey::RandomForest forest =
      obtain_forest(dataset, flags.forest, flags.common.seed, out_dir, manifest);
  const blimey::DataPoint x = resolve_point(dataset, flags.point_index, flags.point_text);
  manifest.flags["point"] = x.values;
  manifest.flags["n"] = flags.n;
  manifest.flags["samplers"] = flags.samplers;

  // The two plot axes; the CSVs always carry every feature.
  std::vector<std::string> projection;
  if (flags.features.empty()) {
    for (std::size_t j = 0; j < std::min<std::size_t>(2, dataset.n_features()); ++j) {
      projection.push_back(dataset.features[j].name);
    }
  } else {
    std::stringstream ss(flags.features);
    std::string name;
    while (std::getline(ss, name, ',')) {
      dataset.feature_index(name);  // throws on unknown names
      projection.push_back(name);
    }
  }

  ordered_json summary;
  summary["projection"] = projection;
  summary["samplers"] = ordered_json::object();

  std::stringstream names(flags.samplers);
  std::string name;
  while (std::getline(names, name, ',')) {
    const blimey::SamplerKind kind = sampler_alias(name);
    blimey::RandomStream rng(flags.common.seed, "sampler/" + name);
    ordered_json entry;
    try {
      blimey::Sample sample;
      switch (kind) {
        case blimey::SamplerKind::kNormal:
          sample = blimey::sample_normal(dataset, x, flags.n, rng);
          break;
        case blimey::SamplerKind::kTruncatedNormal:
          sample = blimey::sample_truncated_normal(dataset, x, flags.n, rng);
          break;
        case blimey::SamplerKind::kMixup:
          sample = blimey::sample_mixup(dataset, x, flags.n, rng);
          break;
        case blimey::SamplerKind::kClassDiscovery:
          sample = blimey::sample_class_discovery(forest, dataset, x, flags.n, rng);
          break;
        default:
          sample = blimey::sample_growing_spheres(forest, x, flags.n, rng);
          break;
      }
      const auto classes = blimey::predict_class(forest, sample.points);
      write_csv_sample(out_file(out_dir, name + ".csv", manifest), dataset,
                       sample.points, classes);

      const auto counts = blimey::class_counts(forest, sample.points);
      ordered_json class_counts_json = ordered_json::object();
      std::size_t distinct = 0;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        class_counts_json[(*dataset.class_names)[c]] = counts[c];
        if (counts[c] > 0) ++distinct;
      }
      entry["rows"] = sample.points.rows();
      entry["class_counts"] = class_counts_json;
      entry["distinct_classes"] = distinct;
    } catch (const blimey::NoBoundaryError& e) {
      // A boundary-seeking sampler may fail; the others still run.
      entry["error"] = e.what();
    }
    summary["samplers"][name] = entry;
  }

  std::ofstream out(out_file(out_dir, "summary.json", manifest));
  out << summary.dump(2) << '\n';
  manifest.write(out_dir);
  return 0;
}

// -- demo-two-moons -----------------------------------------------------------

struct DemoFlags {
  ForestFlags forest;
  CommonFlags common;
  std::size_t n = 1000;
  double noise = 0.1;
  std::string surrogate = "both";
  std::size_t grid = 200;
  std::optional<std::size_t> n_samples;
};

void write_grid_csv(const fs::path& path, const blimey::TabularDataset& dataset,
                    std::size_t grid,
                    const std::function<double(double, double)>& value) {
  double min_x = dataset.rows(0, 0), max_x = min_x;
  double min_y = dataset.rows(0, 1), max_y = min_y;
  for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
    min_x = std::min(min_x, dataset.rows(i, 0));
    max_x = std::max(max_x, dataset.rows(i, 0));
    min_y = std::min(min_y, dataset.rows(i, 1));
    max_y = std::max(max_y, dataset.rows(i, 1));
  }
  std::ofstream out(path);
  out << "x,y,value\n";
  for (std::size_t ix = 0; ix < grid; ++ix) {
    const double gx = min_x + (max_x - min_x) * static_cast<double>(ix) /
                                  static_cast<double>(grid - 1);
    for (std::size_t iy = 0; iy < grid; ++iy) {
      const double gy = min_y + (max_y - min_y) * static_cast<double>(iy) /
                                    static_cast<double>(grid - 1);
      emit_number(out, gx);
      out << ',';
      emit_number(out, gy);
      out << ',';
      emit_number(out, value(gx, gy));
      out << '\n';
    }
  }
}

int cmd_demo_two_moons(const DemoFlags& flags) {
  RunManifest manifest;
  manifest.command = "demo-two-moons";
  manifest.seed = flags.common.seed;
  manifest.flags["n"] = flags.n;
  manifest.flags["noise"] = flags.noise;
  manifest.flags["surrogate"] = flags.surrogate;
  manifest.flags["grid"] = flags.grid;
  const fs::path out_dir = prepare_out_dir(flags.common.out_dir);
  if (flags.grid < 2) throw blimey::ConfigError("grid", "--grid must be >= 2");
  const bool want_linear = flags.surrogate == "linear" || flags.surrogate == "both";
  const bool want_tree = flags.surrogate == "tree" || flags.surrogate == "both";
  if (!want_linear && !want_tree) {
    throw blimey::ConfigError("surrogate", "--surrogate must be linear, tree or both");
  }

  blimey::RandomStream moons_rng(flags.common.seed, "two-moons");
  const blimey::TabularDataset moons =
      blimey::make_two_moons(flags.n, flags.noise, moons_rng);
  const fs::path dataset_csv = out_file(out_dir, "dataset.csv", manifest);
  const fs::path dataset_meta = out_file(out_dir, "dataset_meta.json", manifest);
  save_dataset(moons, dataset_csv, dataset_meta);

  const blimey::RandomForest forest =
      obtain_forest(moons, flags.forest, flags.common.seed, out_dir, manifest);

  const blimey::DataPoint reference{{kMoonsReferenceX, kMoonsReferenceY},
                                    blimey::Domain::kOriginal};
  manifest.flags["point"] = reference.values;

  blimey::Matrix one(1, 2);
  one(0, 0) = reference.values[0];
  one(0, 1) = reference.values[1];
  const int target = blimey::predict_class(forest, one)[0];

  write_grid_csv(out_file(out_dir, "blackbox_grid.csv", manifest), moons, flags.grid,
                 [&](double gx, double gy) {
                   blimey::Matrix p(1, 2);
                   p(0, 0) = gx;
                   p(0, 1) = gy;
                   return forest.predict_proba(p)(0, static_cast<std::size_t>(target));
                 });

  ordered_json comparison;
  const bool both = want_linear && want_tree;
  auto run_surrogate = [&](const std::string& label, blimey::PipelineConfig config) {
    config.seed = flags.common.seed;
    config.target_class = target;
    if (flags.n_samples) config.n_samples = *flags.n_samples;
    const blimey::Explainer explainer = blimey::build_pipeline(config, moons, forest);
    const blimey::Explainer::Result result = explainer.explain_detailed(reference);

    const std::string explanation_name =
        both ? "explanation_" + label + ".json" : "explanation.json";
    std::ofstream expl_out(out_file(out_dir, explanation_name, manifest));
    expl_out << result.explanation.to_json().dump(2) << '\n';

    const std::string grid_name =
        both ? "surrogate_grid_" + label + ".csv" : "surrogate_grid.csv";
    write_grid_csv(out_file(out_dir, grid_name, manifest), moons, flags.grid,
                   [&](double gx, double gy) {
                     const double p[2] = {gx, gy};
                     return result.surrogate_original(p);
                   });
    comparison[label] = result.explanation.fidelity;
  };

  if (want_linear) {
    blimey::PipelineConfig config = blimey::tree_tabular_default();
    config.surrogate = blimey::RidgeSurrogateConfig{1.0, std::nullopt};
    run_surrogate("linear", config);
  }
  if (want_tree) {
    run_surrogate("tree", blimey::tree_tabular_default());
  }
  if (both) {
    comparison["tree_minus_linear"] =
        comparison["tree"].get<double>() - comparison["linear"].get<double>();
  }
  std::ofstream out(out_file(out_dir, "fidelity_comparison.json", manifest));
  out << comparison.dump(2) << '\n';
  manifest.write(out_dir);
  return 0;
}

// -- dataset-info ---------------------------------------------------------------

int cmd_dataset_info(const DatasetFlags& flags, std::uint64_t seed) {
  RunManifest manifest;  // input bookkeeping only; this command writes no files
  const blimey::TabularDataset dataset = resolve_dataset(flags, seed, manifest);
  std::cout << "rows: " << dataset.n_rows() << '\n';
  std::cout << "features: " << dataset.n_features() << '\n';
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    const auto& f = dataset.features[j];
    std::cout << "  " << f.name << ": ";
    if (f.kind == blimey::FeatureKind::kCategorical) {
      std::cout << "categorical {";
      for (std::size_t c = 0; c < f.categories.size(); ++c) {
        std::cout << (c ? ", " : "") << f.categories[c];
      }
      std::cout << "}\n";
      continue;
    }
    double lo = dataset.rows(0, j), hi = lo, sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
      const double v = dataset.rows(i, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(dataset.n_rows());
    const double mean = sum / n;
    const double stddev = std::sqrt(std::max(0.0, sq / n - mean * mean));
    std::cout << "numerical min=" << lo << " max=" << hi << " std=" << stddev << '\n';
  }
  if (dataset.labels) {
    std::vector<std::size_t> counts(dataset.n_classes(), 0);
    for (int label : *dataset.labels) ++counts[label];
    std::cout << "classes:\n";
    for (std::size_t c = 0; c < counts.size(); ++c) {
      std::cout << "  " << (*dataset.class_names)[c] << ": " << counts[c] << '\n';
    }
  }
  return 0;
}

// -- wiring ---------------------------------------------------------------------

void add_dataset_flags(CLI::App* cmd, DatasetFlags& flags) {
  cmd->add_option("--builtin", flags.builtin, "Built-in dataset: iris or two-moons");
  cmd->add_option("--dataset", flags.csv_path, "Dataset CSV path");
  cmd->add_option("--meta", flags.meta_path, "Dataset metadata JSON path");
  cmd->add_option("--moons-n", flags.moons_n, "Two-moons size (builtin only)");
  cmd->add_option("--moons-noise", flags.moons_noise, "Two-moons noise (builtin only)");
}

void add_forest_flags(CLI::App* cmd, ForestFlags& flags) {
  cmd->add_option("--forest-trees", flags.trees, "Random forest size");
  cmd->add_option("--forest-depth", flags.depth, "Random forest depth");
  cmd->add_option("--model-in", flags.model_in, "Load the black box from a JSON dump");
  cmd->add_option("--model-out", flags.model_out,
                  "Save the black box inside --out (relative name)");
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Seed for every random stream");
  cmd->add_option("--out", flags.out_dir, "Output directory");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const blimey::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const blimey::WidthMismatchError*>(&e)) return 2;
  if (dynamic_cast<const blimey::DegenerateSampleError*>(&e)) return 3;
  if (dynamic_cast<const blimey::NoBoundaryError*>(&e)) return 3;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blimey: modular local surrogate explanations for tabular black boxes"};
  app.require_subcommand(1);

  ExplainFlags explain;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Explain one prediction");
  add_dataset_flags(explain_cmd, explain.dataset);
  add_forest_flags(explain_cmd, explain.forest);
  add_common_flags(explain_cmd, explain.common);
  explain_cmd->add_option("--pipeline", explain.pipeline,
                          "Preset (lime, tree) or pipeline config JSON path");
  explain_cmd->add_option("--point-index", explain.point_index, "Dataset row to explain");
  explain_cmd->add_option("--point", explain.point_text, "Comma-separated point to explain");
  explain_cmd->add_option("--class", explain.target_class,
                          "Target class index or 'predicted'");
  explain_cmd->add_option("--n-samples", explain.n_samples, "Local sample size");
  explain_cmd->add_option("--k", explain.k_lasso, "K-LASSO feature budget");
  explain_cmd->add_option("--alpha", explain.alpha, "Ridge penalty");
  explain_cmd->add_option("--tree-depth", explain.tree_depth, "Tree surrogate depth");
  explain_cmd->add_option("--min-leaf", explain.min_leaf, "Tree surrogate leaf minimum");
  explain_cmd->add_option("--kernel-width", explain.kernel_width, "Kernel width");
  explain_cmd->add_option("--bins", explain.bins, "Discretizer bins per feature");
  explain_cmd->add_flag("--class-balance", explain.balance_classes,
                        "Reweight the sample by inverse predicted-class frequency");

  CompareFlags compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare-samplers", "Sample with several strategies");
  add_dataset_flags(compare_cmd, compare.dataset);
  add_forest_flags(compare_cmd, compare.forest);
  add_common_flags(compare_cmd, compare.common);
  compare_cmd->add_option("--samplers", compare.samplers,
                          "Comma list: normal,truncated,mixup,class-discovery"
                          ",growing-spheres");
  compare_cmd->add_option("--n", compare.n, "Points per sampler");
  compare_cmd->add_option("--point-index", compare.point_index,
                          "Dataset row to sample around");
  compare_cmd->add_option("--point", compare.point_text, "Comma-separated point");
  compare_cmd->add_option("--features", compare.features,
                          "Two feature names to mark as plot axes in summary.json");

  DemoFlags demo;
  CLI::App* demo_cmd =
      app.add_subcommand("demo-two-moons", "Linear vs tree surrogates on two moons");
  add_forest_flags(demo_cmd, demo.forest);
  add_common_flags(demo_cmd, demo.common);
  demo_cmd->add_option("--n", demo.n, "Dataset size");
  demo_cmd->add_option("--noise", demo.noise, "Dataset noise");
  demo_cmd->add_option("--surrogate", demo.surrogate, "linear, tree or both");
  demo_cmd->add_option("--grid", demo.grid, "Probability raster resolution");
  demo_cmd->add_option("--n-samples", demo.n_samples, "Local sample size");

  DatasetFlags info;
  std::uint64_t info_seed = 0;
  CLI::App* info_cmd = app.add_subcommand("dataset-info", "Summarize a dataset");
  add_dataset_flags(info_cmd, info);
  info_cmd->add_option("--seed", info_seed, "Seed (for builtin two-moons)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const std::uint64_t env_seed = default_seed();
    if (explain_cmd->count("--seed") == 0) explain.common.seed = env_seed;
    if (compare_cmd->count("--seed") == 0) compare.common.seed = env_seed;
    if (demo_cmd->count("--seed") == 0) demo.common.seed = env_seed;
    if (info_cmd->count("--seed") == 0) info_seed = env_seed;

    if (app.got_subcommand(explain_cmd)) return cmd_explain(explain);
    if (app.got_subcommand(compare_cmd)) return cmd_compare_samplers(compare);
    if (app.got_subcommand(demo_cmd)) return cmd_demo_two_moons(demo);
    return cmd_dataset_info(info, info_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
