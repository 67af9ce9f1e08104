#include "blimey/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace blimey {

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void check_weights(std::size_t rows, const std::vector<double>& y,
                   const std::vector<double>& w) {
  if (rows != y.size() || rows != w.size()) {
    throw WidthMismatchError("X rows, y length and w length must match");
  }
  double total = 0.0;
  for (double wi : w) {
    if (wi < 0.0) throw Error("weights must be nonnegative");
    total += wi;
  }
  if (total <= 0.0) throw ZeroWeightError("all sample weights are zero");
}

/// Weights rescaled to mean 1: scale-free and uniform == unweighted.
std::vector<double> normalize_weights(const std::vector<double>& w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> out(w.size());
  const double factor = static_cast<double>(w.size()) / total;
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] * factor;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Distances and kernel
// ---------------------------------------------------------------------------

std::vector<double> euclidean_distances(const Matrix& sample, const DataPoint& x) {
  if (sample.rows() > 0 && sample.cols() != x.size()) {
    throw WidthMismatchError("sample width " + std::to_string(sample.cols()) +
                             " != point width " + std::to_string(x.size()));
  }
  std::vector<double> d(sample.rows());
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < sample.cols(); ++j) {
      const double diff = sample(i, j) - x.values[j];
      s += diff * diff;
    }
    d[i] = std::sqrt(s);
  }
  return d;
}

std::vector<double> exponential_kernel(const std::vector<double>& distances,
                                       const KernelSpec& kernel) {
  if (!(kernel.width > 0.0) || !std::isfinite(kernel.width)) {
    throw ConfigError("kernel", "kernel width must be finite and positive");
  }
  std::vector<double> w(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (distances[i] < 0.0) throw Error("distances must be nonnegative");
    w[i] = std::sqrt(std::exp(-(distances[i] * distances[i]) /
                              (kernel.width * kernel.width)));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Weighted ridge
// ---------------------------------------------------------------------------

double LinearSurrogate::predict(std::span<const double> x) const {
  double v = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) v += coefficients[j] * x[j];
  return v;
}

std::vector<double> LinearSurrogate::predict_rows(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
  return out;
}

namespace {

// In-place Cholesky solve of A z = b for symmetric positive-definite A.
// Returns false when a pivot collapses (A not positive definite).
bool cholesky_solve(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = A[i * n + i];
  for (std::size_t k = 0; k < n; ++k) {
    double d = A[k * n + k];
    for (std::size_t j = 0; j < k; ++j) d -= A[k * n + j] * A[k * n + j];
    // Pivot tolerance relative to the row's own unreduced diagonal, so one
    // huge penalty term cannot mask a healthy pivot elsewhere.
    if (d <= 1e-12 * std::max(diag[k], 1.0)) return false;
    const double l = std::sqrt(d);
    A[k * n + k] = l;
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = A[i * n + k];
      for (std::size_t j = 0; j < k; ++j) v -= A[i * n + j] * A[k * n + j];
      A[i * n + k] = v / l;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {  // forward
    double v = b[i];
    for (std::size_t j = 0; j < i; ++j) v -= A[i * n + j] * b[j];
    b[i] = v / A[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {  // backward
    double v = b[i];
    for (std::size_t j = i + 1; j < n; ++j) v -= A[j * n + i] * b[j];
    b[i] = v / A[i * n + i];
  }
  return true;
}

// 2-norm condition number of a symmetric matrix via cyclic Jacobi rotations.
double symmetric_condition(std::vector<double> A, std::size_t n) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += A[i * n + j] * A[i * n + j];
    }
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A[k * n + p];
          const double akq = A[k * n + q];
          A[k * n + p] = c * akp - s * akq;
          A[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A[p * n + k];
          const double aqk = A[q * n + k];
          A[p * n + k] = c * apk - s * aqk;
          A[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  double largest = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    largest = std::max(largest, std::abs(A[i * n + i]));
    smallest = std::min(smallest, std::abs(A[i * n + i]));
  }
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return largest / smallest;
}

}  // namespace

LinearSurrogate fit_weighted_ridge(const Matrix& X, const std::vector<double>& y,
                                   const std::vector<double>& w, double alpha) {
  if (X.rows() == 0) throw EmptyInputError("ridge fit needs at least one row");
  if (alpha < 0.0) throw ConfigError("ridge", "alpha must be >= 0");
  check_weights(X.rows(), y, w);
  const auto wn = normalize_weights(w);

  const std::size_t p = X.cols();
  const std::size_t m = p + 1;  // + intercept
  std::vector<double> A(m * m, 0.0);
  std::vector<double> rhs(m, 0.0);
  std::vector<double> z(m, 1.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) z[j] = X(i, j);
    for (std::size_t a = 0; a < m; ++a) {
      rhs[a] += wn[i] * z[a] * y[i];
      for (std::size_t b = 0; b <= a; ++b) A[a * m + b] += wn[i] * z[a] * z[b];
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) A[a * m + b] = A[b * m + a];
  }
  for (std::size_t j = 0; j < p; ++j) A[j * m + j] += alpha;  // intercept unpenalized

  const double condition = symmetric_condition(A, m);
  if (!cholesky_solve(A, rhs, m)) {
    throw SingularSystemError(
        "normal equations are singular; set alpha > 0 to regularize");
  }
  LinearSurrogate fit;
  fit.coefficients.assign(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(p));
  fit.intercept = rhs[p];
  fit.condition_number = condition;
  return fit;
}

Standardization standardize_columns(const Matrix& X) {
  const std::size_t d = X.cols();
  const double n = static_cast<double>(X.rows());
  Standardization out;
  out.mean.assign(d, 0.0);
  out.scale.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      sum += X(i, j);
      sq += X(i, j) * X(i, j);
    }
    out.mean[j] = sum / n;
    const double var = std::max(0.0, sq / n - out.mean[j] * out.mean[j]);
    if (var > 0.0) out.scale[j] = std::sqrt(var);
  }
  out.transformed = Matrix(X.rows(), d);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.transformed(i, j) = out.apply(j, X(i, j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// K-LASSO
// ---------------------------------------------------------------------------

std::vector<std::size_t> k_lasso(const Matrix& X, const std::vector<double>& y,
                                 const std::vector<double>& w, std::size_t K) {
  const std::size_t p = X.cols();
  if (K < 1 || K > p) {
    throw ConfigError("k-lasso", "K must lie in [1, " + std::to_string(p) + "]");
  }
  check_weights(X.rows(), y, w);
  const auto wn = normalize_weights(w);
  const double n = static_cast<double>(X.rows());

  // Center by weighted means; the intercept is implicit and unpenalized.
  std::vector<double> x_mean(p, 0.0);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    y_mean += wn[i] * y[i] / n;
    for (std::size_t j = 0; j < p; ++j) x_mean[j] += wn[i] * X(i, j) / n;
  }
  Matrix xc(X.rows(), p);
  std::vector<double> yc(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    yc[i] = y[i] - y_mean;
    for (std::size_t j = 0; j < p; ++j) xc(i, j) = X(i, j) - x_mean[j];
  }
  std::vector<double> col_sq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < X.rows(); ++i) {
      col_sq[j] += wn[i] * xc(i, j) * xc(i, j) / n;
    }
  }

  double lambda_max = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double rho = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) rho += wn[i] * xc(i, j) * yc[i] / n;
    lambda_max = std::max(lambda_max, std::abs(rho));
  }

  std::vector<std::size_t> entry_order;
  std::vector<bool> entered(p, false);
  std::vector<double> beta(p, 0.0);
  std::vector<double> residual = yc;

  if (lambda_max > 0.0) {
    constexpr int kGridPoints = 100;
    constexpr double kGridFloor = 1e-4;
    for (int t = 0; t < kGridPoints && entry_order.size() < K; ++t) {
      const double lambda =
          lambda_max * std::pow(kGridFloor, static_cast<double>(t) /
                                                static_cast<double>(kGridPoints - 1));
      for (int sweep = 0; sweep < 10000; ++sweep) {
        double max_delta = 0.0;
        double max_beta = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
          if (col_sq[j] <= 0.0) continue;
          double rho = col_sq[j] * beta[j];
          for (std::size_t i = 0; i < X.rows(); ++i) {
            rho += wn[i] * xc(i, j) * residual[i] / n;
          }
          const double next =
              std::abs(rho) <= lambda
                  ? 0.0
                  : (rho > 0 ? rho - lambda : rho + lambda) / col_sq[j];
          if (next != beta[j]) {
            const double delta = next - beta[j];
            for (std::size_t i = 0; i < X.rows(); ++i) {
              residual[i] -= delta * xc(i, j);
            }
            max_delta = std::max(max_delta, std::abs(delta));
            beta[j] = next;
          }
          max_beta = std::max(max_beta, std::abs(beta[j]));
        }
        if (max_delta < 1e-10 * std::max(1.0, max_beta)) break;
      }
      // New active features this step, larger |coefficient| first, then index.
      std::vector<std::size_t> fresh;
      for (std::size_t j = 0; j < p; ++j) {
        if (!entered[j] && beta[j] != 0.0) fresh.push_back(j);
      }
      std::sort(fresh.begin(), fresh.end(), [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(beta[a]), mb = std::abs(beta[b]);
        return ma != mb ? ma > mb : a < b;
      });
      for (std::size_t j : fresh) {
        entered[j] = true;
        entry_order.push_back(j);
      }
    }
  }
  // Path exhausted (or degenerate target): fill with the lowest unused indices.
  for (std::size_t j = 0; j < p && entry_order.size() < K; ++j) {
    if (!entered[j]) {
      entered[j] = true;
      entry_order.push_back(j);
    }
  }
  entry_order.resize(K);
  return entry_order;
}

// ---------------------------------------------------------------------------
// Tree surrogate
// ---------------------------------------------------------------------------

std::size_t TreeSurrogate::leaf_of(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(x[nodes[i].feature] <= nodes[i].threshold
                                     ? nodes[i].left
                                     : nodes[i].right);
  }
  return i;
}

double TreeSurrogate::predict(std::span<const double> x) const {
  return nodes[leaf_of(x)].value;
}

std::vector<double> TreeSurrogate::predict_rows(const Matrix& X) const {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict(X.row(i));
  return out;
}

namespace {

struct TreeFit {
  const Matrix& X;
  const std::vector<double>& y;
  const std::vector<double>& w;
  std::size_t max_depth;
  std::size_t min_samples_leaf;
  std::vector<TreeSurrogate::Node> nodes;

  struct Moments {
    double w_sum = 0.0, wy = 0.0, wyy = 0.0;
    void add(double wi, double yi) {
      w_sum += wi;
      wy += wi * yi;
      wyy += wi * yi * yi;
    }
    double mean() const { return w_sum > 0.0 ? wy / w_sum : 0.0; }
    double sse() const { return w_sum > 0.0 ? std::max(0.0, wyy - wy * wy / w_sum) : 0.0; }
  };

  int make_leaf(const Moments& m) {
    nodes.push_back({-1, 0.0, -1, -1, m.mean(), m.w_sum});
    return static_cast<int>(nodes.size() - 1);
  }

  int build(const std::vector<std::size_t>& rows, std::size_t depth) {
    Moments node_m;
    for (std::size_t r : rows) node_m.add(w[r], y[r]);
    if (depth >= max_depth || rows.size() < 2 * min_samples_leaf) {
      return make_leaf(node_m);
    }

    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::size_t> order = rows;
    for (std::size_t j = 0; j < X.cols(); ++j) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return X(a, j) < X(b, j);
      });
      Moments left;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left.add(w[order[i]], y[order[i]]);
        if (X(order[i], j) == X(order[i + 1], j)) continue;
        if (i + 1 < min_samples_leaf || order.size() - i - 1 < min_samples_leaf) {
          continue;
        }
        Moments right;
        right.w_sum = node_m.w_sum - left.w_sum;
        right.wy = node_m.wy - left.wy;
        right.wyy = node_m.wyy - left.wyy;
        const double cost = left.sse() + right.sse();
        if (cost < best_cost) {
          best_cost = cost;
          best_feature = j;
          best_threshold = (X(order[i], j) + X(order[i + 1], j)) / 2.0;
        }
      }
    }
    if (!(best_cost < node_m.sse())) return make_leaf(node_m);  // no strict gain

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    const int index = static_cast<int>(nodes.size());
    nodes.push_back({static_cast<int>(best_feature), best_threshold, -1, -1, 0.0, 0.0});
    nodes[index].left = build(left_rows, depth + 1);
    nodes[index].right = build(right_rows, depth + 1);
    return index;
  }
};

}  // namespace

TreeSurrogate fit_tree_regressor(const Matrix& X, const std::vector<double>& y,
                                 const std::vector<double>& w, std::size_t max_depth,
                                 std::size_t min_samples_leaf) {
  if (X.rows() == 0) throw EmptyInputError("tree fit needs at least one row");
  if (min_samples_leaf < 1) {
    throw ConfigError("tree", "min_samples_leaf must be >= 1");
  }
  check_weights(X.rows(), y, w);

  TreeFit fit{X, y, w, max_depth, min_samples_leaf, {}};
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), 0);
  fit.build(rows, 0);

  TreeSurrogate tree;
  tree.nodes = std::move(fit.nodes);
  tree.max_depth = max_depth;
  tree.n_features = X.cols();
  return tree;
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

std::string RuleCondition::text(const std::vector<std::string>& names) const {
  const std::string name =
      feature < names.size() ? names[feature] : "f" + std::to_string(feature);
  if (lower && upper) {
    return format_value(*lower) + " < " + name + " <= " + format_value(*upper);
  }
  if (upper) return name + " <= " + format_value(*upper);
  return name + " > " + format_value(*lower);
}

namespace {

// Merges path constraints per feature, remembering first-encounter order.
struct PathConditions {
  std::vector<RuleCondition> conditions;

  void add(std::size_t feature, bool is_upper, double value) {
    auto it = std::find_if(conditions.begin(), conditions.end(),
                           [&](const RuleCondition& c) { return c.feature == feature; });
    if (it == conditions.end()) {
      conditions.push_back({feature, std::nullopt, std::nullopt});
      it = std::prev(conditions.end());
    }
    if (is_upper) {
      it->upper = it->upper ? std::min(*it->upper, value) : value;
    } else {
      it->lower = it->lower ? std::max(*it->lower, value) : value;
    }
  }
};

void collect_rules(const TreeSurrogate& tree, std::size_t node, PathConditions path,
                   std::vector<Rule>& out) {
  const auto& n = tree.nodes[node];
  if (n.feature < 0) {
    out.push_back({path.conditions, n.value, n.weight});
    return;
  }
  PathConditions left = path;
  left.add(static_cast<std::size_t>(n.feature), true, n.threshold);
  collect_rules(tree, static_cast<std::size_t>(n.left), std::move(left), out);
  path.add(static_cast<std::size_t>(n.feature), false, n.threshold);
  collect_rules(tree, static_cast<std::size_t>(n.right), std::move(path), out);
}

}  // namespace

Explanation tree_rules(const TreeSurrogate& tree, const DataPoint& x,
                       const std::vector<std::string>& names) {
  if (x.size() != tree.n_features) {
    throw WidthMismatchError("point width " + std::to_string(x.size()) +
                             " != tree width " + std::to_string(tree.n_features));
  }
  Explanation expl;
  expl.kind = Explanation::Kind::kRules;
  expl.feature_names = names;
  expl.target_class = tree.target_class;

  PathConditions path;
  std::size_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    const auto& n = tree.nodes[node];
    const bool go_left = x.values[static_cast<std::size_t>(n.feature)] <= n.threshold;
    path.add(static_cast<std::size_t>(n.feature), go_left, n.threshold);
    node = static_cast<std::size_t>(go_left ? n.left : n.right);
  }
  expl.point_conditions = std::move(path.conditions);
  expl.point_prediction = tree.nodes[node].value;

  collect_rules(tree, 0, {}, expl.partition);
  return expl;
}

// ---------------------------------------------------------------------------
// Explanation JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json conditions_json(const std::vector<RuleCondition>& conditions,
                                       const std::vector<std::string>& names) {
  auto name_of = [&](std::size_t j) {
    return j < names.size() ? names[j] : "f" + std::to_string(j);
  };
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& c : conditions) {
    if (c.lower) {
      out.push_back({{"feature", name_of(c.feature)}, {"op", ">"}, {"value", *c.lower}});
    }
    if (c.upper) {
      out.push_back({{"feature", name_of(c.feature)}, {"op", "<="}, {"value", *c.upper}});
    }
  }
  return out;
}

nlohmann::ordered_json conditions_text(const std::vector<RuleCondition>& conditions,
                                       const std::vector<std::string>& names) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& c : conditions) out.push_back(c.text(names));
  return out;
}

}  // namespace

nlohmann::ordered_json Explanation::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind == Kind::kImportance ? "importance" : "rules";
  j["target_class"] = target_class;
  if (kind == Kind::kImportance) {
    j["importances"] = nlohmann::ordered_json::array();
    for (const auto& [name, weight] : importances) {
      j["importances"].push_back({{"name", name}, {"weight", weight}});
    }
    j["intercept"] = intercept;
    j["condition_number"] = condition_number;
  } else {
    j["point_rule"] = {{"conditions", conditions_json(point_conditions, feature_names)},
                       {"text", conditions_text(point_conditions, feature_names)},
                       {"prediction", point_prediction}};
    j["partition"] = nlohmann::ordered_json::array();
    for (const auto& rule : partition) {
      j["partition"].push_back(
          {{"conditions", conditions_json(rule.conditions, feature_names)},
           {"text", conditions_text(rule.conditions, feature_names)},
           {"prediction", rule.prediction},
           {"weight", rule.weight}});
    }
  }
  j["fidelity"] = fidelity;
  j["provenance"] = provenance;
  return j;
}

// ---------------------------------------------------------------------------
// Fidelity
// ---------------------------------------------------------------------------

double fidelity(const std::vector<double>& predictions_surrogate,
                const std::vector<double>& predictions_blackbox,
                const std::vector<double>& w) {
  if (predictions_surrogate.size() != predictions_blackbox.size() ||
      predictions_surrogate.size() != w.size()) {
    throw WidthMismatchError("prediction vectors and weights must match in length");
  }
  check_weights(predictions_surrogate.size(), predictions_blackbox, w);
  const auto wn = normalize_weights(w);
  const double n = static_cast<double>(wn.size());

  double mean = 0.0;
  for (std::size_t i = 0; i < wn.size(); ++i) mean += wn[i] * predictions_blackbox[i] / n;
  double ss_total = 0.0;
  double ss_residual = 0.0;
  for (std::size_t i = 0; i < wn.size(); ++i) {
    const double t = predictions_blackbox[i] - mean;
    const double r = predictions_blackbox[i] - predictions_surrogate[i];
    ss_total += wn[i] * t * t / n;
    ss_residual += wn[i] * r * r / n;
  }
  if (ss_total <= 1e-12) {
    throw DegenerateSampleError(
        "sample is degenerate; black box locally constant, no meaningful local "
        "surrogate can be fitted");
  }
  return 1.0 - ss_residual / ss_total;
}

}  // namespace blimey
