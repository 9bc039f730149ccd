#include "boostrpf/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "boostrpf/error.hpp"
#include "boostrpf/rng.hpp"

namespace boostrpf {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "matrix data does not match its shape");
  }
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(values.size()) +
                                                  " columns, expected " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::string_view to_string(MultiStrategy strategy) {
  return strategy == MultiStrategy::MultiOutputTree ? "multi_output_tree" : "one_output_per_tree";
}

std::optional<MultiStrategy> parse_multi_strategy(std::string_view name) {
  if (name == "multi_output_tree") return MultiStrategy::MultiOutputTree;
  if (name == "one_output_per_tree") return MultiStrategy::OneOutputPerTree;
  return std::nullopt;
}

void GbtParams::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::BadConfig, what); };
  if (n_estimators < 1) bad("n_estimators must be >= 1");
  if (max_depth < 1) bad("max_depth must be >= 1");
  if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
  if (!(min_child_weight >= 0.0)) bad("min_child_weight must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) bad("subsample must be in (0, 1]");
  if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0)) bad("colsample_bytree must be in (0, 1]");
  if (!(reg_lambda >= 0.0)) bad("reg_lambda must be >= 0");
}

const TreeNode& RegressionTree::leaf_for(std::span<const double> row) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf) {
    const double v = row[static_cast<std::size_t>(node->feature)];
    // NaN compares false and therefore follows the left branch.
    node = &nodes[static_cast<std::size_t>(v >= node->threshold ? node->right : node->left)];
  }
  return *node;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.is_leaf) {
      deepest = std::max(deepest, d[i]);
      continue;
    }
    d[static_cast<std::size_t>(n.left)] = d[i] + 1;
    d[static_cast<std::size_t>(n.right)] = d[i] + 1;
  }
  return deepest;
}

void GbtModel::predict_into(std::span<const double> row, std::span<double> out) const {
  if (row.size() != feature_dim) {
    throw Error(ErrorCode::DimensionMismatch, "model expects " + std::to_string(feature_dim) +
                                                  " features, got " + std::to_string(row.size()));
  }
  if (out.size() != output_dim) {
    throw Error(ErrorCode::DimensionMismatch, "output buffer has the wrong size");
  }
  std::copy(base_score.begin(), base_score.end(), out.begin());
  const double lr = params.learning_rate;
  for (const RegressionTree& tree : trees) {
    const TreeNode& leaf = tree.leaf_for(row);
    for (std::size_t s = 0; s < tree.output_slice.size(); ++s) {
      out[static_cast<std::size_t>(tree.output_slice[s])] += lr * leaf.values[s];
    }
  }
}

std::vector<double> GbtModel::predict(std::span<const double> row) const {
  std::vector<double> out(output_dim);
  predict_into(row, out);
  return out;
}

Matrix GbtModel::predict(const Matrix& rows) const {
  Matrix out(rows.rows(), output_dim);
  for (std::size_t r = 0; r < rows.rows(); ++r) predict_into(rows.row(r), out.row(r));
  return out;
}

namespace {

// Gains that differ only by summation-order rounding count as ties, so the
// lower feature (then the lower threshold) keeps the split.
constexpr double kTieTolerance = 1e-11;

bool beats(double candidate, double incumbent, double parent_score) {
  return candidate > incumbent + kTieTolerance * (parent_score + std::abs(incumbent));
}

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  std::vector<double> left_grad;
  double left_hess = 0.0;
};

// Per-column presorted view of the training matrix.
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> order;
  std::vector<std::vector<double>> values;

  SortedColumns(const Matrix& rows) : order(rows.cols()), values(rows.cols()) {
    for (std::size_t f = 0; f < rows.cols(); ++f) {
      auto& idx = order[f];
      idx.resize(rows.rows());
      std::iota(idx.begin(), idx.end(), 0u);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return rows(a, f) < rows(b, f); });
      values[f].resize(rows.rows());
      for (std::size_t p = 0; p < idx.size(); ++p) values[f][p] = rows(idx[p], f);
    }
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& rows, const SortedColumns& columns, const GbtParams& params,
              unsigned threads)
      : rows_(rows), columns_(columns), params_(params), threads_(std::max(1u, threads)) {}

  /// grad is n x K (only the columns listed in `slice` are used). Returns a
  /// tree whose leaves hold the raw (unshrunk) weights.
  RegressionTree build(const Matrix& grad, const std::vector<int>& slice,
                       const std::vector<std::uint8_t>& in_sample,
                       const std::vector<int>& features) {
    const std::size_t k = slice.size();
    RegressionTree tree;
    tree.output_slice = slice;

    node_of_.assign(rows_.rows(), -1);
    std::vector<double> root_grad(k, 0.0);
    double root_hess = 0.0;
    for (std::size_t r = 0; r < rows_.rows(); ++r) {
      if (!in_sample[r]) continue;
      node_of_[r] = 0;
      for (std::size_t s = 0; s < k; ++s) root_grad[s] += grad(r, static_cast<std::size_t>(slice[s]));
      root_hess += 1.0;
    }
    tree.nodes.push_back(TreeNode{});
    grad_sum_ = {root_grad};
    hess_sum_ = {root_hess};

    std::vector<int> frontier{0};
    for (int level = 0; level < params_.max_depth && !frontier.empty(); ++level) {
      const std::vector<SplitChoice> best = find_splits(grad, slice, frontier, features);
      std::vector<int> next;
      std::vector<int> split_nodes;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (best[s].feature < 0) continue;
        const int id = frontier[s];
        const auto left = static_cast<int>(tree.nodes.size());
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.is_leaf = false;
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.left = left;
        node.right = left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});

        std::vector<double> right_grad(k);
        for (std::size_t o = 0; o < k; ++o) {
          right_grad[o] = grad_sum_[static_cast<std::size_t>(id)][o] - best[s].left_grad[o];
        }
        grad_sum_.push_back(best[s].left_grad);
        grad_sum_.push_back(std::move(right_grad));
        hess_sum_.push_back(best[s].left_hess);
        hess_sum_.push_back(hess_sum_[static_cast<std::size_t>(id)] - best[s].left_hess);
        next.push_back(left);
        next.push_back(left + 1);
        split_nodes.push_back(id);
      }
      if (split_nodes.empty()) break;
      for (std::size_t r = 0; r < rows_.rows(); ++r) {
        const int id = node_of_[r];
        if (id < 0) continue;
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.is_leaf) continue;
        node_of_[r] = rows_(r, static_cast<std::size_t>(node.feature)) >= node.threshold
                          ? node.right
                          : node.left;
      }
      frontier = std::move(next);
    }

    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      TreeNode& node = tree.nodes[id];
      if (!node.is_leaf) continue;
      node.values.resize(k);
      for (std::size_t o = 0; o < k; ++o) {
        node.values[o] = -grad_sum_[id][o] / (hess_sum_[id] + params_.reg_lambda);
      }
    }
    return tree;
  }

 private:
  double score(const double* g, double h, std::size_t k) const {
    double s = 0.0;
    for (std::size_t o = 0; o < k; ++o) s += g[o] * g[o];
    return s / (h + params_.reg_lambda);
  }

  // Best split per frontier node on one feature, scanning its sorted column.
  void scan_feature(const Matrix& grad, const std::vector<int>& slice,
                    const std::vector<int>& frontier, const std::vector<int>& slot_of,
                    int feature, std::vector<SplitChoice>& best) const {
    const std::size_t k = slice.size();
    const std::size_t m = frontier.size();
    std::vector<double> gl(m * k, 0.0);
    std::vector<double> hl(m, 0.0);
    std::vector<double> last(m, 0.0);
    std::vector<double> parent_score(m);
    for (std::size_t s = 0; s < m; ++s) {
      const auto id = static_cast<std::size_t>(frontier[s]);
      parent_score[s] = score(grad_sum_[id].data(), hess_sum_[id], k);
    }
    std::vector<double> gr(k);

    const auto f = static_cast<std::size_t>(feature);
    const auto& order = columns_.order[f];
    const auto& values = columns_.values[f];
    for (std::size_t p = 0; p < order.size(); ++p) {
      const std::uint32_t r = order[p];
      const int id = node_of_[r];
      if (id < 0) continue;
      const int s = slot_of[static_cast<std::size_t>(id)];
      if (s < 0) continue;
      const auto su = static_cast<std::size_t>(s);
      const double v = values[p];
      double* g_left = &gl[su * k];
      if (hl[su] > 0.0 && v > last[su]) {
        const double h_left = hl[su];
        const auto id_u = static_cast<std::size_t>(id);
        const double h_right = hess_sum_[id_u] - h_left;
        if (h_left >= params_.min_child_weight && h_right >= params_.min_child_weight) {
          for (std::size_t o = 0; o < k; ++o) gr[o] = grad_sum_[id_u][o] - g_left[o];
          const double gain = 0.5 * (score(g_left, h_left, k) + score(gr.data(), h_right, k) -
                                     parent_score[su]);
          if (beats(gain, best[su].gain, parent_score[su])) {
            double threshold = 0.5 * (last[su] + v);
            if (!(threshold > last[su])) threshold = v;
            best[su].gain = gain;
            best[su].feature = feature;
            best[su].threshold = threshold;
            best[su].left_grad.assign(g_left, g_left + k);
            best[su].left_hess = h_left;
          }
        }
      }
      for (std::size_t o = 0; o < k; ++o) g_left[o] += grad(r, static_cast<std::size_t>(slice[o]));
      hl[su] += 1.0;
      last[su] = v;
    }
  }

  std::vector<SplitChoice> find_splits(const Matrix& grad, const std::vector<int>& slice,
                                       const std::vector<int>& frontier,
                                       const std::vector<int>& features) const {
    std::vector<int> slot_of(hess_sum_.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
    }
    std::vector<std::vector<SplitChoice>> per_feature(
        features.size(), std::vector<SplitChoice>(frontier.size()));

    const unsigned workers =
        std::min<unsigned>(threads_, static_cast<unsigned>(features.size()));
    if (workers <= 1) {
      for (std::size_t fi = 0; fi < features.size(); ++fi) {
        scan_feature(grad, slice, frontier, slot_of, features[fi], per_feature[fi]);
      }
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t fi = w; fi < features.size(); fi += workers) {
            scan_feature(grad, slice, frontier, slot_of, features[fi], per_feature[fi]);
          }
        });
      }
    }

    // Merge in ascending feature order; a later feature must win strictly.
    std::vector<SplitChoice> best(frontier.size());
    std::vector<double> parent_score(frontier.size());
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const auto id = static_cast<std::size_t>(frontier[s]);
      parent_score[s] = score(grad_sum_[id].data(), hess_sum_[id], slice.size());
    }
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (per_feature[fi][s].feature >= 0 &&
            beats(per_feature[fi][s].gain, best[s].gain, parent_score[s])) {
          best[s] = std::move(per_feature[fi][s]);
        }
      }
    }
    return best;
  }

  const Matrix& rows_;
  const SortedColumns& columns_;
  const GbtParams& params_;
  unsigned threads_;
  std::vector<int> node_of_;
  std::vector<std::vector<double>> grad_sum_;
  std::vector<double> hess_sum_;
};

// Column mean computed as y0 + mean(y - y0), which is exact for constant columns.
std::vector<double> column_means(const Matrix& targets) {
  std::vector<double> mean(targets.cols(), 0.0);
  for (std::size_t c = 0; c < targets.cols(); ++c) {
    const double anchor = targets(0, c);
    double acc = 0.0;
    for (std::size_t r = 0; r < targets.rows(); ++r) acc += targets(r, c) - anchor;
    mean[c] = anchor + acc / static_cast<double>(targets.rows());
  }
  return mean;
}

std::vector<double> rmse_per_output(const Matrix& pred, const Matrix& targets) {
  std::vector<double> out(targets.cols(), 0.0);
  for (std::size_t r = 0; r < targets.rows(); ++r) {
    for (std::size_t c = 0; c < targets.cols(); ++c) {
      const double e = pred(r, c) - targets(r, c);
      out[c] += e * e;
    }
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(std::max<std::size_t>(1, targets.rows())));
  return out;
}

void apply_tree(const RegressionTree& tree, double lr, const Matrix& rows, Matrix& pred) {
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const TreeNode& leaf = tree.leaf_for(rows.row(r));
    for (std::size_t s = 0; s < tree.output_slice.size(); ++s) {
      pred(r, static_cast<std::size_t>(tree.output_slice[s])) += lr * leaf.values[s];
    }
  }
}

}  // namespace

GbtModel fit(const Matrix& rows, const Matrix& targets, const GbtParams& params,
             const FitOptions& options) {
  params.validate();
  if (rows.rows() < 2 || rows.cols() == 0 || targets.cols() == 0) {
    throw Error(ErrorCode::EmptyDataset, "boosting needs at least two rows with features and targets");
  }
  if (rows.rows() != targets.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows (" + std::to_string(rows.rows()) +
                                                  ") and target rows (" +
                                                  std::to_string(targets.rows()) + ") differ");
  }
  if (std::any_of(targets.data().begin(), targets.data().end(),
                  [](double v) { return !std::isfinite(v); })) {
    throw Error(ErrorCode::DimensionMismatch, "targets contain non-finite values");
  }
  const bool has_valid = options.valid_rows != nullptr && options.valid_targets != nullptr;
  if (has_valid && (options.valid_rows->cols() != rows.cols() ||
                    options.valid_targets->cols() != targets.cols() ||
                    options.valid_rows->rows() != options.valid_targets->rows())) {
    throw Error(ErrorCode::DimensionMismatch, "validation set shape does not match training set");
  }

  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  const std::size_t k = targets.cols();

  GbtModel model;
  model.params = params;
  model.feature_dim = d;
  model.output_dim = k;
  model.base_score = column_means(targets);

  Matrix pred(n, k);
  for (std::size_t r = 0; r < n; ++r) std::copy(model.base_score.begin(), model.base_score.end(), pred.row(r).begin());
  Matrix valid_pred;
  if (has_valid) {
    valid_pred = Matrix(options.valid_rows->rows(), k);
    for (std::size_t r = 0; r < valid_pred.rows(); ++r) {
      std::copy(model.base_score.begin(), model.base_score.end(), valid_pred.row(r).begin());
    }
  }

  const SortedColumns columns(rows);
  TreeBuilder builder(rows, columns, params, options.threads);
  Rng rng(params.seed);

  std::vector<std::vector<int>> slices;
  if (params.multi_strategy == MultiStrategy::MultiOutputTree) {
    slices.emplace_back(k);
    std::iota(slices.back().begin(), slices.back().end(), 0);
  } else {
    for (std::size_t o = 0; o < k; ++o) slices.push_back({static_cast<int>(o)});
  }

  const auto n_sample = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))));
  const auto n_features = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.colsample_bytree * static_cast<double>(d))));

  Matrix grad(n, k);
  std::vector<std::uint32_t> row_pool(n);
  std::vector<int> feature_pool(d);
  std::vector<std::uint8_t> in_sample(n);
  for (int round = 1; round <= params.n_estimators; ++round) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t o = 0; o < k; ++o) grad(r, o) = pred(r, o) - targets(r, o);
    }
    for (const std::vector<int>& slice : slices) {
      std::fill(in_sample.begin(), in_sample.end(), std::uint8_t{0});
      if (n_sample == n) {
        std::fill(in_sample.begin(), in_sample.end(), std::uint8_t{1});
      } else {
        std::iota(row_pool.begin(), row_pool.end(), 0u);
        for (std::size_t i = 0; i < n_sample; ++i) {
          const std::size_t j = i + rng.below(n - i);
          std::swap(row_pool[i], row_pool[j]);
          in_sample[row_pool[i]] = 1;
        }
      }
      std::iota(feature_pool.begin(), feature_pool.end(), 0);
      if (n_features < d) {
        for (std::size_t i = 0; i < n_features; ++i) {
          std::swap(feature_pool[i], feature_pool[i + rng.below(d - i)]);
        }
      }
      std::vector<int> features(feature_pool.begin(),
                                feature_pool.begin() + static_cast<std::ptrdiff_t>(n_features));
      std::sort(features.begin(), features.end());

      RegressionTree tree = builder.build(grad, slice, in_sample, features);
      apply_tree(tree, params.learning_rate, rows, pred);
      if (has_valid) apply_tree(tree, params.learning_rate, *options.valid_rows, valid_pred);
      model.trees.push_back(std::move(tree));
    }
    if (options.on_round) {
      RoundStats stats;
      stats.round = round;
      stats.train_rmse = rmse_per_output(pred, targets);
      if (has_valid) stats.valid_rmse = rmse_per_output(valid_pred, *options.valid_targets);
      options.on_round(stats);
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaError, "model document: " + what);
}

template <typename T>
T field(const nlohmann::json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) schema_error(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    schema_error(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const GbtParams& p) {
  return nlohmann::json{{"n_estimators", p.n_estimators},
                        {"max_depth", p.max_depth},
                        {"learning_rate", p.learning_rate},
                        {"min_child_weight", p.min_child_weight},
                        {"subsample", p.subsample},
                        {"colsample_bytree", p.colsample_bytree},
                        {"reg_lambda", p.reg_lambda},
                        {"multi_strategy", std::string(to_string(p.multi_strategy))},
                        {"seed", p.seed}};
}

GbtParams gbt_params_from_json(const nlohmann::json& doc, GbtParams p) {
  if (!doc.is_object()) schema_error("params must be an object");
  try {
    if (doc.contains("n_estimators")) p.n_estimators = doc.at("n_estimators").get<int>();
    if (doc.contains("max_depth")) p.max_depth = doc.at("max_depth").get<int>();
    if (doc.contains("learning_rate")) p.learning_rate = doc.at("learning_rate").get<double>();
    if (doc.contains("min_child_weight")) p.min_child_weight = doc.at("min_child_weight").get<double>();
    if (doc.contains("subsample")) p.subsample = doc.at("subsample").get<double>();
    if (doc.contains("colsample_bytree")) p.colsample_bytree = doc.at("colsample_bytree").get<double>();
    if (doc.contains("reg_lambda")) p.reg_lambda = doc.at("reg_lambda").get<double>();
    if (doc.contains("seed")) p.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("multi_strategy")) {
      const auto s = parse_multi_strategy(doc.at("multi_strategy").get<std::string>());
      if (!s) schema_error("unknown multi_strategy");
      p.multi_strategy = *s;
    }
  } catch (const nlohmann::json::exception& e) {
    schema_error(std::string("params: ") + e.what());
  }
  return p;
}

nlohmann::json to_json(const GbtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.nodes) {
      if (node.is_leaf) {
        nodes.push_back({{"kind", "leaf"}, {"values", node.values}});
      } else {
        nodes.push_back({{"kind", "split"},
                         {"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"missing_goes_left", node.missing_goes_left}});
      }
    }
    nlohmann::json t{{"nodes", std::move(nodes)}};
    if (model.params.multi_strategy == MultiStrategy::OneOutputPerTree) {
      t["output_slice"] = tree.output_slice;
    }
    trees.push_back(std::move(t));
  }
  return nlohmann::json{{"version", 1},
                        {"feature_dim", model.feature_dim},
                        {"output_dim", model.output_dim},
                        {"base_score", model.base_score},
                        {"learning_rate", model.params.learning_rate},
                        {"multi_strategy", std::string(to_string(model.params.multi_strategy))},
                        {"trees", std::move(trees)},
                        {"params", to_json(model.params)}};
}

GbtModel gbt_model_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) schema_error("expected an object");
  const int version = field<int>(doc, "version");
  if (version != 1) {
    throw Error(ErrorCode::VersionMismatch,
                "model document version " + std::to_string(version) + " is not supported (expected 1)");
  }
  GbtModel model;
  model.feature_dim = field<std::size_t>(doc, "feature_dim");
  model.output_dim = field<std::size_t>(doc, "output_dim");
  model.base_score = field<std::vector<double>>(doc, "base_score");
  model.params = gbt_params_from_json(field<nlohmann::json>(doc, "params"));
  model.params.learning_rate = field<double>(doc, "learning_rate");
  const auto strategy = parse_multi_strategy(field<std::string>(doc, "multi_strategy"));
  if (!strategy) schema_error("unknown multi_strategy");
  model.params.multi_strategy = *strategy;
  if (model.feature_dim == 0 || model.output_dim == 0) schema_error("dimensions must be positive");
  if (model.base_score.size() != model.output_dim) schema_error("base_score length != output_dim");

  const auto trees = field<nlohmann::json>(doc, "trees");
  if (!trees.is_array()) schema_error("'trees' must be an array");
  for (const nlohmann::json& t : trees) {
    RegressionTree tree;
    if (t.is_object() && t.contains("output_slice")) {
      tree.output_slice = field<std::vector<int>>(t, "output_slice");
    } else {
      tree.output_slice.resize(model.output_dim);
      std::iota(tree.output_slice.begin(), tree.output_slice.end(), 0);
    }
    for (int o : tree.output_slice) {
      if (o < 0 || static_cast<std::size_t>(o) >= model.output_dim) schema_error("output_slice out of range");
    }
    const auto nodes = field<nlohmann::json>(t, "nodes");
    if (!nodes.is_array() || nodes.empty()) schema_error("tree needs a non-empty 'nodes' array");
    const auto n_nodes = static_cast<int>(nodes.size());
    for (int i = 0; i < n_nodes; ++i) {
      const nlohmann::json& nd = nodes[static_cast<std::size_t>(i)];
      TreeNode node;
      const auto kind = field<std::string>(nd, "kind");
      if (kind == "leaf") {
        node.values = field<std::vector<double>>(nd, "values");
        if (node.values.size() != tree.output_slice.size()) schema_error("leaf width != output slice");
      } else if (kind == "split") {
        node.is_leaf = false;
        node.feature = field<int>(nd, "feature");
        node.threshold = field<double>(nd, "threshold");
        node.left = field<int>(nd, "left");
        node.right = field<int>(nd, "right");
        if (nd.contains("missing_goes_left")) node.missing_goes_left = field<bool>(nd, "missing_goes_left");
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= model.feature_dim) {
          schema_error("split feature out of range");
        }
        if (node.left <= i || node.right <= i || node.left >= n_nodes || node.right >= n_nodes) {
          schema_error("child index must point forward inside the node array");
        }
      } else {
        schema_error("unknown node kind '" + kind + "'");
      }
      tree.nodes.push_back(std::move(node));
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace boostrpf
