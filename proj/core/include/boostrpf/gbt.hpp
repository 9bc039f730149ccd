#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace boostrpf {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<double>& data() const noexcept { return data_; }

  void append_row(std::span<const double> values);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class MultiStrategy { MultiOutputTree, OneOutputPerTree };

std::string_view to_string(MultiStrategy strategy);
std::optional<MultiStrategy> parse_multi_strategy(std::string_view name);

/// Boosting hyperparameters. Defaults are the tuned configuration used for
/// every voltage model: 200 rounds, depth 7, shrinkage 0.5.
struct GbtParams {
  int n_estimators = 200;
  int max_depth = 7;
  double learning_rate = 0.5;
  double min_child_weight = 5.0;
  double subsample = 0.9;
  double colsample_bytree = 1.0;
  double reg_lambda = 1.0;
  MultiStrategy multi_strategy = MultiStrategy::MultiOutputTree;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

struct TreeNode {
  bool is_leaf = true;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  bool missing_goes_left = true;
  std::vector<double> values;  // leaf outputs, one per entry of output_slice

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Flat binary tree; node 0 is the root and children always follow their
/// parent. Rows with x[feature] < threshold (or NaN) go left.
struct RegressionTree {
  std::vector<int> output_slice;
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> row) const;
  /// Number of splits on the longest root-to-leaf path.
  int depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct GbtModel {
  std::vector<double> base_score;
  std::vector<RegressionTree> trees;
  GbtParams params;
  std::size_t feature_dim = 0;
  std::size_t output_dim = 0;

  /// base_score + learning_rate * sum of tree outputs (per output slice).
  void predict_into(std::span<const double> row, std::span<double> out) const;
  std::vector<double> predict(std::span<const double> row) const;
  Matrix predict(const Matrix& rows) const;

  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

struct RoundStats {
  int round = 0;  // 1-based
  std::vector<double> train_rmse;
  std::vector<double> valid_rmse;  // empty without a validation set
};

struct FitOptions {
  const Matrix* valid_rows = nullptr;
  const Matrix* valid_targets = nullptr;
  std::function<void(const RoundStats&)> on_round;
  /// Worker threads for the per-feature split search. The chosen splits do
  /// not depend on this value.
  unsigned threads = 1;
};

/// Squared-error boosting with exact greedy splits. Throws
/// Error{EmptyDataset | DimensionMismatch | BadConfig}.
GbtModel fit(const Matrix& rows, const Matrix& targets, const GbtParams& params,
             const FitOptions& options = {});

nlohmann::json to_json(const GbtParams& params);
GbtParams gbt_params_from_json(const nlohmann::json& doc, GbtParams defaults = {});

/// Model document; format version 1.
nlohmann::json to_json(const GbtModel& model);
/// Throws Error{SchemaError | VersionMismatch}.
GbtModel gbt_model_from_json(const nlohmann::json& doc);

}  // namespace boostrpf
