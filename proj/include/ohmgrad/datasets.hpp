#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ohmgrad {

enum class TaskKind { regression, classification };

struct Dataset {
  TaskKind kind = TaskKind::regression;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> targets;  // regression only
  std::vector<int> labels;               // classification only, each -1 or +1
  Eigen::MatrixXd true_map;              // generating map M, when known
  double noise_sigma = 0.0;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : static_cast<std::size_t>(inputs[0].size()); }
  std::size_t output_dim() const;

  /// Throws Errc::schema_error when the fields disagree with `kind`.
  void validate() const;

  /// Rows in the given order.
  Dataset subset(const std::vector<std::size_t>& rows) const;

  /// inputs stacked as rows.
  Eigen::MatrixXd input_matrix() const;
};

/// y = M x + eps with M_ab ~ U[0, 10), x ~ N(0, I), eps ~ N(0, sigma^2 I).
/// Draw order: M row-major, then per sample x followed by eps. eps is drawn
/// even for sigma = 0, so two calls that differ only in sigma share M and x.
Dataset gen_regression(std::size_t n_in, std::size_t n_out, double sigma, std::size_t count, std::uint64_t seed);

/// UCI WDBC layout: id, diagnosis (M|B), 30 numeric features. M -> +1,
/// B -> -1. A first row with the wrong field count is a schema error; a later
/// row that is malformed or truncated is a parse error naming its line.
Dataset load_wdbc(const std::string& path);

/// Standardize + project model. Fit once, then apply to any matrix with the
/// same columns.
struct PcaModel {
  std::vector<std::size_t> kept_columns;  // columns with nonzero variance
  Eigen::VectorXd mean;                   // over kept columns
  Eigen::VectorXd scale;                  // population std over kept columns
  Eigen::MatrixXd basis;                  // kept x dims, orthonormal columns
  Eigen::VectorXd explained_variance;     // dims, descending
  Eigen::VectorXd explained_ratio;        // explained_variance / total variance
  std::vector<std::string> warnings;

  Eigen::MatrixXd standardize(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

/// Rows of X are samples. Columns are standardized (population variance),
/// zero-variance columns are dropped with a warning, and the data are
/// projected onto the leading `dims` principal directions. Each direction is
/// signed so that its largest-magnitude entry is positive.
PcaModel pca_fit(const Eigen::MatrixXd& X, std::size_t dims);

struct PcaResult {
  Eigen::MatrixXd projected;
  PcaModel model;
};

PcaResult pca_reduce(const Eigen::MatrixXd& X, std::size_t dims);

/// Replace a classification dataset's inputs by rows of `features`.
Dataset with_inputs(const Dataset& d, const Eigen::MatrixXd& features);

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Per-label shuffle, round(train_fraction * count) of each label to train.
Split stratified_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed);

}  // namespace ohmgrad
