#include "ohmgrad/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "ohmgrad/error.hpp"
#include "ohmgrad/rng.hpp"

namespace ohmgrad {

std::size_t Dataset::output_dim() const {
  if (kind == TaskKind::classification) return 1;
  return targets.empty() ? 0 : static_cast<std::size_t>(targets[0].size());
}

void Dataset::validate() const {
  const std::size_t d = input_dim();
  for (const auto& x : inputs)
    if (static_cast<std::size_t>(x.size()) != d) fail(Errc::schema_error, "inputs have mixed dimensions");
  if (kind == TaskKind::regression) {
    if (!labels.empty()) fail(Errc::schema_error, "regression data carry labels");
    if (targets.size() != inputs.size()) fail(Errc::schema_error, "inputs and targets differ in count");
    const std::size_t o = output_dim();
    for (const auto& y : targets)
      if (static_cast<std::size_t>(y.size()) != o) fail(Errc::schema_error, "targets have mixed dimensions");
  } else {
    if (!targets.empty()) fail(Errc::schema_error, "classification data carry regression targets");
    if (labels.size() != inputs.size()) fail(Errc::schema_error, "inputs and labels differ in count");
    for (const int l : labels)
      if (l != 1 && l != -1) fail(Errc::schema_error, "labels must be -1 or +1");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.kind = kind;
  out.true_map = true_map;
  out.noise_sigma = noise_sigma;
  for (const std::size_t k : rows) {
    if (k >= size()) fail(Errc::index_out_of_range, "subset row out of range");
    out.inputs.push_back(inputs[k]);
    if (kind == TaskKind::regression)
      out.targets.push_back(targets[k]);
    else
      out.labels.push_back(labels[k]);
  }
  return out;
}

Eigen::MatrixXd Dataset::input_matrix() const {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(input_dim()));
  for (std::size_t k = 0; k < size(); ++k) X.row(static_cast<Eigen::Index>(k)) = inputs[k].transpose();
  return X;
}

Dataset gen_regression(std::size_t n_in, std::size_t n_out, double sigma, std::size_t count, std::uint64_t seed) {
  if (n_in == 0 || n_out == 0) fail(Errc::invalid_argument, "regression dimensions must be >= 1");
  if (count == 0) fail(Errc::invalid_argument, "sample count must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail(Errc::invalid_argument, "noise sigma must be >= 0");
  Rng rng(seed);
  Dataset d;
  d.kind = TaskKind::regression;
  d.noise_sigma = sigma;
  const auto I = static_cast<Eigen::Index>(n_in), O = static_cast<Eigen::Index>(n_out);
  d.true_map.resize(O, I);
  for (Eigen::Index a = 0; a < O; ++a)
    for (Eigen::Index b = 0; b < I; ++b) d.true_map(a, b) = rng.uniform(0.0, 10.0);
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::VectorXd x(I), eps(O);
    for (Eigen::Index b = 0; b < I; ++b) x(b) = rng.normal();
    for (Eigen::Index a = 0; a < O; ++a) eps(a) = rng.normal();
    d.targets.push_back(d.true_map * x + sigma * eps);
    d.inputs.push_back(std::move(x));
  }
  return d;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Dataset load_wdbc(const std::string& path) {
  constexpr std::size_t kFields = 32;
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  Dataset d;
  d.kind = TaskKind::classification;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  auto where = [&] { return path + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != kFields) {
      const std::string msg = where() + "expected " + std::to_string(kFields) + " fields, found " +
                              std::to_string(fields.size());
      if (first) fail(Errc::schema_error, msg + " (not the WDBC layout)");
      fail(Errc::parse_error, msg + " (truncated or malformed row)");
    }
    first = false;
    const std::string_view diag = trim(fields[1]);
    int label = 0;
    if (diag == "M")
      label = 1;
    else if (diag == "B")
      label = -1;
    else
      fail(Errc::parse_error, where() + "diagnosis must be M or B, found '" + std::string(diag) + "'");
    Eigen::VectorXd x(static_cast<Eigen::Index>(kFields - 2));
    for (std::size_t f = 2; f < kFields; ++f) {
      const std::string_view tok = trim(fields[f]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value))
        fail(Errc::parse_error, where() + "field " + std::to_string(f + 1) + " is not a number: '" +
                                    std::string(tok) + "'");
      x(static_cast<Eigen::Index>(f - 2)) = value;
    }
    d.inputs.push_back(std::move(x));
    d.labels.push_back(label);
  }
  if (d.inputs.empty()) fail(Errc::schema_error, path + ": no records");
  return d;
}

Eigen::MatrixXd PcaModel::standardize(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Z(X.rows(), static_cast<Eigen::Index>(kept_columns.size()));
  for (std::size_t k = 0; k < kept_columns.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(kept_columns[k]);
    if (c >= X.cols()) fail(Errc::dimension_mismatch, "PCA input has too few columns");
    const auto j = static_cast<Eigen::Index>(k);
    Z.col(j) = (X.col(c).array() - mean(j)) / scale(j);
  }
  return Z;
}

Eigen::MatrixXd PcaModel::transform(const Eigen::MatrixXd& X) const { return standardize(X) * basis; }

PcaModel pca_fit(const Eigen::MatrixXd& X, std::size_t dims) {
  if (X.rows() < 2) fail(Errc::invalid_argument, "PCA needs at least 2 samples");
  if (dims == 0 || dims > static_cast<std::size_t>(X.cols()))
    fail(Errc::invalid_argument, "PCA dims must be in [1, feature count]");
  PcaModel m;
  const double n = static_cast<double>(X.rows());
  std::vector<double> means, scales;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double mu = X.col(c).mean();
    const double var = (X.col(c).array() - mu).square().sum() / n;
    if (!(var > 0.0)) {
      m.warnings.push_back("column " + std::to_string(c) + " has zero variance and was dropped");
      continue;
    }
    m.kept_columns.push_back(static_cast<std::size_t>(c));
    means.push_back(mu);
    scales.push_back(std::sqrt(var));
  }
  if (dims > m.kept_columns.size())
    fail(Errc::invalid_argument, "PCA dims exceed the number of non-constant columns");
  m.mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
  m.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));

  const Eigen::MatrixXd Z = m.standardize(X);
  const Eigen::MatrixXd cov = (Z.transpose() * Z) / n;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(Errc::numerical, "PCA eigendecomposition failed");
  const auto p = cov.rows();
  const auto D = static_cast<Eigen::Index>(dims);
  m.basis.resize(p, D);
  m.explained_variance.resize(D);
  for (Eigen::Index k = 0; k < D; ++k) {
    Eigen::VectorXd dir = eig.eigenvectors().col(p - 1 - k);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0.0) dir = -dir;
    m.basis.col(k) = dir;
    m.explained_variance(k) = std::max(0.0, eig.eigenvalues()(p - 1 - k));
  }
  const double total = cov.trace();
  m.explained_ratio = total > 0.0 ? Eigen::VectorXd(m.explained_variance / total) : Eigen::VectorXd::Zero(D);
  return m;
}

PcaResult pca_reduce(const Eigen::MatrixXd& X, std::size_t dims) {
  PcaResult out;
  out.model = pca_fit(X, dims);
  out.projected = out.model.transform(X);
  return out;
}

Dataset with_inputs(const Dataset& d, const Eigen::MatrixXd& features) {
  if (static_cast<std::size_t>(features.rows()) != d.size())
    fail(Errc::dimension_mismatch, "feature rows do not match the dataset");
  Dataset out = d;
  for (std::size_t k = 0; k < d.size(); ++k) out.inputs[k] = features.row(static_cast<Eigen::Index>(k)).transpose();
  return out;
}

Split stratified_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(Errc::invalid_argument, "train fraction must lie in (0, 1)");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t k = 0; k < labels.size(); ++k) by_label[labels[k]].push_back(k);
  Rng rng(seed);
  Split s;
  for (auto& [label, rows] : by_label) {
    for (std::size_t k = rows.size(); k > 1; --k)
      std::swap(rows[k - 1], rows[static_cast<std::size_t>(rng.index(k))]);
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(rows.size())));
    s.train.insert(s.train.end(), rows.begin(), rows.begin() + static_cast<long>(n_train));
    s.test.insert(s.test.end(), rows.begin() + static_cast<long>(n_train), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace ohmgrad
