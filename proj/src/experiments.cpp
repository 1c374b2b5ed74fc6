#include "ohmgrad/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ohmgrad/error.hpp"
#include "ohmgrad/rng.hpp"

namespace ohmgrad {

BiasExperiment bias_experiment(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, double gamma, double beta, const NoiseModel& noise,
                               std::uint64_t seed) {
  if (noise.samples < 2) fail(Errc::invalid_argument, "bias experiment needs at least 2 samples");
  BiasExperiment out;
  out.beta = beta;
  out.samples = noise.samples;
  out.predicted = bias_prediction(circuit, sel, beta, noise);  // also validates the covariance
  out.two_phase_clean = two_phase_gradient(circuit, sel, x, y, gamma, beta).g;
  out.analytical_clean = analytical_gradient_ls(circuit, sel, x, y, gamma).g;

  const auto Eo = static_cast<Eigen::Index>(sel.num_outputs());
  const auto E = out.two_phase_clean.size();
  // Correlated draws via a Cholesky-like factor that tolerates PSD covariances.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise.covariance);
  const Eigen::MatrixXd L = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Rng rng(seed);
  Eigen::VectorXd sum_tp = Eigen::VectorXd::Zero(E), sq_tp = Eigen::VectorXd::Zero(E);
  Eigen::VectorXd sum_an = Eigen::VectorXd::Zero(E), sq_an = Eigen::VectorXd::Zero(E);
  Eigen::VectorXd z(Eo);
  for (std::size_t k = 0; k < noise.samples; ++k) {
    for (Eigen::Index a = 0; a < Eo; ++a) z(a) = rng.normal();
    const Eigen::VectorXd y_noisy = y + L * z;
    // Deviations from the clean value keep the accumulated sums small.
    const Eigen::VectorXd d_tp = two_phase_gradient(circuit, sel, x, y_noisy, gamma, beta).g - out.two_phase_clean;
    const Eigen::VectorXd d_an = analytical_gradient_ls(circuit, sel, x, y_noisy, gamma).g - out.analytical_clean;
    sum_tp += d_tp;
    sq_tp += d_tp.cwiseProduct(d_tp);
    sum_an += d_an;
    sq_an += d_an.cwiseProduct(d_an);
  }
  const double n = static_cast<double>(noise.samples);
  auto finish = [n](const Eigen::VectorXd& sum, const Eigen::VectorXd& sq, const Eigen::VectorXd& clean,
                    Eigen::VectorXd& mean, Eigen::VectorXd& se) {
    const Eigen::VectorXd m = sum / n;
    const Eigen::VectorXd var = ((sq / n - m.cwiseProduct(m)) * (n / (n - 1.0))).cwiseMax(0.0);
    mean = clean + m;
    se = (var / n).cwiseSqrt();
  };
  finish(sum_tp, sq_tp, out.two_phase_clean, out.two_phase_mean, out.two_phase_se);
  finish(sum_an, sq_an, out.analytical_clean, out.analytical_mean, out.analytical_se);
  return out;
}

RegressionRun regression_run(Circuit& circuit, const Selectors& sel, const Dataset& data, const TrainConfig& cfg,
                             std::size_t screen_steps) {
  if (data.kind != TaskKind::regression || data.true_map.size() == 0)
    fail(Errc::invalid_argument, "regression run needs a dataset with a known map");
  RegressionRun run;
  run.trajectory = train(circuit, sel, data, cfg);
  run.W = io_map(circuit, sel, cfg.gamma).W;
  if (run.W.rows() != data.true_map.rows() || run.W.cols() != data.true_map.cols())
    fail(Errc::dimension_mismatch, "io map and true map differ in shape");
  run.frobenius_error = (run.W - data.true_map).norm();
  run.final_loss = run.trajectory.records.back().loss;
  const auto& sl = run.trajectory.step_loss;
  const std::size_t n = std::min(screen_steps, sl.size());
  if (n > 0) run.screen_loss = std::accumulate(sl.begin(), sl.begin() + static_cast<long>(n), 0.0) / static_cast<double>(n);
  return run;
}

std::vector<std::size_t> screen_runs(const std::vector<RegressionRun>& runs, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) fail(Errc::invalid_argument, "screen fraction must lie in (0, 1]");
  std::vector<std::size_t> idx(runs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].screen_loss < runs[b].screen_loss; });
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(runs.size()))));
  idx.resize(std::min(keep, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace ohmgrad
