#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ohmgrad/circuit.hpp"
#include "ohmgrad/datasets.hpp"
#include "ohmgrad/gradients.hpp"
#include "ohmgrad/training.hpp"

namespace ohmgrad {

/// Monte-Carlo view of one example under target noise y + eps.
struct BiasExperiment {
  double beta = 0.0;
  std::size_t samples = 0;
  Eigen::VectorXd two_phase_clean;  // noiseless two-phase estimate
  Eigen::VectorXd two_phase_mean;   // mean over noisy targets
  Eigen::VectorXd two_phase_se;     // standard error of that mean
  Eigen::VectorXd analytical_clean;
  Eigen::VectorXd analytical_mean;
  Eigen::VectorXd analytical_se;
  Eigen::VectorXd predicted;  // bias_prediction()

  Eigen::VectorXd two_phase_shift() const { return two_phase_mean - two_phase_clean; }
  Eigen::VectorXd analytical_shift() const { return analytical_mean - analytical_clean; }
};

BiasExperiment bias_experiment(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, double gamma, double beta, const NoiseModel& noise,
                               std::uint64_t seed);

struct RegressionRun {
  Eigen::MatrixXd W;  // learned io map
  double frobenius_error = 0.0;  // ||W - M||_F
  double final_loss = 0.0;       // full-batch training loss
  double screen_loss = NAN;      // mean sample loss over the first screening steps
  Trajectory trajectory;
};

/// Train from r0 and report the exact io map against the dataset's M.
RegressionRun regression_run(Circuit& circuit, const Selectors& sel, const Dataset& data, const TrainConfig& cfg,
                             std::size_t screen_steps = 20);

/// Keep the best `fraction` of runs by screening loss (at least one).
std::vector<std::size_t> screen_runs(const std::vector<RegressionRun>& runs, double fraction);

}  // namespace ohmgrad
