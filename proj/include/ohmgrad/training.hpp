#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ohmgrad/circuit.hpp"
#include "ohmgrad/datasets.hpp"
#include "ohmgrad/gradients.hpp"

namespace ohmgrad {

struct TrainConfig {
  Estimator estimator = Estimator::analytical;
  double eta = 0.3;
  double beta = 0.3;   // used by the two-phase estimators only
  double gamma = 1.0;  // input gain
  std::size_t steps = 1000;
  ResistanceBounds bounds{};
  double r0 = 1.0;  // homogeneous initial resistance
  double p_freeze = 0.0;
  std::uint64_t seed = 0;
  std::size_t record_every = 0;  // 0: only the final record

  bool uses_hinge() const { return estimator == Estimator::hinge || estimator == Estimator::hinge_two_phase; }
  bool uses_beta() const { return estimator == Estimator::two_phase || estimator == Estimator::hinge_two_phase; }

  /// Throws Errc::config_error with the offending field and its valid range.
  void validate() const;
};

struct TrainRecord {
  std::size_t step = 0;
  double loss = 0.0;      // full-batch loss on the training set
  double accuracy = NAN;  // classification only
  Eigen::VectorXd r;
};

struct Trajectory {
  Eigen::VectorXd initial_r;
  Eigen::VectorXd final_r;
  std::vector<double> step_loss;  // loss of the sample drawn at each step, before its update
  std::vector<TrainRecord> records;
  std::vector<std::uint8_t> mask;  // 1 = trainable
  double wall_seconds = 0.0;
};

enum class Readout {
  sign,    // label = sign of the single output (0 counts as +1)
  argmax,  // two outputs; +1 when output 0 exceeds output 1
};

/// Fraction of samples whose predicted label matches.
double classification_accuracy(const Circuit& circuit, const Selectors& sel, const Dataset& data, double gamma,
                               Readout readout = Readout::sign);

/// Mean hinge loss (classification) or mean half squared error (regression).
double full_batch_loss(const Circuit& circuit, const Selectors& sel, const Dataset& data, double gamma);

/// Bernoulli trainability mask: edge e is trainable when its uniform draw is
/// >= p_freeze. Drawn from its own stream of `seed`.
std::vector<std::uint8_t> draw_mask(std::size_t num_edges, double p_freeze, std::uint64_t seed);

/// Stochastic single-sample training from the homogeneous state r = cfg.r0.
/// Each epoch visits the data in a fresh seeded shuffle. Update:
/// r <- clip(r - eta * (mask .* g), r_min, r_max). The circuit ends at the
/// final resistances.
Trajectory train(Circuit& circuit, const Selectors& sel, const Dataset& data, const TrainConfig& cfg);

using CircuitFactory = std::function<Circuit()>;

struct SweepTrial {
  double p_freeze = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double accuracy = NAN;
  double baseline_accuracy = NAN;  // untrained circuit at r0
  bool frozen_unchanged = true;
  std::size_t frozen = 0;
  std::string error;  // empty on success
};

struct SweepSummary {
  Estimator estimator = Estimator::analytical;
  double p_freeze = 0.0;
  double mean_accuracy = NAN;
  double std_accuracy = NAN;  // sample standard deviation
  std::size_t trials = 0;     // successful trials
};

struct SweepReport {
  std::vector<SweepTrial> trials;
  std::vector<SweepSummary> summary;
};

/// For each p, `trials` trainings with seeds derive_seed(cfg.seed, t);
/// accuracy is measured on `eval`. Failed trials are recorded, not thrown.
SweepReport freeze_sweep(const CircuitFactory& factory, const Selectors& sel, const Dataset& train_data,
                         const Dataset& eval, const TrainConfig& cfg, const std::vector<double>& p_list,
                         std::size_t trials, std::size_t threads = 1, Readout readout = Readout::sign);

struct LandscapePoint {
  double q1 = 0.0;
  double q2 = 0.0;
  double loss = 0.0;
};

struct TrajectoryPoint {
  std::size_t step = 0;
  double q1 = 0.0;
  double q2 = 0.0;
};

struct Landscape {
  Eigen::VectorXd r0;
  Eigen::VectorXd delta1;  // unit vectors
  Eigen::VectorXd delta2;
  Eigen::Vector2d singular_values;
  std::vector<LandscapePoint> grid;  // resolution^2 rows, q1 outer
  std::vector<TrajectoryPoint> path;
};

/// Loss surface S(q1, q2) = L(clip(r0 + q1 d1 + q2 d2)) over [-range, range]^2,
/// where d1, d2 are the two leading right singular vectors of the stacked
/// offsets r_t - r0 of the recorded snapshots.
Landscape landscape_sample(const Trajectory& traj, const CircuitFactory& factory, const Selectors& sel,
                           const Dataset& data, double gamma, double range = 1.5, std::size_t resolution = 21);

/// Worker count from an explicit value, then OHMGRAD_THREADS, then 1.
std::size_t resolve_threads(std::size_t requested);

}  // namespace ohmgrad
