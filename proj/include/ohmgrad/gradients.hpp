#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "ohmgrad/circuit.hpp"
#include "ohmgrad/graph.hpp"

namespace ohmgrad {

enum class Estimator {
  analytical,       // exact least-squares gradient through Omega
  two_phase,        // (i_C^2 - i_F^2) / (2 beta)
  two_phase_limit,  // beta -> 0 value of two_phase
  hinge,            // hinge subgradient through Omega
  hinge_two_phase,  // margin-gated contrastive estimate for the hinge loss
};

const char* to_string(Estimator e) noexcept;

/// Gradient of a loss with respect to edge resistances (loss per ohm).
struct GradientEstimate {
  Eigen::VectorXd g;
  Estimator estimator = Estimator::analytical;
  double beta = 0.0;
  Eigen::VectorXd i_free;      // free-phase currents
  Eigen::VectorXd prediction;  // free-phase readout P_o^T v
  double loss = 0.0;           // loss of the free phase
};

/// Additive target noise, eps ~ N(0, covariance).
struct NoiseModel {
  Eigen::MatrixXd covariance;  // E_o x E_o, volts^2
  std::size_t samples = 10000;

  static NoiseModel isotropic(std::size_t outputs, double sigma, std::size_t samples = 10000);
};

/// Exact gradient of 0.5 ||P_o^T v - y||^2 with v = -Omega (gamma P_i x).
/// Uses one voltage-mode solve and one adjoint probe: g = i .* (e + (-Omega^T e))
/// with e the output error embedded on the output edges.
GradientEstimate analytical_gradient_ls(const Circuit& circuit, const Selectors& sel,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                        double gamma = 1.0);

/// Free phase s_F = gamma P_i x, clamped phase s_C = s_F + P_o beta (yhat - y),
/// g = (i_C^2 - i_F^2) / (2 beta). Throws Errc::zero_nudge for beta == 0.
GradientEstimate two_phase_gradient(const Circuit& circuit, const Selectors& sel,
                                    const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma,
                                    double beta);

/// diag(i_F) M P_o (yhat - y), the beta -> 0 limit of two_phase_gradient.
GradientEstimate two_phase_limit(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y, double gamma = 1.0);

/// Same limit through the projector: diag(i_F) R^-1 Omega P_o (y - yhat).
/// Used to cross-check two_phase_limit.
Eigen::VectorXd two_phase_limit_projector_form(const Circuit& circuit, const Selectors& sel,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               double gamma = 1.0);

/// Subgradient of max(0, 1 - label * v_o) for a single readout edge.
GradientEstimate hinge_subgradient(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                                   int label, double gamma = 1.0);

/// Contrastive hinge estimate: when the margin is violated the clamped phase
/// adds -beta * label on the output edge.
GradientEstimate hinge_two_phase(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                                 int label, double gamma, double beta);

/// m .* g; mask entries must be 0 or 1.
GradientEstimate mask_gradient(const GradientEstimate& g, std::span<const std::uint8_t> mask);

/// Expected shift of the two-phase estimator's mean caused by target noise:
/// +(beta/2) diag(Q Sigma Q^T), Q = M P_o.
Eigen::VectorXd bias_prediction(const Circuit& circuit, const Selectors& sel, double beta,
                                const NoiseModel& noise);

/// Half squared error 0.5 ||yhat - y||^2.
double least_squares_loss(const Eigen::VectorXd& prediction, const Eigen::VectorXd& y);

}  // namespace ohmgrad
