#include "ohmgrad/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ohmgrad/error.hpp"

namespace ohmgrad {

namespace {

void check_consistent(const Circuit& circuit, const Selectors& sel) {
  if (sel.num_edges() != circuit.num_edges())
    fail(Errc::selector_mismatch, "selectors address " + std::to_string(sel.num_edges()) +
                                      " edges; circuit has " + std::to_string(circuit.num_edges()));
}

void check_target(const Selectors& sel, const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(y.size()) != sel.num_outputs())
    fail(Errc::dimension_mismatch, "target has " + std::to_string(y.size()) + " entries; expected " +
                                       std::to_string(sel.num_outputs()));
  if (!y.allFinite()) fail(Errc::non_finite, "target has non-finite entries");
}

SteadyState free_phase(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                       double gamma) {
  check_consistent(circuit, sel);
  if (!x.allFinite()) fail(Errc::non_finite, "input has non-finite entries");
  return solve_voltage_mode(circuit, gamma * sel.embed_input(x));
}

void check_single_output(const Selectors& sel) {
  if (sel.num_outputs() != 1)
    fail(Errc::wrong_output_count,
         "hinge loss needs exactly one output edge; got " + std::to_string(sel.num_outputs()));
}

void check_label(int label) {
  if (label != 1 && label != -1) fail(Errc::invalid_argument, "label must be -1 or +1");
}

Eigen::VectorXd contrast(const Eigen::VectorXd& i_clamped, const Eigen::VectorXd& i_free, double beta) {
  return (i_clamped.array().square() - i_free.array().square()).matrix() / (2.0 * beta);
}

}  // namespace

const char* to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::analytical: return "analytical";
    case Estimator::two_phase: return "two-phase";
    case Estimator::two_phase_limit: return "two-phase-limit";
    case Estimator::hinge: return "hinge-analytical";
    case Estimator::hinge_two_phase: return "hinge-two-phase";
  }
  return "unknown";
}

NoiseModel NoiseModel::isotropic(std::size_t outputs, double sigma, std::size_t samples) {
  const auto n = static_cast<Eigen::Index>(outputs);
  return {sigma * sigma * Eigen::MatrixXd::Identity(n, n), samples};
}

double least_squares_loss(const Eigen::VectorXd& prediction, const Eigen::VectorXd& y) {
  return 0.5 * (prediction - y).squaredNorm();
}

GradientEstimate analytical_gradient_ls(const Circuit& circuit, const Selectors& sel,
                                        const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                        double gamma) {
  check_target(sel, y);
  const SteadyState free = free_phase(circuit, sel, x, gamma);

  GradientEstimate out;
  out.estimator = Estimator::analytical;
  out.prediction = sel.read_output(free.v);
  out.loss = least_squares_loss(out.prediction, y);
  out.i_free = free.i;

  const Eigen::VectorXd err = sel.embed_output(out.prediction - y);
  const Eigen::VectorXd delta = err + apply_adjoint(circuit, err);
  out.g = free.i.cwiseProduct(delta);
  return out;
}

GradientEstimate two_phase_gradient(const Circuit& circuit, const Selectors& sel,
                                    const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma,
                                    double beta) {
  if (beta == 0.0)
    fail(Errc::zero_nudge, "two-phase estimator needs beta != 0; use two_phase_limit for beta -> 0");
  check_target(sel, y);
  const SteadyState free = free_phase(circuit, sel, x, gamma);

  GradientEstimate out;
  out.estimator = Estimator::two_phase;
  out.beta = beta;
  out.prediction = sel.read_output(free.v);
  out.loss = least_squares_loss(out.prediction, y);
  out.i_free = free.i;

  const Eigen::VectorXd s_clamped = free.s + sel.embed_output(beta * (out.prediction - y));
  const SteadyState clamped = solve_voltage_mode(circuit, s_clamped);
  out.g = contrast(clamped.i, free.i, beta);
  return out;
}

GradientEstimate two_phase_limit(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y, double gamma) {
  check_target(sel, y);
  const SteadyState free = free_phase(circuit, sel, x, gamma);

  GradientEstimate out;
  out.estimator = Estimator::two_phase_limit;
  out.prediction = sel.read_output(free.v);
  out.loss = least_squares_loss(out.prediction, y);
  out.i_free = free.i;
  out.g = free.i.cwiseProduct(circuit.current_response() * sel.embed_output(out.prediction - y));
  return out;
}

Eigen::VectorXd two_phase_limit_projector_form(const Circuit& circuit, const Selectors& sel,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               double gamma) {
  check_target(sel, y);
  const SteadyState free = free_phase(circuit, sel, x, gamma);
  const Eigen::VectorXd yhat = sel.read_output(free.v);
  const Eigen::VectorXd w = circuit.projector() * sel.embed_output(y - yhat);
  return free.i.cwiseProduct(w.cwiseQuotient(circuit.resistances()));
}

GradientEstimate hinge_subgradient(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                                   int label, double gamma) {
  check_single_output(sel);
  check_label(label);
  const SteadyState free = free_phase(circuit, sel, x, gamma);

  GradientEstimate out;
  out.estimator = Estimator::hinge;
  out.prediction = sel.read_output(free.v);
  out.i_free = free.i;
  const double margin = 1.0 - label * out.prediction(0);
  out.loss = std::max(0.0, margin);
  if (margin <= 0.0) {
    out.g = Eigen::VectorXd::Zero(free.i.size());
    return out;
  }
  // -(v_T^T (I - Omega) diag(i))^T = -i .* (v_T - Omega^T v_T)
  Eigen::VectorXd target = Eigen::VectorXd::Zero(free.i.size());
  target(static_cast<Eigen::Index>(sel.output()[0])) = label;
  out.g = -free.i.cwiseProduct(target + apply_adjoint(circuit, target));
  return out;
}

GradientEstimate hinge_two_phase(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x,
                                 int label, double gamma, double beta) {
  if (beta == 0.0) fail(Errc::zero_nudge, "hinge two-phase estimator needs beta != 0");
  check_single_output(sel);
  check_label(label);
  const SteadyState free = free_phase(circuit, sel, x, gamma);

  GradientEstimate out;
  out.estimator = Estimator::hinge_two_phase;
  out.beta = beta;
  out.prediction = sel.read_output(free.v);
  out.i_free = free.i;
  const double margin = 1.0 - label * out.prediction(0);
  out.loss = std::max(0.0, margin);
  if (margin <= 0.0) {
    out.g = Eigen::VectorXd::Zero(free.i.size());
    return out;
  }
  Eigen::VectorXd s_clamped = free.s;
  s_clamped(static_cast<Eigen::Index>(sel.output()[0])) += -beta * label;
  const SteadyState clamped = solve_voltage_mode(circuit, s_clamped);
  out.g = contrast(clamped.i, free.i, beta);
  return out;
}

GradientEstimate mask_gradient(const GradientEstimate& g, std::span<const std::uint8_t> mask) {
  if (mask.size() != static_cast<std::size_t>(g.g.size()))
    fail(Errc::dimension_mismatch, "mask has " + std::to_string(mask.size()) + " entries; gradient has " +
                                       std::to_string(g.g.size()));
  GradientEstimate out = g;
  for (std::size_t e = 0; e < mask.size(); ++e) {
    if (mask[e] > 1) fail(Errc::invalid_argument, "mask entries must be 0 or 1");
    if (mask[e] == 0) out.g(static_cast<Eigen::Index>(e)) = 0.0;
  }
  return out;
}

Eigen::VectorXd bias_prediction(const Circuit& circuit, const Selectors& sel, double beta,
                                const NoiseModel& noise) {
  check_consistent(circuit, sel);
  const Eigen::MatrixXd& sigma = noise.covariance;
  const auto Eo = static_cast<Eigen::Index>(sel.num_outputs());
  if (sigma.rows() != Eo || sigma.cols() != Eo)
    fail(Errc::dimension_mismatch, "noise covariance must be E_o x E_o");
  if (!sigma.allFinite()) fail(Errc::non_finite, "noise covariance has non-finite entries");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    fail(Errc::not_psd, "noise covariance is not symmetric");
  if (Eo > 0) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale)
      fail(Errc::not_psd, "noise covariance has a negative eigenvalue");
  }
  if (beta == 0.0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(circuit.num_edges()));

  const Eigen::MatrixXd Q = circuit.current_response() * sel.output_matrix();
  const Eigen::VectorXd second_moment = (Q * sigma).cwiseProduct(Q).rowwise().sum();
  return 0.5 * beta * second_moment;
}

}  // namespace ohmgrad
