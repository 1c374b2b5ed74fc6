#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "ohmgrad/circuit.hpp"
#include "ohmgrad/graph.hpp"

namespace ohmgrad {

/// An energy E_theta(y) with a nudge n(beta, theta, y) and a mobility Gamma.
/// The nudged energy is F(beta, theta, y) = E_theta(y) + n(beta, theta, y).
///
/// `objective` returns h(theta, y) = (1/k!) d^k n / d beta^k at beta = 0, so
/// that J(theta) = h(theta, y0(theta)) is the objective whose gradient the
/// generalized two-phase estimate recovers.
struct EnergySystem {
  using Vec = Eigen::VectorXd;

  std::size_t state_dim = 0;
  std::size_t param_dim = 0;
  int order = 1;  // leading power k of beta in n(beta, theta, y0)

  std::function<double(const Vec& theta, const Vec& y)> energy;
  std::function<Vec(const Vec& theta, const Vec& y)> energy_grad;        // d/dy E
  std::function<Vec(const Vec& theta, const Vec& y)> energy_param_grad;  // d/dtheta E

  std::function<double(double beta, const Vec& theta, const Vec& y)> nudge;
  std::function<Vec(double beta, const Vec& theta, const Vec& y)> nudge_grad;        // d/dy n
  std::function<Vec(double beta, const Vec& theta, const Vec& y)> nudge_param_grad;  // d/dtheta n

  std::function<double(const Vec& theta, const Vec& y)> objective;

  Eigen::MatrixXd mobility;  // empty means identity
  Vec initial_state;         // relaxation start; zero when empty

  double free_energy(double beta, const Vec& theta, const Vec& y) const;
  Vec free_energy_grad(double beta, const Vec& theta, const Vec& y) const;
  Vec free_energy_param_grad(double beta, const Vec& theta, const Vec& y) const;
  Eigen::MatrixXd mobility_matrix() const;
  Vec start_state() const;

  /// Check Gamma is SPD, n(0, theta, y) = 0, and that energy_grad and
  /// nudge_grad agree with central differences (relative error <= 1e-5) at
  /// `y`. Throws Errc::invalid_argument on failure.
  void validate(const Vec& theta, const Vec& y, double beta_probe = 0.1) const;
};

struct RelaxOptions {
  std::optional<double> step;  // default 0.1 / lambda_max(Gamma H) at the start state
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
};

struct Equilibrium {
  Eigen::VectorXd y;
  double residual = 0.0;  // ||grad_y F|| at y
  std::size_t iterations = 0;
  double beta = 0.0;
  double step = 0.0;
  std::size_t energy_increases = 0;  // accepted steps on which F went up
};

/// Power-iteration estimate of lambda_max(Gamma H) with H the Hessian of F
/// at `y`, using gradient differences.
double hessian_scale(const EnergySystem& system, const Eigen::VectorXd& theta, double beta,
                     const Eigen::VectorXd& y);

/// Explicit-Euler gradient flow y <- y - step * Gamma grad_y F until
/// ||grad_y F|| <= tol.
Equilibrium relax(const EnergySystem& system, const Eigen::VectorXd& theta, double beta,
                  const Eigen::VectorXd& y_init, const RelaxOptions& opts = {});

struct GepEstimate {
  Eigen::VectorXd estimate;
  Equilibrium free;
  Equilibrium nudged;
};

/// (1/beta^k) [d_theta F(beta, theta, y_beta) - d_theta F(0, theta, y0)].
GepEstimate gep_estimate(const EnergySystem& system, const Eigen::VectorXd& theta, double beta,
                         const RelaxOptions& opts = {});

/// Central differences of J(theta) = h(theta, y0(theta)), re-relaxing at each
/// perturbed theta.
Eigen::VectorXd objective_gradient_oracle(const EnergySystem& system, const Eigen::VectorXd& theta,
                                          double delta, const RelaxOptions& opts = {});

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> log_beta;
  std::vector<double> log_nudge;
};

/// Least-squares slope of log|n(beta, theta, y0)| against log beta.
OrderFit nudge_order_fit(const EnergySystem& system, const Eigen::VectorXd& theta,
                         const std::vector<double>& betas, const RelaxOptions& opts = {});

/// Ordinary least-squares slope/intercept of y against x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---- Reference systems -----------------------------------------------------

/// E_theta(y) = 1/2 (y - theta)^T H (y - theta) with theta the anchor (p = n).
/// EP-type nudge n = beta^order * 1/2 ||P y - target||^2, P selecting outputs
/// by rows.
EnergySystem quadratic_ep_system(Eigen::MatrixXd H, Eigen::MatrixXd P, Eigen::VectorXd target,
                                 int order = 1, Eigen::MatrixXd mobility = {});

/// Same energy with a clamping nudge:
/// n = E_theta(y + beta P^T (target - P y)) - E_theta(y), order 2.
EnergySystem quadratic_cl_system(Eigen::MatrixXd H, Eigen::MatrixXd P, Eigen::VectorXd target,
                                 Eigen::MatrixXd mobility = {});

/// Circuit dissipation energy E_R(v; s) with state v, parameters r, and the
/// EP cost n = beta * 1/2 ||P_o^T v - target||^2.
EnergySystem circuit_ep_system(const CycleMatrix& cycles, const Selectors& sel, Eigen::VectorXd sources,
                               Eigen::VectorXd target);

}  // namespace ohmgrad
