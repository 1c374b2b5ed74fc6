#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ohmgrad/circuit.hpp"
#include "ohmgrad/graph.hpp"

namespace ohmgrad {

/// Minimize v^T R^-1 v subject to A (s + v) = 0 by solving the dense KKT
/// system [2 R^-1, A^T; A, 0] [v; lambda] = [0; -A s]. Independent of the
/// cached projector.
Eigen::VectorXd lagrangian_solve(const CycleMatrix& cycles, const Eigen::VectorXd& r, const Eigen::VectorXd& s);

/// Central differences of loss(r) with step rel_step * r_e per edge. The loss
/// sees a circuit with unbounded clip range.
Eigen::VectorXd finite_difference_gradient(const Circuit& circuit,
                                           const std::function<double(const Circuit&)>& loss,
                                           double rel_step = 1e-6);

/// 0.5 ||P_o^T v - y||^2 for the voltage-mode response to gamma P_i x.
double ls_loss(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
               double gamma);

struct InvariantRow {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::size_t checks = 0;
  bool pass() const { return max_residual <= tolerance; }
};

struct VerifyOptions {
  std::size_t graphs = 20;
  std::size_t max_nodes = 20;
  std::uint64_t seed = 0;
};

/// Projector, solver and gradient invariants over random connected graphs
/// with log-uniform resistances in [0.1, 10].
std::vector<InvariantRow> verify_invariants(const VerifyOptions& opts);

}  // namespace ohmgrad
