#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "ohmgrad/graph.hpp"

namespace ohmgrad {

/// Hardware clip range for edge resistances, in ohms.
struct ResistanceBounds {
  double min = 0.1;
  double max = 10.0;
};

/// Conditioning threshold for (A R A^T) above which results carry a warning.
inline constexpr double kConditionWarning = 1e12;

/// Residuals of the projector identities at the current resistances.
struct ProjectorResiduals {
  double consistency = 0.0;  // ||Omega - R A^T (A R A^T)^-1 A||_F / ||Omega||_F (fresh rebuild)
  double idempotence = 0.0;  // ||Omega^2 - Omega||_F / max(1, ||Omega||_F)
  double adjoint = 0.0;      // ||Omega^T - R^-1 Omega R||_F / max(1, ||Omega||_F)
};

/// Weighted cycle-space projector Omega = R A^T (A R A^T)^-1 A. Returns the
/// E x E zero matrix when the graph has no cycles. `condition` (optional)
/// receives an estimate of cond(A R A^T).
Eigen::MatrixXd assemble_projector(const CycleMatrix& cycles, const Eigen::VectorXd& r,
                                   double* condition = nullptr);

/// Resistor network with cached projector and loop factorization.
///
/// A Circuit with fixed resistances is read-only and may be shared across
/// threads; set_resistances() needs exclusive access.
class Circuit {
 public:
  Circuit(CircuitGraph graph, Eigen::VectorXd r, ResistanceBounds bounds = {});
  Circuit(CircuitGraph graph, CycleMatrix cycles, Eigen::VectorXd r, ResistanceBounds bounds = {});

  static Circuit homogeneous(CircuitGraph graph, double r0 = 1.0, ResistanceBounds bounds = {});

  const CircuitGraph& graph() const { return graph_; }
  const CycleMatrix& cycles() const { return cycles_; }
  const Eigen::VectorXd& resistances() const { return r_; }
  const ResistanceBounds& bounds() const { return bounds_; }
  std::size_t num_edges() const { return graph_.num_edges(); }
  std::size_t num_cycles() const { return cycles_.num_cycles(); }

  const Eigen::MatrixXd& projector() const { return omega_; }

  /// M = -A^T (A R A^T)^-1 A, the source-to-current map (i = M s).
  Eigen::MatrixXd current_response() const;

  double condition_estimate() const { return condition_; }
  bool ill_conditioned() const { return condition_ > kConditionWarning; }

  /// Replace r (must lie inside the bounds) and rebuild the cached operators.
  void set_resistances(const Eigen::VectorXd& r);

  ProjectorResiduals residuals() const;

  /// When enabled, every solve checks the KVL residual and the
  /// sqrt(R_max/R_min) norm bound and throws on violation.
  void set_verification(bool on) { verify_ = on; }
  bool verification() const { return verify_; }

 private:
  void rebuild();

  CircuitGraph graph_;
  CycleMatrix cycles_;
  Eigen::VectorXd r_;
  ResistanceBounds bounds_;
  Eigen::MatrixXd omega_;
  Eigen::LLT<Eigen::MatrixXd> loop_factor_;
  double condition_ = 1.0;
  bool verify_ = false;
};

struct SteadyState {
  Eigen::VectorXd s;  // sources (V)
  Eigen::VectorXd v;  // ohmic drops (V)
  Eigen::VectorXd i;  // currents (A)
  double kvl_residual = 0.0;
  bool ill_conditioned = false;
};

/// v = -Omega s, i = R^-1 v.
SteadyState solve_voltage_mode(const Circuit& circuit, const Eigen::VectorXd& s);

enum class AdjointMode {
  direct,        // transpose action on the cached projector
  voltage_mode,  // -r^-1 .* (Omega (r .* u)), using Omega^T = R^-1 Omega R
};

/// -Omega^T u.
Eigen::VectorXd apply_adjoint(const Circuit& circuit, const Eigen::VectorXd& u,
                              AdjointMode mode = AdjointMode::direct);

/// E_R(v; s) = v^T R^-1 v - 2 s^T M (s + v); minimized over v at v = -Omega s.
double dissipation_energy(const Circuit& circuit, const Eigen::VectorXd& v, const Eigen::VectorXd& s);

struct IoMap {
  Eigen::MatrixXd W;  // E_o x E_i
  std::size_t rank = 0;
  std::size_t dimension_bound = 0;  // min{E_i, E_o, C}
  std::size_t input_cycle_rank = 0;   // rank(A P_i)
  std::size_t output_cycle_rank = 0;  // rank(A P_o)

  std::size_t cycle_bound() const { return std::min(input_cycle_rank, output_cycle_rank); }
  bool bounds_hold() const { return rank <= dimension_bound && rank <= cycle_bound(); }
};

/// W = -gamma P_o^T Omega P_i together with both rank bounds.
IoMap io_map(const Circuit& circuit, const Selectors& sel, double gamma = 1.0);

/// Throws unless every entry is finite and the length is `n`.
void require_edge_vector(const Eigen::VectorXd& x, std::size_t n, const char* what);

}  // namespace ohmgrad
