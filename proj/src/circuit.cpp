#include "ohmgrad/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "ohmgrad/error.hpp"

namespace ohmgrad {

namespace {

void check_resistances(const Eigen::VectorXd& r, std::size_t num_edges) {
  if (static_cast<std::size_t>(r.size()) != num_edges)
    fail(Errc::dimension_mismatch, "resistance vector has " + std::to_string(r.size()) +
                                       " entries; graph has " + std::to_string(num_edges) + " edges");
  for (Eigen::Index e = 0; e < r.size(); ++e) {
    if (!std::isfinite(r(e))) fail(Errc::non_finite, "resistance " + std::to_string(e) + " is not finite");
    if (r(e) <= 0.0) {
      std::ostringstream msg;
      msg << "resistance " << e << " = " << r(e) << " is not positive";
      fail(Errc::nonpositive_resistance, msg.str());
    }
  }
}

struct LoopSolve {
  Eigen::LLT<Eigen::MatrixXd> factor;
  double condition = 1.0;
};

LoopSolve factor_loop_matrix(const CycleMatrix& cycles, const Eigen::VectorXd& r) {
  const Eigen::MatrixXd& A = cycles.A;
  LoopSolve out;
  if (A.rows() == 0) return out;
  const Eigen::MatrixXd K = A * r.asDiagonal() * A.transpose();
  out.factor.compute(K);
  const double rcond = out.factor.info() == Eigen::Success ? out.factor.rcond() : 0.0;
  out.condition = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  if (out.factor.info() != Eigen::Success || !std::isfinite(out.condition)) {
    std::ostringstream msg;
    msg << "loop matrix A R A^T is singular (condition estimate " << out.condition << ")";
    fail(Errc::numerical, msg.str());
  }
  return out;
}

}  // namespace

void require_edge_vector(const Eigen::VectorXd& x, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(x.size()) != n)
    fail(Errc::dimension_mismatch, std::string(what) + " has " + std::to_string(x.size()) +
                                       " entries; expected " + std::to_string(n));
  if (!x.allFinite()) fail(Errc::non_finite, std::string(what) + " has non-finite entries");
}

Eigen::MatrixXd assemble_projector(const CycleMatrix& cycles, const Eigen::VectorXd& r,
                                   double* condition) {
  check_resistances(r, cycles.num_edges());
  const auto E = static_cast<Eigen::Index>(cycles.num_edges());
  if (cycles.num_cycles() == 0) {
    if (condition) *condition = 1.0;
    return Eigen::MatrixXd::Zero(E, E);
  }
  const LoopSolve loop = factor_loop_matrix(cycles, r);
  if (condition) *condition = loop.condition;
  return r.asDiagonal() * (cycles.A.transpose() * loop.factor.solve(cycles.A));
}

Circuit::Circuit(CircuitGraph graph, Eigen::VectorXd r, ResistanceBounds bounds)
    : Circuit(graph, fundamental_cycle_matrix(graph), std::move(r), bounds) {}

Circuit::Circuit(CircuitGraph graph, CycleMatrix cycles, Eigen::VectorXd r, ResistanceBounds bounds)
    : graph_(std::move(graph)), cycles_(std::move(cycles)), bounds_(bounds) {
  if (!(bounds_.min > 0.0) || !(bounds_.max >= bounds_.min) || !std::isfinite(bounds_.max))
    fail(Errc::invalid_argument, "resistance bounds must satisfy 0 < r_min <= r_max < inf");
  if (cycles_.num_edges() != graph_.num_edges() || cycles_.num_cycles() != graph_.num_cycles())
    fail(Errc::dimension_mismatch, "cycle matrix does not match the graph");
  set_resistances(r);
}

Circuit Circuit::homogeneous(CircuitGraph graph, double r0, ResistanceBounds bounds) {
  const auto E = static_cast<Eigen::Index>(graph.num_edges());
  return Circuit(std::move(graph), Eigen::VectorXd::Constant(E, r0), bounds);
}

void Circuit::set_resistances(const Eigen::VectorXd& r) {
  check_resistances(r, graph_.num_edges());
  for (Eigen::Index e = 0; e < r.size(); ++e)
    if (r(e) < bounds_.min || r(e) > bounds_.max) {
      std::ostringstream msg;
      msg << "resistance " << e << " = " << r(e) << " outside [" << bounds_.min << ", " << bounds_.max << "]";
      fail(Errc::resistance_out_of_bounds, msg.str());
    }
  r_ = r;
  rebuild();
}

void Circuit::rebuild() {
  const auto E = static_cast<Eigen::Index>(graph_.num_edges());
  if (cycles_.num_cycles() == 0) {
    omega_ = Eigen::MatrixXd::Zero(E, E);
    loop_factor_ = Eigen::LLT<Eigen::MatrixXd>();
    condition_ = 1.0;
    return;
  }
  LoopSolve loop = factor_loop_matrix(cycles_, r_);
  condition_ = loop.condition;
  loop_factor_ = std::move(loop.factor);
  omega_ = r_.asDiagonal() * (cycles_.A.transpose() * loop_factor_.solve(cycles_.A));
}

Eigen::MatrixXd Circuit::current_response() const {
  const auto E = static_cast<Eigen::Index>(graph_.num_edges());
  if (cycles_.num_cycles() == 0) return Eigen::MatrixXd::Zero(E, E);
  return -(cycles_.A.transpose() * loop_factor_.solve(cycles_.A));
}

ProjectorResiduals Circuit::residuals() const {
  ProjectorResiduals res;
  const double norm = omega_.norm();
  const double scale = std::max(1.0, norm);
  const Eigen::MatrixXd fresh = assemble_projector(cycles_, r_);
  res.consistency = norm > 0.0 ? (omega_ - fresh).norm() / norm : fresh.norm();
  res.idempotence = (omega_ * omega_ - omega_).norm() / scale;
  const Eigen::MatrixXd similar = r_.cwiseInverse().asDiagonal() * omega_ * r_.asDiagonal();
  res.adjoint = (omega_.transpose() - similar).norm() / scale;
  return res;
}

SteadyState solve_voltage_mode(const Circuit& circuit, const Eigen::VectorXd& s) {
  require_edge_vector(s, circuit.num_edges(), "source vector");
  SteadyState out;
  out.s = s;
  out.v = -(circuit.projector() * s);
  out.i = out.v.cwiseQuotient(circuit.resistances());
  out.ill_conditioned = circuit.ill_conditioned();
  out.kvl_residual = circuit.num_cycles() == 0 ? 0.0 : (circuit.cycles().A * (s + out.v)).norm();

  if (circuit.verification()) {
    const double snorm = s.norm();
    if (out.kvl_residual > 1e-9 * std::max(1.0, snorm)) {
      std::ostringstream msg;
      msg << "KVL residual " << out.kvl_residual << " exceeds tolerance";
      fail(Errc::invariant_violation, msg.str());
    }
    const auto& r = circuit.resistances();
    const double bound = snorm * std::sqrt(r.maxCoeff() / r.minCoeff());
    if (out.v.norm() > bound * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream msg;
      msg << "response norm " << out.v.norm() << " exceeds sqrt(R_max/R_min) bound " << bound;
      fail(Errc::invariant_violation, msg.str());
    }
  }
  return out;
}

Eigen::VectorXd apply_adjoint(const Circuit& circuit, const Eigen::VectorXd& u, AdjointMode mode) {
  require_edge_vector(u, circuit.num_edges(), "adjoint probe");
  switch (mode) {
    case AdjointMode::direct:
      return -(circuit.projector().transpose() * u);
    case AdjointMode::voltage_mode: {
      const Eigen::VectorXd& r = circuit.resistances();
      const Eigen::VectorXd s = r.cwiseProduct(u);
      const Eigen::VectorXd v = -(circuit.projector() * s);
      return v.cwiseQuotient(r);
    }
  }
  fail(Errc::invalid_argument, "unknown adjoint mode");
}

double dissipation_energy(const Circuit& circuit, const Eigen::VectorXd& v, const Eigen::VectorXd& s) {
  const auto E = circuit.num_edges();
  require_edge_vector(v, E, "voltage vector");
  require_edge_vector(s, E, "source vector");
  const Eigen::VectorXd& r = circuit.resistances();
  const double power = v.dot(v.cwiseQuotient(r));
  if (circuit.num_cycles() == 0) return power;
  const Eigen::MatrixXd M = circuit.current_response();
  return power - 2.0 * s.dot(M * (s + v));
}

IoMap io_map(const Circuit& circuit, const Selectors& sel, double gamma) {
  if (sel.num_edges() != circuit.num_edges())
    fail(Errc::selector_mismatch, "selectors address " + std::to_string(sel.num_edges()) +
                                      " edges; circuit has " + std::to_string(circuit.num_edges()));
  const Eigen::MatrixXd& omega = circuit.projector();
  IoMap out;
  const auto Eo = static_cast<Eigen::Index>(sel.num_outputs());
  const auto Ei = static_cast<Eigen::Index>(sel.num_inputs());
  out.W.resize(Eo, Ei);
  for (Eigen::Index a = 0; a < Eo; ++a)
    for (Eigen::Index b = 0; b < Ei; ++b)
      out.W(a, b) = -gamma * omega(static_cast<Eigen::Index>(sel.output()[static_cast<std::size_t>(a)]),
                                   static_cast<Eigen::Index>(sel.input()[static_cast<std::size_t>(b)]));
  out.rank = numerical_rank(out.W);
  out.dimension_bound = std::min({sel.num_inputs(), sel.num_outputs(), circuit.num_cycles()});
  const Eigen::MatrixXd& A = circuit.cycles().A;
  out.input_cycle_rank = A.rows() == 0 ? 0 : numerical_rank(A * sel.input_matrix());
  out.output_cycle_rank = A.rows() == 0 ? 0 : numerical_rank(A * sel.output_matrix());
  return out;
}

}  // namespace ohmgrad
