#include "ohmgrad/verify.hpp"

#include <algorithm>
#include <cmath>

#include "ohmgrad/error.hpp"
#include "ohmgrad/gradients.hpp"
#include "ohmgrad/rng.hpp"
#include "ohmgrad/topology.hpp"

namespace ohmgrad {

Eigen::VectorXd lagrangian_solve(const CycleMatrix& cycles, const Eigen::VectorXd& r, const Eigen::VectorXd& s) {
  const auto E = static_cast<Eigen::Index>(cycles.num_edges());
  const auto C = static_cast<Eigen::Index>(cycles.num_cycles());
  require_edge_vector(r, cycles.num_edges(), "resistance vector");
  require_edge_vector(s, cycles.num_edges(), "source vector");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(E + C, E + C);
  K.topLeftCorner(E, E) = (2.0 * r.cwiseInverse()).asDiagonal();
  K.topRightCorner(E, C) = cycles.A.transpose();
  K.bottomLeftCorner(C, E) = cycles.A;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(E + C);
  rhs.tail(C) = -(cycles.A * s);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) fail(Errc::numerical, "KKT system is singular");
  return lu.solve(rhs).head(E);
}

Eigen::VectorXd finite_difference_gradient(const Circuit& circuit,
                                           const std::function<double(const Circuit&)>& loss, double rel_step) {
  const Eigen::VectorXd& r = circuit.resistances();
  const ResistanceBounds open{1e-300, 1e300};
  Eigen::VectorXd g(r.size());
  for (Eigen::Index e = 0; e < r.size(); ++e) {
    const double h = rel_step * r(e);
    Eigen::VectorXd rp = r, rm = r;
    rp(e) += h;
    rm(e) -= h;
    const Circuit cp(circuit.graph(), circuit.cycles(), rp, open);
    const Circuit cm(circuit.graph(), circuit.cycles(), rm, open);
    g(e) = (loss(cp) - loss(cm)) / (rp(e) - rm(e));
  }
  return g;
}

double ls_loss(const Circuit& circuit, const Selectors& sel, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
               double gamma) {
  const SteadyState st = solve_voltage_mode(circuit, gamma * sel.embed_input(x));
  return least_squares_loss(sel.read_output(st.v), y);
}

namespace {

Eigen::VectorXd normal_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.normal();
  return v;
}

Eigen::VectorXd log_uniform_r(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd r(n);
  for (Eigen::Index k = 0; k < n; ++k) r(k) = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
  return r;
}

double rel(double num, double den) { return num / std::max(1.0, den); }

}  // namespace

std::vector<InvariantRow> verify_invariants(const VerifyOptions& opts) {
  if (opts.max_nodes < 3) fail(Errc::invalid_argument, "max_nodes must be >= 3");
  std::vector<InvariantRow> rows = {
      {"cycle_closure_BAt", 0, 1e-12, 0},     {"cycle_rank_deficit", 0, 0, 0},
      {"projector_consistency", 0, 1e-10, 0}, {"projector_idempotence", 0, 1e-9, 0},
      {"projector_adjoint", 0, 1e-9, 0},      {"projector_rank_deficit", 0, 0, 0},
      {"kvl_residual", 0, 1e-9, 0},           {"lagrangian_vs_projector", 0, 1e-9, 0},
      {"adjoint_modes", 0, 1e-9, 0},          {"basis_invariance", 0, 1e-9, 0},
      {"output_norm_bound_ratio", 0, 1.0, 0}, {"io_rank_bound_excess", 0, 0, 0},
      {"analytical_vs_fd", 0, 1e-5, 0},
  };
  auto note = [&](std::size_t k, double value) {
    rows[k].max_residual = std::max(rows[k].max_residual, value);
    ++rows[k].checks;
  };

  Rng rng(opts.seed);
  for (std::size_t gi = 0; gi < opts.graphs; ++gi) {
    const auto N = static_cast<std::size_t>(3 + rng.index(opts.max_nodes - 2));
    const auto extra = static_cast<std::size_t>(1 + rng.index(N));
    const CircuitGraph g = random_connected_graph(N, extra, rng);
    const auto E = static_cast<Eigen::Index>(g.num_edges());
    const auto C = static_cast<std::size_t>(g.num_cycles());

    const CycleMatrix cm = fundamental_cycle_matrix(g);
    note(0, (g.incidence() * cm.A.transpose()).cwiseAbs().maxCoeff());
    note(1, static_cast<double>(C - std::min(C, numerical_rank(cm.A))));

    Circuit c(g, cm, log_uniform_r(rng, E));
    const ProjectorResiduals res = c.residuals();
    note(2, res.consistency);
    note(3, res.idempotence);
    note(4, res.adjoint);
    const std::size_t rank = numerical_rank(c.projector(), 1e-9);
    note(5, static_cast<double>(rank > C ? rank - C : C - rank));

    const Eigen::VectorXd s = normal_vector(rng, E);
    const SteadyState st = solve_voltage_mode(c, s);
    note(6, rel(st.kvl_residual, s.norm()));
    note(7, rel((lagrangian_solve(cm, c.resistances(), s) - st.v).norm(), st.v.norm()));
    const Eigen::VectorXd u = normal_vector(rng, E);
    const Eigen::VectorXd adj = apply_adjoint(c, u);
    note(8, rel((adj - apply_adjoint(c, u, AdjointMode::voltage_mode)).norm(), adj.norm()));
    const CycleMatrix other = fundamental_cycle_matrix(g, N - 1);
    note(9, rel((assemble_projector(other, c.resistances()) - c.projector()).norm(), c.projector().norm()));

    // Random disjoint selectors.
    std::vector<std::size_t> perm(static_cast<std::size_t>(E));
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[static_cast<std::size_t>(rng.index(k))]);
    const auto n_in = static_cast<std::size_t>(1 + rng.index(perm.size() - 1));
    const auto n_out = static_cast<std::size_t>(1 + rng.index(perm.size() - n_in));
    const Selectors sel(perm.size(), {perm.begin(), perm.begin() + static_cast<long>(n_in)},
                        {perm.begin() + static_cast<long>(n_in), perm.begin() + static_cast<long>(n_in + n_out)});
    const Eigen::VectorXd x = normal_vector(rng, static_cast<Eigen::Index>(n_in));
    const Eigen::VectorXd y = normal_vector(rng, static_cast<Eigen::Index>(n_out));
    const SteadyState in_st = solve_voltage_mode(c, sel.embed_input(x));
    const double bound = x.norm() * std::sqrt(c.resistances().maxCoeff() / c.resistances().minCoeff());
    note(10, bound > 0.0 ? sel.read_output(in_st.v).norm() / bound : 0.0);
    const IoMap io = io_map(c, sel);
    note(11, static_cast<double>(io.rank - std::min({io.rank, io.dimension_bound, io.cycle_bound()})));

    const Eigen::VectorXd ga = analytical_gradient_ls(c, sel, x, y).g;
    const Eigen::VectorXd gf =
        finite_difference_gradient(c, [&](const Circuit& cc) { return ls_loss(cc, sel, x, y, 1.0); });
    const double scale = std::max(ga.norm(), gf.norm());
    note(12, scale > 1e-12 ? (ga - gf).norm() / scale : (ga - gf).norm());
  }
  return rows;
}

}  // namespace ohmgrad
