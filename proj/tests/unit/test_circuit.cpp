#include "helpers.hpp"
#include "ohmgrad/circuit.hpp"
#include "ohmgrad/topology.hpp"
#include "ohmgrad/verify.hpp"

using namespace ohmgrad;
using testing::code_of;
using testing::vec;

namespace {

// Node-potential oracle: i = R^-1 (B^T phi - s), B i = 0, node 0 grounded.
Eigen::VectorXd laplacian_voltages(const CircuitGraph& g, const Eigen::VectorXd& r, const Eigen::VectorXd& s) {
  const Eigen::MatrixXd B = g.incidence();
  const Eigen::MatrixXd G = r.cwiseInverse().asDiagonal();
  const Eigen::Index n = B.rows() - 1;
  const Eigen::MatrixXd Br = B.bottomRows(n);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(B.rows());
  if (n > 0) phi.tail(n) = (Br * G * Br.transpose()).ldlt().solve(Br * G * s);
  return B.transpose() * phi - s;
}

}  // namespace

TEST_CASE("triangle projector closed forms") {
  const Circuit unit(testing::triangle(), vec({1, 1, 1}));
  CHECK(testing::max_abs(unit.projector() - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0)) < 1e-15);

  const Circuit c(testing::triangle(), vec({1, 2, 3}));
  Eigen::MatrixXd expected(3, 3);
  for (int e = 0; e < 3; ++e) expected.row(e).setConstant((e + 1) / 6.0);
  CHECK(testing::max_abs(c.projector() - expected) < 1e-15);
  CHECK(testing::max_abs(c.projector() * c.projector() - c.projector()) < 1e-15);
}

TEST_CASE("tree projector is zero") {
  const Circuit c(testing::path3(), vec({1, 2}));
  CHECK(c.projector() == Eigen::MatrixXd::Zero(2, 2));
  CHECK(c.current_response() == Eigen::MatrixXd::Zero(2, 2));
  const SteadyState st = solve_voltage_mode(c, vec({1, -1}));
  CHECK(st.v == Eigen::Vector2d::Zero());
}

TEST_CASE("voltage-mode solves on the series loop") {
  const Circuit unit(testing::triangle(), vec({1, 1, 1}));
  const SteadyState a = solve_voltage_mode(unit, vec({1, 0, 0}));
  CHECK(testing::max_abs(a.v - Eigen::Vector3d::Constant(-1.0 / 3.0)) < 1e-15);
  CHECK(testing::max_abs(a.i - Eigen::Vector3d::Constant(-1.0 / 3.0)) < 1e-15);

  const Circuit c(testing::triangle(), vec({1, 2, 3}));
  const SteadyState b = solve_voltage_mode(c, vec({6, 0, 0}));
  CHECK(testing::max_abs(b.v - vec({-1, -2, -3})) < 1e-14);
  CHECK(testing::max_abs(b.i - vec({-1, -1, -1})) < 1e-14);
  CHECK(b.kvl_residual < 1e-14);

  const SteadyState z = solve_voltage_mode(c, Eigen::Vector3d::Zero());
  CHECK(z.v == Eigen::Vector3d::Zero());
  CHECK(z.i == Eigen::Vector3d::Zero());

  CHECK(code_of([&] { solve_voltage_mode(c, vec({1, 2})); }) == Errc::dimension_mismatch);
  CHECK(code_of([&] { solve_voltage_mode(c, vec({1, NAN, 0})); }) == Errc::non_finite);
}

TEST_CASE("projector solve matches the node-potential oracle") {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const CircuitGraph g = random_connected_graph(3 + rng.index(15), 1 + rng.index(12), rng);
    const auto E = static_cast<Eigen::Index>(g.num_edges());
    const Circuit c(g, testing::log_uniform(rng, E));
    const Eigen::VectorXd s = testing::normals(rng, E);
    const SteadyState st = solve_voltage_mode(c, s);
    CHECK((st.v - laplacian_voltages(g, c.resistances(), s)).norm() <= 1e-10 * std::max(1.0, s.norm()));
    CHECK((st.v - c.resistances().cwiseProduct(st.i)).norm() <= 1e-12 * std::max(1.0, st.v.norm()));
  }
}

TEST_CASE("adjoint realizations agree") {
  const Circuit unit(testing::triangle(), vec({1, 1, 1}));
  CHECK(testing::max_abs(apply_adjoint(unit, vec({1, 0, 0})) - Eigen::Vector3d::Constant(-1.0 / 3.0)) < 1e-15);
  CHECK(apply_adjoint(unit, Eigen::Vector3d::Zero()) == Eigen::Vector3d::Zero());

  Rng rng(5);
  const CircuitGraph g = grid_graph(3, 4);
  const auto E = static_cast<Eigen::Index>(g.num_edges());
  for (int t = 0; t < 20; ++t) {
    const Circuit c(g, testing::log_uniform(rng, E));
    const Eigen::VectorXd u = testing::normals(rng, E);
    const Eigen::VectorXd dense = -(c.projector().transpose() * u);
    const Eigen::VectorXd direct = apply_adjoint(c, u);
    const Eigen::VectorXd vm = apply_adjoint(c, u, AdjointMode::voltage_mode);
    CHECK((direct - dense).norm() <= 1e-12 * dense.norm());
    CHECK((vm - direct).norm() <= 1e-9 * direct.norm());
  }
}

TEST_CASE("dissipation energy is minimized by the voltage-mode response") {
  const Circuit unit(testing::triangle(), vec({1, 1, 1}));
  const Eigen::VectorXd s = vec({1, 0, 0});
  const Eigen::VectorXd vstar = solve_voltage_mode(unit, s).v;
  CHECK(vstar.dot(vstar.cwiseQuotient(unit.resistances())) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(testing::max_abs(lagrangian_solve(unit.cycles(), unit.resistances(), s) - vstar) < 1e-14);
  CHECK(dissipation_energy(unit, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()) == 0.0);

  Rng rng(9);
  const CircuitGraph g = grid_graph(3, 3);
  const auto E = static_cast<Eigen::Index>(g.num_edges());
  const Circuit c(g, testing::log_uniform(rng, E));
  const Eigen::VectorXd src = testing::normals(rng, E);
  const Eigen::VectorXd v0 = solve_voltage_mode(c, src).v;
  const double e0 = dissipation_energy(c, v0, src);
  const Eigen::MatrixXd Bt = g.incidence().transpose();
  for (int t = 0; t < 100; ++t) {
    // KVL-feasible perturbation: potential differences lie in the null space of A.
    const Eigen::VectorXd w = Bt * testing::normals(rng, Bt.cols());
    REQUIRE((c.cycles().A * w).norm() < 1e-12);
    CHECK(e0 <= dissipation_energy(c, v0 + 0.1 * w, src) + 1e-12);
  }
}

TEST_CASE("projector is independent of the spanning tree") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const CircuitGraph g = random_connected_graph(4 + rng.index(12), 2 + rng.index(10), rng);
    const Eigen::VectorXd r = testing::log_uniform(rng, static_cast<Eigen::Index>(g.num_edges()));
    const Eigen::MatrixXd a = assemble_projector(fundamental_cycle_matrix(g, 0), r);
    const Eigen::MatrixXd b = assemble_projector(fundamental_cycle_matrix(g, g.num_nodes() - 1), r);
    CHECK((a - b).norm() <= 1e-9 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("projector invariants after resistance updates") {
  Rng rng(8);
  const CircuitGraph g = grid_graph(4, 4);
  const auto E = static_cast<Eigen::Index>(g.num_edges());
  Circuit c(g, Eigen::VectorXd::Ones(E));
  for (int t = 0; t < 10; ++t) {
    c.set_resistances(testing::log_uniform(rng, E));
    const ProjectorResiduals res = c.residuals();
    CHECK(res.consistency <= 1e-10);
    CHECK(res.idempotence <= 1e-9);
    CHECK(res.adjoint <= 1e-9);
    CHECK(numerical_rank(c.projector(), 1e-9) == g.num_cycles());
    CHECK(!c.ill_conditioned());
  }
  CHECK(code_of([&] { c.set_resistances(Eigen::VectorXd::Constant(E, 20.0)); }) == Errc::resistance_out_of_bounds);
  CHECK(code_of([&] { c.set_resistances(Eigen::VectorXd::Constant(E, -1.0)); }) == Errc::nonpositive_resistance);
  CHECK(code_of([&] { assemble_projector(c.cycles(), Eigen::VectorXd::Zero(E)); }) == Errc::nonpositive_resistance);
}

TEST_CASE("verification mode checks every solve") {
  Rng rng(4);
  const CircuitGraph g = grid_graph(3, 3);
  Circuit c(g, testing::log_uniform(rng, 12));
  c.set_verification(true);
  const Selectors sel(12, {2, 3}, {4, 5});
  for (int t = 0; t < 50; ++t) {
    const SteadyState st = solve_voltage_mode(c, sel.embed_input(testing::normals(rng, 2)));
    const double bound = st.s.norm() * std::sqrt(c.resistances().maxCoeff() / c.resistances().minCoeff());
    CHECK(sel.read_output(st.v).norm() <= bound);
  }
}

TEST_CASE("io map and rank bounds") {
  const Circuit unit(testing::triangle(), vec({1, 1, 1}));
  const IoMap io = io_map(unit, make_selectors(unit.graph(), {0}, {2}));
  CHECK(io.W(0, 0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(io.rank == 1);
  CHECK(io.bounds_hold());

  const Circuit tree(testing::path3(), vec({1, 1}));
  CHECK(io_map(tree, Selectors(2, {0}, {1})).W == Eigen::MatrixXd::Zero(1, 1));

  Rng rng(2);
  const CircuitGraph g = grid_graph(3, 3);
  const Circuit c(g, testing::log_uniform(rng, 12));
  const IoMap big = io_map(c, Selectors(12, {0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}), 2.0);
  CHECK(big.dimension_bound == 4);
  CHECK(big.rank <= 4);
  CHECK(big.bounds_hold());
  CHECK(code_of([&] { io_map(c, Selectors(3, {0}, {1})); }) == Errc::selector_mismatch);
}
