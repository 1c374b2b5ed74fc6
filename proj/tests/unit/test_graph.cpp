#include "helpers.hpp"
#include "ohmgrad/topology.hpp"

using namespace ohmgrad;
using testing::code_of;

TEST_CASE("triangle cycle matrix") {
  const CycleMatrix cm = fundamental_cycle_matrix(testing::triangle());
  REQUIRE(cm.A.rows() == 1);
  CHECK(cm.A.row(0) == Eigen::RowVector3d(1, 1, 1));
  CHECK(cm.chords == std::vector<std::size_t>{1});
  CHECK(cm.tree_edges == std::vector<std::size_t>({0, 2}));
}

TEST_CASE("tree has an empty cycle matrix") {
  const CycleMatrix cm = fundamental_cycle_matrix(testing::path3());
  CHECK(cm.A.rows() == 0);
  CHECK(cm.A.cols() == 2);
}

TEST_CASE("3x3 grid cycle matrix closes") {
  const CircuitGraph g = grid_graph(3, 3);
  const CycleMatrix cm = fundamental_cycle_matrix(g);
  CHECK(cm.A.rows() == 4);
  CHECK(testing::max_abs(g.incidence() * cm.A.transpose()) == 0.0);
  CHECK(numerical_rank(cm.A) == 4);
  // Chords of the BFS tree from node 0.
  CHECK(cm.chords == std::vector<std::size_t>({2, 3, 4, 5}));
}

TEST_CASE("a reversed edge flips its sign in the cycle row") {
  const CircuitGraph g(3, {{0, 1}, {1, 2}, {0, 2}});
  const CycleMatrix cm = fundamental_cycle_matrix(g);
  // chord 1->2 closes via 2->0 (edge 2 traversed backwards) then 0->1
  CHECK(cm.A.row(0) == Eigen::RowVector3d(1, 1, -1));
}

TEST_CASE("graph validation") {
  CHECK(code_of([] { CircuitGraph(2, {{0, 0}, {0, 1}}); }) == Errc::invalid_graph);
  CHECK(code_of([] { CircuitGraph(4, {{0, 1}, {2, 3}}); }) == Errc::disconnected_graph);
  CHECK(code_of([] { CircuitGraph(2, {{0, 1}, {1, 0}}); }) == Errc::invalid_graph);
  CHECK(code_of([] { CircuitGraph(2, {{0, 5}}); }) == Errc::invalid_graph);
  CHECK_NOTHROW(CircuitGraph(1, {}));
}

TEST_CASE("selectors") {
  const CircuitGraph g = testing::triangle();
  const Selectors s = make_selectors(g, {0}, {2});
  CHECK(s.input_matrix() == Eigen::Vector3d(1, 0, 0));
  CHECK(s.output_matrix() == Eigen::Vector3d(0, 0, 1));
  CHECK(s.input_matrix().transpose() * s.input_matrix() == Eigen::MatrixXd::Identity(1, 1));

  CHECK(code_of([&] { make_selectors(g, {0}, {0}); }) == Errc::selector_overlap);
  CHECK(code_of([&] { make_selectors(g, {5}, {1}); }) == Errc::index_out_of_range);
  CHECK(code_of([&] { make_selectors(g, {1, 1}, {0}); }) == Errc::duplicate_index);
}

TEST_CASE("readout keeps declared output order") {
  const Selectors s(5, {1}, {4, 0, 2});
  const Eigen::VectorXd v = testing::vec({10, 11, 12, 13, 14});
  CHECK(s.read_output(v) == Eigen::Vector3d(14, 10, 12));
  CHECK(s.embed_output(Eigen::Vector3d(1, 2, 3)) == testing::vec({2, 0, 3, 0, 1}));
  CHECK(s.read_output(s.embed_output(Eigen::Vector3d(7, 8, 9))) == Eigen::Vector3d(7, 8, 9));
}

TEST_CASE("random connected graphs: rank, closure, chord columns") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const auto N = static_cast<std::size_t>(2 + rng.index(19));
    const CircuitGraph g = random_connected_graph(N, rng.index(2 * N), rng);
    const CycleMatrix cm = fundamental_cycle_matrix(g);
    REQUIRE(cm.num_cycles() == g.num_edges() - g.num_nodes() + 1);
    CHECK(numerical_rank(cm.A) == cm.num_cycles());
    CHECK(testing::max_abs(g.incidence() * cm.A.transpose()) == 0.0);
    for (std::size_t k = 0; k < cm.chords.size(); ++k) {
      const auto col = cm.A.col(static_cast<Eigen::Index>(cm.chords[k]));
      CHECK(col.cwiseAbs().sum() == 1.0);
      CHECK(col(static_cast<Eigen::Index>(k)) == 1.0);
    }
    if (cm.num_cycles() > 0)
      for (const std::size_t e : cm.tree_edges)
        CHECK(cm.A.col(static_cast<Eigen::Index>(e)).cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("graph json round trip and schema errors") {
  const CircuitGraph g = grid_graph(2, 3);
  CHECK(graph_from_json(graph_to_json(g)) == g);
  CHECK(code_of([] { graph_from_json(nlohmann::json{{"nodes", 2}}); }) == Errc::schema_error);
  CHECK(code_of([] { graph_from_json(nlohmann::json{{"nodes", 2}, {"edges", {{0}}}}); }) == Errc::schema_error);
}

TEST_CASE("numerical rank") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  CHECK(numerical_rank(m) == 2);
  CHECK(numerical_rank(Eigen::MatrixXd::Zero(2, 2)) == 0);
}
