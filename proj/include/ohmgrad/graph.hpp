#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include <json.hpp>

namespace ohmgrad {

/// Oriented edge; positive current flows tail -> head.
struct Edge {
  std::size_t tail = 0;
  std::size_t head = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Connected, simple, oriented graph. Edge order is significant: edge index e
/// addresses the e-th entry of every edge-space vector (s, v, i, r).
///
/// Construction validates the invariants and throws ohmgrad::Error on
/// violation, so any CircuitGraph value is known-good.
class CircuitGraph {
 public:
  CircuitGraph(std::size_t num_nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  /// Cycle-space dimension E - N + 1.
  std::size_t num_cycles() const { return edges_.size() + 1 - num_nodes_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  /// Edge indices touching `node`, ascending.
  const std::vector<std::size_t>& incident_edges(std::size_t node) const { return incident_[node]; }
  std::size_t other_end(std::size_t e, std::size_t node) const {
    return edges_[e].tail == node ? edges_[e].head : edges_[e].tail;
  }

  /// Node-edge incidence matrix B (N x E): +1 at the tail, -1 at the head.
  Eigen::MatrixXd incidence() const;

  friend bool operator==(const CircuitGraph& a, const CircuitGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t num_nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
};

/// Component label per node for an arbitrary edge list (no validation beyond
/// index range). Labels are assigned in order of the smallest node of each
/// component, starting at 0.
std::vector<std::size_t> component_labels(std::size_t num_nodes, const std::vector<Edge>& edges);

struct SpanningTree {
  std::size_t root = 0;
  std::vector<std::size_t> tree_edges;  // ascending
  std::vector<std::size_t> chords;      // ascending
  std::vector<std::size_t> parent_node;
  std::vector<std::size_t> parent_edge;  // meaningless for the root
  std::vector<std::size_t> depth;
};

/// Breadth-first spanning tree; neighbours are expanded in ascending edge-index
/// order, which makes the tree (and every cycle matrix built from it)
/// deterministic.
SpanningTree bfs_spanning_tree(const CircuitGraph& graph, std::size_t root = 0);

/// Fundamental cycle matrix A (C x E), one row per chord in ascending chord
/// order. Each row carries +1 on its chord and follows the chord's direction
/// around the closing tree path.
struct CycleMatrix {
  Eigen::MatrixXd A;
  std::vector<std::size_t> tree_edges;
  std::vector<std::size_t> chords;

  std::size_t num_cycles() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t num_edges() const { return static_cast<std::size_t>(A.cols()); }
};

CycleMatrix fundamental_cycle_matrix(const CircuitGraph& graph, std::size_t root = 0);

/// Input/output edge index sets and their column-selector matrices
/// P_i (E x E_i) and P_o (E x E_o).
class Selectors {
 public:
  Selectors(std::size_t num_edges, std::vector<std::size_t> input, std::vector<std::size_t> output);

  std::size_t num_edges() const { return num_edges_; }
  const std::vector<std::size_t>& input() const { return input_; }
  const std::vector<std::size_t>& output() const { return output_; }
  std::size_t num_inputs() const { return input_.size(); }
  std::size_t num_outputs() const { return output_.size(); }

  Eigen::MatrixXd input_matrix() const;
  Eigen::MatrixXd output_matrix() const;

  /// P_i x
  Eigen::VectorXd embed_input(const Eigen::VectorXd& x) const;
  /// P_o y
  Eigen::VectorXd embed_output(const Eigen::VectorXd& y) const;
  /// P_o^T v, in declared output order.
  Eigen::VectorXd read_output(const Eigen::VectorXd& v) const;

 private:
  std::size_t num_edges_;
  std::vector<std::size_t> input_;
  std::vector<std::size_t> output_;
};

Selectors make_selectors(const CircuitGraph& graph, std::vector<std::size_t> input,
                         std::vector<std::size_t> output);

/// {"nodes": N, "edges": [[tail, head], ...]}
nlohmann::json graph_to_json(const CircuitGraph& graph);
CircuitGraph graph_from_json(const nlohmann::json& j);

/// Numerical rank from singular values relative to the largest one.
std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

}  // namespace ohmgrad
