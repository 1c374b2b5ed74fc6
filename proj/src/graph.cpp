#include "ohmgrad/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <utility>

#include "ohmgrad/error.hpp"

namespace ohmgrad {

namespace {

std::string edge_str(std::size_t e, const Edge& edge) {
  return "edge " + std::to_string(e) + " (" + std::to_string(edge.tail) + "->" +
         std::to_string(edge.head) + ")";
}

}  // namespace

CircuitGraph::CircuitGraph(std::size_t num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)), incident_(num_nodes) {
  if (num_nodes_ == 0) fail(Errc::invalid_graph, "graph must have at least one node");

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.tail >= num_nodes_ || edge.head >= num_nodes_)
      fail(Errc::invalid_graph, edge_str(e, edge) + " references a node outside [0, " +
                                    std::to_string(num_nodes_) + ")");
    if (edge.tail == edge.head) fail(Errc::invalid_graph, edge_str(e, edge) + " is a self-loop");
    const auto key = std::minmax(edge.tail, edge.head);
    if (!seen.insert(key).second)
      fail(Errc::invalid_graph, edge_str(e, edge) + " is parallel to an earlier edge");
    incident_[edge.tail].push_back(e);
    incident_[edge.head].push_back(e);
  }

  const auto labels = component_labels(num_nodes_, edges_);
  const auto components = *std::max_element(labels.begin(), labels.end()) + 1;
  if (components != 1)
    fail(Errc::disconnected_graph,
         "graph has " + std::to_string(components) + " connected components; expected 1");
}

Eigen::MatrixXd CircuitGraph::incidence() const {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_nodes_),
                                            static_cast<Eigen::Index>(edges_.size()));
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    B(static_cast<Eigen::Index>(edges_[e].tail), static_cast<Eigen::Index>(e)) = 1.0;
    B(static_cast<Eigen::Index>(edges_[e].head), static_cast<Eigen::Index>(e)) = -1.0;
  }
  return B;
}

std::vector<std::size_t> component_labels(std::size_t num_nodes, const std::vector<Edge>& edges) {
  // Union-find, then relabel by smallest member.
  std::vector<std::size_t> parent(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Edge& e : edges) {
    if (e.tail >= num_nodes || e.head >= num_nodes)
      fail(Errc::index_out_of_range, "edge endpoint outside node range");
    const auto a = find(e.tail);
    const auto b = find(e.head);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> relabel(num_nodes, unset);
  std::vector<std::size_t> labels(num_nodes);
  std::size_t next = 0;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    const auto root = find(i);
    if (relabel[root] == unset) relabel[root] = next++;
    labels[i] = relabel[root];
  }
  return labels;
}

SpanningTree bfs_spanning_tree(const CircuitGraph& graph, std::size_t root) {
  const std::size_t n = graph.num_nodes();
  if (root >= n) fail(Errc::index_out_of_range, "spanning-tree root outside node range");

  SpanningTree tree;
  tree.root = root;
  tree.parent_node.assign(n, root);
  tree.parent_edge.assign(n, 0);
  tree.depth.assign(n, 0);
  std::vector<bool> visited(n, false);
  std::vector<bool> in_tree(graph.num_edges(), false);

  std::deque<std::size_t> queue{root};
  visited[root] = true;
  while (!queue.empty()) {
    const auto node = queue.front();
    queue.pop_front();
    for (const auto e : graph.incident_edges(node)) {
      const auto next = graph.other_end(e, node);
      if (visited[next]) continue;
      visited[next] = true;
      in_tree[e] = true;
      tree.parent_node[next] = node;
      tree.parent_edge[next] = e;
      tree.depth[next] = tree.depth[node] + 1;
      queue.push_back(next);
    }
  }
  for (std::size_t e = 0; e < graph.num_edges(); ++e)
    (in_tree[e] ? tree.tree_edges : tree.chords).push_back(e);
  return tree;
}

CycleMatrix fundamental_cycle_matrix(const CircuitGraph& graph, std::size_t root) {
  const SpanningTree tree = bfs_spanning_tree(graph, root);
  const auto E = static_cast<Eigen::Index>(graph.num_edges());
  const auto C = static_cast<Eigen::Index>(tree.chords.size());

  CycleMatrix cm;
  cm.A = Eigen::MatrixXd::Zero(C, E);
  cm.tree_edges = tree.tree_edges;
  cm.chords = tree.chords;

  // Sign of traversing tree edge `e` from node `from` to its other end.
  auto sign_from = [&](std::size_t e, std::size_t from) {
    return graph.edge(e).tail == from ? 1.0 : -1.0;
  };

  for (Eigen::Index row = 0; row < C; ++row) {
    const auto chord = tree.chords[static_cast<std::size_t>(row)];
    cm.A(row, static_cast<Eigen::Index>(chord)) = 1.0;
    // The cycle runs tail -> head along the chord, then head -> ... -> tail
    // through the tree: up from the head to the common ancestor, then down
    // to the tail.
    std::size_t up = graph.edge(chord).head;
    std::size_t down = graph.edge(chord).tail;
    while (up != down) {
      if (tree.depth[up] >= tree.depth[down]) {
        const auto e = tree.parent_edge[up];
        cm.A(row, static_cast<Eigen::Index>(e)) += sign_from(e, up);
        up = tree.parent_node[up];
      } else {
        const auto e = tree.parent_edge[down];
        // Traversed parent -> child on the way down.
        cm.A(row, static_cast<Eigen::Index>(e)) += sign_from(e, tree.parent_node[down]);
        down = tree.parent_node[down];
      }
    }
  }
  return cm;
}

Selectors::Selectors(std::size_t num_edges, std::vector<std::size_t> input,
                     std::vector<std::size_t> output)
    : num_edges_(num_edges), input_(std::move(input)), output_(std::move(output)) {
  auto check = [&](const std::vector<std::size_t>& idx, const char* which) {
    std::set<std::size_t> seen;
    for (const auto e : idx) {
      if (e >= num_edges_)
        fail(Errc::index_out_of_range, std::string(which) + " edge " + std::to_string(e) +
                                           " outside [0, " + std::to_string(num_edges_) + ")");
      if (!seen.insert(e).second)
        fail(Errc::duplicate_index,
             std::string(which) + " edge " + std::to_string(e) + " listed more than once");
    }
  };
  check(input_, "input");
  check(output_, "output");
  for (const auto e : input_)
    if (std::find(output_.begin(), output_.end(), e) != output_.end())
      fail(Errc::selector_overlap, "edge " + std::to_string(e) + " is both input and output");
}

Eigen::MatrixXd Selectors::input_matrix() const {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_edges_),
                                            static_cast<Eigen::Index>(input_.size()));
  for (std::size_t k = 0; k < input_.size(); ++k)
    P(static_cast<Eigen::Index>(input_[k]), static_cast<Eigen::Index>(k)) = 1.0;
  return P;
}

Eigen::MatrixXd Selectors::output_matrix() const {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_edges_),
                                            static_cast<Eigen::Index>(output_.size()));
  for (std::size_t k = 0; k < output_.size(); ++k)
    P(static_cast<Eigen::Index>(output_[k]), static_cast<Eigen::Index>(k)) = 1.0;
  return P;
}

Eigen::VectorXd Selectors::embed_input(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_.size())
    fail(Errc::dimension_mismatch, "input vector has " + std::to_string(x.size()) +
                                       " entries; selector has " + std::to_string(input_.size()));
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_edges_));
  for (std::size_t k = 0; k < input_.size(); ++k)
    s(static_cast<Eigen::Index>(input_[k])) = x(static_cast<Eigen::Index>(k));
  return s;
}

Eigen::VectorXd Selectors::embed_output(const Eigen::VectorXd& y) const {
  if (static_cast<std::size_t>(y.size()) != output_.size())
    fail(Errc::dimension_mismatch, "output vector has " + std::to_string(y.size()) +
                                       " entries; selector has " + std::to_string(output_.size()));
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_edges_));
  for (std::size_t k = 0; k < output_.size(); ++k)
    s(static_cast<Eigen::Index>(output_[k])) = y(static_cast<Eigen::Index>(k));
  return s;
}

Eigen::VectorXd Selectors::read_output(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != num_edges_)
    fail(Errc::dimension_mismatch, "edge vector has " + std::to_string(v.size()) +
                                       " entries; selector expects " + std::to_string(num_edges_));
  Eigen::VectorXd y(static_cast<Eigen::Index>(output_.size()));
  for (std::size_t k = 0; k < output_.size(); ++k)
    y(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(output_[k]));
  return y;
}

Selectors make_selectors(const CircuitGraph& graph, std::vector<std::size_t> input,
                         std::vector<std::size_t> output) {
  return Selectors(graph.num_edges(), std::move(input), std::move(output));
}

nlohmann::json graph_to_json(const CircuitGraph& graph) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.tail, e.head});
  return {{"nodes", graph.num_nodes()}, {"edges", std::move(edges)}};
}

CircuitGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    fail(Errc::schema_error, "graph JSON must be an object with \"nodes\" and \"edges\"");
  if (!j["nodes"].is_number_unsigned())
    fail(Errc::schema_error, "\"nodes\" must be a non-negative integer");
  if (!j["edges"].is_array()) fail(Errc::schema_error, "\"edges\" must be an array");
  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
      fail(Errc::schema_error, "each edge must be a [tail, head] pair of node indices");
    edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  }
  return CircuitGraph(j["nodes"].get<std::size_t>(), std::move(edges));
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > rel_tol * sv(0)) ++rank;
  return rank;
}

}  // namespace ohmgrad
