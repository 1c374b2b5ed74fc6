#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ohmgrad/graph.hpp"
#include "ohmgrad/rng.hpp"

namespace ohmgrad {

/// rows x cols lattice, node id = row * cols + col. Edges: every horizontal
/// edge (col -> col+1) row by row, then every vertical edge (row -> row+1)
/// row by row.
CircuitGraph grid_graph(std::size_t rows, std::size_t cols);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct WireSegment {
  Point a;
  Point b;
  double angle = 0.0;   // radians in [0, 2 pi)
  double length = 0.0;

  static WireSegment from_center(Point center, double angle, double length);
};

/// Crossing point of two closed segments, found from the parametric form
/// a.a + t (a.b - a.a) = b.a + u (b.b - b.a) with (t, u) in [0,1]^2.
/// Parallel and collinear pairs give no intersection. The result is symmetric
/// in its arguments bit for bit.
std::optional<Point> segments_intersect(const WireSegment& a, const WireSegment& b);

struct Crossing {
  std::size_t a = 0;  // wire index, a < b
  std::size_t b = 0;
  Point at;
};

struct NanowireNetwork {
  std::uint64_t seed = 0;
  double length = 0.0;
  std::vector<WireSegment> segments;  // every deposited wire
  std::vector<Crossing> crossings;    // all crossings, sorted by (a, b)
  std::vector<std::size_t> wires;     // wire index of each graph node (ascending)
  CircuitGraph graph;                 // largest component; one node per wire, one edge per crossing
};

/// Deposit n wires of length l: centers uniform in the unit square, angles
/// uniform in [0, 2 pi). Draw order per wire is center x, center y, angle.
/// Wires may overhang the square. Edges are oriented from the lower to the
/// higher wire index. The graph keeps the largest connected component (ties go
/// to the component holding the lowest wire index); fewer than 2 wires there
/// raises Errc::sparse_deposition.
NanowireNetwork generate_nanowire_network(std::size_t n, double l, std::uint64_t seed);

/// Pick n_in + n_out distinct edges from the largest connected component of
/// the chord subgraph of the BFS spanning tree. Draws come from a seeded
/// partial Fisher-Yates shuffle of that component's edges (ascending); the
/// first n_in become inputs.
Selectors choose_io_edges(const CircuitGraph& graph, std::size_t n_in, std::size_t n_out, std::uint64_t seed);

/// Edges of the largest connected component of the chord subgraph, ascending.
/// Ties on edge count go to the component holding the lowest chord index.
std::vector<std::size_t> largest_chord_component(const CircuitGraph& graph);

/// Random connected graph: a random tree on `nodes` nodes plus up to
/// `extra_edges` additional non-parallel edges, with random orientations and a
/// shuffled edge order.
CircuitGraph random_connected_graph(std::size_t nodes, std::size_t extra_edges, Rng& rng);

/// {"segments": [[x1,y1,x2,y2],...], "graph": ..., "selectors": {...}, "seed": s}
nlohmann::json network_to_json(const NanowireNetwork& net, const Selectors* sel = nullptr);

}  // namespace ohmgrad
