#include "ohmgrad/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "ohmgrad/error.hpp"

namespace ohmgrad {

CircuitGraph grid_graph(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) fail(Errc::invalid_argument, "grid dimensions must be >= 1");
  std::vector<Edge> edges;
  edges.reserve(rows * (cols - 1) + cols * (rows - 1));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c + 1 < cols; ++c) edges.push_back({r * cols + c, r * cols + c + 1});
  for (std::size_t r = 0; r + 1 < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) edges.push_back({r * cols + c, (r + 1) * cols + c});
  return CircuitGraph(rows * cols, std::move(edges));
}

WireSegment WireSegment::from_center(Point center, double angle, double length) {
  const double dx = 0.5 * length * std::cos(angle);
  const double dy = 0.5 * length * std::sin(angle);
  return {{center.x - dx, center.y - dy}, {center.x + dx, center.y + dy}, angle, length};
}

namespace {

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

}  // namespace

std::optional<Point> segments_intersect(const WireSegment& a, const WireSegment& b) {
  const double rx = a.b.x - a.a.x, ry = a.b.y - a.a.y;
  const double sx = b.b.x - b.a.x, sy = b.b.y - b.a.y;
  const double qpx = b.a.x - a.a.x, qpy = b.a.y - a.a.y;
  const double denom = cross(rx, ry, sx, sy);
  const double scale = std::hypot(rx, ry) * std::hypot(sx, sy);
  if (scale == 0.0 || std::abs(denom) <= 1e-14 * scale) return std::nullopt;
  const double t = cross(qpx, qpy, sx, sy) / denom;
  const double u = cross(qpx, qpy, rx, ry) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  // Average both parametrizations so that swapping the arguments gives the
  // same bits.
  const Point pa{a.a.x + t * rx, a.a.y + t * ry};
  const Point pb{b.a.x + u * sx, b.a.y + u * sy};
  return Point{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
}

NanowireNetwork generate_nanowire_network(std::size_t n, double l, std::uint64_t seed) {
  if (n < 2) fail(Errc::invalid_argument, "nanowire count must be >= 2");
  if (!(l > 0.0) || !std::isfinite(l)) fail(Errc::invalid_argument, "nanowire length must be positive");

  Rng rng(seed);
  std::vector<WireSegment> segs;
  segs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double cx = rng.uniform();
    const double cy = rng.uniform();
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    segs.push_back(WireSegment::from_center({cx, cy}, angle, l));
  }

  // Broad phase: bucket bounding boxes into a uniform grid of cell size ~l
  // over the reachable region [-l/2, 1 + l/2]^2.
  const double lo = -0.5 * l;
  const double span = 1.0 + l;
  const auto cells = static_cast<std::size_t>(std::clamp(std::floor(span / l), 1.0, 256.0));
  const double cell = span / static_cast<double>(cells);
  auto cell_of = [&](double x) {
    const auto c = static_cast<long>(std::floor((x - lo) / cell));
    return static_cast<std::size_t>(std::clamp(c, 0L, static_cast<long>(cells) - 1));
  };
  std::vector<std::vector<std::size_t>> bucket(cells * cells);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = segs[k];
    const std::size_t x0 = cell_of(std::min(s.a.x, s.b.x)), x1 = cell_of(std::max(s.a.x, s.b.x));
    const std::size_t y0 = cell_of(std::min(s.a.y, s.b.y)), y1 = cell_of(std::max(s.a.y, s.b.y));
    for (std::size_t cx = x0; cx <= x1; ++cx)
      for (std::size_t cy = y0; cy <= y1; ++cy) bucket[cy * cells + cx].push_back(k);
  }
  std::set<std::pair<std::size_t, std::size_t>> candidates;
  for (const auto& b : bucket)
    for (std::size_t p = 0; p < b.size(); ++p)
      for (std::size_t q = p + 1; q < b.size(); ++q) candidates.emplace(std::min(b[p], b[q]), std::max(b[p], b[q]));

  std::vector<Crossing> crossings;
  std::vector<Edge> all_edges;
  for (const auto& [i, j] : candidates) {
    if (auto pt = segments_intersect(segs[i], segs[j])) {
      crossings.push_back({i, j, *pt});
      all_edges.push_back({i, j});
    }
  }

  const std::vector<std::size_t> label = component_labels(n, all_edges);
  std::vector<std::size_t> size(n, 0);
  for (const std::size_t c : label) ++size[c];
  // Labels follow the smallest member, so max_element picks the tie winner.
  const auto best = static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());
  if (size[best] < 2) {
    std::ostringstream msg;
    msg << "largest nanowire cluster has " << size[best] << " wire(s) for n = " << n << ", l = " << l
        << "; increase n or l";
    fail(Errc::sparse_deposition, msg.str());
  }

  std::vector<std::size_t> wires;
  std::vector<std::size_t> node_of(n, 0);
  for (std::size_t k = 0; k < n; ++k)
    if (label[k] == best) {
      node_of[k] = wires.size();
      wires.push_back(k);
    }
  std::vector<Edge> edges;
  for (const auto& c : crossings)
    if (label[c.a] == best) edges.push_back({node_of[c.a], node_of[c.b]});

  return NanowireNetwork{seed, l, std::move(segs), std::move(crossings), std::move(wires),
                         CircuitGraph(size[best], std::move(edges))};
}

std::vector<std::size_t> largest_chord_component(const CircuitGraph& graph) {
  const SpanningTree tree = bfs_spanning_tree(graph);
  std::vector<Edge> chord_edges;
  for (const std::size_t e : tree.chords) chord_edges.push_back(graph.edge(e));
  const std::vector<std::size_t> label = component_labels(graph.num_nodes(), chord_edges);

  // Group chords by component, keyed by the position of the component's first chord.
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> group_of(graph.num_nodes(), SIZE_MAX);
  for (std::size_t k = 0; k < tree.chords.size(); ++k) {
    const std::size_t c = label[chord_edges[k].tail];
    if (group_of[c] == SIZE_MAX) {
      group_of[c] = groups.size();
      groups.emplace_back();
    }
    groups[group_of[c]].push_back(tree.chords[k]);
  }
  std::size_t best = SIZE_MAX;
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (best == SIZE_MAX || groups[g].size() > groups[best].size()) best = g;
  return best == SIZE_MAX ? std::vector<std::size_t>{} : groups[best];
}

Selectors choose_io_edges(const CircuitGraph& graph, std::size_t n_in, std::size_t n_out, std::uint64_t seed) {
  const std::size_t need = n_in + n_out;
  if (need == 0) fail(Errc::invalid_argument, "need at least one input or output edge");
  std::vector<std::size_t> pool = largest_chord_component(graph);
  if (pool.size() < need) {
    std::ostringstream msg;
    msg << "largest chord component has " << pool.size() << " edge(s); " << need << " requested";
    fail(Errc::insufficient_chords, msg.str());
  }
  Rng rng(seed);
  for (std::size_t k = 0; k < need; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.index(pool.size() - k));
    std::swap(pool[k], pool[j]);
  }
  std::vector<std::size_t> in(pool.begin(), pool.begin() + static_cast<long>(n_in));
  std::vector<std::size_t> out(pool.begin() + static_cast<long>(n_in), pool.begin() + static_cast<long>(need));
  return Selectors(graph.num_edges(), std::move(in), std::move(out));
}

CircuitGraph random_connected_graph(std::size_t nodes, std::size_t extra_edges, Rng& rng) {
  if (nodes == 0) fail(Errc::invalid_argument, "graph needs at least one node");
  std::vector<Edge> edges;
  std::set<std::pair<std::size_t, std::size_t>> used;
  auto add = [&](std::size_t a, std::size_t b) {
    used.emplace(std::min(a, b), std::max(a, b));
    edges.push_back(rng.uniform() < 0.5 ? Edge{a, b} : Edge{b, a});
  };
  for (std::size_t k = 1; k < nodes; ++k) add(static_cast<std::size_t>(rng.index(k)), k);
  const std::size_t max_pairs = nodes * (nodes - 1) / 2;
  const std::size_t extra = std::min(extra_edges, max_pairs - used.size());
  while (edges.size() < nodes - 1 + extra) {
    const auto a = static_cast<std::size_t>(rng.index(nodes));
    const auto b = static_cast<std::size_t>(rng.index(nodes));
    if (a == b || used.count({std::min(a, b), std::max(a, b)})) continue;
    add(a, b);
  }
  for (std::size_t k = edges.size(); k > 1; --k) std::swap(edges[k - 1], edges[static_cast<std::size_t>(rng.index(k))]);
  return CircuitGraph(nodes, std::move(edges));
}

nlohmann::json network_to_json(const NanowireNetwork& net, const Selectors* sel) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : net.segments) segs.push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  nlohmann::json j;
  j["segments"] = std::move(segs);
  j["graph"] = graph_to_json(net.graph);
  j["wires"] = net.wires;
  if (sel) j["selectors"] = {{"input", sel->input()}, {"output", sel->output()}};
  j["seed"] = net.seed;
  return j;
}

}  // namespace ohmgrad
