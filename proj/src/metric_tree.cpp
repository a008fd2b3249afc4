#include "frechet_tree/metric_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

namespace frechet_tree {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::string edge_label(std::size_t i) { return "edge " + std::to_string(i); }

}  // namespace

MetricTree MetricTree::build(const std::vector<EdgeSpec>& edges) {
  std::vector<std::string> vertices;
  std::set<std::string> seen;
  for (const auto& e : edges) {
    for (const auto* name : {&e.u, &e.v}) {
      if (seen.insert(*name).second) vertices.push_back(*name);
    }
  }
  if (vertices.empty()) {
    throw Error(ErrorCode::Disconnected, "edge list is empty");
  }
  return build(vertices, edges);
}

MetricTree MetricTree::build(const std::vector<std::string>& vertices,
                             const std::vector<EdgeSpec>& edges) {
  if (vertices.empty()) throw Error(ErrorCode::Disconnected, "tree has no vertices");

  MetricTree tree;
  tree.names_ = vertices;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!tree.by_name_.emplace(vertices[i], i).second) {
      throw Error(ErrorCode::DuplicateEdge, "vertex '" + vertices[i] + "' listed twice");
    }
  }

  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i].length) || edges[i].length <= 0.0) {
      throw Error(ErrorCode::NonpositiveLength, edge_label(i));
    }
  }

  DisjointSets sets(vertices.size());
  std::set<std::pair<VertexId, VertexId>> pairs;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto u = tree.find_vertex(edges[i].u);
    const auto v = tree.find_vertex(edges[i].v);
    if (!u) throw Error(ErrorCode::UnknownVertex, edge_label(i) + ": '" + edges[i].u + "'");
    if (!v) throw Error(ErrorCode::UnknownVertex, edge_label(i) + ": '" + edges[i].v + "'");
    if (*u == *v) throw Error(ErrorCode::CycleDetected, edge_label(i) + " is a self-loop");
    if (!pairs.emplace(std::min(*u, *v), std::max(*u, *v)).second) {
      throw Error(ErrorCode::DuplicateEdge, edge_label(i));
    }
    if (!sets.unite(*u, *v)) throw Error(ErrorCode::CycleDetected, edge_label(i));
    tree.edges_.push_back({*u, *v, edges[i].length});
  }
  if (tree.edges_.size() + 1 != vertices.size()) {
    throw Error(ErrorCode::Disconnected,
                std::to_string(vertices.size()) + " vertices but " +
                    std::to_string(tree.edges_.size()) + " edges");
  }
  tree.index();
  return tree;
}

void MetricTree::index() {
  const std::size_t n = names_.size();
  adjacency_.assign(n, {});
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    adjacency_[edges_[e].u].push_back({edges_[e].v, e});
    adjacency_[edges_[e].v].push_back({edges_[e].u, e});
  }

  parent_.assign(n, 0);
  parent_edge_.assign(n, 0);
  depth_.assign(n, 0);
  root_distance_.assign(n, 0.0);
  enter_.assign(n, 0);
  leave_.assign(n, 0);

  // Iterative DFS from vertex 0 with entry/exit times.
  std::size_t clock = 0;
  std::vector<std::pair<VertexId, std::size_t>> stack{{0, 0}};
  enter_[0] = clock++;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next < adjacency_[v].size()) {
      const auto [w, e] = adjacency_[v][next++];
      if (v != 0 && w == parent_[v]) continue;
      parent_[w] = v;
      parent_edge_[w] = e;
      depth_[w] = depth_[v] + 1;
      root_distance_[w] = root_distance_[v] + edges_[e].length;
      enter_[w] = clock++;
      stack.emplace_back(w, 0);
    } else {
      leave_[v] = clock++;
      stack.pop_back();
    }
  }

  std::size_t levels = 1;
  while ((std::size_t{1} << levels) < n) ++levels;
  jump_.assign(levels, parent_);
  for (std::size_t k = 1; k < levels; ++k) {
    for (VertexId v = 0; v < n; ++v) jump_[k][v] = jump_[k - 1][jump_[k - 1][v]];
  }

  // Double sweep: the farthest vertex from any vertex is a diameter endpoint.
  const auto far = static_cast<VertexId>(
      std::max_element(root_distance_.begin(), root_distance_.end()) - root_distance_.begin());
  diameter_ = 0.0;
  for (VertexId v = 0; v < n; ++v) diameter_ = std::max(diameter_, vertex_distance(far, v));
}

std::optional<VertexId> MetricTree::find_vertex(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<VertexId> MetricTree::leaves() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < num_vertices(); ++v) {
    if (degree(v) == 1) out.push_back(v);
  }
  return out;
}

TreePoint MetricTree::edge_point(EdgeId e, double offset) const {
  if (e >= edges_.size()) throw Error(ErrorCode::InvalidPoint, "unknown edge " + std::to_string(e));
  const Edge& edge = edges_[e];
  if (!std::isfinite(offset) || offset < 0.0 || offset > edge.length) {
    throw Error(ErrorCode::InvalidPoint, "offset " + std::to_string(offset) + " outside " +
                                             edge_label(e));
  }
  if (offset == 0.0) return TreePoint::at_vertex(edge.u);
  if (offset == edge.length) return TreePoint::at_vertex(edge.v);
  return TreePoint::on_edge(e, offset);
}

TreePoint MetricTree::canonical(const TreePoint& p) const {
  if (p.is_vertex()) {
    validate(p);
    return p;
  }
  return edge_point(p.edge(), p.offset());
}

void MetricTree::validate(const TreePoint& p) const {
  if (p.is_vertex()) {
    if (p.vertex() >= names_.size()) {
      throw Error(ErrorCode::InvalidPoint, "unknown vertex " + std::to_string(p.vertex()));
    }
    return;
  }
  if (p.edge() >= edges_.size()) {
    throw Error(ErrorCode::InvalidPoint, "unknown edge " + std::to_string(p.edge()));
  }
  if (!(p.offset() > 0.0 && p.offset() < edges_[p.edge()].length)) {
    throw Error(ErrorCode::InvalidPoint, "offset " + std::to_string(p.offset()) +
                                             " not strictly inside " + edge_label(p.edge()));
  }
}

VertexId MetricTree::ancestor_at_depth(VertexId v, std::size_t depth) const {
  std::size_t lift = depth_[v] - depth;
  for (std::size_t k = 0; lift != 0; ++k, lift >>= 1) {
    if (lift & 1U) v = jump_[k][v];
  }
  return v;
}

VertexId MetricTree::lca(VertexId a, VertexId b) const {
  if (depth_[a] < depth_[b]) std::swap(a, b);
  a = ancestor_at_depth(a, depth_[b]);
  if (a == b) return a;
  for (std::size_t k = jump_.size(); k-- > 0;) {
    if (jump_[k][a] != jump_[k][b]) {
      a = jump_[k][a];
      b = jump_[k][b];
    }
  }
  return parent_[a];
}

bool MetricTree::in_subtree(VertexId root, VertexId v) const {
  return enter_[root] <= enter_[v] && leave_[v] <= leave_[root];
}

VertexId MetricTree::child_of(EdgeId e) const {
  const Edge& edge = edges_[e];
  return (edge.v != 0 && parent_[edge.v] == edge.u && parent_edge_[edge.v] == e) ? edge.v
                                                                                  : edge.u;
}

double MetricTree::vertex_distance(VertexId a, VertexId b) const {
  if (a == b) return 0.0;
  return root_distance_[a] + root_distance_[b] - 2.0 * root_distance_[lca(a, b)];
}

double MetricTree::distance(const TreePoint& p, const TreePoint& q) const {
  validate(p);
  validate(q);
  if (p == q) return 0.0;
  if (p.is_vertex() && q.is_vertex()) return vertex_distance(p.vertex(), q.vertex());
  if (!p.is_vertex() && !q.is_vertex() && p.edge() == q.edge()) {
    return std::abs(p.offset() - q.offset());
  }

  struct Exit {
    VertexId v;
    double cost;
  };
  auto exits = [this](const TreePoint& x) {
    std::vector<Exit> out;
    if (x.is_vertex()) {
      out.push_back({x.vertex(), 0.0});
    } else {
      const Edge& e = edges_[x.edge()];
      out.push_back({e.u, x.offset()});
      out.push_back({e.v, e.length - x.offset()});
    }
    return out;
  };
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ep : exits(p)) {
    for (const auto& eq : exits(q)) {
      best = std::min(best, ep.cost + vertex_distance(ep.v, eq.v) + eq.cost);
    }
  }
  return best;
}

VertexId MetricTree::direction(const TreePoint& alpha, const TreePoint& x) const {
  validate(alpha);
  validate(x);
  if (alpha == x) throw Error(ErrorCode::CoincidentPoints, "direction from a point to itself");

  if (alpha.is_vertex()) {
    const VertexId a = alpha.vertex();
    VertexId y;
    if (x.is_vertex()) {
      y = x.vertex();
    } else {
      const VertexId c = child_of(x.edge());
      if (c == a) return parent_[a];
      y = c;
    }
    if (y != a && in_subtree(a, y)) return ancestor_at_depth(y, depth_[a] + 1);
    return parent_[a];
  }

  const EdgeId e = alpha.edge();
  const VertexId c = child_of(e);
  const VertexId p = edges_[e].u == c ? edges_[e].v : edges_[e].u;
  if (x.is_vertex()) return in_subtree(c, x.vertex()) ? c : p;
  if (x.edge() == e) {
    // Larger u-offset means closer to v.
    const bool toward_v = x.offset() > alpha.offset();
    return toward_v ? edges_[e].v : edges_[e].u;
  }
  return in_subtree(c, child_of(x.edge())) ? c : p;
}

std::vector<VertexId> MetricTree::vertex_path(VertexId a, VertexId b) const {
  const VertexId top = lca(a, b);
  std::vector<VertexId> up;
  for (VertexId v = a; v != top; v = parent_[v]) up.push_back(v);
  up.push_back(top);
  std::vector<VertexId> down;
  for (VertexId v = b; v != top; v = parent_[v]) down.push_back(v);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

std::vector<MetricTree::Waypoint> MetricTree::waypoints(const TreePoint& a,
                                                         const TreePoint& b) const {
  validate(a);
  validate(b);
  std::vector<Waypoint> out{{a, 0.0}};
  if (a == b) return out;
  if (!a.is_vertex() && !b.is_vertex() && a.edge() == b.edge()) {
    out.push_back({b, distance(a, b)});
    return out;
  }
  const VertexId start = a.is_vertex() ? a.vertex() : direction(a, b);
  const VertexId end = b.is_vertex() ? b.vertex() : direction(b, a);
  for (VertexId v : vertex_path(start, end)) {
    const TreePoint w = TreePoint::at_vertex(v);
    if (w == a) continue;
    out.push_back({w, distance(a, w)});
  }
  if (!b.is_vertex()) out.push_back({b, distance(a, b)});
  return out;
}

namespace {

struct EdgeStep {
  EdgeId edge;
  double from;  // u-offsets
  double to;
};

}  // namespace

static EdgeStep edge_step(const MetricTree& tree, const TreePoint& p, const TreePoint& q) {
  EdgeId e;
  if (!p.is_vertex()) {
    e = p.edge();
  } else if (!q.is_vertex()) {
    e = q.edge();
  } else {
    e = tree.num_edges();
    for (const auto& adj : tree.adjacent(p.vertex())) {
      if (adj.vertex == q.vertex()) e = adj.edge;
    }
    if (e == tree.num_edges()) {
      throw Error(ErrorCode::NumericalInconsistency, "consecutive waypoints not adjacent");
    }
  }
  const Edge& edge = tree.edge(e);
  auto off = [&](const TreePoint& x) {
    if (!x.is_vertex()) return x.offset();
    return x.vertex() == edge.u ? 0.0 : edge.length;
  };
  return {e, off(p), off(q)};
}

TreePoint MetricTree::point_at(const TreePoint& a, const TreePoint& b, double t) const {
  const double total = distance(a, b);
  const double slack = 1e-12 * std::max(1.0, total);
  if (!std::isfinite(t) || t < -slack || t > total + slack) {
    throw Error(ErrorCode::ParameterOutOfRange,
                "t = " + std::to_string(t) + " outside [0, " + std::to_string(total) + "]");
  }
  if (t <= 0.0) return a;
  if (t >= total) return b;

  const auto path = waypoints(a, b);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (t == path[i].position) return path[i].point;
    if (t < path[i + 1].position) {
      const EdgeStep step = edge_step(*this, path[i].point, path[i + 1].point);
      const double along = t - path[i].position;
      double offset = step.to > step.from ? step.from + along : step.from - along;
      offset = std::clamp(offset, std::min(step.from, step.to), std::max(step.from, step.to));
      return edge_point(step.edge, offset);
    }
  }
  return b;
}

GeodesicSegment MetricTree::segment(const TreePoint& a, const TreePoint& b) const {
  GeodesicSegment g{a, b, distance(a, b), {}};
  for (const auto& w : waypoints(a, b)) {
    if (w.point.is_vertex()) g.path.push_back(w.point.vertex());
  }
  return g;
}

static void check_segment(const MetricTree& tree, const GeodesicSegment& g) {
  try {
    tree.validate(g.a);
    tree.validate(g.b);
  } catch (const Error& err) {
    throw Error(ErrorCode::InvalidSegment, err.detail());
  }
  const double d = tree.distance(g.a, g.b);
  if (!(std::abs(d - g.length) <= 1e-9 * std::max(1.0, d))) {
    throw Error(ErrorCode::InvalidSegment, "stored length does not match endpoints");
  }
}

bool MetricTree::on_segment(const GeodesicSegment& g, const TreePoint& x) const {
  if (x == g.a || x == g.b) return true;
  if (g.a == g.b) return false;
  return direction(x, g.a) != direction(x, g.b);
}

TreePoint MetricTree::project_to_segment(const GeodesicSegment& g, const TreePoint& x) const {
  check_segment(*this, g);
  validate(x);
  if (on_segment(g, x)) return x;
  // The projection is the branch point of {a, b, x}; off-segment points
  // attach to G only at its endpoints or at vertices on the path.
  const double t = 0.5 * (distance(g.a, x) + g.length - distance(g.b, x));
  TreePoint best = g.a;
  double gap = std::abs(t);
  auto consider = [&](const TreePoint& p) {
    const double d = std::abs(distance(g.a, p) - t);
    if (d < gap) {
      gap = d;
      best = p;
    }
  };
  consider(g.b);
  for (VertexId v : g.path) consider(TreePoint::at_vertex(v));
  return best;
}

DirectedSubtree MetricTree::subtree_toward(const TreePoint& alpha, const TreePoint& v) const {
  validate(alpha);
  validate(v);
  if (alpha == v) throw Error(ErrorCode::CoincidentPoints, "subtree toward the anchor itself");

  DirectedSubtree s{alpha, v, direction(alpha, v), {}, std::nullopt, {}, this};
  s.vertices.assign(num_vertices(), false);
  s.full_edges.assign(num_edges(), false);
  for (VertexId w = 0; w < num_vertices(); ++w) {
    const TreePoint p = TreePoint::at_vertex(w);
    s.vertices[w] = !(p == alpha) && direction(alpha, p) == s.toward;
  }
  for (EdgeId e = 0; e < num_edges(); ++e) {
    if (!alpha.is_vertex() && alpha.edge() == e) {
      const Edge& edge = edges_[e];
      s.partial = s.toward == edge.v ? EdgeInterval{e, alpha.offset(), edge.length}
                                     : EdgeInterval{e, 0.0, alpha.offset()};
      continue;
    }
    s.full_edges[e] = direction(alpha, TreePoint::on_edge(e, 0.5 * edges_[e].length)) == s.toward;
  }
  return s;
}

bool MetricTree::contains(const DirectedSubtree& s, const TreePoint& x) const {
  validate(x);
  if (x == s.anchor) return false;
  if (x.is_vertex()) return s.vertices.at(x.vertex());
  if (s.partial && s.partial->edge == x.edge()) {
    return x.offset() > s.partial->from && x.offset() < s.partial->to;
  }
  return s.full_edges.at(x.edge());
}

std::vector<TreePoint> MetricTree::neighboring_points(const TreePoint& alpha) const {
  validate(alpha);
  std::vector<TreePoint> out;
  if (alpha.is_vertex()) {
    for (const auto& adj : adjacency_[alpha.vertex()]) out.push_back(TreePoint::at_vertex(adj.vertex));
  } else {
    out.push_back(TreePoint::at_vertex(edges_[alpha.edge()].u));
    out.push_back(TreePoint::at_vertex(edges_[alpha.edge()].v));
  }
  return out;
}

std::vector<MetricTree::PathStep> MetricTree::path_steps(const TreePoint& a,
                                                          const TreePoint& b) const {
  const auto path = waypoints(a, b);
  std::vector<PathStep> out;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const EdgeStep step = edge_step(*this, path[i].point, path[i + 1].point);
    out.push_back({step.edge, step.from, step.to, path[i].position});
  }
  return out;
}

std::optional<EdgeInterval> MetricTree::segment_coverage(const GeodesicSegment& g,
                                                         EdgeId e) const {
  for (const auto& step : path_steps(g.a, g.b)) {
    if (step.edge == e) {
      return EdgeInterval{e, std::min(step.from, step.to), std::max(step.from, step.to)};
    }
  }
  return std::nullopt;
}

double MetricTree::offset_from(EdgeId e, VertexId from, double offset_from_u) const {
  const Edge& edge = edges_.at(e);
  return from == edge.u ? offset_from_u : edge.length - offset_from_u;
}

}  // namespace frechet_tree
