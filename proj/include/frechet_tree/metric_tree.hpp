#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "frechet_tree/error.hpp"

namespace frechet_tree {

using VertexId = std::size_t;
using EdgeId = std::size_t;

class MetricTree;

/// A location on a metric tree: either a vertex or a point strictly inside an
/// edge, with the offset measured from the edge's first endpoint `u`.
///
/// Points built through MetricTree::edge_point() are canonical: offsets 0 and
/// `length` are rewritten as the corresponding vertex, so equality is exact.
class TreePoint {
 public:
  static TreePoint at_vertex(VertexId v) { return TreePoint(Kind::Vertex, v, 0.0); }
  /// Raw edge point; use MetricTree::edge_point() to get the canonical form.
  static TreePoint on_edge(EdgeId e, double offset) {
    return TreePoint(Kind::EdgeInterior, e, offset);
  }

  bool is_vertex() const noexcept { return kind_ == Kind::Vertex; }
  VertexId vertex() const noexcept { return id_; }
  EdgeId edge() const noexcept { return id_; }
  double offset() const noexcept { return offset_; }

  friend bool operator==(const TreePoint& a, const TreePoint& b) noexcept {
    return a.kind_ == b.kind_ && a.id_ == b.id_ && a.offset_ == b.offset_;
  }
  friend bool operator<(const TreePoint& a, const TreePoint& b) noexcept {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    if (a.id_ != b.id_) return a.id_ < b.id_;
    return a.offset_ < b.offset_;
  }

 private:
  enum class Kind { Vertex, EdgeInterior };
  TreePoint(Kind kind, std::size_t id, double offset)
      : kind_(kind), id_(id), offset_(offset) {}

  Kind kind_;
  std::size_t id_;
  double offset_;
};

struct EdgeSpec {
  std::string u;
  std::string v;
  double length;
};

struct Edge {
  VertexId u;
  VertexId v;
  double length;
};

/// Closed geodesic segment [a, b]; `path` lists the vertices strictly
/// traversed from a to b (a and b themselves included when they are vertices).
struct GeodesicSegment {
  TreePoint a = TreePoint::at_vertex(0);
  TreePoint b = TreePoint::at_vertex(0);
  double length = 0.0;
  std::vector<VertexId> path;
};

/// Interval [from, to] of an edge, in offsets from the edge's `u` endpoint.
struct EdgeInterval {
  EdgeId edge;
  double from;
  double to;
};

/// T_{anchor -> witness}: the path-component of T \ {anchor} containing
/// `witness`. `toward` is the neighboring vertex of the anchor that lies in
/// the component; it identifies the component uniquely.
struct DirectedSubtree {
  TreePoint anchor;
  TreePoint witness;
  VertexId toward;
  std::vector<bool> full_edges;         // edges whose open interior lies inside
  std::optional<EdgeInterval> partial;  // part of the anchor's own edge
  std::vector<bool> vertices;           // vertices inside
  const MetricTree* owner = nullptr;
};

class MetricTree {
 public:
  /// Vertices are numbered in order of first appearance in `edges`.
  static MetricTree build(const std::vector<EdgeSpec>& edges);
  /// Vertices are numbered in the order given; a single vertex and no edges
  /// is an accepted degenerate tree.
  static MetricTree build(const std::vector<std::string>& vertices,
                          const std::vector<EdgeSpec>& edges);

  std::size_t num_vertices() const noexcept { return names_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::string& vertex_name(VertexId v) const { return names_.at(v); }
  std::optional<VertexId> find_vertex(const std::string& name) const;
  double diameter() const noexcept { return diameter_; }

  struct Adjacent {
    VertexId vertex;
    EdgeId edge;
  };
  const std::vector<Adjacent>& adjacent(VertexId v) const { return adjacency_.at(v); }
  std::size_t degree(VertexId v) const { return adjacency_.at(v).size(); }
  std::vector<VertexId> leaves() const;

  /// Canonical point at `offset` from edge e's `u` endpoint.
  TreePoint edge_point(EdgeId e, double offset) const;
  TreePoint canonical(const TreePoint& p) const;
  void validate(const TreePoint& p) const;

  double distance(const TreePoint& p, const TreePoint& q) const;
  double vertex_distance(VertexId a, VertexId b) const;

  /// The neighboring vertex of `alpha` that represents the component of
  /// T \ {alpha} containing `x`. Requires x != alpha.
  VertexId direction(const TreePoint& alpha, const TreePoint& x) const;

  /// Point at arclength t from a along [a, b].
  TreePoint point_at(const TreePoint& a, const TreePoint& b, double t) const;
  GeodesicSegment segment(const TreePoint& a, const TreePoint& b) const;
  bool on_segment(const GeodesicSegment& g, const TreePoint& x) const;
  TreePoint project_to_segment(const GeodesicSegment& g, const TreePoint& x) const;

  DirectedSubtree subtree_toward(const TreePoint& alpha, const TreePoint& v) const;
  bool contains(const DirectedSubtree& s, const TreePoint& x) const;
  std::vector<TreePoint> neighboring_points(const TreePoint& alpha) const;

  /// One edge traversal of the path from a to b: u-offsets `from` -> `to`,
  /// beginning at arclength `start` from a.
  struct PathStep {
    EdgeId edge;
    double from;
    double to;
    double start;
  };
  std::vector<PathStep> path_steps(const TreePoint& a, const TreePoint& b) const;

  /// The subinterval of edge e covered by g, if g meets the edge in more than
  /// a single point.
  std::optional<EdgeInterval> segment_coverage(const GeodesicSegment& g, EdgeId e) const;

  /// Offset of the point on edge e measured from `from`, which must be one of
  /// the edge's endpoints.
  double offset_from(EdgeId e, VertexId from, double offset_from_u) const;

 private:
  MetricTree() = default;
  void index();
  VertexId ancestor_at_depth(VertexId v, std::size_t depth) const;
  VertexId lca(VertexId a, VertexId b) const;
  bool in_subtree(VertexId root, VertexId v) const;
  /// Rooted child endpoint of edge e.
  VertexId child_of(EdgeId e) const;
  std::vector<VertexId> vertex_path(VertexId a, VertexId b) const;

  struct Waypoint {
    TreePoint point;
    double position;
  };
  std::vector<Waypoint> waypoints(const TreePoint& a, const TreePoint& b) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> by_name_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;

  // Rooted at vertex 0.
  std::vector<VertexId> parent_;
  std::vector<EdgeId> parent_edge_;
  std::vector<std::size_t> depth_;
  std::vector<double> root_distance_;
  std::vector<std::size_t> enter_;
  std::vector<std::size_t> leave_;
  std::vector<std::vector<VertexId>> jump_;
  double diameter_ = 0.0;
};

}  // namespace frechet_tree
