#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "frechet_tree/metric_tree.hpp"
#include "frechet_tree/rng.hpp"

namespace frechet_tree {

struct Atom {
  TreePoint at;
  double weight;
};

/// Constant density `value` (per unit arclength) on [from, to] of an edge,
/// offsets measured from the edge's `u` endpoint.
struct DensityPiece {
  EdgeId edge;
  double from;
  double to;
  double value;
};

/// Probability measure on a metric tree: finitely many atoms plus piecewise
/// constant densities on edges. Immutable once built.
class TreeMeasure {
 public:
  /// Rejects total mass off 1 by more than 1e-9; never renormalizes.
  /// Atom points are canonicalized and coincident atoms merged.
  static TreeMeasure build(std::shared_ptr<const MetricTree> tree, std::vector<Atom> atoms,
                           std::vector<DensityPiece> densities);

  const MetricTree& tree() const noexcept { return *tree_; }
  const std::shared_ptr<const MetricTree>& shared_tree() const noexcept { return tree_; }

  /// Sorted by point, one entry per distinct location.
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  /// Sorted by edge then offset.
  const std::vector<DensityPiece>& densities() const noexcept { return densities_; }
  double total_mass() const noexcept { return total_; }
  bool is_discrete() const noexcept { return densities_.empty(); }

  double vertex_atom(VertexId v) const { return vertex_atoms_.at(v); }
  double atom_at(const TreePoint& p) const;

  struct EdgeAtom {
    double offset;
    double weight;
  };
  /// Atoms strictly inside edge e, ascending offset.
  const std::vector<EdgeAtom>& edge_atoms(EdgeId e) const { return edge_atoms_.at(e); }
  const std::vector<DensityPiece>& edge_densities(EdgeId e) const { return edge_pieces_.at(e); }

  /// Draws one point; consumes exactly two uniforms (component, then offset).
  TreePoint sample(CounterRng& rng) const;

 private:
  TreeMeasure() = default;

  std::shared_ptr<const MetricTree> tree_;
  std::vector<Atom> atoms_;
  std::vector<DensityPiece> densities_;
  double total_ = 0.0;
  std::vector<double> vertex_atoms_;
  std::vector<std::vector<EdgeAtom>> edge_atoms_;
  std::vector<std::vector<DensityPiece>> edge_pieces_;
  std::vector<double> cumulative_;  // atoms then pieces
};

TreeMeasure build_measure(std::shared_ptr<const MetricTree> tree, std::vector<Atom> atoms,
                          std::vector<DensityPiece> densities);

/// n atoms of weight 1/n; coincident points merge.
TreeMeasure empirical_measure(std::shared_ptr<const MetricTree> tree,
                              const std::vector<TreePoint>& points);

/// (1 - eps) mu + eps delta_point.
TreeMeasure mix_with_atom(const TreeMeasure& mu, const TreePoint& point, double eps);

double subtree_mass(const TreeMeasure& mu, const DirectedSubtree& s);

/// Real function together with its antiderivative from 0, if known.
struct Kernel {
  std::function<double(double)> g;
  std::optional<std::function<double(double)>> primitive;
};

/// Integral of g(d(alpha, x)) against mu.
double integrate_kernel(const TreeMeasure& mu, const TreePoint& alpha, const Kernel& kernel);

/// Integral of g over the distance range [near, far] for a unit density.
double integrate_range(const Kernel& kernel, double near, double far);

/// mu seen from alpha: every atom and density piece tagged with its distance
/// (range) from alpha and the component of T \ {alpha} containing it.
struct RadialView {
  static constexpr EdgeId kNoEdge = static_cast<EdgeId>(-1);
  struct AtomEntry {
    double distance;
    double weight;
    std::optional<VertexId> toward;  // empty for the atom at alpha
    EdgeId edge;                     // kNoEdge for vertex atoms
  };
  struct PieceEntry {
    double near;
    double far;
    double density;
    VertexId toward;
    EdgeId edge;
  };
  std::vector<AtomEntry> atoms;
  std::vector<PieceEntry> pieces;
};

RadialView radial_view(const TreeMeasure& mu, const TreePoint& alpha);

/// t -> mu((center, gamma_t)) along the geodesic from `center` toward
/// `direction`; open at both ends, piecewise linear with jumps at atoms.
class BranchMassFunction {
 public:
  BranchMassFunction(const TreeMeasure& mu, const TreePoint& center, const TreePoint& direction);

  double operator()(double t) const;
  double reach() const noexcept { return reach_; }
  const TreePoint& center() const noexcept { return center_; }
  const TreePoint& direction() const noexcept { return direction_; }

  /// Positions where the function changes slope or jumps.
  std::vector<double> breakpoints() const;

 private:
  struct Jump {
    double position;
    double weight;
  };
  struct Ramp {
    double from;
    double to;
    double density;
  };
  TreePoint center_;
  TreePoint direction_;
  double reach_ = 0.0;
  std::vector<Jump> jumps_;            // ascending position
  std::vector<double> jump_prefix_;    // jump_prefix_[k] = sum of first k weights
  std::vector<Ramp> ramps_;
};

/// Delta(t) = mu((center, gamma_t)) with gamma the geodesic from `negative`
/// through `center` to `positive`; t < 0 indexes the branch toward `negative`.
class TwoSidedBranchMass {
 public:
  TwoSidedBranchMass(const TreeMeasure& mu, const TreePoint& center, const TreePoint& negative,
                     const TreePoint& positive);
  double operator()(double t) const;
  const BranchMassFunction& negative() const noexcept { return negative_; }
  const BranchMassFunction& positive() const noexcept { return positive_; }

 private:
  BranchMassFunction negative_;
  BranchMassFunction positive_;
};

double branch_mass(const TreeMeasure& mu, const TreePoint& center, const TreePoint& direction,
                   double t);

TreePoint sample_point(const TreeMeasure& mu, CounterRng& rng);

/// Pushforward of mu by the metric projection onto g.
TreeMeasure pushforward_projection(const TreeMeasure& mu, const GeodesicSegment& g);

}  // namespace frechet_tree
