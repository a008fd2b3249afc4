#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "frechet_tree/measure.hpp"
#include "frechet_tree/metric_tree.hpp"

namespace frechet_tree::testing {

using TreePtr = std::shared_ptr<const MetricTree>;

inline TreePtr share(MetricTree tree) { return std::make_shared<const MetricTree>(std::move(tree)); }

/// Center C (vertex 0) with leaves A, B, E (vertices 1..3); edge i joins C to
/// leaf i+1 with offsets measured from C.
inline TreePtr spider(double leg = 2.0) {
  return share(MetricTree::build({{"C", "A", leg}, {"C", "B", leg}, {"C", "E", leg}}));
}

/// Uniform density on the half of every leg next to the center.
inline TreeMeasure half_legs(const TreePtr& tree) {
  return build_measure(tree, {}, {{0, 0.0, 1.0, 1.0 / 3.0}, {1, 0.0, 1.0, 1.0 / 3.0},
                                  {2, 0.0, 1.0, 1.0 / 3.0}});
}

/// Density 1/4 along the whole first leg, atoms 1/4 at distance 1 on the
/// other two legs.
inline TreeMeasure one_sided(const TreePtr& tree) {
  return build_measure(tree,
                       {{tree->edge_point(1, 1.0), 0.25}, {tree->edge_point(2, 1.0), 0.25}},
                       {{0, 0.0, 2.0, 0.25}});
}

inline TreePtr segment_tree(double length) { return share(MetricTree::build({{"A", "B", length}})); }

inline TreeMeasure uniform_on_edge(const TreePtr& tree) {
  const double len = tree->edge(0).length;
  return build_measure(tree, {}, {{0, 0.0, len, 1.0 / len}});
}

inline TreeMeasure balanced_ends(const TreePtr& tree) {
  return build_measure(tree, {{TreePoint::at_vertex(0), 0.5}, {TreePoint::at_vertex(1), 0.5}}, {});
}

/// Random tree on 2..max_vertices vertices, lengths in [0.1, 1.5].
inline TreePtr random_tree(std::mt19937_64& gen, std::size_t max_vertices = 8) {
  std::uniform_int_distribution<std::size_t> count(2, max_vertices);
  std::uniform_real_distribution<double> length(0.1, 1.5);
  const std::size_t n = count(gen);
  std::vector<EdgeSpec> edges;
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    edges.push_back({"v" + std::to_string(parent(gen)), "v" + std::to_string(i), length(gen)});
  }
  return share(MetricTree::build(edges));
}

/// Vertex with probability 1/3, otherwise a uniform edge-interior point.
inline TreePoint random_point(std::mt19937_64& gen, const MetricTree& tree) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (tree.num_edges() == 0 || unit(gen) < 1.0 / 3.0) {
    std::uniform_int_distribution<std::size_t> v(0, tree.num_vertices() - 1);
    return TreePoint::at_vertex(v(gen));
  }
  std::uniform_int_distribution<std::size_t> e(0, tree.num_edges() - 1);
  const EdgeId id = e(gen);
  return tree.edge_point(id, unit(gen) * tree.edge(id).length);
}

/// Up to max_atoms atoms with small integer weights, so ties in the median
/// balance occur regularly.
inline TreeMeasure random_discrete(std::mt19937_64& gen, const TreePtr& tree,
                                   std::size_t max_atoms = 30) {
  std::uniform_int_distribution<std::size_t> count(1, max_atoms);
  std::uniform_int_distribution<int> weight(1, 3);
  const std::size_t k = count(gen);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    atoms.push_back({random_point(gen, *tree), static_cast<double>(weight(gen))});
    total += atoms.back().weight;
  }
  for (auto& a : atoms) a.weight /= total;
  return build_measure(tree, atoms, {});
}

/// Atoms plus a few density pieces.
inline TreeMeasure random_mixed(std::mt19937_64& gen, const TreePtr& tree) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;
  double total = 0.0;
  const std::size_t k = 1 + static_cast<std::size_t>(unit(gen) * 5);
  for (std::size_t i = 0; i < k; ++i) {
    atoms.push_back({random_point(gen, *tree), 0.2 + unit(gen)});
    total += atoms.back().weight;
  }
  for (EdgeId e = 0; e < tree->num_edges(); ++e) {
    if (unit(gen) < 0.5) continue;
    const double len = tree->edge(e).length;
    double a = unit(gen) * len;
    double b = unit(gen) * len;
    if (a > b) std::swap(a, b);
    if (b - a < 1e-3) continue;
    const double value = 0.2 + unit(gen);
    pieces.push_back({e, a, b, value});
    total += value * (b - a);
  }
  for (auto& a : atoms) a.weight /= total;
  for (auto& p : pieces) p.value /= total;
  return build_measure(tree, atoms, pieces);
}

}  // namespace frechet_tree::testing
