#include "frechet_tree/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "frechet_tree/quadrature.hpp"

namespace frechet_tree {

TreeMeasure TreeMeasure::build(std::shared_ptr<const MetricTree> tree, std::vector<Atom> atoms,
                               std::vector<DensityPiece> densities) {
  if (!tree) throw Error(ErrorCode::InvalidParameter, "measure needs a tree");
  const MetricTree& t = *tree;

  TreeMeasure mu;
  mu.tree_ = std::move(tree);

  std::vector<Atom> kept;
  kept.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double w = atoms[i].weight;
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "atom " + std::to_string(i));
    }
    if (w == 0.0) continue;
    kept.push_back({t.canonical(atoms[i].at), w});
  }
  std::sort(kept.begin(), kept.end(),
            [](const Atom& a, const Atom& b) { return a.at < b.at; });
  for (const auto& a : kept) {
    if (!mu.atoms_.empty() && mu.atoms_.back().at == a.at) {
      mu.atoms_.back().weight += a.weight;
    } else {
      mu.atoms_.push_back(a);
    }
  }

  for (std::size_t i = 0; i < densities.size(); ++i) {
    const auto& d = densities[i];
    if (d.edge >= t.num_edges()) {
      throw Error(ErrorCode::InvalidPoint, "density " + std::to_string(i) + ": unknown edge");
    }
    const double len = t.edge(d.edge).length;
    if (!std::isfinite(d.from) || !std::isfinite(d.to) || d.from < 0.0 || d.to > len ||
        !(d.from < d.to)) {
      throw Error(ErrorCode::InvalidPoint,
                  "density " + std::to_string(i) + ": interval outside edge or empty");
    }
    if (!std::isfinite(d.value) || d.value < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "density " + std::to_string(i));
    }
    if (d.value > 0.0) mu.densities_.push_back(d);
  }
  std::sort(mu.densities_.begin(), mu.densities_.end(),
            [](const DensityPiece& a, const DensityPiece& b) {
              return a.edge != b.edge ? a.edge < b.edge : a.from < b.from;
            });
  for (std::size_t i = 1; i < mu.densities_.size(); ++i) {
    const auto& prev = mu.densities_[i - 1];
    const auto& cur = mu.densities_[i];
    if (prev.edge == cur.edge && cur.from < prev.to) {
      throw Error(ErrorCode::OverlappingDensityPieces, "edge " + std::to_string(cur.edge));
    }
  }

  double total = 0.0;
  for (const auto& a : mu.atoms_) total += a.weight;
  for (const auto& d : mu.densities_) total += d.value * (d.to - d.from);
  if (!(std::abs(total - 1.0) <= 1e-9)) {
    throw Error(ErrorCode::MassNotOne, "total mass " + std::to_string(total));
  }
  mu.total_ = total;

  mu.vertex_atoms_.assign(t.num_vertices(), 0.0);
  mu.edge_atoms_.assign(t.num_edges(), {});
  mu.edge_pieces_.assign(t.num_edges(), {});
  for (const auto& a : mu.atoms_) {
    if (a.at.is_vertex()) {
      mu.vertex_atoms_[a.at.vertex()] = a.weight;
    } else {
      mu.edge_atoms_[a.at.edge()].push_back({a.at.offset(), a.weight});
    }
  }
  for (const auto& d : mu.densities_) mu.edge_pieces_[d.edge].push_back(d);

  double running = 0.0;
  mu.cumulative_.reserve(mu.atoms_.size() + mu.densities_.size());
  for (const auto& a : mu.atoms_) mu.cumulative_.push_back(running += a.weight);
  for (const auto& d : mu.densities_) mu.cumulative_.push_back(running += d.value * (d.to - d.from));
  return mu;
}

double TreeMeasure::atom_at(const TreePoint& p) const {
  const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), p,
                                   [](const Atom& a, const TreePoint& q) { return a.at < q; });
  return (it != atoms_.end() && it->at == p) ? it->weight : 0.0;
}

TreePoint TreeMeasure::sample(CounterRng& rng) const {
  const double pick = rng.uniform() * total_;
  const double position = rng.uniform();
  auto idx = static_cast<std::size_t>(
      std::upper_bound(cumulative_.begin(), cumulative_.end(), pick) - cumulative_.begin());
  idx = std::min(idx, cumulative_.size() - 1);
  if (idx < atoms_.size()) return atoms_[idx].at;
  const DensityPiece& d = densities_[idx - atoms_.size()];
  return tree_->edge_point(d.edge, d.from + position * (d.to - d.from));
}

TreeMeasure build_measure(std::shared_ptr<const MetricTree> tree, std::vector<Atom> atoms,
                          std::vector<DensityPiece> densities) {
  return TreeMeasure::build(std::move(tree), std::move(atoms), std::move(densities));
}

TreeMeasure empirical_measure(std::shared_ptr<const MetricTree> tree,
                              const std::vector<TreePoint>& points) {
  if (points.empty()) throw Error(ErrorCode::EmptySample, "no sample points");
  const double w = 1.0 / static_cast<double>(points.size());
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (const auto& p : points) atoms.push_back({p, w});
  return TreeMeasure::build(std::move(tree), std::move(atoms), {});
}

TreeMeasure mix_with_atom(const TreeMeasure& mu, const TreePoint& point, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "mixture weight outside [0, 1]");
  }
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({a.at, (1.0 - eps) * a.weight});
  atoms.push_back({point, eps});
  std::vector<DensityPiece> pieces;
  for (auto d : mu.densities()) {
    d.value *= 1.0 - eps;
    pieces.push_back(d);
  }
  return TreeMeasure::build(mu.shared_tree(), std::move(atoms), std::move(pieces));
}

double subtree_mass(const TreeMeasure& mu, const DirectedSubtree& s) {
  const MetricTree& tree = mu.tree();
  if (s.owner != &tree) throw Error(ErrorCode::TreeMismatch, "subtree built on another tree");
  double mass = 0.0;
  for (const auto& a : mu.atoms()) {
    if (tree.contains(s, a.at)) mass += a.weight;
  }
  for (const auto& d : mu.densities()) {
    if (s.partial && s.partial->edge == d.edge) {
      const double lo = std::max(d.from, s.partial->from);
      const double hi = std::min(d.to, s.partial->to);
      if (hi > lo) mass += d.value * (hi - lo);
    } else if (s.full_edges[d.edge]) {
      mass += d.value * (d.to - d.from);
    }
  }
  return mass;
}

RadialView radial_view(const TreeMeasure& mu, const TreePoint& alpha) {
  const MetricTree& tree = mu.tree();
  tree.validate(alpha);
  RadialView view;
  view.atoms.reserve(mu.atoms().size());
  for (const auto& a : mu.atoms()) {
    const EdgeId edge = a.at.is_vertex() ? RadialView::kNoEdge : a.at.edge();
    if (a.at == alpha) {
      view.atoms.push_back({0.0, a.weight, std::nullopt, edge});
    } else {
      view.atoms.push_back({tree.distance(alpha, a.at), a.weight, tree.direction(alpha, a.at), edge});
    }
  }
  for (const auto& d : mu.densities()) {
    const Edge& e = tree.edge(d.edge);
    if (!alpha.is_vertex() && alpha.edge() == d.edge) {
      const double o = alpha.offset();
      if (d.from < o) {
        const double hi = std::min(d.to, o);
        view.pieces.push_back({o - hi, o - d.from, d.value, e.u, d.edge});
      }
      if (d.to > o) {
        const double lo = std::max(d.from, o);
        view.pieces.push_back({lo - o, d.to - o, d.value, e.v, d.edge});
      }
      continue;
    }
    const TreePoint mid = TreePoint::on_edge(d.edge, 0.5 * (d.from + d.to));
    const VertexId toward = tree.direction(alpha, mid);
    const double du = tree.distance(alpha, TreePoint::at_vertex(e.u));
    const double dv = tree.distance(alpha, TreePoint::at_vertex(e.v));
    if (du <= dv) {
      view.pieces.push_back({du + d.from, du + d.to, d.value, toward, d.edge});
    } else {
      view.pieces.push_back({dv + (e.length - d.to), dv + (e.length - d.from), d.value, toward, d.edge});
    }
  }
  return view;
}

double integrate_range(const Kernel& kernel, double near, double far) {
  if (far <= near) return 0.0;
  if (kernel.primitive) return (*kernel.primitive)(far) - (*kernel.primitive)(near);
  return integrate_adaptive(kernel.g, near, far, 1e-10);
}

double integrate_kernel(const TreeMeasure& mu, const TreePoint& alpha, const Kernel& kernel) {
  const RadialView view = radial_view(mu, alpha);
  double sum = 0.0;
  for (const auto& a : view.atoms) sum += a.weight * kernel.g(a.distance);
  for (const auto& p : view.pieces) sum += p.density * integrate_range(kernel, p.near, p.far);
  return sum;
}

BranchMassFunction::BranchMassFunction(const TreeMeasure& mu, const TreePoint& center,
                                       const TreePoint& direction)
    : center_(center), direction_(direction) {
  const MetricTree& tree = mu.tree();
  tree.validate(center);
  tree.validate(direction);
  if (center == direction) {
    throw Error(ErrorCode::CoincidentPoints, "branch direction equals its center");
  }
  reach_ = tree.distance(center, direction);

  const auto steps = tree.path_steps(center, direction);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const double lo = std::min(s.from, s.to);
    const double hi = std::max(s.from, s.to);
    auto position = [&s](double offset) { return s.start + std::abs(offset - s.from); };
    for (const auto& a : mu.edge_atoms(s.edge)) {
      if (a.offset > lo && a.offset < hi) jumps_.push_back({position(a.offset), a.weight});
    }
    for (const auto& d : mu.edge_densities(s.edge)) {
      const double a = std::max(d.from, lo);
      const double b = std::min(d.to, hi);
      if (b > a) {
        const double pa = position(a);
        const double pb = position(b);
        ramps_.push_back({std::min(pa, pb), std::max(pa, pb), d.value});
      }
    }
    if (i + 1 < steps.size()) {
      // Interior waypoints of the path are vertices.
      const Edge& e = tree.edge(s.edge);
      const VertexId v = s.to == 0.0 ? e.u : e.v;
      const double w = mu.vertex_atom(v);
      if (w > 0.0) jumps_.push_back({steps[i + 1].start, w});
    }
  }
  std::sort(jumps_.begin(), jumps_.end(),
            [](const Jump& a, const Jump& b) { return a.position < b.position; });
  jump_prefix_.assign(jumps_.size() + 1, 0.0);
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    jump_prefix_[k + 1] = jump_prefix_[k] + jumps_[k].weight;
  }
}

double BranchMassFunction::operator()(double t) const {
  const double slack = 1e-12 * std::max(1.0, reach_);
  if (!std::isfinite(t) || t < 0.0 || t > reach_ + slack) {
    throw Error(ErrorCode::ParameterOutOfRange,
                "t = " + std::to_string(t) + " outside [0, " + std::to_string(reach_) + "]");
  }
  const auto below = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                                      [](const Jump& j, double x) { return j.position < x; });
  double mass = jump_prefix_[static_cast<std::size_t>(below - jumps_.begin())];
  for (const auto& r : ramps_) mass += r.density * (std::clamp(t, r.from, r.to) - r.from);
  return mass;
}

std::vector<double> BranchMassFunction::breakpoints() const {
  std::vector<double> out;
  for (const auto& j : jumps_) out.push_back(j.position);
  for (const auto& r : ramps_) {
    out.push_back(r.from);
    out.push_back(r.to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TwoSidedBranchMass::TwoSidedBranchMass(const TreeMeasure& mu, const TreePoint& center,
                                       const TreePoint& negative, const TreePoint& positive)
    : negative_(mu, center, negative), positive_(mu, center, positive) {}

double TwoSidedBranchMass::operator()(double t) const {
  return t >= 0.0 ? positive_(t) : negative_(-t);
}

double branch_mass(const TreeMeasure& mu, const TreePoint& center, const TreePoint& direction,
                   double t) {
  return BranchMassFunction(mu, center, direction)(t);
}

TreePoint sample_point(const TreeMeasure& mu, CounterRng& rng) { return mu.sample(rng); }

TreeMeasure pushforward_projection(const TreeMeasure& mu, const GeodesicSegment& g) {
  const MetricTree& tree = mu.tree();
  std::vector<Atom> atoms;
  for (const auto& a : mu.atoms()) atoms.push_back({tree.project_to_segment(g, a.at), a.weight});

  std::vector<DensityPiece> pieces;
  auto collapse = [&](EdgeId e, double from, double to, double value) {
    if (!(to > from)) return;
    const TreePoint mid = tree.edge_point(e, 0.5 * (from + to));
    atoms.push_back({tree.project_to_segment(g, mid), value * (to - from)});
  };
  for (const auto& d : mu.densities()) {
    const auto cover = g.a == g.b ? std::nullopt : tree.segment_coverage(g, d.edge);
    if (!cover) {
      collapse(d.edge, d.from, d.to, d.value);
      continue;
    }
    const double lo = std::max(d.from, cover->from);
    const double hi = std::min(d.to, cover->to);
    if (hi > lo) pieces.push_back({d.edge, lo, hi, d.value});
    collapse(d.edge, d.from, std::min(d.to, cover->from), d.value);
    collapse(d.edge, std::max(d.from, cover->to), d.to, d.value);
  }
  return TreeMeasure::build(mu.shared_tree(), std::move(atoms), std::move(pieces));
}

}  // namespace frechet_tree
