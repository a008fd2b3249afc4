#include "frechet_tree/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace frechet_tree {

namespace {

void check_tree(const MetricTree& tree, const TreeMeasure& mu) {
  if (&mu.tree() != &tree) throw Error(ErrorCode::TreeMismatch, "measure lives on another tree");
}

void check_tolerances(const Tolerances& tol) {
  if (!(tol.pos > 0.0) || !(tol.deriv > 0.0) || !std::isfinite(tol.pos) ||
      !std::isfinite(tol.deriv)) {
    throw Error(ErrorCode::ToleranceTooCoarse, "tolerances must be positive and finite");
  }
}

EdgeId edge_between(const MetricTree& tree, VertexId a, VertexId b) {
  for (const auto& adj : tree.adjacent(a)) {
    if (adj.vertex == b) return adj.edge;
  }
  throw Error(ErrorCode::NumericalInconsistency, "vertices are not adjacent");
}

double derivative_toward(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                         const TreePoint& at, VertexId neighbor) {
  return directional_derivative(tree, mu, loss, at, TreePoint::at_vertex(neighbor)).value;
}

/// The part of edge e, in u-offsets, where both edge-direction derivatives are
/// >= -tol: M(mu) intersected with the edge, given that it is nonempty.
struct EdgeRange {
  double lo;
  double hi;
};

/// Median: phi'_v(x) = 1 - 2 mu(T_{x->v}), so the region is where the masses
/// beyond x on either side are both at most one half. Those masses are
/// piecewise linear in the offset, so the crossings are solved exactly.
EdgeRange median_flat_region(const MetricTree& tree, const TreeMeasure& mu, EdgeId e,
                             const Tolerances& tol) {
  const Edge& edge = tree.edge(e);
  const double length = edge.length;
  const RadialView view = radial_view(mu, TreePoint::on_edge(e, 0.5 * length));
  double side_u = 0.0;
  double side_v = 0.0;
  for (const auto& a : view.atoms) {
    if (a.edge == e) continue;
    (*a.toward == edge.u ? side_u : side_v) += a.weight;
  }
  for (const auto& p : view.pieces) {
    if (p.edge == e) continue;
    (p.toward == edge.u ? side_u : side_v) += p.density * (p.far - p.near);
  }

  const auto& atoms = mu.edge_atoms(e);
  const auto& pieces = mu.edge_densities(e);
  std::vector<double> bp{0.0, length};
  for (const auto& a : atoms) bp.push_back(a.offset);
  for (const auto& d : pieces) {
    bp.push_back(d.from);
    bp.push_back(d.to);
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const std::size_t last = bp.size() - 1;

  std::vector<double> jump(bp.size(), 0.0);
  {
    std::size_t k = 0;
    for (const auto& a : atoms) {
      while (bp[k] < a.offset) ++k;
      jump[k] += a.weight;
    }
  }
  std::vector<double> rate(last, 0.0);
  {
    std::size_t k = 0;
    for (const auto& d : pieces) {
      while (bp[k] < d.from) ++k;
      for (std::size_t j = k; j < last && bp[j] < d.to; ++j) rate[j] += d.value;
    }
  }
  double interior = 0.0;
  for (const auto& a : atoms) interior += a.weight;
  for (const auto& d : pieces) interior += d.value * (d.to - d.from);

  const double threshold = 0.5 * (1.0 + tol.deriv);

  // lo = inf{o : mu(T_{o->v}) <= threshold}
  double lo = length;
  {
    double beyond = side_v + interior;
    for (std::size_t k = 0; k <= last; ++k) {
      beyond -= jump[k];
      if (beyond <= threshold) {
        lo = bp[k];
        break;
      }
      if (k == last) break;
      const double len = bp[k + 1] - bp[k];
      if (rate[k] > 0.0) {
        const double x = (beyond - 0.5) / rate[k];
        if (x < len) {
          lo = bp[k] + x;
          break;
        }
      }
      beyond -= rate[k] * len;
    }
  }
  // hi = sup{o : mu(T_{o->u}) <= threshold}
  double hi = 0.0;
  {
    double beyond = side_u + interior;
    for (std::size_t k = last + 1; k-- > 0;) {
      beyond -= jump[k];
      if (beyond <= threshold) {
        hi = bp[k];
        break;
      }
      if (k == 0) break;
      const double len = bp[k] - bp[k - 1];
      if (rate[k - 1] > 0.0) {
        const double x = (beyond - 0.5) / rate[k - 1];
        if (x < len) {
          hi = bp[k] - x;
          break;
        }
      }
      beyond -= rate[k - 1] * len;
    }
  }
  if (hi - lo <= tol.pos) lo = hi = std::clamp(0.5 * (lo + hi), 0.0, length);
  return {lo, hi};
}

/// General loss: the derivative toward v is nondecreasing along the edge and
/// the derivative toward u nonincreasing, so both ends are found by bisection.
EdgeRange bisect_flat_region(const MetricTree& tree, const TreeMeasure& mu,
                             const LossFunction& loss, EdgeId e, const Tolerances& tol) {
  const Edge& edge = tree.edge(e);
  auto toward_v = [&](double o) {
    return derivative_toward(tree, mu, loss, tree.edge_point(e, o), edge.v);
  };
  auto toward_u = [&](double o) {
    return derivative_toward(tree, mu, loss, tree.edge_point(e, o), edge.u);
  };

  double lo = 0.0;
  if (toward_v(0.0) < -tol.deriv) {
    double a = 0.0;
    double b = edge.length;
    for (;;) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (toward_v(mid) >= -tol.deriv ? b : a) = mid;
    }
    lo = b;
  }
  double hi = edge.length;
  if (toward_u(edge.length) < -tol.deriv) {
    double a = 0.0;
    double b = edge.length;
    for (;;) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (toward_u(mid) >= -tol.deriv ? a : b) = mid;
    }
    hi = a;
  }
  // Strict convexity makes M(mu) a singleton; the gap is bisection slack.
  if (hi - lo <= tol.pos || loss.flags().strictly_convex) lo = hi = 0.5 * (lo + hi);
  return {lo, hi};
}

EdgeRange flat_region(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                      EdgeId e, const Tolerances& tol) {
  return loss.is_median() ? median_flat_region(tree, mu, e, tol)
                          : bisect_flat_region(tree, mu, loss, e, tol);
}

/// Result of following a zero-derivative direction out of a minimizer.
struct Extension {
  TreePoint end;
  std::optional<VertexId> restart;  // a descent direction appeared here
};

Extension extend(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                 VertexId start, VertexId first, const Tolerances& tol) {
  VertexId prev = start;
  VertexId next = first;
  for (std::size_t step = 0; step <= tree.num_edges() + 1; ++step) {
    const EdgeId e = edge_between(tree, prev, next);
    const Edge& edge = tree.edge(e);
    const EdgeRange range = flat_region(tree, mu, loss, e, tol);
    const bool from_u = prev == edge.u;
    const double far = from_u ? range.hi : range.lo;
    const bool reached = from_u ? far == edge.length : far == 0.0;
    if (!reached) return {tree.edge_point(e, far), std::nullopt};

    const TreePoint here = TreePoint::at_vertex(next);
    const auto ds = neighbor_derivatives(tree, mu, loss, here);
    std::vector<VertexId> flat;
    for (const auto& d : ds) {
      const VertexId w = d.toward.vertex();
      if (w == prev) continue;
      if (d.value < -tol.deriv) return {here, next};
      if (d.value <= tol.deriv) flat.push_back(w);
    }
    if (flat.empty()) return {here, std::nullopt};
    if (flat.size() > 1) {
      throw Error(ErrorCode::ToleranceTooCoarse,
                  "several flat directions at vertex " + tree.vertex_name(next));
    }
    prev = next;
    next = flat.front();
  }
  throw Error(ErrorCode::NumericalInconsistency, "flat-region extension did not terminate");
}

MinimizerSet finish(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                    const TreePoint& a, const TreePoint& b) {
  MinimizerSet out{tree.segment(a, b), objective_value(tree, mu, loss, a), {}};
  out.certificate = neighbor_derivatives(tree, mu, loss, a);
  if (!(a == b)) {
    const auto more = neighbor_derivatives(tree, mu, loss, b);
    out.certificate.insert(out.certificate.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace

const char* to_string(Stickiness s) {
  switch (s) {
    case Stickiness::Sticky: return "sticky";
    case Stickiness::PartlySticky: return "partly_sticky";
    case Stickiness::Nonsticky: return "nonsticky";
  }
  return "unknown";
}

Tolerances default_tolerances(const MetricTree& tree, const LossFunction& loss) {
  const double d = tree.diameter();
  const double pos = d > 0.0 ? 1e-9 * d : 1e-9;
  return {pos, 1e-9 * std::max(1.0, loss.dplus(d))};
}

double objective_value(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                       const TreePoint& alpha) {
  check_tree(tree, mu);
  return integrate_kernel(mu, alpha, {[&loss](double z) { return loss.value(z); }, loss.primitive()});
}

std::vector<DirectionalDerivative> neighbor_derivatives(const MetricTree& tree,
                                                        const TreeMeasure& mu,
                                                        const LossFunction& loss,
                                                        const TreePoint& alpha) {
  check_tree(tree, mu);
  const auto neighbors = tree.neighboring_points(alpha);
  const RadialView view = radial_view(mu, alpha);

  auto slot = [&neighbors](VertexId v) {
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      if (neighbors[k].vertex() == v) return k;
    }
    throw Error(ErrorCode::NumericalInconsistency, "mass in an unknown direction");
  };
  // Integrals of l'_- and l'_+ over a distance range coincide and equal the
  // increment of the loss.
  const Kernel slope{[&loss](double z) { return loss.dplus(z); },
                     [&loss](double z) { return loss.value(z); }};

  double at_alpha = 0.0;
  std::vector<double> plus(neighbors.size(), 0.0);
  std::vector<double> minus(neighbors.size(), 0.0);
  for (const auto& a : view.atoms) {
    if (!a.toward) {
      at_alpha += a.weight * loss.dplus(0.0);
      continue;
    }
    const std::size_t k = slot(*a.toward);
    plus[k] += a.weight * loss.dplus(a.distance);
    minus[k] += a.weight * loss.dminus(a.distance);
  }
  for (const auto& p : view.pieces) {
    const std::size_t k = slot(p.toward);
    const double mass = p.density * integrate_range(slope, p.near, p.far);
    plus[k] += mass;
    minus[k] += mass;
  }

  std::vector<DirectionalDerivative> out;
  out.reserve(neighbors.size());
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    double outside = at_alpha;
    for (std::size_t j = 0; j < neighbors.size(); ++j) {
      if (j != k) outside += plus[j];
    }
    out.push_back({alpha, neighbors[k], outside - minus[k], outside, minus[k]});
  }
  return out;
}

DirectionalDerivative directional_derivative(const MetricTree& tree, const TreeMeasure& mu,
                                             const LossFunction& loss, const TreePoint& alpha,
                                             const TreePoint& toward) {
  check_tree(tree, mu);
  const VertexId dir = tree.direction(alpha, toward);
  for (auto d : neighbor_derivatives(tree, mu, loss, alpha)) {
    if (d.toward.vertex() == dir) {
      d.toward = toward;
      return d;
    }
  }
  throw Error(ErrorCode::NumericalInconsistency, "direction not among neighbors");
}

double difference_quotient(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                           const TreePoint& alpha, const TreePoint& toward, double t) {
  check_tree(tree, mu);
  if (!(t > 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "t = " + std::to_string(t) + " outside (0, 1]");
  }
  if (alpha == toward) throw Error(ErrorCode::CoincidentPoints, "quotient toward alpha itself");
  const double d = tree.distance(alpha, toward);
  const TreePoint moved = tree.point_at(alpha, toward, t * d);
  return (objective_value(tree, mu, loss, moved) - objective_value(tree, mu, loss, alpha)) / (t * d);
}

MinimizerSet minimizer_set(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                           std::optional<Tolerances> tol_in) {
  check_tree(tree, mu);
  const Tolerances tol = tol_in.value_or(default_tolerances(tree, loss));
  check_tolerances(tol);
  if (!loss.flags().increasing) {
    throw Error(ErrorCode::NotIncreasingLoss, "minimizer segment needs an increasing loss");
  }
  const TreePoint root = TreePoint::at_vertex(0);
  if (tree.num_edges() == 0) return finish(tree, mu, loss, root, root);

  VertexId at = 0;
  const std::size_t budget = 2 * (tree.num_edges() + 2);
  for (std::size_t step = 0; step < budget; ++step) {
    const TreePoint here = TreePoint::at_vertex(at);
    const auto ds = neighbor_derivatives(tree, mu, loss, here);
    std::vector<VertexId> descent;
    std::vector<VertexId> flat;
    for (const auto& d : ds) {
      if (d.value < -tol.deriv) {
        descent.push_back(d.toward.vertex());
      } else if (d.value <= tol.deriv) {
        flat.push_back(d.toward.vertex());
      }
    }
    if (descent.size() > 1) {
      throw Error(ErrorCode::NumericalInconsistency,
                  "two descent directions at vertex " + tree.vertex_name(at));
    }

    if (descent.size() == 1) {
      const VertexId w = descent.front();
      if (derivative_toward(tree, mu, loss, TreePoint::at_vertex(w), at) >= -tol.deriv) {
        at = w;
        continue;
      }
      // Descending at both ends: the minimizers sit strictly inside the edge.
      const EdgeId e = edge_between(tree, at, w);
      const EdgeRange range = flat_region(tree, mu, loss, e, tol);
      return finish(tree, mu, loss, tree.edge_point(e, range.lo), tree.edge_point(e, range.hi));
    }

    // Strict convexity leaves no room for a flat region beyond the tolerance.
    if (loss.flags().strictly_convex) return finish(tree, mu, loss, here, here);
    if (flat.size() > 2) {
      throw Error(ErrorCode::ToleranceTooCoarse,
                  "more than two flat directions at vertex " + tree.vertex_name(at));
    }
    std::vector<TreePoint> ends;
    std::optional<VertexId> restart;
    for (VertexId w : flat) {
      const Extension ext = extend(tree, mu, loss, at, w, tol);
      if (ext.restart) {
        restart = ext.restart;
        break;
      }
      ends.push_back(ext.end);
    }
    if (restart) {
      at = *restart;
      continue;
    }
    const TreePoint a = ends.empty() ? here : ends[0];
    const TreePoint b = ends.size() < 2 ? here : ends[1];
    return finish(tree, mu, loss, a, b);
  }
  throw Error(ErrorCode::NumericalInconsistency, "descent walk did not terminate");
}

FirstOrderCheck check_first_order(const MetricTree& tree, const TreeMeasure& mu,
                                  const LossFunction& loss, const TreePoint& alpha,
                                  double tol_deriv) {
  FirstOrderCheck out{true, neighbor_derivatives(tree, mu, loss, alpha)};
  for (const auto& d : out.derivatives) {
    if (d.value < -tol_deriv) out.minimizer = false;
  }
  return out;
}

bool same_location(const MetricTree& tree, const LossFunction& loss, const TreePoint& p,
                   const TreePoint& q, const Tolerances& tol) {
  (void)loss;
  return p == q || tree.distance(p, q) <= tol.pos;
}

StickinessReport classify_stickiness(const MetricTree& tree, const TreeMeasure& mu,
                                     const LossFunction& loss, const TreePoint& c,
                                     std::optional<Tolerances> tol_in) {
  check_tree(tree, mu);
  const Tolerances tol = tol_in.value_or(default_tolerances(tree, loss));
  check_tolerances(tol);
  if (!loss.flags().increasing) {
    throw Error(ErrorCode::NotIncreasingLoss, "stickiness needs an increasing loss");
  }

  StickinessReport report{c, Stickiness::Sticky, {}, {}, {}, std::nullopt, std::nullopt};
  std::vector<std::size_t> descent;
  for (const auto& d : neighbor_derivatives(tree, mu, loss, c)) {
    const std::size_t k = report.neighbors.size();
    report.neighbors.push_back(d.toward);
    report.derivatives.push_back(d.value);
    const double mag = std::abs(d.value);
    if (mag > tol.deriv && mag < 2.0 * tol.deriv) {
      throw Error(ErrorCode::AmbiguousClassification,
                  "derivative " + std::to_string(d.value) + " is within twice the zero band");
    }
    if (d.value < -tol.deriv) {
      descent.push_back(k);
    } else if (mag <= tol.deriv) {
      report.zero_indices.push_back(k);
    }
  }

  if (descent.size() > 1) {
    throw Error(ErrorCode::NumericalInconsistency, "two descent directions");
  }
  if (descent.size() == 1) {
    report.classification = Stickiness::Nonsticky;
    report.descent_index = descent.front();
    report.zero_indices.clear();
    return report;
  }
  if (!report.zero_indices.empty()) {
    if (report.zero_indices.size() > 2) {
      throw Error(ErrorCode::AmbiguousClassification, "more than two zero derivatives");
    }
    report.classification = Stickiness::PartlySticky;
    return report;
  }

  // A single-vertex tree leaves no room to move: any perturbation keeps M = {c}.
  double smallest = 4.0 * loss.dplus(tree.diameter());
  for (double d : report.derivatives) smallest = std::min(smallest, d);
  const double scale = loss.dplus(tree.diameter());
  report.robustness_radius = report.derivatives.empty() ? 1.0 : smallest / (4.0 * scale);

  const MinimizerSet m = minimizer_set(tree, mu, loss, tol);
  if (!same_location(tree, loss, m.segment.a, c, tol) ||
      !same_location(tree, loss, m.segment.b, c, tol)) {
    throw Error(ErrorCode::NumericalInconsistency, "sticky point is not the unique minimizer");
  }
  return report;
}

bool perturb_and_recheck(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                         const TreePoint& c, double eps, std::optional<Tolerances> tol_in) {
  const Tolerances tol = tol_in.value_or(default_tolerances(tree, loss));
  const StickinessReport report = classify_stickiness(tree, mu, loss, c, tol);
  if (report.classification != Stickiness::Sticky) {
    throw Error(ErrorCode::NotSticky, std::string("point is ") + to_string(report.classification));
  }
  for (VertexId leaf : tree.leaves()) {
    const TreeMeasure nu = mix_with_atom(mu, TreePoint::at_vertex(leaf), eps);
    const MinimizerSet m = minimizer_set(tree, nu, loss, tol);
    if (!same_location(tree, loss, m.segment.a, c, tol) ||
        !same_location(tree, loss, m.segment.b, c, tol)) {
      return false;
    }
  }
  return true;
}

}  // namespace frechet_tree
