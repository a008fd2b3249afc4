#pragma once

#include <optional>
#include <vector>

#include "frechet_tree/loss.hpp"
#include "frechet_tree/measure.hpp"
#include "frechet_tree/metric_tree.hpp"

namespace frechet_tree {

struct Tolerances {
  double pos;    // positional accuracy of bisection-based endpoints
  double deriv;  // zero band for directional derivatives
};

/// tol_deriv = 1e-9 max(1, l'_+(D)), tol_pos = 1e-9 D.
Tolerances default_tolerances(const MetricTree& tree, const LossFunction& loss);

/// phi'_v(alpha) = outside_term - inside_term, where the inside term integrates
/// l'_- over T_{alpha->v} and the outside term integrates l'_+ over the rest.
struct DirectionalDerivative {
  TreePoint at;
  TreePoint toward;
  double value;
  double outside_term;
  double inside_term;
};

struct MinimizerSet {
  GeodesicSegment segment;
  double value;
  /// Derivatives at both endpoints toward every neighboring vertex.
  std::vector<DirectionalDerivative> certificate;

  bool degenerate() const noexcept { return segment.a == segment.b; }
};

struct FirstOrderCheck {
  bool minimizer;
  std::vector<DirectionalDerivative> derivatives;
};

enum class Stickiness { Sticky, PartlySticky, Nonsticky };

struct StickinessReport {
  TreePoint point;
  Stickiness classification;
  std::vector<TreePoint> neighbors;
  std::vector<double> derivatives;        // toward each neighbor, same order
  std::vector<std::size_t> zero_indices;  // I, for partly sticky points
  std::optional<std::size_t> descent_index;
  std::optional<double> robustness_radius;  // sticky only
};

const char* to_string(Stickiness s);

double objective_value(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                       const TreePoint& alpha);

DirectionalDerivative directional_derivative(const MetricTree& tree, const TreeMeasure& mu,
                                             const LossFunction& loss, const TreePoint& alpha,
                                             const TreePoint& toward);

/// Derivatives toward every neighboring vertex of alpha, in
/// MetricTree::neighboring_points() order, from a single pass over mu.
std::vector<DirectionalDerivative> neighbor_derivatives(const MetricTree& tree,
                                                        const TreeMeasure& mu,
                                                        const LossFunction& loss,
                                                        const TreePoint& alpha);

/// (phi(gamma_t) - phi(alpha)) / (t d(alpha, v)) with gamma the geodesic from
/// alpha to v, for t in (0, 1].
double difference_quotient(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                           const TreePoint& alpha, const TreePoint& toward, double t);

MinimizerSet minimizer_set(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                           std::optional<Tolerances> tol = std::nullopt);

FirstOrderCheck check_first_order(const MetricTree& tree, const TreeMeasure& mu,
                                  const LossFunction& loss, const TreePoint& alpha,
                                  double tol_deriv);

StickinessReport classify_stickiness(const MetricTree& tree, const TreeMeasure& mu,
                                     const LossFunction& loss, const TreePoint& c,
                                     std::optional<Tolerances> tol = std::nullopt);

/// True when M(nu) = {c} for every mixture nu = (1 - eps) mu + eps delta_w
/// over the leaves w.
bool perturb_and_recheck(const MetricTree& tree, const TreeMeasure& mu, const LossFunction& loss,
                         const TreePoint& c, double eps,
                         std::optional<Tolerances> tol = std::nullopt);

/// Whether p equals q, up to tol.pos for losses located by bisection.
bool same_location(const MetricTree& tree, const LossFunction& loss, const TreePoint& p,
                   const TreePoint& q, const Tolerances& tol);

}  // namespace frechet_tree
