#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frechet_tree/loss.hpp"
#include "frechet_tree/measure.hpp"
#include "frechet_tree/metric_tree.hpp"
#include "frechet_tree/solver.hpp"

namespace frechet_tree {

enum class Sidedness { Two, One };

/// Which point of the empirical minimizer segment stands in for the estimator.
enum class Selection { Midpoint, Left, Right };

/// Local behavior of the branch mass near the center: K t^a.
struct Expansion {
  double a;
  double K;
};

struct ExperimentConfig {
  std::shared_ptr<const TreeMeasure> measure;
  LossFunction loss = make_loss(LossSpec::power(1.0));
  std::size_t n = 100;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  TreePoint point = TreePoint::at_vertex(0);
  std::optional<Expansion> expansion;
  Sidedness sidedness = Sidedness::Two;
  std::vector<double> thresholds;
  Selection selection = Selection::Midpoint;
  std::optional<Stickiness> expect;
  std::optional<double> ks_threshold;
  std::optional<Tolerances> tolerances;
  unsigned threads = 0;  // 0: one per hardware thread
};

/// One verdict line: `empirical relation reference`, with the binomial
/// standard error of the empirical frequency where it applies.
struct ReportRow {
  std::string label;
  double parameter = 0.0;
  double empirical = 0.0;
  double sigma = 0.0;
  double reference = 0.0;
  std::string relation;  // ">=", "<=", "==" or "none"
  std::size_t count = 0;
  bool pass = true;
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::string loss;
  TreePoint point = TreePoint::at_vertex(0);
  std::string classification;
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, double>> statistics;
  bool pass = true;
  double runtime_seconds = 0.0;  // informational; not part of serialized output

  std::optional<double> statistic(const std::string& name) const;
};

ExperimentReport run_lln_experiment(const ExperimentConfig& config);
ExperimentReport run_clt_experiment(const ExperimentConfig& config);
ExperimentReport run_concentration_experiment(const ExperimentConfig& config);
ExperimentReport run_onesided_location_experiment(const ExperimentConfig& config);

struct BruteForceResult {
  std::vector<TreePoint> points;  // grid points within best + l'_+(D) h
  TreePoint best_point = TreePoint::at_vertex(0);
  double best_value = 0.0;
};

/// Objective on every vertex and an h-grid of every edge.
BruteForceResult brute_force_minimizer(const MetricTree& tree, const TreeMeasure& mu,
                                       const LossFunction& loss, double h);

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and a
/// CDF with left limits `cdf_left`; `jumps` lists the atoms of the reference.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left, const std::vector<double>& jumps);

double normal_cdf(double x);

/// Limit CDF of the rescaled median: two-sided sgn(Z)(|Z|/2K)^{1/a}, one-sided
/// max(0, Z)^{1/a} / 2K.
double limit_cdf(Sidedness side, const Expansion& e, double x);

}  // namespace frechet_tree
