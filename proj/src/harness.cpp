#include "frechet_tree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace frechet_tree {

namespace {

constexpr double kSlackSigmas = 3.0;

struct Context {
  const MetricTree& tree;
  const TreeMeasure& mu;
  const LossFunction& loss;
  Tolerances tol;
};

Context context(const ExperimentConfig& config) {
  if (!config.measure) throw Error(ErrorCode::InvalidParameter, "experiment without a measure");
  if (config.n < 1) throw Error(ErrorCode::InvalidParameter, "n must be at least 1");
  if (config.trials < 1) throw Error(ErrorCode::InvalidParameter, "trials must be at least 1");
  if (config.expansion && !(config.expansion->a > 0.0 && config.expansion->K > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "expansion parameters must be positive");
  }
  const MetricTree& tree = config.measure->tree();
  config.measure->tree().validate(config.point);
  return {tree, *config.measure, config.loss,
          config.tolerances.value_or(default_tolerances(tree, config.loss))};
}

void require_median(const ExperimentConfig& config) {
  if (!config.loss.is_median()) {
    throw Error(ErrorCode::UnsupportedLoss,
                "experiment is defined for the median only, got " + config.loss.describe());
  }
}

/// Runs trial(index) for every trial, concurrently, and returns the results in
/// trial order. The first failure by trial index is rethrown.
template <class Result, class Fn>
std::vector<Result> run_trials(const ExperimentConfig& config, Fn trial) {
  std::vector<Result> results(config.trials);
  std::vector<std::exception_ptr> errors(config.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < config.trials; i = next++) {
      try {
        results[i] = trial(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.trials)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// The estimator for one trial: n draws from mu on stream (seed, index).
struct Estimate {
  GeodesicSegment segment;
  TreePoint selected = TreePoint::at_vertex(0);
};

Estimate estimate(const ExperimentConfig& config, const Context& ctx, std::size_t index) {
  CounterRng rng(config.seed, index);
  std::vector<TreePoint> draws;
  draws.reserve(config.n);
  for (std::size_t k = 0; k < config.n; ++k) draws.push_back(ctx.mu.sample(rng));
  const TreeMeasure empirical = empirical_measure(ctx.mu.shared_tree(), draws);
  Estimate out;
  out.segment = minimizer_set(ctx.tree, empirical, ctx.loss, ctx.tol).segment;
  switch (config.selection) {
    case Selection::Midpoint:
      out.selected = ctx.tree.point_at(out.segment.a, out.segment.b, 0.5 * out.segment.length);
      break;
    case Selection::Left: out.selected = out.segment.a; break;
    case Selection::Right: out.selected = out.segment.b; break;
  }
  return out;
}

double binomial_sigma(double p, std::size_t trials) {
  p = std::clamp(p, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

/// (1 - x)^{n/2}, with the base clamped into [0, 1].
double tail_power(double base, std::size_t n) {
  return std::pow(std::clamp(base, 0.0, 1.0), 0.5 * static_cast<double>(n));
}

ReportRow floor_row(std::string label, double parameter, std::size_t count, std::size_t trials,
                    double floor) {
  ReportRow row;
  row.label = std::move(label);
  row.parameter = parameter;
  row.count = count;
  row.empirical = static_cast<double>(count) / static_cast<double>(trials);
  row.sigma = binomial_sigma(floor, trials);
  row.reference = floor;
  row.relation = ">=";
  row.pass = row.empirical >= floor - kSlackSigmas * row.sigma;
  return row;
}

ReportRow bound_row(std::string label, double parameter, std::size_t count, std::size_t trials,
                    double bound) {
  ReportRow row;
  row.label = std::move(label);
  row.parameter = parameter;
  row.count = count;
  row.empirical = static_cast<double>(count) / static_cast<double>(trials);
  row.sigma = binomial_sigma(bound, trials);
  row.reference = bound;
  row.relation = "<=";
  row.pass = row.empirical <= bound + kSlackSigmas * row.sigma;
  return row;
}

ExperimentReport start_report(const std::string& name, const ExperimentConfig& config) {
  ExperimentReport r;
  r.experiment = name;
  r.seed = config.seed;
  r.n = config.n;
  r.trials = config.trials;
  r.loss = config.loss.describe();
  r.point = config.point;
  return r;
}

void finish_report(ExperimentReport& r, std::chrono::steady_clock::time_point start) {
  r.pass = std::all_of(r.rows.begin(), r.rows.end(), [](const ReportRow& row) { return row.pass; });
  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool in_component(const Context& ctx, const TreePoint& center, const TreePoint& x, VertexId toward) {
  return !same_location(ctx.tree, ctx.loss, x, center, ctx.tol) &&
         ctx.tree.direction(center, x) == toward;
}

/// The partly sticky structure around the center: the zero directions and the
/// segment G the estimator is projected onto.
struct PartlySticky {
  StickinessReport report;
  std::vector<VertexId> zero;  // v_1 (and v_2)
  GeodesicSegment g;
};

PartlySticky partly_sticky(const ExperimentConfig& config, const Context& ctx) {
  PartlySticky out{classify_stickiness(ctx.tree, ctx.mu, ctx.loss, config.point, ctx.tol), {}, GeodesicSegment{}};
  const std::size_t want = config.sidedness == Sidedness::Two ? 2 : 1;
  if (out.report.classification != Stickiness::PartlySticky ||
      out.report.zero_indices.size() != want) {
    throw Error(ErrorCode::NotPartlySticky,
                std::string("center is ") + to_string(out.report.classification) + " with " +
                    std::to_string(out.report.zero_indices.size()) + " zero derivatives, need " +
                    std::to_string(want));
  }
  for (std::size_t i : out.report.zero_indices) {
    out.zero.push_back(out.report.neighbors[i].vertex());
  }
  const TreePoint v1 = TreePoint::at_vertex(out.zero[0]);
  out.g = want == 2 ? ctx.tree.segment(v1, TreePoint::at_vertex(out.zero[1]))
                    : ctx.tree.segment(config.point, v1);
  return out;
}

/// Mass of the open geodesic interval from the center to a neighbor.
double open_branch_mass(const Context& ctx, const TreePoint& center, VertexId v) {
  const BranchMassFunction f(ctx.mu, center, TreePoint::at_vertex(v));
  return f(f.reach());
}

/// Upper bound on P(estimator outside G).
double omega_complement_bound(const ExperimentConfig& config, const Context& ctx,
                              const PartlySticky& ps) {
  const std::size_t n = config.n;
  double bound = 0.0;
  if (config.sidedness == Sidedness::Two) {
    for (VertexId v : ps.zero) {
      const double m = open_branch_mass(ctx, config.point, v);
      bound += tail_power(1.0 - 4.0 * m * m, n);
    }
  } else {
    const double m = open_branch_mass(ctx, config.point, ps.zero[0]);
    bound += tail_power(1.0 - 4.0 * m * m, n);
    for (const auto& v : ps.report.neighbors) {
      if (v.vertex() == ps.zero[0]) continue;
      const double p = subtree_mass(ctx.mu, ctx.tree.subtree_toward(config.point, v));
      bound += tail_power(4.0 * p * (1.0 - p), n);
    }
  }
  return std::min(bound, 1.0);
}

}  // namespace

std::optional<double> ExperimentReport::statistic(const std::string& name) const {
  for (const auto& [key, value] : statistics) {
    if (key == name) return value;
  }
  return std::nullopt;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double limit_cdf(Sidedness side, const Expansion& e, double x) {
  if (side == Sidedness::Two) {
    const double s = x < 0.0 ? -1.0 : 1.0;
    return normal_cdf(2.0 * e.K * s * std::pow(std::abs(x), e.a));
  }
  if (x < 0.0) return 0.0;
  return normal_cdf(std::pow(2.0 * e.K * x, e.a));
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left, const std::vector<double>& jumps) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "no samples for the KS distance");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto below = [&](double x) {  // #{s < x}
    return static_cast<double>(std::lower_bound(samples.begin(), samples.end(), x) - samples.begin());
  };
  auto at_most = [&](double x) {  // #{s <= x}
    return static_cast<double>(std::upper_bound(samples.begin(), samples.end(), x) - samples.begin());
  };
  double d = 0.0;
  auto probe = [&](double x) {
    d = std::max(d, std::abs(at_most(x) / n - cdf(x)));
    d = std::max(d, std::abs(below(x) / n - cdf_left(x)));
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i] == samples[i - 1]) continue;
    probe(samples[i]);
  }
  for (double x : jumps) probe(x);
  return d;
}

BruteForceResult brute_force_minimizer(const MetricTree& tree, const TreeMeasure& mu,
                                       const LossFunction& loss, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid step must be positive");
  std::vector<std::pair<TreePoint, double>> grid;
  for (VertexId v = 0; v < tree.num_vertices(); ++v) {
    const TreePoint p = TreePoint::at_vertex(v);
    grid.emplace_back(p, objective_value(tree, mu, loss, p));
  }
  for (EdgeId e = 0; e < tree.num_edges(); ++e) {
    const double len = tree.edge(e).length;
    const auto steps = static_cast<std::size_t>(std::ceil(len / h));
    for (std::size_t k = 1; k < steps; ++k) {
      const TreePoint p = tree.edge_point(e, len * static_cast<double>(k) / static_cast<double>(steps));
      grid.emplace_back(p, objective_value(tree, mu, loss, p));
    }
  }
  BruteForceResult out;
  out.best_point = grid.front().first;
  out.best_value = grid.front().second;
  for (const auto& [p, value] : grid) {
    if (value < out.best_value) {
      out.best_value = value;
      out.best_point = p;
    }
  }
  const double cutoff = out.best_value + loss.dplus(tree.diameter()) * h;
  for (const auto& [p, value] : grid) {
    if (value <= cutoff) out.points.push_back(p);
  }
  return out;
}

ExperimentReport run_lln_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = context(config);
  const StickinessReport cls = classify_stickiness(ctx.tree, ctx.mu, ctx.loss, config.point, ctx.tol);
  if (config.expect && *config.expect != cls.classification) {
    throw Error(ErrorCode::ClassificationMismatch,
                std::string("expected ") + to_string(*config.expect) + ", found " +
                    to_string(cls.classification));
  }

  // Directions the empirical minimizers may occupy, and those whose
  // derivatives enter the probability floor.
  std::vector<VertexId> allowed;
  std::vector<std::size_t> bounded;
  bool center_allowed = true;
  switch (cls.classification) {
    case Stickiness::Sticky:
      for (std::size_t i = 0; i < cls.derivatives.size(); ++i) bounded.push_back(i);
      break;
    case Stickiness::PartlySticky:
      for (std::size_t i : cls.zero_indices) allowed.push_back(cls.neighbors[i].vertex());
      if (cls.zero_indices.size() == 1) {
        for (std::size_t i = 0; i < cls.derivatives.size(); ++i) {
          if (i != cls.zero_indices.front()) bounded.push_back(i);
        }
      }
      break;
    case Stickiness::Nonsticky:
      allowed.push_back(cls.neighbors[*cls.descent_index].vertex());
      bounded.push_back(*cls.descent_index);
      center_allowed = false;
      break;
  }
  const double slope = ctx.loss.dplus(ctx.tree.diameter());
  double floor = 1.0;
  for (std::size_t i : bounded) {
    const double d = cls.derivatives[i];
    floor -= std::exp(-d * d * static_cast<double>(config.n) / (2.0 * slope * slope));
  }

  auto inside = [&](const TreePoint& x) {
    if (same_location(ctx.tree, ctx.loss, x, config.point, ctx.tol)) return center_allowed;
    const VertexId dir = ctx.tree.direction(config.point, x);
    return std::find(allowed.begin(), allowed.end(), dir) != allowed.end();
  };
  const auto hits = run_trials<char>(config, [&](std::size_t i) -> char {
    const Estimate e = estimate(config, ctx, i);
    return inside(e.segment.a) && inside(e.segment.b);
  });
  const auto count = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));

  ExperimentReport r = start_report("lln", config);
  r.classification = to_string(cls.classification);
  r.rows.push_back(floor_row("event", static_cast<double>(config.n), count, config.trials, floor));
  r.statistics.emplace_back("floor", floor);
  for (std::size_t i = 0; i < cls.derivatives.size(); ++i) {
    r.statistics.emplace_back("derivative_" + std::to_string(i), cls.derivatives[i]);
  }
  finish_report(r, start);
  return r;
}

ExperimentReport run_clt_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = context(config);
  require_median(config);
  if (!config.expansion) throw Error(ErrorCode::InvalidParameter, "CLT needs expansion (a, K)");
  const Expansion ex = *config.expansion;
  const PartlySticky ps = partly_sticky(config, ctx);
  const bool two = config.sidedness == Sidedness::Two;
  if (two && ctx.mu.atom_at(config.point) > 0.0) {
    throw Error(ErrorCode::NotPartlySticky, "two-sided limit needs a center without an atom");
  }

  // Check K t^a against the branch masses on a dyadic grid toward 0.
  std::vector<BranchMassFunction> branches;
  for (VertexId v : ps.zero) branches.emplace_back(ctx.mu, config.point, TreePoint::at_vertex(v));
  double reach = branches.front().reach();
  for (const auto& b : branches) reach = std::min(reach, b.reach());
  std::vector<double> worst_ratio(branches.size(), 0.0);
  for (int k = 30; k <= 40; ++k) {
    const double t = std::ldexp(reach, -k);
    for (std::size_t j = 0; j < branches.size(); ++j) {
      const double ratio = branches[j](t) / (ex.K * std::pow(t, ex.a));
      worst_ratio[j] = std::max(worst_ratio[j], std::abs(ratio - 1.0));
    }
  }
  for (double w : worst_ratio) {
    if (!(w <= 0.05)) {
      throw Error(ErrorCode::ExpansionMismatch,
                  "branch mass departs from K t^a by a relative " + std::to_string(w) +
                      " near the center");
    }
  }

  const double scale = std::pow(static_cast<double>(config.n), 1.0 / (2.0 * ex.a));
  struct Trial {
    double statistic = 0.0;
    char in_g = 0;
  };
  const auto results = run_trials<Trial>(config, [&](std::size_t i) {
    const Estimate e = estimate(config, ctx, i);
    const TreePoint p = ctx.tree.project_to_segment(ps.g, e.selected);
    double m = ctx.tree.distance(config.point, p);
    if (two && m > 0.0 && ctx.tree.direction(config.point, p) == ps.zero[0]) m = -m;
    return Trial{scale * m, static_cast<char>(ctx.tree.on_segment(ps.g, e.selected))};
  });

  std::vector<double> stats;
  std::size_t zeros = 0;
  std::size_t in_g = 0;
  double mean = 0.0;
  for (const auto& t : results) {
    stats.push_back(t.statistic);
    zeros += t.statistic == 0.0;
    in_g += t.in_g;
    mean += t.statistic;
  }
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  var /= static_cast<double>(stats.size());

  const Sidedness side = config.sidedness;
  auto cdf = [&](double x) { return limit_cdf(side, ex, x); };
  auto cdf_left = [&](double x) {
    return side == Sidedness::One && x == 0.0 ? 0.0 : limit_cdf(side, ex, x);
  };
  std::vector<double> jumps;
  if (!two) jumps.push_back(0.0);
  const double ks = ks_distance(stats, cdf, cdf_left, jumps);

  ExperimentReport r = start_report("clt", config);
  r.classification = to_string(ps.report.classification);
  ReportRow row;
  row.label = "ks";
  row.parameter = static_cast<double>(config.n);
  row.empirical = ks;
  row.count = config.trials;
  if (config.ks_threshold) {
    row.reference = *config.ks_threshold;
    row.relation = "<=";
    row.pass = ks <= *config.ks_threshold;
  } else {
    row.relation = "none";
  }
  r.rows.push_back(row);
  r.statistics.emplace_back("ks_distance", ks);
  r.statistics.emplace_back("mass_at_zero", static_cast<double>(zeros) / stats.size());
  r.statistics.emplace_back("omega_frequency", static_cast<double>(in_g) / stats.size());
  r.statistics.emplace_back("mean", mean);
  r.statistics.emplace_back("variance", var);
  r.statistics.emplace_back("a", ex.a);
  r.statistics.emplace_back("K", ex.K);
  for (std::size_t j = 0; j < worst_ratio.size(); ++j) {
    r.statistics.emplace_back("expansion_error_" + std::to_string(j), worst_ratio[j]);
  }
  finish_report(r, start);
  return r;
}

ExperimentReport run_concentration_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = context(config);
  require_median(config);
  for (double t : config.thresholds) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::ThresholdOutOfRange, "threshold " + std::to_string(t));
    }
  }
  const PartlySticky ps = partly_sticky(config, ctx);
  const double omega_c = omega_complement_bound(config, ctx, ps);
  const std::size_t n = config.n;

  // Bound terms per neighbor: zero directions use the branch mass, the
  // others (one-sided case) add their derivative.
  struct Branch {
    BranchMassFunction f;
    bool zero;
    double derivative;
  };
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < ps.report.neighbors.size(); ++i) {
    const VertexId v = ps.report.neighbors[i].vertex();
    const bool zero = std::find(ps.zero.begin(), ps.zero.end(), v) != ps.zero.end();
    if (config.sidedness == Sidedness::Two && !zero) continue;
    branches.push_back({BranchMassFunction(ctx.mu, config.point, ps.report.neighbors[i]), zero,
                        ps.report.derivatives[i]});
  }
  auto bound = [&](double t) {
    double b = 0.0;
    for (const auto& br : branches) {
      if (t > br.f.reach()) {
        b += omega_c;
        continue;
      }
      const double delta = br.f(t);
      const double x = br.zero ? 2.0 * delta : 2.0 * delta + br.derivative;
      b += tail_power(1.0 - x * x, n);
    }
    return b;
  };

  struct Trial {
    double distance = 0.0;
    char in_g = 0;
  };
  const auto results = run_trials<Trial>(config, [&](std::size_t i) {
    const Estimate e = estimate(config, ctx, i);
    return Trial{ctx.tree.distance(e.selected, config.point),
                 static_cast<char>(ctx.tree.on_segment(ps.g, e.selected))};
  });

  ExperimentReport r = start_report("concentration", config);
  r.classification = to_string(ps.report.classification);
  for (double t : config.thresholds) {
    std::size_t count = 0;
    for (const auto& tr : results) count += tr.distance >= t;
    r.rows.push_back(bound_row("tail", t, count, config.trials, bound(t)));
  }
  std::size_t in_g = 0;
  for (const auto& tr : results) in_g += tr.in_g;
  r.rows.push_back(floor_row("omega", static_cast<double>(n), in_g, config.trials, 1.0 - omega_c));
  r.statistics.emplace_back("omega_complement_bound", omega_c);
  finish_report(r, start);
  return r;
}

ExperimentReport run_onesided_location_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const Context ctx = context(config);
  require_median(config);
  if (config.n < 4) {
    throw Error(ErrorCode::SampleSizeTooSmall, "n = " + std::to_string(config.n) + " < 4");
  }
  ExperimentConfig one = config;
  one.sidedness = Sidedness::One;
  const PartlySticky ps = partly_sticky(one, ctx);
  const VertexId v1 = ps.zero[0];

  double eps = 0.5;
  for (const auto& v : ps.report.neighbors) {
    if (v.vertex() == v1) continue;
    eps = std::min(eps, 0.5 - subtree_mass(ctx.mu, ctx.tree.subtree_toward(config.point, v)));
  }
  const double floor = 1.0 - 2.0 * std::exp(-static_cast<double>(config.n) * eps * eps);

  const auto hits = run_trials<char>(config, [&](std::size_t i) -> char {
    const TreePoint x = estimate(config, ctx, i).selected;
    return same_location(ctx.tree, ctx.loss, x, config.point, ctx.tol) ||
           in_component(ctx, config.point, x, v1);
  });
  const auto count = static_cast<std::size_t>(std::count(hits.begin(), hits.end(), 1));

  ExperimentReport r = start_report("onesided_location", config);
  r.classification = to_string(ps.report.classification);
  r.rows.push_back(floor_row("location", static_cast<double>(config.n), count, config.trials, floor));
  r.statistics.emplace_back("epsilon", eps);
  finish_report(r, start);
  return r;
}

}  // namespace frechet_tree
