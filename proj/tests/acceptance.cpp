#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <tuple>

#include "frechet_tree/harness.hpp"
#include "frechet_tree/io.hpp"
#include "frechet_tree/solver.hpp"
#include "support.hpp"

using namespace frechet_tree;
using namespace frechet_tree::testing;

namespace {

constexpr std::uint64_t kSeed = 20240611;
const LossFunction kMedian = make_loss(LossSpec::power(1.0));

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double x) { return format_number(x); }

double to_skeleton(const MetricTree& tree, const TreeMeasure& mu, const TreePoint& x) {
  double best = INFINITY;
  for (VertexId v = 0; v < tree.num_vertices(); ++v) {
    best = std::min(best, tree.distance(x, TreePoint::at_vertex(v)));
  }
  for (const auto& a : mu.atoms()) best = std::min(best, tree.distance(x, a.at));
  return best;
}

struct Instance {
  TreePtr tree;
  TreeMeasure mu;
  TreePoint alpha;
};

std::vector<Instance> random_instances(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto t = random_tree(gen);
    auto mu = random_discrete(gen, t);
    const auto alpha = random_point(gen, *t);
    out.push_back({std::move(t), std::move(mu), alpha});
  }
  return out;
}

ExperimentConfig config_for(const TreeMeasure& mu, TreePoint point, std::size_t n,
                            std::size_t trials) {
  ExperimentConfig c;
  c.measure = std::make_shared<const TreeMeasure>(mu);
  c.point = point;
  c.n = n;
  c.trials = trials;
  c.seed = kSeed;
  return c;
}

ExperimentConfig lln_config() {
  auto c = config_for(half_legs(spider()), TreePoint::at_vertex(0), 200, 2000);
  c.expect = Stickiness::Sticky;
  return c;
}

ExperimentConfig two_sided_clt_config() {
  const auto e = segment_tree(2.0);
  auto c = config_for(uniform_on_edge(e), e->edge_point(0, 1.0), 10000, 2000);
  c.expansion = Expansion{1.0, 0.5};
  c.ks_threshold = 0.05;
  return c;
}

ExperimentConfig one_sided_clt_config() {
  auto c = config_for(one_sided(spider()), TreePoint::at_vertex(0), 10000, 2000);
  c.expansion = Expansion{1.0, 0.25};
  c.sidedness = Sidedness::One;
  c.ks_threshold = 0.05;
  return c;
}

ExperimentConfig concentration_config() {
  const auto e = segment_tree(2.0);
  auto c = config_for(uniform_on_edge(e), e->edge_point(0, 1.0), 100, 5000);
  c.thresholds = {0.1, 0.2, 0.3};
  return c;
}

ExperimentConfig location_config() {
  return config_for(one_sided(spider()), TreePoint::at_vertex(0), 100, 5000);
}

using Runner = ExperimentReport (*)(const ExperimentConfig&);

std::string report_bytes(ExperimentConfig c, Runner run, unsigned threads) {
  c.threads = threads;
  return to_json(c.measure->tree(), run(c)).dump();
}

}  // namespace

int main() {
  const auto instances = random_instances(200, kSeed);

  criterion(1, "median derivative identity", [&] {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t checked = 0;
    for (const auto& in : instances) {
      for (const auto& d : neighbor_derivatives(*in.tree, in.mu, kMedian, in.alpha)) {
        const double mass = subtree_mass(in.mu, in.tree->subtree_toward(in.alpha, d.toward));
        worst = std::max(worst, std::abs(d.value - (1.0 - 2.0 * mass)));
        ++checked;
      }
    }
    const double secs = elapsed_since(start);
    return Outcome{worst <= 1e-12 && secs < 10.0,
                   std::to_string(checked) + " directions, max error " + num(worst)};
  });

  criterion(2, "grid oracle agreement", [&] {
    const auto start = std::chrono::steady_clock::now();
    const double h = 1e-3;
    const std::vector<LossFunction> losses{parse_loss("power:p=1"), parse_loss("power:p=1.5"),
                                           parse_loss("power:p=2"), parse_loss("huber:c=0.5")};
    std::size_t bad = 0;
    for (const auto& in : instances) {
      for (const auto& loss : losses) {
        const auto m = minimizer_set(*in.tree, in.mu, loss);
        const auto oracle = brute_force_minimizer(*in.tree, in.mu, loss, h);
        bool ok = m.value <= oracle.best_value + loss.dplus(in.tree->diameter()) * h;
        for (int k = 0; k <= 4 && ok; ++k) {
          const auto x = in.tree->point_at(m.segment.a, m.segment.b, m.segment.length * k / 4.0);
          double nearest = INFINITY;
          for (const auto& p : oracle.points) nearest = std::min(nearest, in.tree->distance(x, p));
          ok = nearest <= h + 1e-9;
        }
        if (!ok) ++bad;
      }
    }
    const double secs = elapsed_since(start);
    return Outcome{bad == 0 && secs < 120.0,
                   std::to_string(instances.size() * losses.size()) + " instances, " +
                       std::to_string(bad) + " disagreements"};
  });

  criterion(3, "spider stickiness", [&] {
    const auto s = spider();
    const auto mu = half_legs(s);
    const auto c = TreePoint::at_vertex(0);
    double worst = 0.0;
    for (const auto& d : neighbor_derivatives(*s, mu, kMedian, c)) {
      worst = std::max(worst, std::abs(d.value - 1.0 / 3.0));
    }
    const auto report = classify_stickiness(*s, mu, kMedian, c);
    const auto m = minimizer_set(*s, mu, kMedian);
    const bool perturbed = perturb_and_recheck(*s, mu, kMedian, c, 1.0 / 12.0);
    const bool ok = worst <= 1e-12 && report.classification == Stickiness::Sticky && m.degenerate() &&
                    same_location(*s, kMedian, m.segment.a, c, default_tolerances(*s, kMedian)) && perturbed;
    return Outcome{ok, "derivative error " + num(worst) + ", " + to_string(report.classification) +
                           (perturbed ? ", perturbation holds" : ", perturbation fails")};
  });

  criterion(4, "sticky law of large numbers", [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_lln_experiment(lln_config());
    const auto& row = r.rows.at(0);
    const double secs = elapsed_since(start);
    return Outcome{row.empirical >= 0.999 && secs < 60.0,
                   "frequency " + num(row.empirical) + ", floor " + num(row.reference)};
  });

  criterion(5, "partly sticky balanced edge", [&] {
    const auto e = segment_tree(1.0);
    const auto r =
        run_lln_experiment(config_for(balanced_ends(e), e->edge_point(0, 0.5), 200, 2000));
    const auto& row = r.rows.at(0);
    return Outcome{r.classification == "partly_sticky" && row.count == 2000 && row.empirical == 1.0,
                   r.classification + ", " + std::to_string(row.count) + " of 2000 trials"};
  });

  criterion(6, "two-sided CLT", [&] {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_clt_experiment(two_sided_clt_config());
    const double ks = r.statistic("ks_distance").value();
    const double secs = elapsed_since(start);
    return Outcome{ks <= 0.05 && secs < 300.0, "KS " + num(ks)};
  });

  criterion(7, "one-sided CLT", [&] {
    const auto r = run_clt_experiment(one_sided_clt_config());
    const double ks = r.statistic("ks_distance").value();
    const double zero = r.statistic("mass_at_zero").value();
    return Outcome{ks <= 0.05 && zero >= 0.46 && zero <= 0.54,
                   "KS " + num(ks) + ", mass at zero " + num(zero)};
  });

  criterion(8, "two-sided concentration", [&] {
    const auto r = run_concentration_experiment(concentration_config());
    bool ok = true;
    std::string detail;
    for (const auto& row : r.rows) {
      if (row.label != "tail") continue;
      const double slack = 3.0 * std::sqrt(std::min(row.reference, 1.0) *
                                            (1.0 - std::min(row.reference, 1.0)) / 5000.0);
      const double bound = 2.0 * std::pow(1.0 - row.parameter * row.parameter, 50);
      ok = ok && std::abs(row.reference - bound) <= 1e-12 && row.empirical <= bound + slack;
      detail += "t=" + num(row.parameter) + ": " + num(row.empirical) + " <= " + num(bound) + "; ";
    }
    return Outcome{ok, detail.substr(0, detail.size() - 2)};
  });

  criterion(9, "one-sided location", [&] {
    const auto r = run_onesided_location_experiment(location_config());
    const auto& row = r.rows.at(0);
    const double floor = 1.0 - 2.0 * std::exp(-100.0 / 16.0);
    const double slack = 3.0 * std::sqrt(floor * (1.0 - floor) / 5000.0);
    return Outcome{std::abs(row.reference - floor) <= 1e-12 && row.empirical >= floor - slack,
                   "frequency " + num(row.empirical) + ", floor " + num(floor)};
  });

  criterion(10, "median endpoints", [&] {
    std::mt19937_64 gen(kSeed + 10);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const auto t = random_tree(gen);
      const auto mu = random_discrete(gen, t);
      const auto m = minimizer_set(*t, mu, kMedian);
      worst = std::max({worst, to_skeleton(*t, mu, m.segment.a), to_skeleton(*t, mu, m.segment.b)});
    }
    return Outcome{worst <= 1e-9, "500 instances, max distance " + num(worst)};
  });

  criterion(11, "projection constancy", [&] {
    std::mt19937_64 gen(kSeed + 11);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto t = random_tree(gen);
      const auto mu = random_discrete(gen, t);
      const auto g = t->segment(random_point(gen, *t), random_point(gen, *t));
      const auto p = pushforward_projection(mu, g);
      double lo = INFINITY;
      double hi = -INFINITY;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int k = 0; k < 50; ++k) {
        const auto alpha = t->point_at(g.a, g.b, g.length * unit(gen));
        const double shift =
            objective_value(*t, mu, kMedian, alpha) - objective_value(*t, p, kMedian, alpha);
        lo = std::min(lo, shift);
        hi = std::max(hi, shift);
      }
      worst = std::max(worst, hi - lo);
    }
    return Outcome{worst <= 1e-9, "100 segments, max spread " + num(worst)};
  });

  criterion(12, "determinism", [&] {
    const std::vector<std::tuple<const char*, ExperimentConfig, Runner>> runs{
        {"lln", lln_config(), run_lln_experiment},
        {"clt2", two_sided_clt_config(), run_clt_experiment},
        {"clt1", one_sided_clt_config(), run_clt_experiment},
        {"conc", concentration_config(), run_concentration_experiment},
        {"loc", location_config(), run_onesided_location_experiment},
    };
    std::string differing;
    for (const auto& [name, config, run] : runs) {
      if (report_bytes(config, run, 1) != report_bytes(config, run, 3)) {
        differing += std::string(" ") + name;
      }
    }
    return Outcome{differing.empty(), differing.empty() ? "5 reports byte-identical across reruns"
                                                        : "differing:" + differing};
  });

  return failures == 0 ? 0 : 1;
}
