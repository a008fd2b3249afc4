#pragma once

#include <memory>
#include <string>

#include "json.hpp"

#include "frechet_tree/harness.hpp"
#include "frechet_tree/measure.hpp"
#include "frechet_tree/metric_tree.hpp"
#include "frechet_tree/solver.hpp"

namespace frechet_tree {

using Json = nlohmann::ordered_json;

/// Reads a whole file; FileNotFound when it cannot be opened, ParseError with
/// line and column when it is not JSON.
Json read_json_file(const std::string& path);

/// {"vertices": [ids], "edges": [{"u", "v", "length"}]}. Validation failures
/// are ValidationError with a JSON pointer, e.g. "NonpositiveLength at /edges/0".
std::shared_ptr<const MetricTree> parse_tree(const Json& doc);

/// {"atoms": [{"at": location, "w"}], "densities": [{"edge", "from", "to", "value"}]}
/// where a location is {"vertex": id} or {"edge": index, "offset": x}.
std::shared_ptr<const TreeMeasure> parse_measure(const Json& doc,
                                                 std::shared_ptr<const MetricTree> tree);

Json tree_to_json(const MetricTree& tree);
Json measure_to_json(const TreeMeasure& mu);

/// "vertex:<id>" or "edge:<index>:<offset>".
TreePoint parse_point(const MetricTree& tree, const std::string& text);
std::string format_point(const MetricTree& tree, const TreePoint& p);
Json location_json(const MetricTree& tree, const TreePoint& p);
TreePoint parse_location(const MetricTree& tree, const Json& loc, const std::string& pointer);

/// Shortest text that reads back as the same double.
std::string format_number(double x);

Json to_json(const MetricTree& tree, const DirectionalDerivative& d);
Json to_json(const MetricTree& tree, const MinimizerSet& m);
Json to_json(const MetricTree& tree, const StickinessReport& r);
/// Everything but the runtime, so equal runs serialize to equal bytes.
Json to_json(const MetricTree& tree, const ExperimentReport& r);

/// One row per verdict line, with a header; RFC 4180 quoting.
std::string to_csv(const MetricTree& tree, const ExperimentReport& r);
std::string csv_field(const std::string& s);

/// Experiment config: {"experiment": "lln" | "clt" | "concentration" |
/// "onesided_location", "n", "trials", "point", "expansion": {"a", "K"},
/// "sidedness": "two" | "one", "thresholds", "selection", "expect",
/// "ks_threshold", "threads"}. The caller supplies measure, loss and seed.
struct ExperimentSpec {
  std::string experiment;
  ExperimentConfig config;
};
ExperimentSpec parse_experiment(const Json& doc, std::shared_ptr<const TreeMeasure> measure);

ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace frechet_tree
