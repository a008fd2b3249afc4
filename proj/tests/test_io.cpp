#include "doctest.h"
#include "frechet_tree/io.hpp"
#include "support.hpp"

using namespace frechet_tree;
using namespace frechet_tree::testing;

namespace {

std::string validation_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) return e.detail();
    return "other: " + std::string(e.what());
  }
  return "no error";
}

const char* kSpider = R"({"vertices": ["C", "A", "B", "E"],
  "edges": [{"u": "C", "v": "A", "length": 2}, {"u": "C", "v": "B", "length": 2},
            {"u": "C", "v": "E", "length": 2}]})";

}  // namespace

TEST_CASE("tree files") {
  const auto t = parse_tree(Json::parse(kSpider));
  CHECK(t->num_vertices() == 4);
  CHECK(t->diameter() == 4.0);
  CHECK(validation_message([] {
          parse_tree(Json::parse(R"({"vertices": ["A", "B"], "edges": [{"u": "A", "v": "B", "length": -1}]})"));
        }).rfind("NonpositiveLength at /edges/0", 0) == 0);
  CHECK(validation_message([] {
          parse_tree(Json::parse(R"({"vertices": ["A", "B"], "edges": [{"u": "A", "v": "Z", "length": 1}]})"));
        }).rfind("UnknownVertex at /edges/0/v", 0) == 0);
  CHECK(validation_message([] {
          parse_tree(Json::parse(
              R"({"vertices": ["A", "B", "C"], "edges": [{"u": "A", "v": "B", "length": 1}]})"));
        }).rfind("Disconnected at /edges", 0) == 0);
  CHECK_THROWS_AS(parse_tree(Json::parse(R"({"edges": [{"u": "A", "v": "B"}]})")), Error);
  CHECK_THROWS_AS(parse_tree(Json::parse(R"({"edges": [], "extra": 1})")), Error);
  const auto lone = parse_tree(Json::parse(R"({"vertices": ["X"], "edges": []})"));
  CHECK(lone->num_vertices() == 1);
}

TEST_CASE("measure files") {
  const auto t = parse_tree(Json::parse(kSpider));
  const auto mu = parse_measure(Json::parse(R"({"atoms": [{"at": {"vertex": "A"}, "w": 0.5},
      {"at": {"edge": 1, "offset": 0.5}, "w": 0.25}],
      "densities": [{"edge": 2, "from": 0, "to": 1, "value": 0.25}]})"),
                                t);
  CHECK(mu->atoms().size() == 2);
  CHECK(mu->total_mass() == 1.0);
  CHECK(validation_message([&] {
          parse_measure(Json::parse(R"({"atoms": [{"at": {"vertex": "A"}, "w": 0.99}]})"), t);
        }).rfind("MassNotOne at /atoms", 0) == 0);
  CHECK(validation_message([&] {
          parse_measure(Json::parse(R"({"atoms": [{"at": {"vertex": "Q"}, "w": 1}]})"), t);
        }).rfind("UnknownVertex at /atoms/0/at/vertex", 0) == 0);
  CHECK(validation_message([&] {
          parse_measure(Json::parse(R"({"atoms": [{"at": {"vertex": "A"}, "w": -1}]})"), t);
        }).rfind("NegativeWeight at /atoms/0/w", 0) == 0);
  CHECK(validation_message([&] {
          parse_measure(Json::parse(R"({"densities": [{"edge": 0, "from": 0, "to": 2, "value": 0.25},
              {"edge": 0, "from": 1, "to": 2, "value": 0.5}]})"),
                        t);
        }).rfind("OverlappingDensityPieces at /densities", 0) == 0);
  CHECK(validation_message([&] {
          parse_measure(Json::parse(R"({"atoms": [{"at": {"edge": 0, "offset": 3}, "w": 1}]})"), t);
        }).rfind("InvalidPoint at /atoms/0/at", 0) == 0);
}

TEST_CASE("serialization round trip is idempotent") {
  std::mt19937_64 gen(17);
  for (int round = 0; round < 30; ++round) {
    const auto t = random_tree(gen);
    const auto mu = random_mixed(gen, t);
    const Json tree_doc = tree_to_json(*t);
    const auto t2 = parse_tree(tree_doc);
    CHECK(tree_to_json(*t2) == tree_doc);
    const Json mu_doc = measure_to_json(mu);
    const auto mu2 = parse_measure(mu_doc, t2);
    CHECK(measure_to_json(*mu2) == mu_doc);
    CHECK(measure_to_json(*parse_measure(measure_to_json(*mu2), t2)).dump() == mu_doc.dump());
  }
}

TEST_CASE("point syntax") {
  const auto t = parse_tree(Json::parse(kSpider));
  CHECK(parse_point(*t, "vertex:B") == TreePoint::at_vertex(2));
  CHECK(parse_point(*t, "edge:1:0.5") == t->edge_point(1, 0.5));
  CHECK(parse_point(*t, "edge:1:2") == TreePoint::at_vertex(2));
  CHECK(format_point(*t, t->edge_point(1, 0.5)) == "edge:1:0.5");
  CHECK(format_point(*t, TreePoint::at_vertex(0)) == "vertex:C");
  CHECK_THROWS_AS(parse_point(*t, "vertex:Z"), Error);
  CHECK_THROWS_AS(parse_point(*t, "edge:9:0.5"), Error);
  CHECK_THROWS_AS(parse_point(*t, "edge:1:x"), Error);
  CHECK_THROWS_AS(parse_point(*t, "middle"), Error);
}

TEST_CASE("csv quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0) == "1");
}

TEST_CASE("experiment configs") {
  const auto t = parse_tree(Json::parse(kSpider));
  const auto mu = std::make_shared<const TreeMeasure>(half_legs(t));
  const auto spec = parse_experiment(Json::parse(R"({"experiment": "clt", "n": 50, "trials": 7,
      "point": "vertex:C", "expansion": {"a": 1, "K": 0.5}, "sidedness": "one",
      "thresholds": [0.1, 0.2], "selection": "left", "expect": "sticky", "ks_threshold": 0.1,
      "threads": 2})"),
                                     mu);
  CHECK(spec.experiment == "clt");
  CHECK(spec.config.n == 50);
  CHECK(spec.config.trials == 7);
  CHECK(spec.config.sidedness == Sidedness::One);
  CHECK(spec.config.selection == Selection::Left);
  CHECK(*spec.config.expect == Stickiness::Sticky);
  CHECK(spec.config.thresholds.size() == 2);
  CHECK(spec.config.threads == 2);
  CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"experiment": "bogus", "point": "vertex:C"})"), mu),
                  Error);
  CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"experiment": "lln", "point": "vertex:C", "seed": 3})"),
                                   mu),
                  Error);
  CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"experiment": "lln", "n": 0, "point": "vertex:C"})"),
                                   mu),
                  Error);
}
