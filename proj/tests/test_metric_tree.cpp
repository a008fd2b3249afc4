#include <random>

#include "doctest.h"
#include "frechet_tree/metric_tree.hpp"
#include "support.hpp"

using namespace frechet_tree;
using namespace frechet_tree::testing;

namespace {

ErrorCode build_error(const std::vector<EdgeSpec>& edges) {
  try {
    MetricTree::build(edges);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ValidationError;
}

}  // namespace

TEST_CASE("build validates edge lists") {
  const auto single = MetricTree::build({{"A", "B", 1.0}});
  CHECK(single.num_vertices() == 2);
  CHECK(single.diameter() == 1.0);

  const auto s = spider();
  CHECK(s->num_vertices() == 4);
  CHECK(s->diameter() == 4.0);

  CHECK(build_error({{"A", "B", 1.0}, {"B", "A", 2.0}}) == ErrorCode::DuplicateEdge);
  CHECK(build_error({{"A", "B", 1.0}, {"B", "C", 1.0}, {"C", "A", 1.0}}) ==
        ErrorCode::CycleDetected);
  CHECK(build_error({{"A", "B", 0.0}}) == ErrorCode::NonpositiveLength);
  CHECK(build_error({{"A", "B", -1.0}}) == ErrorCode::NonpositiveLength);
  CHECK_THROWS_AS(MetricTree::build({"A", "B", "C"}, {{"A", "B", 1.0}}), Error);
}

TEST_CASE("degenerate single-vertex tree") {
  const auto t = MetricTree::build({"X"}, {});
  CHECK(t.num_vertices() == 1);
  CHECK(t.diameter() == 0.0);
  CHECK(t.distance(TreePoint::at_vertex(0), TreePoint::at_vertex(0)) == 0.0);
  CHECK(t.neighboring_points(TreePoint::at_vertex(0)).empty());
}

TEST_CASE("distances on the spider") {
  const auto s = spider();
  CHECK(s->distance(TreePoint::at_vertex(1), TreePoint::at_vertex(2)) == 4.0);
  CHECK(s->distance(s->edge_point(0, 0.5), s->edge_point(1, 1.5)) == doctest::Approx(2.0));
  CHECK(s->distance(s->edge_point(0, 0.5), s->edge_point(0, 1.75)) == doctest::Approx(1.25));
  CHECK_THROWS_AS(s->distance(TreePoint::on_edge(7, 0.5), TreePoint::at_vertex(0)), Error);
  CHECK_THROWS_AS(s->validate(TreePoint::on_edge(0, 3.0)), Error);
}

TEST_CASE("edge points are canonical") {
  const auto s = spider();
  CHECK(s->edge_point(0, 0.0) == TreePoint::at_vertex(0));
  CHECK(s->edge_point(0, 2.0) == TreePoint::at_vertex(1));
  CHECK(s->canonical(TreePoint::on_edge(1, 2.0)) == TreePoint::at_vertex(2));
}

TEST_CASE("point_at follows the geodesic") {
  const auto s = spider();
  const auto a = TreePoint::at_vertex(1);
  const auto b = TreePoint::at_vertex(2);
  CHECK(s->point_at(a, b, 0.0) == a);
  CHECK(s->point_at(a, b, 4.0) == b);
  CHECK(s->point_at(a, b, 2.0) == TreePoint::at_vertex(0));
  const auto p = s->point_at(a, b, 1.5);
  CHECK(s->distance(a, p) == doctest::Approx(1.5));
  CHECK(s->distance(p, b) == doctest::Approx(2.5));
  CHECK_THROWS_AS(s->point_at(a, b, 4.5), Error);

  const auto e = segment_tree(1.0);
  CHECK(e->point_at(TreePoint::at_vertex(0), TreePoint::at_vertex(1), 0.25) ==
        TreePoint::on_edge(0, 0.25));
}

TEST_CASE("directed subtrees") {
  const auto e = segment_tree(1.0);
  const auto whole = e->subtree_toward(TreePoint::at_vertex(0), TreePoint::at_vertex(1));
  CHECK_FALSE(e->contains(whole, TreePoint::at_vertex(0)));
  CHECK(e->contains(whole, TreePoint::at_vertex(1)));
  CHECK(e->contains(whole, e->edge_point(0, 1e-9)));

  const auto s = spider();
  const auto center = TreePoint::at_vertex(0);
  const auto leg = s->subtree_toward(center, TreePoint::at_vertex(1));
  CHECK(s->contains(leg, s->edge_point(0, 0.3)));
  CHECK(s->contains(leg, TreePoint::at_vertex(1)));
  CHECK_FALSE(s->contains(leg, center));
  CHECK_FALSE(s->contains(leg, s->edge_point(1, 0.3)));

  const auto mid = s->edge_point(0, 1.0);
  const auto back = s->subtree_toward(mid, center);
  CHECK(s->contains(back, center));
  CHECK(s->contains(back, TreePoint::at_vertex(2)));
  CHECK(s->contains(back, s->edge_point(2, 1.2)));
  CHECK(s->contains(back, s->edge_point(0, 0.5)));
  CHECK_FALSE(s->contains(back, s->edge_point(0, 1.5)));
  CHECK_FALSE(s->contains(back, mid));

  CHECK_THROWS_AS(s->subtree_toward(center, center), Error);
}

TEST_CASE("neighboring points") {
  const auto s = spider();
  CHECK(s->neighboring_points(TreePoint::at_vertex(0)).size() == 3);
  const auto inner = s->neighboring_points(s->edge_point(1, 0.5));
  REQUIRE(inner.size() == 2);
  CHECK(inner[0] == TreePoint::at_vertex(0));
  CHECK(inner[1] == TreePoint::at_vertex(2));
  const auto leaf = s->neighboring_points(TreePoint::at_vertex(3));
  REQUIRE(leaf.size() == 1);
  CHECK(leaf[0] == TreePoint::at_vertex(0));
}

TEST_CASE("projection onto a segment") {
  const auto s = spider();
  const auto g = s->segment(TreePoint::at_vertex(1), TreePoint::at_vertex(2));
  CHECK(g.length == 4.0);
  CHECK(s->project_to_segment(g, s->edge_point(2, 1.3)) == TreePoint::at_vertex(0));
  const auto on = s->edge_point(1, 0.7);
  CHECK(s->project_to_segment(g, on) == on);
  CHECK(s->on_segment(g, on));
  CHECK_FALSE(s->on_segment(g, s->edge_point(2, 0.1)));
}

TEST_CASE("property: metric axioms and membership predicate") {
  std::mt19937_64 gen(7);
  for (int round = 0; round < 40; ++round) {
    const auto t = random_tree(gen);
    for (int k = 0; k < 200; ++k) {
      const auto x = random_point(gen, *t);
      const auto y = random_point(gen, *t);
      const auto z = random_point(gen, *t);
      CHECK(t->distance(x, x) == 0.0);
      CHECK(t->distance(x, y) == doctest::Approx(t->distance(y, x)).epsilon(1e-12));
      CHECK(t->distance(x, z) <= t->distance(x, y) + t->distance(y, z) + 1e-12);

      const auto g = t->segment(x, z);
      const double s = std::uniform_real_distribution<double>(0.0, g.length)(gen);
      const auto p = t->point_at(x, z, s);
      CHECK(t->on_segment(g, p));
      CHECK(t->distance(x, p) + t->distance(p, z) == doctest::Approx(g.length).epsilon(1e-12));

      const auto q = t->project_to_segment(g, y);
      CHECK(t->on_segment(g, q));
      for (int j = 0; j < 3; ++j) {
        const auto w = t->point_at(x, z, std::uniform_real_distribution<double>(0.0, g.length)(gen));
        CHECK(t->distance(q, w) <= t->distance(y, w) + 1e-12);
      }

      if (x == y) continue;
      const auto sub = t->subtree_toward(x, y);
      const bool expected = !(z == x) && !t->on_segment(t->segment(z, y), x);
      CHECK(t->contains(sub, z) == expected);
      if (t->contains(sub, z)) {
        const auto same = t->subtree_toward(x, z);
        CHECK(same.toward == sub.toward);
      }
    }
  }
}

TEST_CASE("property: neighbor components partition the edges") {
  std::mt19937_64 gen(11);
  for (int round = 0; round < 60; ++round) {
    const auto t = random_tree(gen);
    const auto alpha = random_point(gen, *t);
    double total = 0.0;
    for (EdgeId e = 0; e < t->num_edges(); ++e) total += t->edge(e).length;
    double covered = 0.0;
    for (const auto& v : t->neighboring_points(alpha)) {
      const auto sub = t->subtree_toward(alpha, v);
      for (EdgeId e = 0; e < t->num_edges(); ++e) {
        if (sub.full_edges[e]) covered += t->edge(e).length;
      }
      if (sub.partial) covered += sub.partial->to - sub.partial->from;
    }
    CHECK(covered == doctest::Approx(total).epsilon(1e-12));
  }
}
