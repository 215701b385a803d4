#include <cmath>
#include <numbers>

#include "doctest.h"
#include "g2s/geom2d.hpp"
#include "support/support.hpp"

using namespace g2s;
using namespace g2s::geom;

namespace {

constexpr double kPi = std::numbers::pi;

Path2D polyline(std::vector<Point2> pts) {
  Path2D p;
  p.start = pts.front();
  for (std::size_t i = 1; i < pts.size(); ++i) p.segments.push_back({pts[i - 1], pts[i], {}, true});
  return p;
}

void arc_to(Path2D& p, Point2 to, Point2 center, bool ccw) {
  Point2 from = p.segments.empty() ? p.start : p.segments.back().to;
  p.segments.push_back({from, to, center, ccw});
}

void line_to(Path2D& p, Point2 to) {
  Point2 from = p.segments.empty() ? p.start : p.segments.back().to;
  p.segments.push_back({from, to, {}, true});
}

// Finishing contour of the test pocket: tool centre rectangle X54..86,
// Y39..101 with 1 mm corner arcs.
Path2D pocket_contour() {
  Path2D p;
  p.start = {70, 101};
  line_to(p, {85, 101});
  arc_to(p, {86, 100}, {85, 100}, false);
  line_to(p, {86, 40});
  arc_to(p, {85, 39}, {85, 40}, false);
  line_to(p, {55, 39});
  arc_to(p, {54, 40}, {55, 40}, false);
  line_to(p, {54, 100});
  arc_to(p, {55, 101}, {55, 100}, false);
  line_to(p, {70, 101});
  return p;
}

Path2D facing_path() {
  return polyline({{91.9, -13.5}, {91.9, 133.5}, {74.8, 133.5}, {74.8, -13.5}, {57.7, -13.5}, {57.7, 133.5},
                   {40.6, 133.5}, {40.6, -13.5}, {23.5, -13.5}, {23.5, 133.5}, {6.4, 133.5}, {6.4, -13.5}});
}

const Rect kFootprint{0, 0, 100, 120};

}  // namespace

TEST_CASE("single segment sweep matches the capsule formula and the raster") {
  Region r = sweep(polyline({{0, 0}, {10, 0}}), 2.0);
  double want = 40 + 4 * kPi;
  CHECK(area(sweep(polyline({{0, 0}, {10, 0}}), 2.0, 1e-9)) == doctest::Approx(want).epsilon(1e-6));
  // Chords lose at most perimeter * sagitta.
  CHECK(want - area(r) <= (20 + 4 * kPi) * kTolGeom);
  CHECK(want - area(r) >= 0);
  double raster = testing::raster_sweep_area({{0, 0}, {10, 0}}, 2.0, 0.01);
  CHECK(std::abs(area(r) - raster) / raster < 1e-3);
}

TEST_CASE("a point sweeps a disc") {
  Path2D p;
  p.start = {3, 4};
  Region r = sweep(p, 1.5, 1e-9);
  CHECK(area(r) == doctest::Approx(kPi * 2.25).epsilon(1e-7));
  CHECK(contains(r, {3, 5.4}));
  CHECK_FALSE(contains(r, {3, 5.6}));
}

TEST_CASE("facing sweep bounds") {
  Region r = sweep(facing_path(), 9.0);
  Rect b = bounds(r);
  CHECK(b.xmin == doctest::Approx(-2.6).epsilon(1e-6));
  CHECK(b.xmax == doctest::Approx(100.9).epsilon(1e-6));
  CHECK(b.ymin == doctest::Approx(-22.5).epsilon(1e-6));
  CHECK(b.ymax == doctest::Approx(142.5).epsilon(1e-6));
  auto loops = boundary(r);
  REQUIRE_FALSE(loops.empty());
  CHECK(classify_loop(loops.front().points, kFootprint) == LoopClass::Crossing);
  auto sides = crossed_sides(loops.front().points, kFootprint);
  CHECK((sides[0] && sides[1] && sides[2] && sides[3]));
}

TEST_CASE("overlapping parallel passes unite into one outer loop") {
  Region a = sweep(polyline({{0, 0}, {50, 0}}), 5);
  Region b = sweep(polyline({{0, 8}, {50, 8}}), 5);
  Region u = unite(a, b);
  CHECK(u.polygons.size() == 1);
  CHECK(u.polygons.front().holes.empty());
  CHECK(area(u) == doctest::Approx(area(unite(b, a))).epsilon(1e-9));
  CHECK(area(u) < area(a) + area(b));
}

TEST_CASE("sweeps are monotone in the radius") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    auto pts = testing::random_simple_polyline(rng);
    Path2D p = polyline(pts);
    Region small = sweep(p, 1.0);
    Region large = sweep(p, 2.5);
    CHECK(uncovered_area(small, large) < 1e-6);
    for (const auto& loop : boundary(small))
      for (std::size_t k = 0; k < loop.points.size(); k += 7) CHECK(contains(large, loop.points[k]));
  }
}

TEST_CASE("boundary points lie at the tool radius from a simple path") {
  Path2D p = polyline({{0, 0}, {20, 0}, {30, 15}});
  const double r = 3.0;
  Region reg = sweep(p, r);
  for (const auto& loop : boundary(reg))
    for (auto q : loop.points) {
      double d = 1e9;
      for (const auto& s : p.segments) {
        double dx = s.to.x - s.from.x, dy = s.to.y - s.from.y;
        double t = std::clamp(((q.x - s.from.x) * dx + (q.y - s.from.y) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        d = std::min(d, std::hypot(q.x - s.from.x - t * dx, q.y - s.from.y - t * dy));
      }
      CHECK(d == doctest::Approx(r).epsilon(1e-4 / r));
    }
}

TEST_CASE("pocket finishing contour gives a 50 x 80 outline with 10 mm corners") {
  Region r = sweep(pocket_contour(), 9.0);
  auto loops = boundary(r);
  REQUIRE(loops.size() == 2);
  CHECK_FALSE(loops[0].hole);
  CHECK(loops[1].hole);
  CHECK(ring_area(loops[0].points) > 0);
  CHECK(ring_area(loops[1].points) < 0);
  Rect b = bounds(loops[0].points);
  CHECK(b.xmin == doctest::Approx(45).epsilon(1e-6));
  CHECK(b.xmax == doctest::Approx(95).epsilon(1e-6));
  CHECK(b.ymin == doctest::Approx(30).epsilon(1e-6));
  CHECK(b.ymax == doctest::Approx(110).epsilon(1e-6));
  // Rounded rectangle area: W*H - (4 - pi) r^2 with r = 10.
  CHECK(ring_area(loops[0].points) == doctest::Approx(50 * 80 - (4 - kPi) * 100).epsilon(1e-5));
  CHECK(classify_loop(loops[0].points, kFootprint) == LoopClass::Inside);
}

TEST_CASE("loop classification") {
  Ring left = {{-30, 10}, {-10, 10}, {-10, 30}, {-30, 30}};
  CHECK(classify_loop(left, kFootprint) == LoopClass::Outside);
  Ring inside = {{45, 30}, {95, 30}, {95, 110}, {45, 110}};
  CHECK(classify_loop(inside, kFootprint) == LoopClass::Inside);
  Ring step = {{-5, -5}, {20, -5}, {20, 125}, {-5, 125}};
  CHECK(classify_loop(step, kFootprint) == LoopClass::Crossing);
  auto sides = crossed_sides(step, kFootprint);
  CHECK(sides[0]);
  CHECK(sides[1]);
  CHECK_FALSE(sides[2]);
  CHECK(sides[3]);
}

TEST_CASE("boolean operations") {
  Region a = rect_region({0, 0, 10, 10});
  Region b = rect_region({5, 0, 15, 10});
  CHECK(area(unite(a, b)) == doctest::Approx(150));
  CHECK(area(intersect(a, b)) == doctest::Approx(50));
  CHECK(area(subtract(a, b)) == doctest::Approx(50));
  CHECK(uncovered_area(a, b) == doctest::Approx(50));
  Region c = rect_region({20, 20, 21, 21});
  double abc = area(unite({a, b, c}));
  CHECK(abc == doctest::Approx(area(unite(unite(a, c), b))));
  CHECK(abc == doctest::Approx(151));
}

TEST_CASE("arc projection and sweep angle") {
  Segment2 quarter{{1, 0}, {0, 1}, Point2{0, 0}, true};
  CHECK(arc_sweep(quarter) == doctest::Approx(kPi / 2));
  Segment2 cw{{1, 0}, {0, 1}, Point2{0, 0}, false};
  CHECK(arc_sweep(cw) == doctest::Approx(-3 * kPi / 2));
  Path2D p;
  p.start = {1, 0};
  p.segments.push_back(quarter);
  CHECK(path_length(p) == doctest::Approx(kPi / 2));

  Trajectory t;
  t.start = {10, 0, 5};
  t.segments.push_back({{0, 10, 0}, ArcInfo{{0, 0, 5}, {0, 0, 1}, true}});
  Path2D xy = project_xy(t);
  REQUIRE(xy.segments.size() == 1);
  REQUIRE(xy.segments[0].center);
  CHECK(path_length(xy) == doctest::Approx(5 * kPi));
}

TEST_CASE("distance to ring") {
  Ring sq = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  CHECK(distance_to_ring(sq, {5, 5}) == doctest::Approx(5));
  CHECK(distance_to_ring(sq, {12, 5}) == doctest::Approx(2));
}

TEST_CASE("svg dump is well formed") {
  std::string svg = to_svg({sweep(polyline({{0, 0}, {10, 0}}), 2)});
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}
