#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "g2s/stepnc.hpp"

namespace g2s::geom {

inline constexpr double kTolGeom = 1e-4;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

// Line when `center` is empty, otherwise a circular arc around `center`.
struct Segment2 {
  Point2 from;
  Point2 to;
  std::optional<Point2> center;
  bool ccw = true;
};

struct Path2D {
  Point2 start;
  std::vector<Segment2> segments;
  double z = 0.0;
};

// Projects a trajectory on the XY plane. Arcs in other planes become their
// chords.
Path2D project_xy(const Trajectory& t, double chord_tol = kTolGeom);

// Signed sweep angle of an arc segment in radians.
double arc_sweep(const Segment2& s);
double path_length(const Path2D& p);

using Ring = std::vector<Point2>;  // implicitly closed, no repeated end

struct Polygon {
  Ring outer;              // counterclockwise
  std::vector<Ring> holes;  // clockwise
};

struct Region {
  std::vector<Polygon> polygons;
  double z = 0.0;
  double tool_radius = 0.0;

  bool empty() const { return polygons.empty(); }
};

// Points within `radius` of the path, built as a union of per-segment
// capsules and vertex discs. Circles are polygonized with sagitta `tol`.
Region sweep(const Path2D& path, double radius, double tol = kTolGeom);

Region unite(const std::vector<Region>& regions);
Region unite(const Region& a, const Region& b);
Region subtract(const Region& a, const Region& b);
Region intersect(const Region& a, const Region& b);

double area(const Region& r);
bool contains(const Region& r, Point2 p);
// Area of `inner` not covered by `outer`.
double uncovered_area(const Region& inner, const Region& outer);

struct Loop {
  Ring points;
  bool hole = false;
};

// Outer loops counterclockwise first for each polygon, then its holes.
std::vector<Loop> boundary(const Region& r);

double ring_area(const Ring& ring);  // signed, positive when counterclockwise
double distance_to_ring(const Ring& ring, Point2 p);

struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
};

Rect bounds(const Ring& ring);
Rect bounds(const Region& r);
Region rect_region(const Rect& r);

enum class LoopClass { Inside, Crossing, Outside };

LoopClass classify_loop(const Ring& loop, const Rect& footprint);

// Which footprint sides (xmin, ymin, xmax, ymax) the loop extends past.
std::array<bool, 4> crossed_sides(const Ring& loop, const Rect& footprint, double tol = kTolGeom);

std::string to_svg(const std::vector<Region>& regions, const std::vector<Path2D>& paths = {});

}  // namespace g2s::geom
