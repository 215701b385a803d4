#include "g2s/geom2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>

namespace g2s::geom {

namespace bg = boost::geometry;

namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, false, true>;  // counterclockwise, closed
using BMulti = bg::model::multi_polygon<BPoly>;
using BBox = bg::model::box<BPoint>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

BPoint bp(Point2 p) { return {p.x, p.y}; }

int circle_steps(double radius, double sweep, double tol) {
  double step = std::numbers::pi / 2.0;
  if (tol < radius) step = std::min(step, 2.0 * std::acos(1.0 - tol / radius));
  return std::max(1, static_cast<int>(std::ceil(std::fabs(sweep) / step - 1e-9)));
}

void close_ring(bg::model::ring<BPoint, false, true>& ring) {
  if (!ring.empty() && !bg::equals(ring.front(), ring.back())) ring.push_back(ring.front());
}

BPoly circle(Point2 c, double r, double tol) {
  BPoly poly;
  int n = std::max(8, circle_steps(r, kTwoPi, tol));
  for (int i = 0; i < n; ++i) {
    double a = kTwoPi * i / n;
    poly.outer().push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  close_ring(poly.outer());
  return poly;
}

BPoly line_capsule_body(Point2 a, Point2 b, double r) {
  double dx = b.x - a.x, dy = b.y - a.y;
  double len = std::hypot(dx, dy);
  double nx = -dy / len * r, ny = dx / len * r;
  BPoly poly;
  poly.outer() = {{a.x - nx, a.y - ny}, {b.x - nx, b.y - ny}, {b.x + nx, b.y + ny},
                  {a.x + nx, a.y + ny}};
  close_ring(poly.outer());
  return poly;
}

// Region swept by a disc of radius r centred on the arc, minus the end caps.
BMulti arc_body(const Segment2& s, double r, double tol) {
  const Point2 c = *s.center;
  const double rc = std::hypot(s.from.x - c.x, s.from.y - c.y);
  const double sweep = arc_sweep(s);
  const double a0 = std::atan2(s.from.y - c.y, s.from.x - c.x);
  const double outer = rc + r;
  const double inner = rc - r;
  BMulti out;
  if (std::fabs(sweep) >= kTwoPi - 1e-12) {
    BPoly ring = circle(c, outer, tol);
    if (inner > tol) {
      BPoly hole = circle(c, inner, tol);
      bg::model::ring<BPoint, false, true> h(hole.outer().rbegin(), hole.outer().rend());
      ring.inners().push_back(h);
    }
    bg::correct(ring);
    out.push_back(ring);
    return out;
  }
  BPoly poly;
  int n = circle_steps(outer, sweep, tol);
  for (int i = 0; i <= n; ++i) {
    double a = a0 + sweep * i / n;
    poly.outer().push_back({c.x + outer * std::cos(a), c.y + outer * std::sin(a)});
  }
  if (inner > tol) {
    int m = circle_steps(inner, sweep, tol);
    for (int i = m; i >= 0; --i) {
      double a = a0 + sweep * i / m;
      poly.outer().push_back({c.x + inner * std::cos(a), c.y + inner * std::sin(a)});
    }
  } else {
    poly.outer().push_back(bp(c));
  }
  close_ring(poly.outer());
  bg::correct(poly);
  out.push_back(poly);
  return out;
}

BMulti single(BPoly p) {
  BMulti m;
  m.push_back(std::move(p));
  return m;
}

BMulti union_all(std::vector<BMulti> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<BMulti> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      BMulti u;
      bg::union_(parts[i], parts[i + 1], u);
      next.push_back(std::move(u));
    }
    if (parts.size() % 2) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

BMulti to_boost(const Region& r) {
  BMulti m;
  for (const auto& p : r.polygons) {
    BPoly poly;
    for (auto q : p.outer) poly.outer().push_back(bp(q));
    close_ring(poly.outer());
    for (const auto& h : p.holes) {
      bg::model::ring<BPoint, false, true> ring;
      for (auto q : h) ring.push_back(bp(q));
      close_ring(ring);
      poly.inners().push_back(std::move(ring));
    }
    bg::correct(poly);
    m.push_back(std::move(poly));
  }
  return m;
}

Ring from_ring(const bg::model::ring<BPoint, false, true>& ring) {
  Ring out;
  for (const auto& p : ring) out.push_back({p.x(), p.y()});
  if (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

Region from_boost(const BMulti& m, double z, double radius) {
  Region r;
  r.z = z;
  r.tool_radius = radius;
  for (const auto& poly : m) {
    if (std::fabs(bg::area(poly)) < 1e-12) continue;
    Polygon p;
    p.outer = from_ring(poly.outer());
    for (const auto& h : poly.inners()) p.holes.push_back(from_ring(h));
    r.polygons.push_back(std::move(p));
  }
  return r;
}

BPoly ring_polygon(const Ring& ring) {
  BPoly poly;
  for (auto p : ring) poly.outer().push_back(bp(p));
  close_ring(poly.outer());
  bg::correct(poly);
  return poly;
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  double dx = b.x - a.x, dy = b.y - a.y;
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace

double arc_sweep(const Segment2& s) {
  if (!s.center) return 0.0;
  const Point2 c = *s.center;
  double a0 = std::atan2(s.from.y - c.y, s.from.x - c.x);
  double a1 = std::atan2(s.to.y - c.y, s.to.x - c.x);
  double d = a1 - a0;
  if (s.ccw) {
    while (d <= 1e-12) d += kTwoPi;
    while (d > kTwoPi + 1e-12) d -= kTwoPi;
  } else {
    while (d >= -1e-12) d -= kTwoPi;
    while (d < -kTwoPi - 1e-12) d += kTwoPi;
  }
  return d;
}

double path_length(const Path2D& p) {
  double total = 0.0;
  for (const auto& s : p.segments) {
    if (s.center) {
      double rc = std::hypot(s.from.x - s.center->x, s.from.y - s.center->y);
      total += rc * std::fabs(arc_sweep(s));
    } else {
      total += std::hypot(s.to.x - s.from.x, s.to.y - s.from.y);
    }
  }
  return total;
}

Path2D project_xy(const Trajectory& t, double chord_tol) {
  Path2D out;
  out.start = {t.start.x, t.start.y};
  out.z = t.start.z;
  Vec3 cur = t.start;
  auto add_line = [&](const Vec3& a, const Vec3& b) {
    if (std::hypot(b.x - a.x, b.y - a.y) <= 1e-9) return;
    out.segments.push_back({{a.x, a.y}, {b.x, b.y}, std::nullopt, true});
  };
  for (const auto& seg : t.segments) {
    out.z = std::min(out.z, seg.end.z);
    if (seg.arc && std::fabs(std::fabs(seg.arc->normal.z) - 1.0) < 1e-12) {
      bool ccw = seg.arc->normal.z > 0 ? seg.arc->ccw : !seg.arc->ccw;
      out.segments.push_back(
          {{cur.x, cur.y}, {seg.end.x, seg.end.y}, Point2{seg.arc->center.x, seg.arc->center.y}, ccw});
    } else if (seg.arc) {
      Vec3 prev = cur;
      for (const auto& p : discretize_arc(cur, seg, chord_tol)) {
        out.z = std::min(out.z, p.z);
        add_line(prev, p);
        prev = p;
      }
    } else {
      add_line(cur, seg.end);
    }
    cur = seg.end;
  }
  return out;
}

Region sweep(const Path2D& path, double radius, double tol) {
  if (!(radius > 0.0))
    throw ConversionError(ErrorKind::Internal, "sweep radius must be positive");
  std::vector<BMulti> parts;
  parts.push_back(single(circle(path.start, radius, tol)));
  for (const auto& s : path.segments) {
    if (s.center) {
      parts.push_back(arc_body(s, radius, tol));
    } else if (std::hypot(s.to.x - s.from.x, s.to.y - s.from.y) > 1e-12) {
      parts.push_back(single(line_capsule_body(s.from, s.to, radius)));
    }
    parts.push_back(single(circle(s.to, radius, tol)));
  }
  return from_boost(union_all(std::move(parts)), path.z, radius);
}

Region unite(const std::vector<Region>& regions) {
  std::vector<BMulti> parts;
  double z = 0.0, radius = 0.0;
  for (const auto& r : regions) {
    parts.push_back(to_boost(r));
    z = r.z;
    radius = std::max(radius, r.tool_radius);
  }
  return from_boost(union_all(std::move(parts)), z, radius);
}

Region unite(const Region& a, const Region& b) { return unite(std::vector<Region>{a, b}); }

Region subtract(const Region& a, const Region& b) {
  BMulti out;
  bg::difference(to_boost(a), to_boost(b), out);
  return from_boost(out, a.z, a.tool_radius);
}

Region intersect(const Region& a, const Region& b) {
  BMulti out;
  bg::intersection(to_boost(a), to_boost(b), out);
  return from_boost(out, a.z, a.tool_radius);
}

double area(const Region& r) { return bg::area(to_boost(r)); }

bool contains(const Region& r, Point2 p) { return bg::covered_by(bp(p), to_boost(r)); }

double uncovered_area(const Region& inner, const Region& outer) {
  return area(subtract(inner, outer));
}

std::vector<Loop> boundary(const Region& r) {
  std::vector<Loop> out;
  for (const auto& p : r.polygons) {
    out.push_back({p.outer, false});
    for (const auto& h : p.holes) out.push_back({h, true});
  }
  return out;
}

double ring_area(const Ring& ring) {
  double a = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2& p = ring[i];
    const Point2& q = ring[(i + 1) % ring.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2.0;
}

double distance_to_ring(const Ring& ring, Point2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ring.size(); ++i)
    best = std::min(best, segment_distance(p, ring[i], ring[(i + 1) % ring.size()]));
  return best;
}

Rect bounds(const Ring& ring) {
  Rect b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (auto p : ring) {
    b.xmin = std::min(b.xmin, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.xmax = std::max(b.xmax, p.x);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

Rect bounds(const Region& r) {
  Rect b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : r.polygons) {
    Rect o = bounds(p.outer);
    b.xmin = std::min(b.xmin, o.xmin);
    b.ymin = std::min(b.ymin, o.ymin);
    b.xmax = std::max(b.xmax, o.xmax);
    b.ymax = std::max(b.ymax, o.ymax);
  }
  return b;
}

Region rect_region(const Rect& r) {
  Region out;
  out.polygons.push_back({{{r.xmin, r.ymin}, {r.xmax, r.ymin}, {r.xmax, r.ymax}, {r.xmin, r.ymax}}, {}});
  return out;
}

LoopClass classify_loop(const Ring& loop, const Rect& footprint) {
  bool inside = !loop.empty() && std::all_of(loop.begin(), loop.end(), [&](Point2 p) {
    return p.x > footprint.xmin && p.x < footprint.xmax && p.y > footprint.ymin &&
           p.y < footprint.ymax;
  });
  if (inside) return LoopClass::Inside;
  BBox box{{footprint.xmin, footprint.ymin}, {footprint.xmax, footprint.ymax}};
  BPoly poly = ring_polygon(loop);
  if (!bg::intersects(poly, box)) return LoopClass::Outside;
  // Touching only along the footprint boundary counts as outside.
  BMulti common;
  bg::intersection(poly, box, common);
  return bg::area(common) > kTolGeom * kTolGeom ? LoopClass::Crossing : LoopClass::Outside;
}

std::array<bool, 4> crossed_sides(const Ring& loop, const Rect& footprint, double tol) {
  Rect b = bounds(loop);
  return {b.xmin < footprint.xmin - tol, b.ymin < footprint.ymin - tol,
          b.xmax > footprint.xmax + tol, b.ymax > footprint.ymax + tol};
}

std::string to_svg(const std::vector<Region>& regions, const std::vector<Path2D>& paths) {
  Rect b{1e300, 1e300, -1e300, -1e300};
  auto grow = [&](Point2 p) {
    b.xmin = std::min(b.xmin, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.xmax = std::max(b.xmax, p.x);
    b.ymax = std::max(b.ymax, p.y);
  };
  for (const auto& r : regions)
    for (const auto& p : r.polygons)
      for (auto q : p.outer) grow(q);
  for (const auto& p : paths) {
    grow(p.start);
    for (const auto& s : p.segments) grow(s.to);
  }
  if (b.xmin > b.xmax) b = {0, 0, 1, 1};
  const double margin = 5.0;
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.4f %.4f %.4f %.4f\">\n"
                "<g transform=\"scale(1,-1)\">\n",
                b.xmin - margin, -b.ymax - margin, b.width() + 2 * margin,
                b.height() + 2 * margin);
  out += buf;
  auto ring_path = [&](const Ring& ring) {
    std::string d;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.4f %.4f ", i == 0 ? "M" : "L", ring[i].x, ring[i].y);
      d += buf;
    }
    return d + "Z ";
  };
  for (const auto& r : regions) {
    std::string d;
    for (const auto& p : r.polygons) {
      d += ring_path(p.outer);
      for (const auto& h : p.holes) d += ring_path(h);
    }
    out += "<path fill-rule=\"evenodd\" fill=\"#8ab\" fill-opacity=\"0.4\" stroke=\"#235\" "
           "stroke-width=\"0.2\" d=\"" + d + "\"/>\n";
  }
  for (const auto& p : paths) {
    std::snprintf(buf, sizeof buf, "M%.4f %.4f ", p.start.x, p.start.y);
    std::string d = buf;
    for (const auto& s : p.segments) {
      std::snprintf(buf, sizeof buf, "L%.4f %.4f ", s.to.x, s.to.y);
      d += buf;
    }
    out += "<path fill=\"none\" stroke=\"#c30\" stroke-width=\"0.3\" d=\"" + d + "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace g2s::geom
