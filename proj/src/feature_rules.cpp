#include <algorithm>
#include <cmath>
#include <numeric>

#include "g2s/features.hpp"

namespace g2s {

namespace {

constexpr double kLevelTol = 1e-6;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Vec3> cl_points(const Operation& op, double chord_tol) {
  std::vector<Vec3> out;
  for (const auto& t : op.toolpaths) {
    auto pts = t.points(chord_tol);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

double xy_dist(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Direction with components below the angular tolerance snapped to zero.
Vec3 snap(Vec3 d, double tol) {
  double n = std::hypot(d.x, d.y);
  if (n <= 0) return {1, 0, 0};
  d = {d.x / n, d.y / n, 0};
  if (std::fabs(d.x) < tol) d = {0, d.y > 0 ? 1.0 : -1.0, 0};
  if (std::fabs(d.y) < tol) d = {d.x > 0 ? 1.0 : -1.0, 0, 0};
  return d;
}

struct Run {
  geom::Point2 from, to;
  double length() const { return std::hypot(to.x - from.x, to.y - from.y); }
  Vec3 dir() const { return {(to.x - from.x) / length(), (to.y - from.y) / length(), 0}; }
};

// Consecutive collinear line segments joined; arcs end a run.
std::vector<Run> collinear_runs(const geom::Path2D& p, double tol_ang) {
  std::vector<Run> runs;
  bool open = false;
  for (const auto& s : p.segments) {
    if (s.center) {
      open = false;
      continue;
    }
    Run r{s.from, s.to};
    if (r.length() <= 1e-9) continue;
    if (open) {
      Run& last = runs.back();
      Vec3 a = last.dir(), b = r.dir();
      if (std::fabs(a.x * b.y - a.y * b.x) <= tol_ang && a.dot(b) > 0) {
        last.to = r.to;
        continue;
      }
    }
    runs.push_back(r);
    open = true;
  }
  return runs;
}

// Closed sub-loops of a path, found where it revisits a vertex of the
// current open stretch.
std::vector<geom::Ring> closed_loops(const geom::Path2D& p, double tol) {
  std::vector<geom::Point2> v{p.start};
  for (const auto& s : p.segments) v.push_back(s.to);
  std::vector<geom::Ring> loops;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    for (std::size_t j = run_start; j + 2 < i; ++j) {
      if (std::hypot(v[i].x - v[j].x, v[i].y - v[j].y) > tol) continue;
      geom::Ring ring(v.begin() + static_cast<long>(j), v.begin() + static_cast<long>(i));
      if (std::fabs(geom::ring_area(ring)) > tol * tol) loops.push_back(std::move(ring));
      run_start = i;
      break;
    }
  }
  return loops;
}

bool nests(const geom::Rect& inner, const geom::Rect& outer, double tol) {
  return inner.xmin >= outer.xmin - tol && inner.ymin >= outer.ymin - tol &&
         inner.xmax <= outer.xmax + tol && inner.ymax <= outer.ymax + tol;
}

}  // namespace

Phase1Result phase1_classify(const MachiningWorkingstep& ws, const ExtractOptions& o) {
  Phase1Result r;
  if (!ws.operation || ws.operation->toolpaths.empty()) return r;
  const Operation& op = *ws.operation;
  const ToolType type = op.tool.type;
  auto pts = cl_points(op, o.chord_tol);

  double zmin = pts.front().z, zmax = pts.front().z;
  std::size_t deepest = 0;
  bool xy_const = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].z < zmin) {
      zmin = pts[i].z;
      deepest = i;
    }
    zmax = std::max(zmax, pts[i].z);
    if (xy_dist(pts[i], pts.front()) > o.tol_merge) xy_const = false;
  }
  const bool z_const = zmax - zmin <= kLevelTol;

  if (is_hole_making(type)) {
    r.kind = Phase1Kind::RoundHole;
    r.diameter = op.tool.diameter;
    r.axis = {pts[deepest].x, pts[deepest].y};
    return r;
  }
  if (type == ToolType::Facemill) {
    r.kind = Phase1Kind::PlanarFace;
    r.level_z = zmin;
    return r;
  }
  if (is_slot_cutter(type)) {
    r.kind = Phase1Kind::Slot;
    r.level_z = zmin;
    return r;
  }
  if (xy_const) {
    if (!z_const && is_endmill_family(type)) {
      r.kind = Phase1Kind::RoundHole;
      r.diameter = op.tool.diameter;
      r.axis = {pts.front().x, pts.front().y};
    }
    return r;
  }

  // 2.5D when horizontal moves dominate and the deepest level has xy travel.
  double horizontal = 0.0, sloped = 0.0, at_level = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double d = xy_dist(pts[i], pts[i - 1]);
    if (d <= 1e-9) continue;
    if (std::fabs(pts[i].z - pts[i - 1].z) <= kLevelTol) {
      horizontal += d;
      if (std::fabs(pts[i].z - zmin) <= kLevelTol) at_level += d;
    } else {
      sloped += d;
    }
  }
  if (at_level > o.tol_merge && sloped <= horizontal) {
    r.kind = Phase1Kind::Defer;
    r.level_z = zmin;
  }
  return r;
}

std::vector<LayerGroup> merge_layers(const Project& project, const std::vector<std::size_t>& candidates,
                                     const ExtractOptions& o) {
  struct Info {
    std::vector<Vec3> pts;
    double z;
    const ToolSpec* tool;
  };
  auto info = [&](std::size_t e) {
    const auto& ws = std::get<MachiningWorkingstep>(project.executables[e]);
    auto pts = cl_points(*ws.operation, o.chord_tol);
    double z = pts.front().z;
    for (const auto& p : pts) z = std::min(z, p.z);
    return Info{std::move(pts), z, &ws.operation->tool};
  };

  std::vector<LayerGroup> groups;
  std::vector<Info> last;  // last member of each group
  for (std::size_t c : candidates) {
    Info cur = info(c);
    std::optional<std::size_t> target;
    for (std::size_t g = groups.size(); g-- > 0;) {
      const Info& prev = last[g];
      if (prev.tool->name != cur.tool->name || prev.tool->diameter != cur.tool->diameter) continue;
      if (prev.pts.size() != cur.pts.size() || !(cur.z < prev.z - kLevelTol)) continue;
      bool same = true;
      for (std::size_t i = 0; i < cur.pts.size() && same; ++i)
        same = xy_dist(cur.pts[i], prev.pts[i]) <= o.tol_merge;
      if (same) {
        target = g;
        break;
      }
    }
    if (target) {
      groups[*target].members.push_back(c);
      groups[*target].z.push_back(cur.z);
      last[*target] = std::move(cur);
    } else {
      groups.push_back({{c}, {cur.z}});
      last.push_back(std::move(cur));
    }
  }
  return groups;
}

geom::Path2D level_path(const Trajectory& t, double level_z) {
  geom::Path2D best, cur;
  double best_len = -1.0;
  auto finish = [&] {
    double len = geom::path_length(cur);
    if (!cur.segments.empty() && len > best_len) {
      best = cur;
      best_len = len;
    }
    cur = geom::Path2D{};
  };
  Vec3 from = t.start;
  for (const auto& s : t.segments) {
    bool level = std::fabs(from.z - level_z) <= kLevelTol && std::fabs(s.end.z - level_z) <= kLevelTol;
    bool moves = xy_dist(from, s.end) > 1e-9 || s.arc;
    if (level && moves) {
      if (cur.segments.empty()) {
        cur.start = {from.x, from.y};
        cur.z = level_z;
      }
      geom::Segment2 seg{{from.x, from.y}, {s.end.x, s.end.y}, std::nullopt, true};
      if (s.arc && std::fabs(std::fabs(s.arc->normal.z) - 1.0) < 1e-12) {
        seg.center = geom::Point2{s.arc->center.x, s.arc->center.y};
        seg.ccw = s.arc->normal.z > 0 ? s.arc->ccw : !s.arc->ccw;
      }
      cur.segments.push_back(seg);
    } else if (moves || !level) {
      finish();
    }
    from = s.end;
  }
  finish();
  return best;
}

StrategyLabel classify_strategy(const geom::Path2D& path, double tool_diameter, const ExtractOptions& o) {
  using Kind = StrategyLabel::Kind;
  StrategyLabel out;
  if (path.segments.empty()) return out;

  auto loops = closed_loops(path, std::max(o.tol_merge, 1e-6));
  if (!loops.empty()) {
    bool nested = true;
    for (std::size_t i = 1; i < loops.size() && nested; ++i) {
      auto a = geom::bounds(loops[i - 1]), b = geom::bounds(loops[i]);
      nested = nests(a, b, o.tol_merge) || nests(b, a, o.tol_merge);
    }
    if (nested) {
      out.kind = Kind::ContourParallel;
      out.loops = static_cast<int>(loops.size());
      out.ccw = geom::ring_area(loops.front()) > 0;
      std::vector<double> gaps;
      for (std::size_t i = 1; i < loops.size(); ++i) {
        auto a = geom::bounds(loops[i - 1]), b = geom::bounds(loops[i]);
        gaps.push_back(std::min({std::fabs(a.xmin - b.xmin), std::fabs(a.ymin - b.ymin),
                                 std::fabs(a.xmax - b.xmax), std::fabs(a.ymax - b.ymax)}));
      }
      out.stepover = median(gaps);
      if (out.stepover > 0 && tool_diameter > 0) out.overlap = 1.0 - out.stepover / tool_diameter;
      return out;
    }
  }

  auto runs = collinear_runs(path, o.tol_ang);
  double longest = 0.0;
  std::size_t li = 0;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].length() > longest) {
      longest = runs[i].length();
      li = i;
    }
  std::vector<Run> passes;
  if (!runs.empty()) {
    Vec3 d = runs[li].dir();
    for (const auto& r : runs) {
      Vec3 e = r.dir();
      if (r.length() >= 0.5 * longest && std::fabs(d.x * e.y - d.y * e.x) <= o.tol_ang) passes.push_back(r);
    }
  }
  if (passes.size() >= 2) {
    bool alternate = true, same = true;
    for (std::size_t i = 1; i < passes.size(); ++i) {
      double dot = passes[i].dir().dot(passes[i - 1].dir());
      alternate = alternate && dot < 0;
      same = same && dot > 0;
    }
    Vec3 d = passes.front().dir();
    std::vector<double> gaps;
    for (std::size_t i = 1; i < passes.size(); ++i) {
      double dx = passes[i].from.x - passes[i - 1].from.x, dy = passes[i].from.y - passes[i - 1].from.y;
      gaps.push_back(std::fabs(d.x * dy - d.y * dx));
    }
    double step = median(gaps);
    if ((alternate || same) && step > 0 && step <= tool_diameter) {
      out.kind = alternate ? Kind::Bidirectional : Kind::Unidirectional;
      out.direction = snap(d, o.tol_ang);
      out.stepover = step;
      out.overlap = std::max(0.0, 1.0 - step / tool_diameter);
      double dx = passes[1].from.x - passes[0].from.x, dy = passes[1].from.y - passes[0].from.y;
      out.side = d.x * dy - d.y * dx > 0 ? StepoverSide::Left : StepoverSide::Right;
      return out;
    }
    return out;
  }

  // No parallel set: a spiral turns one way for more than a full turn,
  // anything else is a single centre pass.
  double turning = 0.0;
  int sign = 0;
  bool monotone = true;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    Vec3 a = runs[i - 1].dir(), b = runs[i].dir();
    double ang = std::atan2(a.x * b.y - a.y * b.x, a.dot(b));
    if (std::fabs(ang) <= o.tol_ang) continue;
    int s = ang > 0 ? 1 : -1;
    if (sign && s != sign) monotone = false;
    sign = s;
    turning += std::fabs(ang);
  }
  if (monotone && turning > 3.0 * M_PI) {
    out.kind = Kind::ContourSpiral;
    out.ccw = sign > 0;
    return out;
  }
  bool closed = std::hypot(path.segments.back().to.x - path.start.x,
                           path.segments.back().to.y - path.start.y) <= o.tol_merge;
  if (!closed && std::none_of(path.segments.begin(), path.segments.end(),
                              [](const geom::Segment2& s) { return s.center.has_value(); })) {
    out.kind = Kind::Center;
    if (!runs.empty()) out.direction = snap(runs.front().dir(), o.tol_ang);
  }
  return out;
}

std::optional<InferredFeature> infer_feature(const StrategyLabel& strategy, const geom::Path2D& path,
                                             const geom::Region& region, const geom::Rect& footprint,
                                             const ExtractOptions& o) {
  using Kind = StrategyLabel::Kind;
  if (region.empty()) return std::nullopt;
  const geom::Region fp = geom::rect_region(footprint);
  const double fp_area = footprint.width() * footprint.height();
  const double area_tol = std::max(1e-6, 1e-6 * fp_area);

  if (geom::uncovered_area(fp, region) <= area_tol) {
    Vec3 d = strategy.kind == Kind::Bidirectional || strategy.kind == Kind::Unidirectional
                 ? strategy.direction
                 : Vec3{0, 1, 0};
    Vec3 course = snap({std::fabs(d.x), std::fabs(d.y), 0}, o.tol_ang);
    PlanarFaceShape s;
    s.course_direction = d;
    s.course_length = course.x * footprint.width() + course.y * footprint.height();
    s.profile_length = course.y * footprint.width() + course.x * footprint.height();
    return InferredFeature{s, {footprint.xmin, footprint.ymin, 0}, "PLANAR FACE"};
  }
  if (region.polygons.size() != 1) return std::nullopt;
  const geom::Polygon& poly = region.polygons.front();
  const geom::Rect box = geom::bounds(poly.outer);
  const geom::LoopClass cls = geom::classify_loop(poly.outer, footprint);
  if (cls == geom::LoopClass::Outside) return std::nullopt;

  auto ring_points = [](const geom::Ring& ring) {
    std::vector<Vec3> pts;
    for (const auto& p : ring) pts.push_back({p.x, p.y, 0});
    return pts;
  };

  if (strategy.kind == Kind::Center && poly.holes.empty()) {
    SlotShape s;
    s.width = 2.0 * region.tool_radius;
    s.course.closed = false;
    s.course.points.push_back({path.start.x, path.start.y, 0});
    for (const auto& seg : path.segments) s.course.points.push_back({seg.to.x, seg.to.y, 0});
    return InferredFeature{s, {}, "SLOT"};
  }

  if (cls == geom::LoopClass::Inside && poly.holes.empty()) {
    const double w = box.width(), h = box.height();
    const double a = std::fabs(geom::ring_area(poly.outer));
    double r = std::sqrt(std::max(0.0, (w * h - a) / (4.0 - M_PI)));
    if (r < 1e-2) r = 0.0;
    const Vec3 centre{(box.xmin + box.xmax) / 2, (box.ymin + box.ymax) / 2, 0};
    const double fit_tol = 1e-2;
    auto rounded_rect_error = [&] {
      double worst = 0.0;
      const double hx = w / 2 - r, hy = h / 2 - r;
      for (const auto& p : poly.outer) {
        double qx = std::fabs(p.x - centre.x) - hx, qy = std::fabs(p.y - centre.y) - hy;
        double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
        double sd = outside + std::min(std::max(qx, qy), 0.0) - r;
        worst = std::max(worst, std::fabs(sd));
      }
      return worst;
    };
    if (r <= std::min(w, h) / 2 + fit_tol && rounded_rect_error() <= fit_tol) {
      if (std::fabs(w - h) <= fit_tol && r >= w / 2 - fit_tol)
        return InferredFeature{RoundHoleShape{w, false, 0.0}, centre, "HOLE"};
      ClosedPocketShape s;
      s.boundary = RectangularProfile{w, h};
      s.corner_radius = r;
      return InferredFeature{s, centre, "POCKET"};
    }
    ClosedPocketShape s;
    s.boundary = PolylineProfile{ring_points(poly.outer), true};
    return InferredFeature{s, {}, "POCKET"};
  }

  if (!poly.holes.empty()) {
    if (strategy.kind != Kind::ContourParallel && strategy.kind != Kind::ContourSpiral &&
        strategy.kind != Kind::Unknown)
      return std::nullopt;
    auto island = std::max_element(poly.holes.begin(), poly.holes.end(), [](const auto& x, const auto& y) {
      return std::fabs(geom::ring_area(x)) < std::fabs(geom::ring_area(y));
    });
    return InferredFeature{OutsideProfileShape{{ring_points(*island), true}}, {}, "PROFILE"};
  }

  // Crossing the footprint: a single straight wall makes a step.
  auto sides = geom::crossed_sides(poly.outer, footprint, o.tol_merge);
  int crossed = static_cast<int>(std::count(sides.begin(), sides.end(), true));
  geom::Region inside = geom::intersect(region, fp);
  geom::Rect cb = geom::bounds(inside);
  if (crossed == 3 && std::fabs(geom::area(inside) - cb.width() * cb.height()) <= 1e-3 * cb.width() * cb.height()) {
    StepShape s;
    bool wall_vertical = !sides[0] || !sides[2];  // uncrossed side is xmin or xmax
    s.wall_direction = wall_vertical ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
    s.wall_length = wall_vertical ? cb.height() : cb.width();
    s.width = wall_vertical ? cb.width() : cb.height();
    return InferredFeature{s, {cb.xmin, cb.ymin, 0}, "STEP"};
  }

  // Open pocket: start the profile outside the footprint so the open part
  // lies beyond the workpiece boundary.
  std::vector<Vec3> pts = ring_points(poly.outer);
  auto outside = std::find_if(pts.begin(), pts.end(), [&](const Vec3& p) {
    return p.x < footprint.xmin || p.x > footprint.xmax || p.y < footprint.ymin || p.y > footprint.ymax;
  });
  if (outside != pts.end()) std::rotate(pts.begin(), outside, pts.end());
  return InferredFeature{OpenPocketShape{{pts, false}, 0.0}, {}, "POCKET"};
}

}  // namespace g2s
