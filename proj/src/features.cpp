#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "g2s/features.hpp"
#include "g2s/gcode.hpp"

namespace g2s {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool same_tool(const ToolSpec& a, const ToolSpec& b) {
  return a.name == b.name && a.type == b.type && a.diameter == b.diameter;
}

double deepest_z(const Operation& op) {
  double z = std::numeric_limits<double>::infinity();
  for (const auto& t : op.toolpaths)
    for (const auto& p : t.points()) z = std::min(z, p.z);
  return z;
}

MachiningStrategy to_strategy(const StrategyLabel& s, bool spindle_cw) {
  using Kind = StrategyLabel::Kind;
  auto mode = [&](bool ccw) { return ccw == spindle_cw ? CutMode::Climb : CutMode::Conventional; };
  switch (s.kind) {
    case Kind::Bidirectional: return BidirectionalMilling{s.overlap, s.direction, s.side};
    case Kind::Unidirectional: return UnidirectionalMilling{s.overlap, s.direction, CutMode::Climb};
    case Kind::Center: return CenterMilling{};
    case Kind::ContourParallel: return ContourParallel{s.ccw, mode(s.ccw)};
    case Kind::ContourSpiral: return ContourSpiral{s.ccw, mode(s.ccw)};
    case Kind::Unknown: break;
  }
  return CenterMilling{};
}

// One layer group with its recognized feature.
struct Recognized {
  LayerGroup group;
  InferredFeature feature;
  StrategyLabel strategy;
  geom::Region region;
  const Operation* base = nullptr;
};

// Groups machining one feature, roughest first.
struct Chain {
  std::vector<Recognized> groups;
  const Recognized& finish() const { return groups.back(); }
};

struct HoleOp {
  std::vector<std::size_t> members;
  Operation op;
  double deepest = 0.0;
};

struct HoleCluster {
  geom::Point2 axis;
  double diameter = 0.0;
  std::vector<HoleOp> ops;
};

// A CC2 feature before naming.
struct PendingFeature {
  std::optional<Feature> kept;  // retained CC1 feature, copied verbatim
  std::string prefix;
  FeatureShape shape;
  Vec3 origin;
  double top = 0.0;
  double floor = 0.0;
  double diameter = 0.0;  // holes, for the name
};

struct PendingStep {
  std::size_t key = 0;  // earliest CC1 member, orders the workplan
  std::optional<std::size_t> feature;
  std::optional<Operation> op;
  std::string role;  // FINISH, ROUGH, DRILL, REAM; empty keeps the CC1 names
  std::optional<std::string> kept_name;
  std::optional<RapidMovement> rapid;
  std::vector<std::size_t> members;
};

}  // namespace

Cc2Result extract_features(const Project& cc1, const ExtractOptions& o) {
  const auto& ex = cc1.executables;
  const Workpiece& wp = cc1.workpiece;
  const std::optional<Box>& raw = wp.rawpiece;
  std::optional<geom::Rect> footprint;
  if (raw) footprint = geom::Rect{raw->origin.x, raw->origin.y, raw->origin.x + raw->size.x, raw->origin.y + raw->size.y};

  std::vector<bool> retained(ex.size(), false);
  std::vector<std::size_t> candidates;
  std::map<std::size_t, Phase1Kind> forced;
  std::vector<HoleCluster> holes;

  auto add_hole = [&](std::size_t e, const Operation& op, geom::Point2 axis, double diameter) {
    auto it = std::find_if(holes.begin(), holes.end(), [&](const HoleCluster& h) {
      return std::hypot(h.axis.x - axis.x, h.axis.y - axis.y) <= o.tol_merge &&
             std::fabs(h.diameter - diameter) <= std::max(h.diameter, diameter);
    });
    if (it == holes.end()) {
      holes.push_back({axis, diameter, {}});
      it = holes.end() - 1;
    }
    it->diameter = std::max(it->diameter, diameter);
    double z = deepest_z(op);
    if (!it->ops.empty() && same_tool(it->ops.back().op.tool, op.tool)) {
      it->ops.back().members.push_back(e);
      it->ops.back().deepest = std::min(it->ops.back().deepest, z);
      return;
    }
    HoleOp h;
    h.members = {e};
    h.op = op;
    h.op.kind = op.tool.type == ToolType::Reamer ? OperationKind::Reaming : OperationKind::Drilling;
    h.op.strategy = DrillingStrategy{};
    h.op.toolpaths.clear();
    h.deepest = z;
    it->ops.push_back(std::move(h));
  };

  for (std::size_t e = 0; e < ex.size(); ++e) {
    const auto* ws = std::get_if<MachiningWorkingstep>(&ex[e]);
    if (!ws) continue;
    if (!ws->operation || ws->operation->toolpaths.empty()) {
      retained[e] = true;
      continue;
    }
    const Operation& op = *ws->operation;
    if (op.kind == OperationKind::Drilling || op.kind == OperationKind::Reaming) {
      Vec3 loc = ws->feature < cc1.features.size() ? cc1.features[ws->feature].placement.location : Vec3{};
      add_hole(e, op, {loc.x, loc.y}, op.tool.diameter);
      continue;
    }
    if (op.kind != OperationKind::Freeform) {
      retained[e] = true;
      continue;
    }
    Phase1Result p1 = phase1_classify(*ws, o);
    switch (p1.kind) {
      case Phase1Kind::RoundHole: add_hole(e, op, p1.axis, p1.diameter); break;
      case Phase1Kind::PlanarFace:
      case Phase1Kind::Slot:
        forced[e] = p1.kind;
        candidates.push_back(e);
        break;
      case Phase1Kind::Defer: candidates.push_back(e); break;
      case Phase1Kind::Region: retained[e] = true; break;
    }
  }

  // Phase 2 on the layer groups.
  std::vector<Recognized> recognized;
  for (auto& g : merge_layers(cc1, candidates, o)) {
    bool ok = false;
    if (footprint) {
      try {
        const auto& deepest = std::get<MachiningWorkingstep>(ex[g.members.back()]);
        const Operation& op = *deepest.operation;
        const double d = op.tool.diameter;
        geom::Path2D path;
        std::vector<geom::Region> sweeps;
        for (const auto& t : op.toolpaths) {
          auto lp = level_path(t, g.z.back());
          if (geom::path_length(lp) > geom::path_length(path)) path = lp;
          sweeps.push_back(geom::sweep(geom::project_xy(t), d / 2));
        }
        geom::Region region = geom::unite(sweeps);
        StrategyLabel strat = classify_strategy(path, d, o);
        auto feat = infer_feature(strat, path, region, *footprint, o);
        auto f = forced.find(g.members.front());
        if (f != forced.end() && f->second == Phase1Kind::PlanarFace &&
            !(feat && std::holds_alternative<PlanarFaceShape>(feat->shape))) {
          PlanarFaceShape s;
          bool along_y = !(strat.kind == StrategyLabel::Kind::Bidirectional ||
                           strat.kind == StrategyLabel::Kind::Unidirectional) ||
                         std::fabs(strat.direction.y) >= std::fabs(strat.direction.x);
          s.course_direction = along_y ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
          s.course_length = along_y ? footprint->height() : footprint->width();
          s.profile_length = along_y ? footprint->width() : footprint->height();
          feat = InferredFeature{s, {footprint->xmin, footprint->ymin, 0}, "PLANAR FACE"};
        } else if (f != forced.end() && f->second == Phase1Kind::Slot &&
                   !(feat && std::holds_alternative<SlotShape>(feat->shape))) {
          SlotShape s;
          s.width = d;
          s.course.closed = false;
          s.course.points.push_back({path.start.x, path.start.y, 0});
          for (const auto& seg : path.segments) s.course.points.push_back({seg.to.x, seg.to.y, 0});
          feat = InferredFeature{s, {}, "SLOT"};
        }
        if (feat) {
          recognized.push_back({g, *feat, strat, std::move(region), &op});
          ok = true;
        }
      } catch (const ConversionError&) {
        ok = false;
      }
    }
    if (!ok)
      for (auto m : g.members) retained[m] = true;
  }

  // Rough and finish groups of one feature: the earlier region lies inside
  // the later one.
  std::vector<Chain> chains;
  for (auto& r : recognized) {
    Chain* target = nullptr;
    if (r.feature.prefix != "PLANAR FACE") {
      for (auto c = chains.rbegin(); c != chains.rend(); ++c) {
        const Recognized& prev = c->finish();
        if (prev.feature.prefix != r.feature.prefix) continue;
        double a = geom::area(prev.region);
        if (a > 0 && geom::uncovered_area(prev.region, r.region) <= 1e-3 * a) {
          target = &*c;
          break;
        }
      }
    }
    if (target) target->groups.push_back(std::move(r));
    else chains.push_back(Chain{{std::move(r)}});
  }

  // Faces lower the stock top of whatever lies under them.
  struct Face {
    const geom::Region* region;
    double floor;
  };
  std::vector<Face> faces;
  for (const auto& c : chains)
    if (c.finish().feature.prefix == "PLANAR FACE") faces.push_back({&c.finish().region, c.finish().group.z.back()});
  const double raw_top = raw ? raw->top() : 0.0;
  auto top_over = [&](const geom::Region* region, std::optional<geom::Point2> point, double floor) {
    double top = raw_top;
    for (const auto& f : faces) {
      if (f.floor < floor - 1e-9) continue;
      bool under = region ? geom::uncovered_area(*region, *f.region) <= 1e-3 * geom::area(*region)
                          : geom::contains(*f.region, *point);
      if (under) top = std::min(top, f.floor);
    }
    return top;
  };

  std::vector<PendingFeature> pfeatures;
  std::vector<PendingStep> steps;
  std::vector<geom::Region> regions;
  const Vec3 wp_origin = wp.placement.location;

  for (const auto& c : chains) {
    const Recognized& fin = c.finish();
    PendingFeature pf;
    pf.prefix = fin.feature.prefix;
    pf.shape = fin.feature.shape;
    pf.origin = fin.feature.origin;
    pf.floor = fin.group.z.back();
    for (const auto& g : c.groups) pf.floor = std::min(pf.floor, g.group.z.back());
    const bool is_face = pf.prefix == "PLANAR FACE";
    pf.top = is_face ? raw_top : top_over(&fin.region, std::nullopt, pf.floor);
    if (auto* h = std::get_if<RoundHoleShape>(&pf.shape)) {
      h->through = raw && pf.floor <= raw->bottom() - o.tol_merge;
      pf.diameter = h->diameter;
    }
    pfeatures.push_back(pf);
    const std::size_t fi = pfeatures.size() - 1;

    for (std::size_t gi = 0; gi < c.groups.size(); ++gi) {
      const Recognized& r = c.groups[gi];
      regions.push_back(r.region);
      const bool rough = gi + 1 < c.groups.size();
      Operation op = *r.base;
      const Operation& first = *std::get<MachiningWorkingstep>(ex[r.group.members.front()]).operation;
      op.retract_plane = first.retract_plane;
      op.toolpaths.clear();
      op.strategy = to_strategy(r.strategy, op.technology.spindle < 0);
      // Layers at or above the stock top have no depth of cut.
      std::vector<double> steps_z;
      if (pf.top - r.group.z.front() > o.tol_merge) steps_z.push_back(pf.top - r.group.z.front());
      for (std::size_t i = 1; i < r.group.z.size(); ++i) steps_z.push_back(r.group.z[i - 1] - r.group.z[i]);
      if (!steps_z.empty()) op.axial_depth = median(steps_z);
      PendingStep s;
      s.key = r.group.members.front();
      s.feature = fi;
      s.members = r.group.members;
      if (is_face) {
        op.kind = OperationKind::PlaneFinishMilling;
        op.plunge_approach = true;
        s.role = "FINISH";
      } else {
        op.kind = rough ? OperationKind::BottomAndSideRoughMilling : OperationKind::BottomAndSideFinishMilling;
        if (r.strategy.stepover > 0) op.radial_depth = r.strategy.stepover;
        if (rough && !fin.region.empty() && !r.region.empty()) {
          std::vector<double> gaps;
          for (const auto& p : r.region.polygons.front().outer)
            gaps.push_back(geom::distance_to_ring(fin.region.polygons.front().outer, p));
          op.allowance_side = median(gaps);
          op.allowance_bottom = r.group.z.back() - fin.group.z.back();
        }
        s.role = rough ? "ROUGH" : "FINISH";
      }
      s.op = std::move(op);
      steps.push_back(std::move(s));
    }
  }

  for (const auto& h : holes) {
    PendingFeature pf;
    pf.prefix = "HOLE";
    pf.origin = {h.axis.x, h.axis.y, 0};
    pf.floor = h.ops.front().deepest;
    for (const auto& op : h.ops) pf.floor = std::min(pf.floor, op.deepest);
    pf.top = raw ? top_over(nullptr, h.axis, pf.floor) : h.ops.front().op.retract_plane;
    pf.diameter = h.diameter;
    pf.shape = RoundHoleShape{h.diameter, raw && pf.floor <= raw->bottom() - o.tol_merge, 0.0};
    pfeatures.push_back(pf);
    const std::size_t fi = pfeatures.size() - 1;
    for (const auto& hop : h.ops) {
      PendingStep s;
      s.key = hop.members.front();
      s.feature = fi;
      s.members = hop.members;
      s.op = hop.op;
      s.op->cutting_depth = pf.top - hop.deepest;
      s.role = hop.op.kind == OperationKind::Reaming ? "REAM" : "DRILL";
      steps.push_back(std::move(s));
    }
  }

  // Unrecognized workingsteps and the rapids beside them stay as they were.
  std::map<std::size_t, std::size_t> kept_feature;
  for (std::size_t e = 0; e < ex.size(); ++e) {
    if (const auto* ws = std::get_if<MachiningWorkingstep>(&ex[e])) {
      if (!retained[e]) continue;
      PendingStep s;
      s.key = e;
      s.members = {e};
      s.kept_name = ws->name;
      s.op = ws->operation;
      if (ws->feature < cc1.features.size()) {
        auto it = kept_feature.find(ws->feature);
        if (it == kept_feature.end()) {
          PendingFeature pf;
          pf.kept = cc1.features[ws->feature];
          pfeatures.push_back(pf);
          it = kept_feature.emplace(ws->feature, pfeatures.size() - 1).first;
        }
        s.feature = it->second;
      }
      steps.push_back(std::move(s));
    } else {
      bool beside = (e > 0 && retained[e - 1]) || (e + 1 < ex.size() && retained[e + 1]);
      if (!beside) continue;
      PendingStep s;
      s.key = e;
      s.rapid = std::get<RapidMovement>(ex[e]);
      steps.push_back(std::move(s));
    }
  }

  std::stable_sort(steps.begin(), steps.end(),
                   [](const PendingStep& a, const PendingStep& b) { return a.key < b.key; });

  Cc2Result out;
  out.regions = std::move(regions);
  Project& p = out.project;
  p.name = cc1.name;
  p.workplan_name = cc1.workplan_name;
  p.workpiece = cc1.workpiece;
  p.setup = cc1.setup;

  std::vector<std::optional<std::size_t>> feature_index(pfeatures.size());
  std::vector<std::string> short_name(pfeatures.size());
  std::map<std::string, int> counters;
  for (auto& s : steps) {
    if (s.rapid) {
      p.executables.push_back(*s.rapid);
      continue;
    }
    std::size_t fi = *s.feature;
    if (!feature_index[fi]) {
      const PendingFeature& pf = pfeatures[fi];
      Feature f;
      if (pf.kept) {
        f = *pf.kept;
        short_name[fi] = f.name;
      } else {
        short_name[fi] = pf.prefix + std::to_string(++counters[pf.prefix]);
        f.name = short_name[fi];
        if (pf.prefix == "HOLE") f.name += " D=" + format_number(pf.diameter) + "MM";
        f.placement = Placement{f.name, {pf.origin.x - wp_origin.x, pf.origin.y - wp_origin.y, pf.top - wp_origin.z}};
        f.depth.name = f.name + ":DEPTH PLANE";
        f.depth.position = Placement{f.name, {0, 0, pf.floor - pf.top}};
        f.shape = pf.shape;
      }
      p.features.push_back(std::move(f));
      feature_index[fi] = p.features.size() - 1;
    }
    MachiningWorkingstep ws;
    ws.feature = *feature_index[fi];
    ws.operation = s.op;
    if (s.kept_name) {
      ws.name = *s.kept_name;
      ++out.retained;
    } else {
      ws.operation->name = s.role + " " + short_name[fi];
      ws.name = "WS " + ws.operation->name;
    }
    p.executables.push_back(std::move(ws));
    out.members.push_back(s.members);
  }
  return out;
}

Project build_cc2(const Project& cc1, const ExtractOptions& options) {
  return extract_features(cc1, options).project;
}

}  // namespace g2s
