#include "g2s/stepnc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "g2s/canon.hpp"

namespace g2s {

namespace {

struct ToolName {
  ToolType type;
  std::string_view keyword;
};

constexpr ToolName kToolNames[] = {
    {ToolType::Endmill, "ENDMILL"},
    {ToolType::TaperedEndmill, "TAPERED_ENDMILL"},
    {ToolType::BallEndmill, "BALL_ENDMILL"},
    {ToolType::BullnoseEndmill, "BULLNOSE_ENDMILL"},
    {ToolType::Facemill, "FACEMILL"},
    {ToolType::TSlotMill, "T_SLOT_MILL"},
    {ToolType::DovetailMill, "DOVETAIL_MILL"},
    {ToolType::WoodruffKeyseatMill, "WOODRUFF_KEYSEAT_MILL"},
    {ToolType::TwistDrill, "TWIST_DRILL"},
    {ToolType::CenterDrill, "CENTER_DRILL"},
    {ToolType::Reamer, "REAMER"},
    {ToolType::Tap, "TAP"},
};

// Orthonormal in-plane basis for an arc: radial start direction and its
// ccw-perpendicular.
struct ArcFrame {
  Vec3 u;
  Vec3 v;
  double radius = 0.0;
  double sweep = 0.0;  // signed, radians
  double rise = 0.0;   // displacement along the normal
};

ArcFrame arc_frame(const Vec3& from, const PathSegment& seg) {
  const ArcInfo& arc = *seg.arc;
  const Vec3 n = arc.normal * (1.0 / arc.normal.norm());
  ArcFrame f;
  Vec3 r0 = from - arc.center;
  r0 = r0 - n * r0.dot(n);
  f.radius = r0.norm();
  f.rise = (seg.end - from).dot(n);
  if (f.radius < 1e-12) return f;
  f.u = r0 * (1.0 / f.radius);
  f.v = n.cross(f.u);
  Vec3 r1 = seg.end - arc.center;
  r1 = r1 - n * r1.dot(n);
  double angle = std::atan2(r1.dot(f.v), r1.dot(f.u));
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (arc.ccw) {
    if (angle <= 1e-12) angle += kTwoPi;
  } else {
    if (angle >= -1e-12) angle -= kTwoPi;
  }
  f.sweep = angle;
  return f;
}

}  // namespace

std::string_view keyword(ToolType type) {
  for (const auto& t : kToolNames)
    if (t.type == type) return t.keyword;
  return "ENDMILL";
}

std::optional<ToolType> tool_type_from_name(std::string_view name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (const auto& t : kToolNames)
    if (t.keyword == upper) return t.type;
  return std::nullopt;
}

bool is_hole_making(ToolType type) {
  return type == ToolType::TwistDrill || type == ToolType::CenterDrill ||
         type == ToolType::Reamer || type == ToolType::Tap;
}

bool is_endmill_family(ToolType type) {
  return type == ToolType::Endmill || type == ToolType::TaperedEndmill ||
         type == ToolType::BallEndmill || type == ToolType::BullnoseEndmill ||
         type == ToolType::Facemill;
}

bool is_slot_cutter(ToolType type) {
  return type == ToolType::TSlotMill || type == ToolType::DovetailMill ||
         type == ToolType::WoodruffKeyseatMill;
}

std::vector<Vec3> discretize_arc(const Vec3& from, const PathSegment& seg, double chord_tol) {
  if (!seg.arc) return {seg.end};
  ArcFrame f = arc_frame(from, seg);
  if (f.radius < 1e-9) return {seg.end};
  double max_step = std::numbers::pi / 2.0;
  if (chord_tol < f.radius) max_step = std::min(max_step, 2.0 * std::acos(1.0 - chord_tol / f.radius));
  int n = std::max(1, static_cast<int>(std::ceil(std::fabs(f.sweep) / max_step - 1e-9)));
  const Vec3 n_hat = seg.arc->normal * (1.0 / seg.arc->normal.norm());
  Vec3 center = from - f.u * f.radius;
  std::vector<Vec3> out;
  out.reserve(n);
  for (int i = 1; i < n; ++i) {
    double t = static_cast<double>(i) / n;
    double a = f.sweep * t;
    out.push_back(center + f.u * (f.radius * std::cos(a)) + f.v * (f.radius * std::sin(a)) +
                  n_hat * (f.rise * t));
  }
  out.push_back(seg.end);
  return out;
}

double segment_length(const Vec3& from, const PathSegment& seg) {
  if (!seg.arc) return distance(from, seg.end);
  ArcFrame f = arc_frame(from, seg);
  return std::hypot(f.radius * f.sweep, f.rise);
}

std::vector<Vec3> Trajectory::points(double chord_tol) const {
  std::vector<Vec3> out{start};
  Vec3 cur = start;
  for (const auto& seg : segments) {
    if (seg.arc) {
      auto pts = discretize_arc(cur, seg, chord_tol);
      out.insert(out.end(), pts.begin(), pts.end());
    } else {
      out.push_back(seg.end);
    }
    cur = seg.end;
  }
  return out;
}

double Trajectory::length() const {
  double total = 0.0;
  Vec3 cur = start;
  for (const auto& seg : segments) {
    total += segment_length(cur, seg);
    cur = seg.end;
  }
  return total;
}

std::string_view keyword(OperationKind kind) {
  switch (kind) {
    case OperationKind::Freeform: return "FREEFORM_OPERATION";
    case OperationKind::PlaneFinishMilling: return "PLANE_FINISH_MILLING";
    case OperationKind::BottomAndSideRoughMilling: return "BOTTOM_AND_SIDE_ROUGH_MILLING";
    case OperationKind::BottomAndSideFinishMilling: return "BOTTOM_AND_SIDE_FINISH_MILLING";
    case OperationKind::Drilling: return "DRILLING";
    case OperationKind::Reaming: return "REAMING";
  }
  return "FREEFORM_OPERATION";
}

std::string_view keyword(const FeatureShape& shape) {
  struct Visitor {
    std::string_view operator()(const ToolpathShape&) const { return "TOOLPATH_FEATURE"; }
    std::string_view operator()(const PlanarFaceShape&) const { return "PLANAR_FACE"; }
    std::string_view operator()(const RoundHoleShape&) const { return "ROUND_HOLE"; }
    std::string_view operator()(const ClosedPocketShape&) const { return "CLOSED_POCKET"; }
    std::string_view operator()(const OpenPocketShape&) const { return "OPEN_POCKET"; }
    std::string_view operator()(const StepShape&) const { return "STEP"; }
    std::string_view operator()(const SlotShape&) const { return "SLOT"; }
    std::string_view operator()(const OutsideProfileShape&) const {
      return "GENERAL_OUTSIDE_PROFILE";
    }
  };
  return std::visit(Visitor{}, shape);
}

std::size_t Project::workingstep_count() const {
  return static_cast<std::size_t>(
      std::count_if(executables.begin(), executables.end(), [](const Executable& e) {
        return std::holds_alternative<MachiningWorkingstep>(e);
      }));
}

Project new_project(const MachineSetup& setup, const Workpiece& workpiece, std::string name) {
  if (workpiece.rawpiece && setup.security_plane_z <= workpiece.rawpiece->top())
    throw ConversionError(ErrorKind::InvalidSetup,
                          "security plane z=" + format_number(setup.security_plane_z) +
                              " is not above the rawpiece top");
  Project p;
  p.name = std::move(name);
  p.workpiece = workpiece;
  p.setup.security_plane.name = "SECURITY PLANE";
  p.setup.security_plane.position = Placement{"PLANE1", {0, 0, setup.security_plane_z}};
  return p;
}

namespace {

// Coincident points are allowed: two-decimal files can produce them.
void check_trajectory(const Trajectory& t, std::vector<Diagnostic>& out) {
  auto finite = [](const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); };
  bool ok = finite(t.start);
  for (const auto& seg : t.segments) ok = ok && finite(seg.end);
  if (!ok) out.push_back({ErrorKind::UnserializableModel, 0, "trajectory '" + t.name + "' has a non-finite point"});
}

void check_operation(const Operation& op, std::vector<Diagnostic>& out) {
  auto bad = [&](const std::string& what) {
    out.push_back({ErrorKind::UnserializableModel, 0, "operation '" + op.name + "' " + what});
  };
  if (op.kind == OperationKind::Freeform && op.toolpaths.empty()) bad("has no toolpath");
  if (!(op.tool.diameter > 0.0)) bad("uses a tool without diameter");
  if (op.axial_depth && !(*op.axial_depth > 0.0)) bad("has a non-positive axial depth");
  if (op.radial_depth && !(*op.radial_depth > 0.0)) bad("has a non-positive radial depth");
  for (const auto& t : op.toolpaths) check_trajectory(t, out);
}

}  // namespace

std::vector<Diagnostic> validate(const Project& project) {
  std::vector<Diagnostic> out;
  std::vector<bool> used(project.features.size(), false);
  for (const auto& e : project.executables) {
    if (const auto* ws = std::get_if<MachiningWorkingstep>(&e)) {
      if (ws->feature >= project.features.size()) {
        out.push_back({ErrorKind::UnserializableModel, 0,
                       "workingstep '" + ws->name + "' names a missing feature"});
        continue;
      }
      used[ws->feature] = true;
      if (!ws->operation)
        out.push_back({ErrorKind::UnserializableModel, 0,
                       "workingstep '" + ws->name + "' has no operation"});
      else
        check_operation(*ws->operation, out);
    } else {
      const auto& rm = std::get<RapidMovement>(e);
      if (rm.path.segments.empty())
        out.push_back({ErrorKind::UnserializableModel, 0,
                       "rapid movement '" + rm.name + "' is empty"});
      else
        check_trajectory(rm.path, out);
    }
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (const auto* hole = std::get_if<RoundHoleShape>(&project.features[i].shape);
        hole && hole->diameter <= 0.0)
      out.push_back({ErrorKind::UnserializableModel, 0,
                     "round hole '" + project.features[i].name + "' has no diameter"});
    if (!used[i])
      out.push_back({ErrorKind::UnserializableModel, 0,
                     "feature '" + project.features[i].name + "' is never machined"});
  }
  if (project.workpiece.rawpiece && project.security_z() <= project.workpiece.rawpiece->top())
    out.push_back({ErrorKind::InvalidSetup, 0, "security plane below the rawpiece top"});
  return out;
}

std::vector<const Operation*> feature_operations(const Project& project, std::size_t index) {
  std::vector<const Operation*> out;
  for (const auto& e : project.executables)
    if (const auto* ws = std::get_if<MachiningWorkingstep>(&e))
      if (ws->feature == index && ws->operation) out.push_back(&*ws->operation);
  return out;
}

}  // namespace g2s
