#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "g2s/error.hpp"

namespace g2s {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// ISO 14649-111 milling tool taxonomy (subset).
enum class ToolType {
  Endmill,
  TaperedEndmill,
  BallEndmill,
  BullnoseEndmill,
  Facemill,
  TSlotMill,
  DovetailMill,
  WoodruffKeyseatMill,
  TwistDrill,
  CenterDrill,
  Reamer,
  Tap,
};

std::string_view keyword(ToolType type);
std::optional<ToolType> tool_type_from_name(std::string_view name);
bool is_hole_making(ToolType type);
bool is_endmill_family(ToolType type);
bool is_slot_cutter(ToolType type);

enum class Hand { Right, Left, Neutral };

struct ToolSpec {
  int id = 0;
  std::string name;
  ToolType type = ToolType::Endmill;
  double diameter = 0.0;
  int flute_count = 0;
  std::optional<double> cutting_edge_length;
  std::optional<double> overall_length;
  double edge_radius = 0.0;
  Hand hand = Hand::Right;
  bool coolant_through_tool = false;

  bool operator==(const ToolSpec&) const = default;
};

// Feed is kept in mm/min and spindle in rev/min; negative spindle means
// clockwise. The Part21 writer converts to file units.
struct Technology {
  double feedrate = 0.0;
  double spindle = 0.0;

  bool operator==(const Technology&) const = default;
};

struct MachineFunctions {
  bool coolant = false;
  bool mist = false;
  bool chip_removal = true;

  bool operator==(const MachineFunctions&) const = default;
};

struct Placement {
  std::string name;
  Vec3 location;
  Vec3 axis{0, 0, 1};
  Vec3 ref_direction{1, 0, 0};

  bool operator==(const Placement&) const = default;
};

struct Plane {
  std::string name;
  Placement position;

  bool operator==(const Plane&) const = default;
};

struct NamedPoint {
  std::string name;
  Vec3 point;

  bool operator==(const NamedPoint&) const = default;
};

// Circular move around `center` (taken at the start point's height) in the
// plane whose normal is `normal`; a non-zero end height along the normal
// makes it a helix.
struct ArcInfo {
  Vec3 center;
  Vec3 normal{0, 0, 1};
  bool ccw = true;

  bool operator==(const ArcInfo&) const = default;
};

struct PathSegment {
  Vec3 end;
  std::optional<ArcInfo> arc;

  bool operator==(const PathSegment&) const = default;
};

struct Trajectory {
  std::string name;
  Vec3 start;
  std::vector<PathSegment> segments;
  bool rapid = false;

  bool operator==(const Trajectory&) const = default;

  // Vertices with arcs replaced by chords of at most `chord_tol` sagitta.
  std::vector<Vec3> points(double chord_tol = 0.01) const;
  double length() const;
  Vec3 end() const { return segments.empty() ? start : segments.back().end; }
};

// Samples an arc from `from` to `seg.end` (excluding `from`).
std::vector<Vec3> discretize_arc(const Vec3& from, const PathSegment& seg, double chord_tol);
double segment_length(const Vec3& from, const PathSegment& seg);

enum class StepoverSide { Left, Right };
enum class CutMode { Climb, Conventional };

struct BidirectionalMilling {
  double overlap = 0.0;
  Vec3 feed_direction{1, 0, 0};
  StepoverSide stepover_side = StepoverSide::Left;
  bool operator==(const BidirectionalMilling&) const = default;
};
struct UnidirectionalMilling {
  double overlap = 0.0;
  Vec3 feed_direction{1, 0, 0};
  CutMode cutmode = CutMode::Climb;
  bool operator==(const UnidirectionalMilling&) const = default;
};
struct ContourParallel {
  bool ccw = true;
  CutMode cutmode = CutMode::Climb;
  bool operator==(const ContourParallel&) const = default;
};
struct ContourSpiral {
  bool ccw = true;
  CutMode cutmode = CutMode::Climb;
  bool operator==(const ContourSpiral&) const = default;
};
struct CenterMilling {
  bool operator==(const CenterMilling&) const = default;
};
struct DrillingStrategy {
  bool operator==(const DrillingStrategy&) const = default;
};

using MachiningStrategy = std::variant<BidirectionalMilling, UnidirectionalMilling,
                                       ContourParallel, ContourSpiral, CenterMilling,
                                       DrillingStrategy>;

enum class OperationKind {
  Freeform,
  PlaneFinishMilling,
  BottomAndSideRoughMilling,
  BottomAndSideFinishMilling,
  Drilling,
  Reaming,
};

std::string_view keyword(OperationKind kind);

struct Operation {
  OperationKind kind = OperationKind::Freeform;
  std::string name;
  double retract_plane = 0.0;
  ToolSpec tool;
  Technology technology;
  MachineFunctions functions;
  std::vector<Trajectory> toolpaths;
  std::optional<MachiningStrategy> strategy;
  bool plunge_approach = false;  // plane milling approach/retract strategy
  std::optional<double> axial_depth;
  std::optional<double> radial_depth;
  std::optional<double> allowance_side;
  std::optional<double> allowance_bottom;
  std::optional<double> cutting_depth;  // hole-making operations
  bool spindle_stop_at_bottom = false;  // reaming

  bool operator==(const Operation&) const = default;
};

// Feature shapes. Lengths in mm; depth planes are expressed in the feature's
// own placement frame, as in ISO 14649.
struct ToolpathShape {
  bool operator==(const ToolpathShape&) const = default;
};
struct PlanarFaceShape {
  double course_length = 0.0;
  Vec3 course_direction{0, 1, 0};
  double profile_length = 0.0;
  double tolerance = 0.3;
  bool operator==(const PlanarFaceShape&) const = default;
};
struct RoundHoleShape {
  double diameter = 0.0;
  bool through = true;
  double tolerance = 0.0;
  bool operator==(const RoundHoleShape&) const = default;
};
struct RectangularProfile {
  double width = 0.0;   // along x of the feature frame
  double length = 0.0;  // along y
  bool operator==(const RectangularProfile&) const = default;
};
// Closed or open polyline in the feature frame.
struct PolylineProfile {
  std::vector<Vec3> points;
  bool closed = true;
  bool operator==(const PolylineProfile&) const = default;
};
struct ClosedPocketShape {
  std::variant<RectangularProfile, PolylineProfile> boundary;
  double corner_radius = 0.0;
  bool operator==(const ClosedPocketShape&) const = default;
};
struct OpenPocketShape {
  PolylineProfile boundary;
  double corner_radius = 0.0;
  bool operator==(const OpenPocketShape&) const = default;
};
struct StepShape {
  Vec3 wall_direction{1, 0, 0};
  double wall_length = 0.0;
  double width = 0.0;
  bool operator==(const StepShape&) const = default;
};
struct SlotShape {
  PolylineProfile course;
  double width = 0.0;
  bool operator==(const SlotShape&) const = default;
};
struct OutsideProfileShape {
  PolylineProfile profile;
  bool operator==(const OutsideProfileShape&) const = default;
};

using FeatureShape = std::variant<ToolpathShape, PlanarFaceShape, RoundHoleShape,
                                  ClosedPocketShape, OpenPocketShape, StepShape, SlotShape,
                                  OutsideProfileShape>;

std::string_view keyword(const FeatureShape& shape);

struct Feature {
  std::string name;
  Placement placement;
  Plane depth;
  FeatureShape shape;

  bool operator==(const Feature&) const = default;
};

struct MachiningWorkingstep {
  std::string name;
  std::size_t feature = 0;  // index into Project::features
  std::optional<Operation> operation;

  bool operator==(const MachiningWorkingstep&) const = default;
};

struct RapidMovement {
  std::string name;
  Trajectory path;

  bool operator==(const RapidMovement&) const = default;
};

using Executable = std::variant<MachiningWorkingstep, RapidMovement>;

struct Box {
  Vec3 origin;
  Vec3 size;

  bool operator==(const Box&) const = default;
  double top() const { return origin.z + size.z; }
  double bottom() const { return origin.z; }
};

struct Workpiece {
  std::string name = "CUBOID WORKPIECE";
  double global_tolerance = 0.01;
  Placement placement{"CUBOID WORKPIECE", {}, {0, 0, 1}, {1, 0, 0}};
  std::vector<NamedPoint> clamping_points;
  // Rawpiece box in the program frame. Not written to Part21.
  std::optional<Box> rawpiece;

  bool operator==(const Workpiece&) const = default;
};

struct SetupInfo {
  std::string name = "SETUP1";
  Placement origin{"SETUP1", {}, {0, 0, 1}, {1, 0, 0}};
  Plane security_plane;

  bool operator==(const SetupInfo&) const = default;
};

struct Project {
  std::string name;
  std::string workplan_name = "MAIN WORKPLAN";
  Workpiece workpiece;
  SetupInfo setup;
  std::vector<Feature> features;
  std::vector<Executable> executables;

  bool operator==(const Project&) const = default;

  double security_z() const { return setup.security_plane.position.location.z; }
  std::size_t workingstep_count() const;
};

struct MachineSetup;

// Empty main workplan with workpiece and security plane installed. Throws
// InvalidSetup if the plane is not above the rawpiece.
Project new_project(const MachineSetup& setup, const Workpiece& workpiece,
                    std::string name = "EXECUTE PROJECT");

std::vector<Diagnostic> validate(const Project& project);

// Operations of every workingstep naming feature `index`, in workplan order.
std::vector<const Operation*> feature_operations(const Project& project, std::size_t index);

}  // namespace g2s
