#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "g2s/gcode.hpp"
#include "g2s/stepnc.hpp"

namespace g2s {

enum class LengthUnits { Mm, Inch };
enum class DistanceMode { Absolute, Incremental };
enum class CanonPlane { XY, XZ, YZ };
enum class SpindleDir { Stopped, Clockwise, CounterClockwise };
enum class RetractMode { ToR, ToInitial };

enum class CanonKind {
  UseLengthUnits,
  SetOriginOffsets,
  SetFeedReference,
  SelectPlane,
  SetFeedRate,
  SetSpindleSpeed,
  StartSpindleClockwise,
  StartSpindleCounterclockwise,
  StopSpindleTurning,
  SpindleRetract,
  ChangeTool,
  SelectTool,
  UseToolLengthOffset,
  StraightTraverse,
  StraightFeed,
  ArcFeed,
  FloodOn,
  FloodOff,
  MistOn,
  MistOff,
  Dwell,
  ProgramStop,
  OptionalProgramStop,
  ProgramEnd,
};

std::string_view to_string(CanonKind kind);

// Provenance of calls produced by expanding a canned cycle.
struct CycleTag {
  int code = 81;
  double hole_x = 0.0;
  double hole_y = 0.0;
  double depth_z = 0.0;
  double retract_r = 0.0;

  bool operator==(const CycleTag&) const = default;
};

// One NIST-style canonical machining function. Only the fields relevant to
// `kind` are meaningful; coordinates are absolute millimetres in the
// program frame including the active work offset.
struct CanonicalCall {
  CanonKind kind = CanonKind::ProgramEnd;
  Vec3 position;                          // motion target / origin offsets
  std::optional<std::array<double, 3>> rotary;  // A, B, C in degrees
  Vec3 center;                            // ARC_FEED centre at the start height
  int rotation = 0;                       // ARC_FEED: +1 ccw, -1 cw
  CanonPlane plane = CanonPlane::XY;      // ARC_FEED / SELECT_PLANE
  double value = 0.0;                     // feed, speed, length, dwell
  LengthUnits units = LengthUnits::Mm;
  int tool_id = 0;
  std::string tool_name;
  int line = 0;
  std::optional<CycleTag> cycle;
  // Source comments (block comment and preceding comment lines).
  std::vector<std::string> annotations;

  bool operator==(const CanonicalCall&) const = default;

  bool is_motion() const {
    return kind == CanonKind::StraightTraverse || kind == CanonKind::StraightFeed ||
           kind == CanonKind::ArcFeed;
  }
  bool is_feed() const { return kind == CanonKind::StraightFeed || kind == CanonKind::ArcFeed; }
};

struct MachineSetup {
  int axis_count = 3;
  std::string process = "milling";
  std::map<int, Vec3> work_offsets;  // 54..59
  std::optional<Vec3> initial_position;
  std::map<int, ToolSpec> tool_table;
  std::map<int, double> length_offsets;  // H number -> mm
  double security_plane_z = 100.0;

  Vec3 work_offset(int code) const;
};

struct ControllerState {
  LengthUnits units = LengthUnits::Mm;
  DistanceMode distance_mode = DistanceMode::Absolute;
  int work_offset_code = 54;
  Vec3 work_offset;
  CanonPlane plane = CanonPlane::XY;
  std::optional<double> feed_rate;  // mm/min
  double spindle_speed = 0.0;       // rev/min
  SpindleDir spindle_dir = SpindleDir::Stopped;
  bool flood = false;
  bool mist = false;
  int selected_tool = 0;
  int current_tool = 0;
  double length_offset = 0.0;
  Vec3 position;
  std::array<double, 3> rotary{0, 0, 0};
  RetractMode retract_mode = RetractMode::ToInitial;
  std::optional<double> motion_modal;  // last motion G code
  std::optional<double> cycle_r;       // sticky canned-cycle words (mm)
  std::optional<double> cycle_z;
  std::optional<double> cycle_q;

  bool operator==(const ControllerState&) const = default;
};

ControllerState initial_state(const MachineSetup& setup);

struct BlockResult {
  ControllerState state;
  std::vector<CanonicalCall> calls;
};

BlockResult execute_block(const ControllerState& state, const Block& block,
                          const MachineSetup& setup);

// Expands one canned-cycle block (G81, G82, G83, G85) into its basic moves.
std::vector<CanonicalCall> decompose_cycle(const ControllerState& state, const Block& block);

std::vector<CanonicalCall> interpret_program(const Program& program, const MachineSetup& setup);

// Flags feed moves that are not preceded by SET_FEED_RATE and a spindle
// start.
std::vector<Diagnostic> lint_canon(const std::vector<CanonicalCall>& calls);

std::string render_call(const CanonicalCall& call);
std::string render_canon(const std::vector<CanonicalCall>& calls);

}  // namespace g2s
