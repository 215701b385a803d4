#include "g2s/canon.hpp"

#include <cmath>
#include <cstdio>

namespace g2s {

namespace {

constexpr double kInch = 25.4;

bool code_is(double value, double code) { return std::fabs(value - code) < 1e-6; }

double units_factor(LengthUnits u) { return u == LengthUnits::Inch ? kInch : 1.0; }

std::string code_text(char letter, double value) { return letter + format_number(value); }

bool has_axis_words(const Block& b) {
  return b.has('X') || b.has('Y') || b.has('Z') || b.has('A') || b.has('B') || b.has('C');
}

std::optional<double> motion_code(const Block& b) {
  for (const auto& w : b.words) {
    if (w.letter != 'G') continue;
    for (double c : {0.0, 1.0, 2.0, 3.0, 80.0, 81.0, 82.0, 83.0, 84.0, 85.0, 86.0, 87.0, 88.0,
                     89.0, 73.0})
      if (code_is(w.value, c)) return c;
  }
  return std::nullopt;
}

void check_supported(const Block& b, const MachineSetup& setup) {
  static const double kG[] = {0,  1,  2,  3,  4,  17, 18, 19, 20, 21, 40, 43, 49, 54, 55,
                              56, 57, 58, 59, 80, 81, 82, 83, 85, 90, 91, 94, 98, 99};
  static const double kM[] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 30};
  for (const auto& w : b.words) {
    if (w.letter == 'G') {
      if (code_is(w.value, 41) || code_is(w.value, 42))
        throw ConversionError(ErrorKind::UnsupportedCode, code_text('G', w.value), b.line_index);
      bool ok = false;
      for (double c : kG) ok = ok || code_is(w.value, c);
      if (!ok) {
        for (double c : {73.0, 84.0, 86.0, 87.0, 88.0, 89.0})
          if (code_is(w.value, c))
            throw ConversionError(ErrorKind::UnsupportedCycle, code_text('G', w.value),
                                  b.line_index);
        throw ConversionError(ErrorKind::UnsupportedCode, code_text('G', w.value), b.line_index);
      }
    } else if (w.letter == 'M') {
      bool ok = false;
      for (double c : kM) ok = ok || code_is(w.value, c);
      if (!ok)
        throw ConversionError(ErrorKind::UnsupportedCode, code_text('M', w.value), b.line_index);
    } else if ((w.letter == 'A' || w.letter == 'B' || w.letter == 'C') && setup.axis_count <= 3) {
      throw ConversionError(ErrorKind::UnsupportedCode,
                            std::string("rotary axis ") + w.letter + " on a 3-axis machine",
                            b.line_index);
    }
  }
}

CanonicalCall make(CanonKind kind) {
  CanonicalCall c;
  c.kind = kind;
  return c;
}

// Linear target of a motion block in the canonical frame.
Vec3 linear_target(const ControllerState& st, const Block& b) {
  const double u = units_factor(st.units);
  Vec3 t = st.position;
  auto resolve = [&](char letter, double& coord, double offset) {
    if (auto v = b.get(letter)) {
      coord = st.distance_mode == DistanceMode::Absolute ? *v * u + offset : coord + *v * u;
    }
  };
  resolve('X', t.x, st.work_offset.x);
  resolve('Y', t.y, st.work_offset.y);
  resolve('Z', t.z, st.work_offset.z);
  return t;
}

std::array<double, 3> rotary_target(const ControllerState& st, const Block& b) {
  auto r = st.rotary;
  const char letters[3] = {'A', 'B', 'C'};
  for (int i = 0; i < 3; ++i)
    if (auto v = b.get(letters[i]))
      r[i] = st.distance_mode == DistanceMode::Absolute ? *v : r[i] + *v;
  return r;
}

// In-plane (first, second) coordinates and the axial coordinate.
struct PlaneAxes {
  double Vec3::*first;
  double Vec3::*second;
  double Vec3::*axial;
  char first_offset;
  char second_offset;
  Vec3 normal;
};

PlaneAxes axes_of(CanonPlane plane) {
  switch (plane) {
    case CanonPlane::XY: return {&Vec3::x, &Vec3::y, &Vec3::z, 'I', 'J', {0, 0, 1}};
    case CanonPlane::XZ: return {&Vec3::z, &Vec3::x, &Vec3::y, 'K', 'I', {0, 1, 0}};
    case CanonPlane::YZ: return {&Vec3::y, &Vec3::z, &Vec3::x, 'J', 'K', {1, 0, 0}};
  }
  return {&Vec3::x, &Vec3::y, &Vec3::z, 'I', 'J', {0, 0, 1}};
}

CanonicalCall arc_call(const ControllerState& st, const Block& b, bool ccw) {
  const double u = units_factor(st.units);
  const Vec3 start = st.position;
  const Vec3 end = linear_target(st, b);
  const PlaneAxes ax = axes_of(st.plane);

  double c1, c2;
  if (auto r = b.get('R')) {
    double radius = *r * u;
    double s1 = start.*ax.first, s2 = start.*ax.second;
    double e1 = end.*ax.first, e2 = end.*ax.second;
    double d1 = e1 - s1, d2 = e2 - s2;
    double chord = std::hypot(d1, d2);
    if (chord < 1e-9)
      throw ConversionError(ErrorKind::MalformedWord, "R-form arc with coincident endpoints",
                            b.line_index);
    double half = chord / 2.0;
    double h2 = radius * radius - half * half;
    if (h2 < -1e-6 * radius * radius - 1e-9)
      throw ConversionError(ErrorKind::MalformedWord, "arc radius smaller than half chord",
                            b.line_index);
    double h = std::sqrt(std::max(0.0, h2));
    // Left normal of the chord; the minor arc centre is on the left for ccw.
    double n1 = -d2 / chord, n2 = d1 / chord;
    double side = ccw ? 1.0 : -1.0;
    if (radius < 0) side = -side;
    c1 = s1 + d1 / 2.0 + side * h * n1;
    c2 = s2 + d2 / 2.0 + side * h * n2;
  } else {
    if (!b.has(ax.first_offset) && !b.has(ax.second_offset))
      throw ConversionError(ErrorKind::MalformedWord, "arc without centre or radius",
                            b.line_index);
    c1 = start.*ax.first + b.get(ax.first_offset).value_or(0.0) * u;
    c2 = start.*ax.second + b.get(ax.second_offset).value_or(0.0) * u;
    double r0 = std::hypot(start.*ax.first - c1, start.*ax.second - c2);
    double r1 = std::hypot(end.*ax.first - c1, end.*ax.second - c2);
    if (std::fabs(r0 - r1) > std::max(0.01, 1e-3 * r0))
      throw ConversionError(ErrorKind::MalformedWord, "arc end point is not on the arc",
                            b.line_index);
  }

  CanonicalCall call = make(CanonKind::ArcFeed);
  call.position = end;
  call.center = start;
  call.center.*ax.first = c1;
  call.center.*ax.second = c2;
  call.rotation = ccw ? 1 : -1;
  call.plane = st.plane;
  return call;
}

struct Expansion {
  ControllerState state;
  std::vector<CanonicalCall> calls;
};

Expansion expand_cycle(const ControllerState& in, const Block& b, double code) {
  Expansion out{in, {}};
  ControllerState& st = out.state;
  const double u = units_factor(st.units);
  const bool incremental = st.distance_mode == DistanceMode::Incremental;
  const int line = b.line_index;

  if (st.plane != CanonPlane::XY)
    throw ConversionError(ErrorKind::UnsupportedCycle, "canned cycle outside the XY plane", line);

  const double initial_z = st.position.z;
  // R and Z: absolute values are in the work frame; incremental R is measured
  // from the initial height and Z from R.
  if (auto r = b.get('R'))
    st.cycle_r = incremental ? initial_z + *r * u : *r * u + st.work_offset.z;
  if (!st.cycle_r)
    throw ConversionError(ErrorKind::MissingCycleWord, "canned cycle without R", line);
  if (auto z = b.get('Z'))
    st.cycle_z = incremental ? *st.cycle_r + *z * u : *z * u + st.work_offset.z;
  if (!st.cycle_z)
    throw ConversionError(ErrorKind::MissingCycleWord, "canned cycle without Z", line);
  if (auto q = b.get('Q')) st.cycle_q = std::fabs(*q) * u;
  if (code_is(code, 83) && (!st.cycle_q || *st.cycle_q <= 0.0))
    throw ConversionError(ErrorKind::MissingCycleWord, "G83 without a positive Q", line);
  if (!st.feed_rate)
    throw ConversionError(ErrorKind::MotionWithoutFeedrate, "canned cycle without feed rate",
                          line);

  const double r_z = *st.cycle_r;
  const double bottom = *st.cycle_z;
  const double clear_z =
      st.retract_mode == RetractMode::ToInitial ? std::max(r_z, initial_z) : r_z;
  int repeats = 1;
  if (auto l = b.get('L')) repeats = std::max(0, static_cast<int>(std::lround(*l)));

  double hole_x = st.position.x, hole_y = st.position.y;
  double step_x = 0, step_y = 0;
  if (incremental) {
    step_x = b.get('X').value_or(0.0) * u;
    step_y = b.get('Y').value_or(0.0) * u;
  } else {
    if (auto x = b.get('X')) hole_x = *x * u + st.work_offset.x;
    if (auto y = b.get('Y')) hole_y = *y * u + st.work_offset.y;
  }

  for (int rep = 0; rep < repeats; ++rep) {
    if (incremental) {
      hole_x += step_x;
      hole_y += step_y;
    }
    CycleTag tag{static_cast<int>(std::lround(code)), hole_x, hole_y, bottom, r_z};
    auto emit = [&](CanonKind kind, double z, double value = 0.0) {
      CanonicalCall c = make(kind);
      c.position = {hole_x, hole_y, z};
      if (kind == CanonKind::Dwell) c.position = st.position;
      c.value = value;
      c.cycle = tag;
      c.line = line;
      c.rotary = std::nullopt;
      out.calls.push_back(c);
      if (kind != CanonKind::Dwell) st.position = c.position;
    };
    auto traverse_to = [&](double x, double y, double z) {
      CanonicalCall c = make(CanonKind::StraightTraverse);
      c.position = {x, y, z};
      c.cycle = tag;
      c.line = line;
      out.calls.push_back(c);
      st.position = c.position;
    };

    // Preliminary motion: clear to R if below it, then position over the hole.
    if (st.position.z < r_z) {
      traverse_to(st.position.x, st.position.y, r_z);
      traverse_to(hole_x, hole_y, r_z);
    } else {
      traverse_to(hole_x, hole_y, st.position.z);
      traverse_to(hole_x, hole_y, r_z);
    }

    if (code_is(code, 81) || code_is(code, 82)) {
      emit(CanonKind::StraightFeed, bottom);
      if (code_is(code, 82)) emit(CanonKind::Dwell, bottom, b.get('P').value_or(0.0));
      emit(CanonKind::StraightTraverse, clear_z);
    } else if (code_is(code, 83)) {
      constexpr double kPeckClearance = 0.254;
      double depth = r_z;
      bool first = true;
      while (depth > bottom + 1e-12) {
        double next = std::max(depth - *st.cycle_q, bottom);
        if (!first) emit(CanonKind::StraightTraverse, std::min(r_z, depth + kPeckClearance));
        emit(CanonKind::StraightFeed, next);
        if (next > bottom + 1e-12) emit(CanonKind::StraightTraverse, r_z);
        depth = next;
        first = false;
      }
      if (first) emit(CanonKind::StraightFeed, bottom);  // zero-depth cycle
      emit(CanonKind::StraightTraverse, clear_z);
    } else if (code_is(code, 85)) {
      emit(CanonKind::StraightFeed, bottom);
      emit(CanonKind::StraightFeed, r_z);
      if (clear_z > r_z) emit(CanonKind::StraightTraverse, clear_z);
    } else {
      throw ConversionError(ErrorKind::UnsupportedCycle, code_text('G', code), line);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(CanonKind kind) {
  switch (kind) {
    case CanonKind::UseLengthUnits: return "USE_LENGTH_UNITS";
    case CanonKind::SetOriginOffsets: return "SET_ORIGIN_OFFSETS";
    case CanonKind::SetFeedReference: return "SET_FEED_REFERENCE";
    case CanonKind::SelectPlane: return "SELECT_PLANE";
    case CanonKind::SetFeedRate: return "SET_FEED_RATE";
    case CanonKind::SetSpindleSpeed: return "SET_SPINDLE_SPEED";
    case CanonKind::StartSpindleClockwise: return "START_SPINDLE_CLOCKWISE";
    case CanonKind::StartSpindleCounterclockwise: return "START_SPINDLE_COUNTERCLOCKWISE";
    case CanonKind::StopSpindleTurning: return "STOP_SPINDLE_TURNING";
    case CanonKind::SpindleRetract: return "SPINDLE_RETRACT";
    case CanonKind::ChangeTool: return "CHANGE_TOOL";
    case CanonKind::SelectTool: return "SELECT_TOOL";
    case CanonKind::UseToolLengthOffset: return "USE_TOOL_LENGTH_OFFSET";
    case CanonKind::StraightTraverse: return "STRAIGHT_TRAVERSE";
    case CanonKind::StraightFeed: return "STRAIGHT_FEED";
    case CanonKind::ArcFeed: return "ARC_FEED";
    case CanonKind::FloodOn: return "FLOOD_ON";
    case CanonKind::FloodOff: return "FLOOD_OFF";
    case CanonKind::MistOn: return "MIST_ON";
    case CanonKind::MistOff: return "MIST_OFF";
    case CanonKind::Dwell: return "DWELL";
    case CanonKind::ProgramStop: return "PROGRAM_STOP";
    case CanonKind::OptionalProgramStop: return "OPTIONAL_PROGRAM_STOP";
    case CanonKind::ProgramEnd: return "PROGRAM_END";
  }
  return "?";
}

Vec3 MachineSetup::work_offset(int code) const {
  auto it = work_offsets.find(code);
  return it == work_offsets.end() ? Vec3{} : it->second;
}

ControllerState initial_state(const MachineSetup& setup) {
  ControllerState st;
  st.work_offset_code = 54;
  st.work_offset = setup.work_offset(54);
  st.position = setup.initial_position.value_or(Vec3{});
  return st;
}

std::vector<CanonicalCall> decompose_cycle(const ControllerState& state, const Block& block) {
  auto code = motion_code(block);
  if (!code) code = state.motion_modal;
  if (!code || *code < 80.5)
    throw ConversionError(ErrorKind::UnsupportedCycle, "block is not a canned cycle",
                          block.line_index);
  return expand_cycle(state, block, *code).calls;
}

BlockResult execute_block(const ControllerState& in, const Block& b, const MachineSetup& setup) {
  check_supported(b, setup);

  BlockResult result{in, {}};
  ControllerState& st = result.state;
  std::vector<CanonicalCall>& out = result.calls;
  auto emit = [&](CanonicalCall c) {
    c.line = b.line_index;
    out.push_back(std::move(c));
  };

  // Units apply to every value in the block, including F.
  if (b.has_g(20)) st.units = LengthUnits::Inch;
  if (b.has_g(21)) st.units = LengthUnits::Mm;
  const double u = units_factor(st.units);

  // Coolant on precedes spindle settings; coolant off follows spindle stop.
  if (b.has_m(7)) {
    emit(make(CanonKind::MistOn));
    st.mist = true;
  }
  if (b.has_m(8)) {
    emit(make(CanonKind::FloodOn));
    st.flood = true;
  }
  if (auto f = b.get('F')) {
    auto c = make(CanonKind::SetFeedRate);
    c.value = *f * u;
    st.feed_rate = c.value;
    emit(c);
  }
  if (auto s = b.get('S')) {
    auto c = make(CanonKind::SetSpindleSpeed);
    c.value = *s;
    st.spindle_speed = *s;
    emit(c);
  }

  auto lookup_tool = [&](int id) -> const ToolSpec& {
    auto it = setup.tool_table.find(id);
    if (it == setup.tool_table.end())
      throw ConversionError(ErrorKind::UndefinedTool, "T" + std::to_string(id), b.line_index);
    return it->second;
  };
  std::optional<int> t_word;
  if (auto t = b.get('T')) t_word = static_cast<int>(std::lround(*t));
  if (b.has_m(6)) {
    int id = t_word.value_or(st.selected_tool);
    if (id == 0 && !t_word)
      throw ConversionError(ErrorKind::UndefinedTool, "M6 without a selected tool",
                            b.line_index);
    const ToolSpec& tool = lookup_tool(id);
    auto reset = make(CanonKind::UseToolLengthOffset);
    reset.value = 0.0;
    emit(reset);
    auto c = make(CanonKind::ChangeTool);
    c.tool_id = id;
    c.tool_name = tool.name;
    emit(c);
    st.selected_tool = id;
    st.current_tool = id;
    st.length_offset = 0.0;
  } else if (t_word) {
    const ToolSpec& tool = lookup_tool(*t_word);
    auto c = make(CanonKind::SelectTool);
    c.tool_id = *t_word;
    c.tool_name = tool.name;
    emit(c);
    st.selected_tool = *t_word;
  }

  if (b.has_m(3)) {
    emit(make(CanonKind::StartSpindleClockwise));
    st.spindle_dir = SpindleDir::Clockwise;
  } else if (b.has_m(4)) {
    emit(make(CanonKind::StartSpindleCounterclockwise));
    st.spindle_dir = SpindleDir::CounterClockwise;
  } else if (b.has_m(5)) {
    emit(make(CanonKind::StopSpindleTurning));
    st.spindle_dir = SpindleDir::Stopped;
  }
  if (b.has_m(9)) {
    if (st.mist) emit(make(CanonKind::MistOff));
    emit(make(CanonKind::FloodOff));
    st.mist = false;
    st.flood = false;
  }
  if (b.has_g(4)) {
    auto p = b.get('P');
    if (!p) throw ConversionError(ErrorKind::MalformedWord, "G4 without P", b.line_index);
    auto c = make(CanonKind::Dwell);
    c.value = *p;
    c.position = st.position;
    emit(c);
  }

  // Modal settings.
  if ((b.has_g(20) && in.units != LengthUnits::Inch) ||
      (b.has_g(21) && in.units != LengthUnits::Mm)) {
    auto c = make(CanonKind::UseLengthUnits);
    c.units = st.units;
    emit(c);
  }
  for (auto [code, plane] : {std::pair{17.0, CanonPlane::XY}, std::pair{18.0, CanonPlane::XZ},
                             std::pair{19.0, CanonPlane::YZ}}) {
    if (b.has_g(code)) {
      auto c = make(CanonKind::SelectPlane);
      c.plane = plane;
      st.plane = plane;
      emit(c);
    }
  }
  if (b.has_g(43)) {
    int h = b.get('H') ? static_cast<int>(std::lround(*b.get('H'))) : st.current_tool;
    auto it = setup.length_offsets.find(h);
    if (it == setup.length_offsets.end())
      throw ConversionError(ErrorKind::UndefinedTool, "no length offset H" + std::to_string(h),
                            b.line_index);
    auto c = make(CanonKind::UseToolLengthOffset);
    c.value = it->second;
    st.length_offset = it->second;
    emit(c);
  }
  if (b.has_g(49)) {
    // Cancelling length compensation lifts the spindle by the old offset.
    emit(make(CanonKind::SpindleRetract));
    st.length_offset = 0.0;
  }
  for (int code = 54; code <= 59; ++code) {
    if (b.has_g(code) && code != st.work_offset_code) {
      st.work_offset_code = code;
      st.work_offset = setup.work_offset(code);
      auto c = make(CanonKind::SetOriginOffsets);
      c.position = st.work_offset;
      emit(c);
    }
  }
  if (b.has_g(90)) st.distance_mode = DistanceMode::Absolute;
  if (b.has_g(91)) st.distance_mode = DistanceMode::Incremental;
  if (b.has_g(98)) st.retract_mode = RetractMode::ToInitial;
  if (b.has_g(99)) st.retract_mode = RetractMode::ToR;

  // Motion.
  auto explicit_motion = motion_code(b);
  if (explicit_motion) {
    st.motion_modal = *explicit_motion;
    if (code_is(*explicit_motion, 80)) {
      st.cycle_r.reset();
      st.cycle_z.reset();
      st.cycle_q.reset();
    }
  }
  if (has_axis_words(b)) {
    if (!st.motion_modal || code_is(*st.motion_modal, 80))
      throw ConversionError(ErrorKind::UnsupportedCode, "axis words without a motion mode",
                            b.line_index);
    const double code = *st.motion_modal;
    const bool rotary = setup.axis_count > 3;
    if (code > 80.5) {
      auto exp = expand_cycle(st, b, code);
      for (auto& c : exp.calls) {
        if (rotary) c.rotary = st.rotary;
        emit(c);
      }
      st = exp.state;
    } else {
      CanonicalCall c;
      if (code_is(code, 0) || code_is(code, 1)) {
        if (code_is(code, 1) && !st.feed_rate)
          throw ConversionError(ErrorKind::MotionWithoutFeedrate, "G1", b.line_index);
        c = make(code_is(code, 0) ? CanonKind::StraightTraverse : CanonKind::StraightFeed);
        c.position = linear_target(st, b);
      } else {
        if (!st.feed_rate)
          throw ConversionError(ErrorKind::MotionWithoutFeedrate,
                                code_is(code, 2) ? "G2" : "G3", b.line_index);
        c = arc_call(st, b, code_is(code, 3));
      }
      if (rotary) {
        st.rotary = rotary_target(st, b);
        c.rotary = st.rotary;
      }
      st.position = c.position;
      emit(c);
    }
  }

  if (b.has_m(0)) emit(make(CanonKind::ProgramStop));
  if (b.has_m(1)) emit(make(CanonKind::OptionalProgramStop));
  if (b.has_m(2) || b.has_m(30)) emit(make(CanonKind::ProgramEnd));
  return result;
}

std::vector<CanonicalCall> interpret_program(const Program& program, const MachineSetup& setup) {
  ControllerState st = initial_state(setup);
  std::vector<CanonicalCall> calls;

  auto units = make(CanonKind::UseLengthUnits);
  units.units = st.units;
  calls.push_back(units);
  auto offsets = make(CanonKind::SetOriginOffsets);
  offsets.position = st.work_offset;
  calls.push_back(offsets);
  calls.push_back(make(CanonKind::SetFeedReference));

  std::vector<std::string> pending;
  for (const Block& block : program.blocks) {
    BlockResult r = execute_block(st, block, setup);
    st = std::move(r.state);
    pending.insert(pending.end(), block.notes.begin(), block.notes.end());
    if (block.comment) pending.push_back(*block.comment);
    if (!r.calls.empty()) {
      r.calls.front().annotations = std::move(pending);
      pending.clear();
    }
    for (auto& c : r.calls) calls.push_back(std::move(c));
    if (!calls.empty() && calls.back().kind == CanonKind::ProgramEnd) break;
  }
  return calls;
}

std::vector<Diagnostic> lint_canon(const std::vector<CanonicalCall>& calls) {
  std::vector<Diagnostic> out;
  bool feed_set = false, spindle_on = false;
  for (const auto& c : calls) {
    if (c.kind == CanonKind::SetFeedRate) feed_set = true;
    if (c.kind == CanonKind::StartSpindleClockwise ||
        c.kind == CanonKind::StartSpindleCounterclockwise)
      spindle_on = true;
    if (c.kind == CanonKind::StopSpindleTurning) spindle_on = false;
    if (c.is_feed() && (!feed_set || !spindle_on))
      out.push_back({ErrorKind::MotionWithoutFeedrate, c.line,
                     !feed_set ? "feed move before SET_FEED_RATE"
                               : "feed move with the spindle stopped"});
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xyz(const CanonicalCall& c) {
  std::string s = num(c.position.x) + ", " + num(c.position.y) + ", " + num(c.position.z);
  if (c.rotary)
    for (double a : *c.rotary) s += ", " + num(a);
  return s;
}

std::string plane_name(CanonPlane p) {
  switch (p) {
    case CanonPlane::XY: return "CANON_PLANE_XY";
    case CanonPlane::XZ: return "CANON_PLANE_XZ";
    case CanonPlane::YZ: return "CANON_PLANE_YZ";
  }
  return "?";
}

}  // namespace

std::string render_call(const CanonicalCall& c) {
  std::string args;
  switch (c.kind) {
    case CanonKind::UseLengthUnits:
      args = c.units == LengthUnits::Mm ? "UNITS_MM" : "UNITS_INCHES";
      break;
    case CanonKind::SetOriginOffsets:
    case CanonKind::StraightTraverse:
    case CanonKind::StraightFeed:
      args = xyz(c);
      break;
    case CanonKind::SetFeedReference: args = "CANON_XYZ"; break;
    case CanonKind::SelectPlane: args = plane_name(c.plane); break;
    case CanonKind::SetFeedRate:
    case CanonKind::SetSpindleSpeed:
    case CanonKind::UseToolLengthOffset:
    case CanonKind::Dwell:
      args = num(c.value);
      break;
    case CanonKind::ChangeTool:
    case CanonKind::SelectTool:
      args = c.tool_name.empty() ? std::to_string(c.tool_id) : c.tool_name;
      break;
    case CanonKind::ArcFeed: {
      const PlaneAxes ax = axes_of(c.plane);
      args = num(c.position.*ax.first) + ", " + num(c.position.*ax.second) + ", " +
             num(c.center.*ax.first) + ", " + num(c.center.*ax.second) + ", " +
             std::to_string(c.rotation) + ", " + num(c.position.*ax.axial);
      if (c.rotary)
        for (double a : *c.rotary) args += ", " + num(a);
      break;
    }
    default: break;
  }
  return std::string(to_string(c.kind)) + "(" + args + ")";
}

std::string render_canon(const std::vector<CanonicalCall>& calls) {
  std::string out;
  int n = 0;
  for (const auto& c : calls) out += std::to_string(++n) + " " + render_call(c) + "\n";
  return out;
}

}  // namespace g2s
