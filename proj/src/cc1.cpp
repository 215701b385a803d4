#include "g2s/cc1.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace g2s {

namespace {

constexpr double kSameLength = 1e-9;

struct Hints {
  std::optional<double> feed;
  std::optional<double> speed;
  SpindleDir spindle = SpindleDir::Stopped;
  bool flood = false;
  bool mist = false;
  int tool = 0;
};

enum class Change { None, Feed, Other };

// Applies a non-motion call and reports whether it changes a chain hint.
Change apply_hint(Hints& h, const CanonicalCall& c) {
  auto set_flag = [](bool& flag, bool value) {
    bool changed = flag != value;
    flag = value;
    return changed ? Change::Other : Change::None;
  };
  auto set_dir = [&](SpindleDir d) {
    bool changed = h.spindle != d;
    h.spindle = d;
    return changed ? Change::Other : Change::None;
  };
  switch (c.kind) {
    case CanonKind::SetFeedRate: {
      bool changed = !h.feed || *h.feed != c.value;
      h.feed = c.value;
      return changed ? Change::Feed : Change::None;
    }
    case CanonKind::SetSpindleSpeed: {
      bool changed = !h.speed || *h.speed != c.value;
      h.speed = c.value;
      return changed ? Change::Other : Change::None;
    }
    case CanonKind::StartSpindleClockwise: return set_dir(SpindleDir::Clockwise);
    case CanonKind::StartSpindleCounterclockwise: return set_dir(SpindleDir::CounterClockwise);
    case CanonKind::StopSpindleTurning: return set_dir(SpindleDir::Stopped);
    case CanonKind::FloodOn: return set_flag(h.flood, true);
    case CanonKind::FloodOff: return set_flag(h.flood, false);
    case CanonKind::MistOn: return set_flag(h.mist, true);
    case CanonKind::MistOff: return set_flag(h.mist, false);
    case CanonKind::ChangeTool: {
      h.tool = c.tool_id;
      return Change::Other;
    }
    default: return Change::None;
  }
}

Vec3 plane_normal(CanonPlane p) {
  switch (p) {
    case CanonPlane::XY: return {0, 0, 1};
    case CanonPlane::XZ: return {0, 1, 0};
    case CanonPlane::YZ: return {1, 0, 0};
  }
  return {0, 0, 1};
}

PathSegment to_segment(const CanonicalCall& c) {
  PathSegment s{c.position, std::nullopt};
  if (c.kind == CanonKind::ArcFeed) s.arc = ArcInfo{c.center, plane_normal(c.plane), c.rotation > 0};
  return s;
}

// Appends a move unless it has no length. Full circles keep their length.
void append_move(Trajectory& t, const CanonicalCall& c) {
  PathSegment s = to_segment(c);
  if (!s.arc && distance(t.end(), s.end) <= kSameLength) return;
  t.segments.push_back(std::move(s));
}

bool same_hole(const CycleTag& a, const CycleTag& b) {
  return a.code == b.code && std::fabs(a.hole_x - b.hole_x) < 1e-9 &&
         std::fabs(a.hole_y - b.hole_y) < 1e-9;
}

}  // namespace

std::vector<Segment> segment(const std::vector<CanonicalCall>& calls) {
  std::vector<Segment> out;
  std::optional<Segment> open;
  std::optional<CycleTag> open_tag;
  Hints hints;
  auto close = [&] {
    if (open) out.push_back(std::move(*open));
    open.reset();
    open_tag.reset();
  };

  for (std::size_t i = 0; i < calls.size(); ++i) {
    const CanonicalCall& c = calls[i];
    if (c.cycle) {
      if (!(open && open->kind == SegmentKind::Cycle && same_hole(*open_tag, *c.cycle))) {
        close();
        open = Segment{SegmentKind::Cycle, {}};
        open_tag = c.cycle;
      }
      open->calls.push_back(i);
      continue;
    }
    if (c.is_motion()) {
      SegmentKind kind = c.kind == CanonKind::StraightTraverse ? SegmentKind::Rapid : SegmentKind::Feed;
      if (!open || open->kind != kind) {
        close();
        open = Segment{kind, {}};
      }
      open->calls.push_back(i);
      continue;
    }
    Change ch = apply_hint(hints, c);
    if (ch == Change::Other || (ch == Change::Feed && open && open->kind != SegmentKind::Cycle))
      close();
  }
  close();
  return out;
}

Project build_cc1(const std::vector<CanonicalCall>& calls, const JobSetup& setup) {
  Project project = new_project(setup.machine, setup.workpiece, setup.project_name);
  const Workpiece& wp = setup.workpiece;

  std::vector<Segment> segments = segment(calls);
  std::map<std::size_t, std::size_t> first_index;  // call index -> segment
  std::vector<bool> in_segment(calls.size(), false);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    first_index[segments[s].calls.front()] = s;
    for (auto i : segments[s].calls) in_segment[i] = true;
  }

  Hints hints;
  std::optional<Vec3> pos = setup.machine.initial_position;
  std::vector<std::string> pending;
  int ws_count = 0, rapid_count = 0, toolpath_count = 0;

  struct Hole {
    double x, y;
    std::size_t feature;
    double deepest;
    double diameter;
  };
  std::vector<Hole> holes;

  auto current_tool = [&](int line) -> const ToolSpec& {
    auto it = setup.machine.tool_table.find(hints.tool);
    if (it == setup.machine.tool_table.end())
      throw ConversionError(ErrorKind::UndefinedTool, "cutting move with no tool loaded", line);
    return it->second;
  };
  auto technology = [&] {
    double rpm = hints.speed.value_or(0.0);
    double signed_rpm = hints.spindle == SpindleDir::Clockwise ? -rpm
                        : hints.spindle == SpindleDir::CounterClockwise ? rpm
                                                                       : 0.0;
    return Technology{hints.feed.value_or(0.0), signed_rpm};
  };
  auto segment_label = [&](const Segment& seg) -> std::optional<std::string> {
    for (auto i : seg.calls)
      if (!calls[i].annotations.empty()) return calls[i].annotations.front();
    return std::nullopt;
  };

  for (std::size_t i = 0; i < calls.size(); ++i) {
    const CanonicalCall& c = calls[i];
    auto seg_it = first_index.find(i);
    if (seg_it == first_index.end()) {
      if (!in_segment[i]) {
        apply_hint(hints, c);
        pending.insert(pending.end(), c.annotations.begin(), c.annotations.end());
      }
      continue;
    }
    const Segment& seg = segments[seg_it->second];
    // Non-motion calls interleaved with a cycle group (feed changes between
    // passes) reach the hints after the group is built.
    const Hints at_start = hints;

    if (seg.kind == SegmentKind::Rapid) {
      if (!pos) {
        pos = calls[seg.calls.back()].position;
        continue;
      }
      Trajectory t;
      t.rapid = true;
      t.start = *pos;
      for (auto k : seg.calls) append_move(t, calls[k]);
      pos = calls[seg.calls.back()].position;
      if (t.segments.empty()) continue;
      auto label = segment_label(seg);
      ++rapid_count;
      t.name = label.value_or("RAPID " + std::to_string(rapid_count));
      project.executables.push_back(RapidMovement{t.name, std::move(t)});
      continue;
    }

    if (seg.kind == SegmentKind::Feed) {
      const CanonicalCall& first = calls[seg.calls.front()];
      if (!pos)
        throw ConversionError(ErrorKind::DanglingFeed,
                              "feed move before the machine position is known", first.line);
      Trajectory t;
      t.start = *pos;
      for (auto k : seg.calls) append_move(t, calls[k]);
      pos = calls[seg.calls.back()].position;
      if (t.segments.empty()) continue;

      ++ws_count;
      ++toolpath_count;
      auto label = segment_label(seg);
      if (!label && !pending.empty()) label = pending.back();
      pending.clear();
      std::string name = label.value_or("WS " + std::to_string(ws_count));
      t.name = name;

      double min_z = t.start.z;
      for (const auto& p : t.points()) min_z = std::min(min_z, p.z);

      Feature f;
      f.name = "TOOLPATH" + std::to_string(toolpath_count);
      f.placement = wp.placement;
      f.depth.name = f.name + ":DEPTH PLANE";
      f.depth.position = Placement{f.name, {0, 0, min_z - wp.placement.location.z}};
      f.shape = ToolpathShape{};
      project.features.push_back(std::move(f));

      Operation op;
      op.kind = OperationKind::Freeform;
      op.name = name;
      op.retract_plane = t.start.z;
      op.tool = current_tool(first.line);
      op.technology = technology();
      op.functions = MachineFunctions{hints.flood, hints.mist, true};
      op.toolpaths.push_back(std::move(t));
      project.executables.push_back(
          MachiningWorkingstep{name, project.features.size() - 1, std::move(op)});
      continue;
    }

    // Cycle group.
    const CanonicalCall& first = calls[seg.calls.front()];
    const CycleTag tag = *first.cycle;
    Operation op;
    const ToolSpec& tool = current_tool(first.line);
    op.kind = tool.type == ToolType::Reamer ? OperationKind::Reaming : OperationKind::Drilling;
    op.tool = tool;
    op.technology = technology();
    op.functions = MachineFunctions{at_start.flood, at_start.mist, true};
    op.retract_plane = tag.retract_r;
    op.strategy = DrillingStrategy{};
    double deepest = tag.depth_z;
    Vec3 cur = pos.value_or(Vec3{first.position.x, first.position.y, first.position.z});
    std::optional<Trajectory> run;
    auto flush = [&] {
      if (run && !run->segments.empty()) op.toolpaths.push_back(std::move(*run));
      run.reset();
    };
    std::optional<std::string> label;
    for (auto k : seg.calls) {
      const CanonicalCall& m = calls[k];
      if (!label && !m.annotations.empty()) label = m.annotations.front();
      deepest = std::min(deepest, m.cycle->depth_z);
      if (!m.is_motion()) continue;
      bool rapid = m.kind == CanonKind::StraightTraverse;
      if (!run || run->rapid != rapid) {
        flush();
        run = Trajectory{};
        run->rapid = rapid;
        run->start = cur;
      }
      append_move(*run, m);
      cur = m.position;
    }
    flush();
    pos = cur;

    const double top = wp.rawpiece ? wp.rawpiece->top() : tag.retract_r;
    op.cutting_depth = top - deepest;

    auto hole = std::find_if(holes.begin(), holes.end(), [&](const Hole& h) {
      return std::fabs(h.x - tag.hole_x) < 1e-6 && std::fabs(h.y - tag.hole_y) < 1e-6;
    });
    if (hole == holes.end()) {
      Feature f;
      f.name = "HOLE" + std::to_string(holes.size() + 1);
      f.placement = Placement{f.name, {tag.hole_x, tag.hole_y, top}};
      f.shape = RoundHoleShape{};
      project.features.push_back(std::move(f));
      holes.push_back({tag.hole_x, tag.hole_y, project.features.size() - 1, deepest, 0.0});
      hole = holes.end() - 1;
    }
    hole->deepest = std::min(hole->deepest, deepest);
    hole->diameter = std::max(hole->diameter, tool.diameter);

    ++ws_count;
    if (!label && !pending.empty()) label = pending.back();
    pending.clear();
    std::string name = label.value_or("WS " + std::to_string(ws_count));
    op.name = name;
    for (auto& t : op.toolpaths) t.name = name;
    project.executables.push_back(MachiningWorkingstep{name, hole->feature, std::move(op)});
  }

  for (const Hole& h : holes) {
    Feature& f = project.features[h.feature];
    const double top = f.placement.location.z;
    f.name += " D=" + format_number(h.diameter) + "MM";
    f.placement.name = f.name;
    f.depth.name = f.name + ":DEPTH PLANE";
    f.depth.position = Placement{f.name, {0, 0, h.deepest - top}};
    bool through = wp.rawpiece && h.deepest <= wp.rawpiece->bottom() - wp.global_tolerance;
    f.shape = RoundHoleShape{h.diameter, through, 0.0};
  }
  return project;
}

}  // namespace g2s
