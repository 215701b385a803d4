#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "g2s/p21.hpp"

namespace g2s::p21 {

namespace {

enum Category {
  kProject,
  kWorkplan,
  kWorkpiece,
  kSetup,
  kExecutable,
  kFeature,
  kOperation,
  kTool,
  kTechnology,
  kGeometry,
  kPoint,
  kToolpath,
};

void append_utf8_escaped(std::string& out, std::string_view s) {
  std::size_t i = 0;
  std::string wide;  // pending \X2\ hex digits
  auto flush_wide = [&] {
    if (wide.empty()) return;
    out += "\\X2\\" + wide + "\\X0\\";
    wide.clear();
  };
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      flush_wide();
      if (c == '\'') out += "''";
      else if (c == '\\') out += "\\\\";
      else if (c < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\X\\%02X", c);
        out += buf;
      } else out += static_cast<char>(c);
      ++i;
      continue;
    }
    unsigned cp = 0;
    int extra = 0;
    if ((c & 0xE0) == 0xC0) { cp = c & 0x1F; extra = 1; }
    else if ((c & 0xF0) == 0xE0) { cp = c & 0x0F; extra = 2; }
    else { cp = c & 0x07; extra = 3; }
    ++i;
    for (int k = 0; k < extra && i < s.size(); ++k, ++i)
      cp = (cp << 6) | (static_cast<unsigned char>(s[i]) & 0x3F);
    if (cp > 0xFFFF) cp = 0xFFFD;
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04X", cp);
    wide += buf;
  }
  flush_wide();
}

void render(std::string& out, const Value& v, const WriteOptions& o) {
  switch (v.type) {
    case Value::Type::Null: out += '$'; break;
    case Value::Type::Derived: out += '*'; break;
    case Value::Type::Number:
      if (v.integer) out += std::to_string(static_cast<long>(std::llround(v.number)));
      else out += format_real(v.number, o.decimals, o.full_precision);
      break;
    case Value::Type::String:
      out += '\'';
      append_utf8_escaped(out, v.text);
      out += '\'';
      break;
    case Value::Type::Enum: out += '.' + v.text + '.'; break;
    case Value::Type::Ref: out += '#' + std::to_string(v.ref); break;
    case Value::Type::List:
      out += '(';
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        if (i) out += ',';
        render(out, v.items[i], o);
      }
      out += ')';
      break;
  }
}

std::string render_args(const std::vector<Value>& args, const WriteOptions& o) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    render(out, args[i], o);
  }
  return out;
}

using V = Value;

class Builder {
 public:
  explicit Builder(const WriteOptions& o) : o_(o) {}

  int add(Category cat, std::string type, std::vector<Value> args, bool shared = true) {
    std::string key;
    if (shared) {
      key = type + "(" + render_args(args, o_) + ")";
      auto it = consed_.find(key);
      if (it != consed_.end()) return it->second;
    }
    nodes_.push_back({std::move(type), std::move(args), cat});
    int id = static_cast<int>(nodes_.size());
    if (shared) consed_.emplace(std::move(key), id);
    return id;
  }

  V real(double v) const { return V::real(v); }

  V xyz(const Vec3& p) const { return V::list({real(p.x), real(p.y), real(p.z)}); }

  int point(const std::string& name, const Vec3& p, Category cat = kPoint, bool shared = true) {
    return add(cat, "CARTESIAN_POINT", {V::string(name), xyz(p)}, shared);
  }

  int direction(const Vec3& d) {
    std::string name = "DIRECTION";
    if (d == Vec3{0, 0, 1}) name = "K-VECTOR";
    else if (d == Vec3{1, 0, 0}) name = "I-VECTOR";
    else if (d == Vec3{0, 1, 0}) name = "J-VECTOR";
    return add(kGeometry, "DIRECTION", {V::string(name), xyz(d)});
  }

  int placement(const Placement& p, std::string point_name = {}) {
    if (point_name.empty())
      point_name = p.location == Vec3{} ? "ORIGIN" : p.name + ":LOCATION";
    int pt = point(point_name, p.location);
    int axis = direction(p.axis);
    int ref = direction(p.ref_direction);
    return add(kGeometry, "AXIS2_PLACEMENT_3D",
               {V::string(p.name), V::reference(pt), V::reference(axis), V::reference(ref)});
  }

  int plane(const Plane& p, const std::string& point_name) {
    int pl = placement(p.position, point_name);
    return add(kGeometry, "PLANE", {V::string(p.name), V::reference(pl)});
  }

  int length_measure(double v, std::optional<double> tolerance = std::nullopt) {
    V tol = V::null();
    if (tolerance)
      tol = V::reference(add(kFeature, "PLUS_MINUS_VALUE",
                             {real(*tolerance), real(*tolerance), V::integer_value(3)}));
    return add(kFeature, "TOLERANCED_LENGTH_MEASURE", {real(v), tol});
  }

  int polyline(const std::string& name, const std::vector<Vec3>& pts, Category cat) {
    std::vector<V> refs;
    std::string last;
    for (const auto& p : pts) {
      std::string text = render_args({xyz(p)}, o_);
      if (text == last) continue;
      last = text;
      refs.push_back(V::reference(point("", p, cat, false)));
    }
    if (refs.size() == 1) refs.push_back(V::reference(point("", pts.back(), cat, false)));
    return add(cat, "POLYLINE", {V::string(name), V::list(std::move(refs))}, false);
  }

  int tool(const ToolSpec& t) {
    auto opt_len = [&](const std::optional<double>& v) { return v ? real(*v) : V::null(); };
    int dim = add(kTool, "MILLING_TOOL_DIMENSION",
                  {real(t.diameter), V::null(), V::null(), opt_len(t.cutting_edge_length),
                   real(t.edge_radius), V::null(), V::null()});
    std::string hand = t.hand == Hand::Right ? "RIGHT" : t.hand == Hand::Left ? "LEFT" : "NEUTRAL";
    int body = add(kTool, std::string(keyword(t.type)),
                   {V::reference(dim), t.flute_count > 0 ? V::integer_value(t.flute_count) : V::null(),
                    V::enumeration(hand), V::boolean(t.coolant_through_tool), V::null(), V::null()});
    int comp = add(kTool, "CUTTING_COMPONENT",
                   {opt_len(t.overall_length), V::null(), V::null(), V::null(), V::null()});
    return add(kTool, "MILLING_CUTTING_TOOL",
               {V::string(t.name), V::reference(body), V::list({V::reference(comp)}),
                opt_len(t.overall_length), V::null(), V::null()});
  }

  int technology(const Technology& t) {
    return add(kTechnology, "MILLING_TECHNOLOGY",
               {real(t.feedrate / o_.feedrate_divisor), V::enumeration("TCP"), V::null(),
                real(t.spindle / 60.0), V::null(), V::boolean(false), V::boolean(false),
                V::boolean(false), V::null()});
  }

  int functions(const MachineFunctions& f) {
    return add(kTechnology, "MILLING_MACHINE_FUNCTIONS",
               {V::boolean(f.coolant), V::null(), f.mist ? V::boolean(true) : V::null(),
                V::boolean(false), V::null(), V::list({}), V::boolean(f.chip_removal), V::null(),
                V::null(), V::list({})});
  }

  int strategy(const MachiningStrategy& s) {
    struct Visitor {
      Builder& b;
      int operator()(const BidirectionalMilling& m) const {
        return b.add(kTechnology, "BIDIRECTIONAL_MILLING",
                     {b.real(m.overlap), V::boolean(true), V::reference(b.direction(m.feed_direction)),
                      V::enumeration(m.stepover_side == StepoverSide::Left ? "LEFT" : "RIGHT"),
                      V::null()});
      }
      int operator()(const UnidirectionalMilling& m) const {
        return b.add(kTechnology, "UNIDIRECTIONAL_MILLING",
                     {b.real(m.overlap), V::boolean(true), V::reference(b.direction(m.feed_direction)),
                      V::enumeration(m.cutmode == CutMode::Climb ? "CLIMB" : "CONVENTIONAL")});
      }
      int operator()(const ContourParallel& m) const {
        return b.add(kTechnology, "CONTOUR_PARALLEL",
                     {V::null(), V::boolean(true), V::enumeration(m.ccw ? "CCW" : "CW"),
                      V::enumeration(m.cutmode == CutMode::Climb ? "CLIMB" : "CONVENTIONAL")});
      }
      int operator()(const ContourSpiral& m) const {
        return b.add(kTechnology, "CONTOUR_SPIRAL",
                     {V::null(), V::boolean(true), V::enumeration(m.ccw ? "CCW" : "CW"),
                      V::enumeration(m.cutmode == CutMode::Climb ? "CLIMB" : "CONVENTIONAL")});
      }
      int operator()(const CenterMilling&) const {
        return b.add(kTechnology, "CENTER_MILLING", {V::null(), V::boolean(true)});
      }
      int operator()(const DrillingStrategy&) const {
        return b.add(kTechnology, "DRILLING_TYPE_STRATEGY",
                     {V::null(), V::null(), V::null(), V::null(), V::null(), V::null()});
      }
    };
    return std::visit(Visitor{*this}, s);
  }

  int trajectory(const Trajectory& t, std::optional<int> tech) {
    int pl = polyline(t.name, t.points(o_.chord_tolerance), kToolpath);
    return add(kToolpath, "CUTTER_LOCATION_TRAJECTORY",
               {V::boolean(true), V::enumeration("TRAJECTORY_PATH"), V::null(),
                tech ? V::reference(*tech) : V::null(), V::null(), V::null(), V::reference(pl),
                V::null(), V::null()},
               false);
  }

  int toolpath_list(const std::vector<Trajectory>& paths, std::optional<int> tech) {
    std::vector<V> refs;
    for (const auto& t : paths) refs.push_back(V::reference(trajectory(t, t.rapid ? std::nullopt : tech)));
    return add(kToolpath, "TOOLPATH_LIST", {V::list(std::move(refs))}, false);
  }

  int operation(const Operation& op) {
    int tool_id = tool(op.tool);
    int tech = technology(op.technology);
    int funcs = functions(op.functions);
    V toolpaths = op.toolpaths.empty() ? V::null() : V::reference(toolpath_list(op.toolpaths, tech));
    std::vector<V> args = {toolpaths,           V::null(),          V::string(op.name),
                           real(op.retract_plane), V::null(),       V::reference(tool_id),
                           V::reference(tech),  V::reference(funcs)};
    auto opt = [&](const std::optional<double>& v) { return v ? real(*v) : V::null(); };
    V strat = op.strategy ? V::reference(strategy(*op.strategy)) : V::null();
    V approach = op.plunge_approach ? V::reference(add(kTechnology, "PLUNGE_TOOLAXIS", {V::null()}))
                                    : V::null();
    switch (op.kind) {
      case OperationKind::Freeform:
        args.insert(args.end(), {V::null(), V::null(), V::null(), strat});
        break;
      case OperationKind::PlaneFinishMilling:
        args.insert(args.end(), {V::null(), approach, approach, strat, opt(op.axial_depth),
                                 opt(op.allowance_bottom)});
        break;
      case OperationKind::BottomAndSideRoughMilling:
      case OperationKind::BottomAndSideFinishMilling:
        args.insert(args.end(), {V::null(), approach, approach, strat, opt(op.axial_depth),
                                 opt(op.radial_depth), opt(op.allowance_side),
                                 opt(op.allowance_bottom)});
        break;
      case OperationKind::Drilling:
        args.insert(args.end(), {opt(op.cutting_depth), V::null(), V::null(), V::null(), strat});
        break;
      case OperationKind::Reaming:
        args.insert(args.end(), {opt(op.cutting_depth), V::null(), V::null(), V::null(), strat,
                                 V::boolean(op.spindle_stop_at_bottom), V::null()});
        break;
    }
    return add(kOperation, std::string(keyword(op.kind)), std::move(args), false);
  }

  int profile_polyline(const PolylineProfile& p, const std::string& name) {
    int pl = polyline(name, p.points, kPoint);
    return add(kFeature, p.closed ? "GENERAL_CLOSED_PROFILE" : "GENERAL_OPEN_PROFILE",
               {V::null(), V::reference(pl)}, false);
  }

  int feature(const Feature& f, int workpiece, const std::vector<int>& ops) {
    std::vector<V> op_refs;
    for (int id : ops) op_refs.push_back(V::reference(id));
    std::vector<V> args = {V::string(f.name), V::reference(workpiece), V::list(std::move(op_refs)),
                           V::reference(placement(f.placement)),
                           V::reference(plane(f.depth, f.name + ":DEPTH"))};
    struct Visitor {
      Builder& b;
      const Feature& f;
      std::vector<V>& args;
      std::string operator()(const ToolpathShape&) const { return "TOOLPATH_FEATURE"; }
      std::string operator()(const PlanarFaceShape& s) const {
        int course = b.add(kFeature, "LINEAR_PATH",
                           {V::null(), V::reference(b.length_measure(s.course_length, s.tolerance)),
                            V::reference(b.direction(s.course_direction))});
        int param = b.add(kFeature, "NUMERIC_PARAMETER",
                          {V::string("PROFILE LENGTH"), b.real(s.profile_length), V::string("MM")});
        int profile = b.add(kFeature, "LINEAR_PROFILE", {V::null(), V::reference(param)});
        args.insert(args.end(),
                    {V::reference(course), V::reference(profile), V::null(), V::list({})});
        return "PLANAR_FACE";
      }
      std::string operator()(const RoundHoleShape& s) const {
        std::optional<double> tol;
        if (s.tolerance > 0) tol = s.tolerance;
        int bottom = b.add(kFeature, s.through ? "THROUGH_BOTTOM_CONDITION" : "FLAT_HOLE_BOTTOM", {});
        args.insert(args.end(), {V::reference(b.length_measure(s.diameter, tol)), V::null(),
                                 V::reference(bottom)});
        return "ROUND_HOLE";
      }
      V radius(double r) const {
        return r > 0 ? V::reference(b.length_measure(r)) : V::null();
      }
      std::string operator()(const ClosedPocketShape& s) const {
        int bottom = b.add(kFeature, "PLANAR_POCKET_BOTTOM_CONDITION", {});
        int profile = 0;
        if (auto* rect = std::get_if<RectangularProfile>(&s.boundary)) {
          profile = b.add(kFeature, "RECTANGULAR_CLOSED_PROFILE",
                          {V::null(), V::reference(b.length_measure(rect->width)),
                           V::reference(b.length_measure(rect->length))});
        } else {
          profile = b.profile_polyline(std::get<PolylineProfile>(s.boundary), f.name + ":PROFILE");
        }
        args.insert(args.end(), {V::list({}), V::null(), V::reference(bottom), V::null(),
                                 radius(s.corner_radius), V::reference(profile)});
        return "CLOSED_POCKET";
      }
      std::string operator()(const OpenPocketShape& s) const {
        int bottom = b.add(kFeature, "PLANAR_POCKET_BOTTOM_CONDITION", {});
        int profile = b.profile_polyline(s.boundary, f.name + ":PROFILE");
        args.insert(args.end(), {V::list({}), V::null(), V::reference(bottom), V::null(),
                                 radius(s.corner_radius), V::reference(profile)});
        return "OPEN_POCKET";
      }
      std::string operator()(const StepShape& s) const {
        int wall = b.add(kFeature, "LINEAR_PATH",
                         {V::null(), V::reference(b.length_measure(s.wall_length)),
                          V::reference(b.direction(s.wall_direction))});
        args.insert(args.end(), {V::reference(wall), V::reference(b.length_measure(s.width)),
                                 V::list({})});
        return "STEP";
      }
      std::string operator()(const SlotShape& s) const {
        int course = b.polyline(f.name + ":COURSE", s.course.points, kPoint);
        args.insert(args.end(), {V::reference(course), V::reference(b.length_measure(s.width)),
                                 V::list({})});
        return "SLOT";
      }
      std::string operator()(const OutsideProfileShape& s) const {
        args.push_back(V::reference(b.profile_polyline(s.profile, f.name + ":PROFILE")));
        return "GENERAL_OUTSIDE_PROFILE";
      }
    };
    std::string type = std::visit(Visitor{*this, f, args}, f.shape);
    return add(kFeature, type, std::move(args), false);
  }

  File finish(int root, const WriteOptions& o) {
    // Ids follow category rank, then depth-first discovery from the root.
    const int n = static_cast<int>(nodes_.size());
    std::vector<int> order(n + 1, -1);
    int counter = 0;
    std::vector<int> stack{root};
    std::vector<bool> seen(n + 1, false);
    // Iterative pre-order: push children in reverse.
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      if (seen[id]) continue;
      seen[id] = true;
      order[id] = counter++;
      std::vector<int> children;
      collect_refs(nodes_[id - 1].args, children);
      for (auto it = children.rbegin(); it != children.rend(); ++it)
        if (!seen[*it]) stack.push_back(*it);
    }
    for (int id = 1; id <= n; ++id)
      if (order[id] < 0) order[id] = counter++;

    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i + 1;
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      if (nodes_[a - 1].cat != nodes_[b - 1].cat) return nodes_[a - 1].cat < nodes_[b - 1].cat;
      return order[a] < order[b];
    });
    std::vector<int> renum(n + 1, 0);
    for (int i = 0; i < n; ++i) renum[ids[i]] = i + 1;

    File file;
    file.description = o.description;
    file.name = o.file_name;
    file.timestamp = o.timestamp;
    file.schemas = {"MACHINING_SCHEMA"};
    for (int i = 0; i < n; ++i) {
      Instance inst;
      inst.id = i + 1;
      inst.type = nodes_[ids[i] - 1].type;
      inst.args = nodes_[ids[i] - 1].args;
      remap(inst.args, renum);
      file.instances.push_back(std::move(inst));
    }
    return file;
  }

 private:
  struct Node {
    std::string type;
    std::vector<Value> args;
    Category cat;
  };

  static void collect_refs(const std::vector<Value>& args, std::vector<int>& out) {
    for (const auto& v : args) {
      if (v.type == Value::Type::Ref) out.push_back(v.ref);
      else if (v.type == Value::Type::List) collect_refs(v.items, out);
    }
  }

  static void remap(std::vector<Value>& args, const std::vector<int>& renum) {
    for (auto& v : args) {
      if (v.type == Value::Type::Ref) v.ref = renum[v.ref];
      else if (v.type == Value::Type::List) remap(v.items, renum);
    }
  }

  const WriteOptions& o_;
  std::vector<Node> nodes_;
  std::map<std::string, int> consed_;
};

}  // namespace

std::string format_real(double v, int decimals, bool full_precision) {
  std::string s;
  if (full_precision) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    s.assign(buf, ec == std::errc() ? ptr : buf);
    auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    std::string exponent = e == std::string::npos ? "" : s.substr(e + 1);
    if (mantissa.find('.') == std::string::npos) mantissa += '.';
    s = mantissa + (exponent.empty() ? "" : "E" + exponent);
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    s = buf;
    if (decimals == 0) s += '.';
  }
  if (s[0] == '-' && s.find_first_of("123456789") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string encode_string(std::string_view utf8) {
  std::string out;
  append_utf8_escaped(out, utf8);
  return out;
}

File to_file(const Project& project, const WriteOptions& options) {
  if (auto problems = validate(project); !problems.empty()) throw ConversionError(std::move(problems));
  Builder b(options);
  const Workpiece& wp = project.workpiece;

  std::vector<V> clamps;
  for (const auto& c : wp.clamping_points) clamps.push_back(V::reference(b.point(c.name, c.point)));
  int workpiece = b.add(kWorkpiece, "WORKPIECE",
                        {V::string(wp.name), V::null(), V::real(wp.global_tolerance), V::null(),
                         V::null(), V::null(), V::list(std::move(clamps))},
                        false);
  const Plane& sp = project.setup.security_plane;
  int security = b.plane(sp, sp.name + ":LOCATION");
  int wp_setup = b.add(kSetup, "WORKPIECE_SETUP",
                       {V::reference(workpiece), V::reference(b.placement(wp.placement)), V::null(),
                        V::null(), V::list({})},
                       false);
  int setup = b.add(kSetup, "SETUP",
                    {V::string(project.setup.name), V::reference(b.placement(project.setup.origin)),
                     V::reference(security), V::list({V::reference(wp_setup)})},
                    false);

  std::vector<int> op_ids(project.executables.size(), 0);
  std::vector<int> feature_ids(project.features.size(), 0);
  for (std::size_t f = 0; f < project.features.size(); ++f) {
    std::vector<int> ops;
    for (std::size_t e = 0; e < project.executables.size(); ++e) {
      const auto* ws = std::get_if<MachiningWorkingstep>(&project.executables[e]);
      if (!ws || ws->feature != f || !ws->operation) continue;
      op_ids[e] = b.operation(*ws->operation);
      ops.push_back(op_ids[e]);
    }
    feature_ids[f] = b.feature(project.features[f], workpiece, ops);
  }

  std::vector<V> execs;
  for (std::size_t e = 0; e < project.executables.size(); ++e) {
    const Executable& ex = project.executables[e];
    if (const auto* ws = std::get_if<MachiningWorkingstep>(&ex)) {
      if (ws->feature >= project.features.size() || !ws->operation)
        throw ConversionError(ErrorKind::UnserializableModel,
                              "workingstep '" + ws->name + "' lacks a feature or operation");
      execs.push_back(V::reference(b.add(kExecutable, "MACHINING_WORKINGSTEP",
                                         {V::string(ws->name), V::reference(security),
                                          V::reference(feature_ids[ws->feature]),
                                          V::reference(op_ids[e]), V::null()},
                                         false)));
    } else {
      const auto& rm = std::get<RapidMovement>(ex);
      int list = b.toolpath_list({rm.path}, std::nullopt);
      execs.push_back(V::reference(b.add(kExecutable, "RAPID_MOVEMENT",
                                         {V::string(rm.name), V::reference(security),
                                          V::reference(list), V::null()},
                                         false)));
    }
  }
  int workplan = b.add(kWorkplan, "WORKPLAN",
                       {V::string(project.workplan_name), V::list(std::move(execs)), V::null(),
                        V::null(), V::reference(setup), V::null()},
                       false);
  int root = b.add(kProject, "PROJECT",
                   {V::string(project.name), V::reference(workplan),
                    V::list({V::reference(workpiece)}), V::null(), V::null(), V::null()},
                   false);
  return b.finish(root, options);
}

std::string write_file(const File& file, const WriteOptions& options) {
  std::string out = "ISO-10303-21;\nHEADER;\n";
  out += "FILE_DESCRIPTION(('" + encode_string(file.description) + "'),'2;1');\n";
  out += "FILE_NAME('" + encode_string(file.name) + "','" + encode_string(file.timestamp) +
         "',(''),(''),'','','');\n";
  out += "FILE_SCHEMA((";
  for (std::size_t i = 0; i < file.schemas.size(); ++i)
    out += (i ? ",'" : "'") + encode_string(file.schemas[i]) + "'";
  out += "));\nENDSEC;\nDATA;\n";
  for (const auto& inst : file.instances)
    out += "#" + std::to_string(inst.id) + "=" + inst.type + "(" + render_args(inst.args, options) + ");\n";
  out += "ENDSEC;\nEND-ISO-10303-21;\n";
  return out;
}

std::string serialize(const Project& project, const WriteOptions& options) {
  return write_file(to_file(project, options), options);
}

}  // namespace g2s::p21
