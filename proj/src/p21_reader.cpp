#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "g2s/p21.hpp"

namespace g2s::p21 {

namespace {

void append_utf8(std::string& out, unsigned cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : s_(text) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConversionError(ErrorKind::SyntaxError,
                          what + " (offset " + std::to_string(pos_) + ")", line_);
  }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
        auto end = s_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated comment");
        for (std::size_t i = pos_; i < end; ++i)
          if (s_[i] == '\n') ++line_;
        pos_ = end + 2;
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip();
    return pos_ >= s_.size();
  }

  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  std::string keyword() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (start == pos_) fail("expected a keyword");
    return std::string(s_.substr(start, pos_ - start));
  }

  int entity_id() {
    expect('#');
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an entity id");
    int id = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, id);
    return id;
  }

  Value value() {
    char c = peek();
    if (c == '$') { ++pos_; return Value::null(); }
    if (c == '*') { ++pos_; Value d; d.type = Value::Type::Derived; return d; }
    if (c == '#') return Value::reference(entity_id());
    if (c == '\'') return Value::string(string_literal());
    if (c == '.') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != '.') ++pos_;
      if (pos_ >= s_.size()) fail("unterminated enumeration");
      std::string e(s_.substr(start, pos_ - start));
      ++pos_;
      return Value::enumeration(e);
    }
    if (c == '(') {
      ++pos_;
      std::vector<Value> items;
      if (!accept(')')) {
        do items.push_back(value());
        while (accept(','));
        expect(')');
      }
      return Value::list(std::move(items));
    }
    if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c))) fail("typed parameters are not supported");
    fail(std::string("unexpected character '") + c + "'");
  }

 private:
  Value number() {
    std::size_t start = pos_;
    if (s_[pos_] == '+' || s_[pos_] == '-') ++pos_;
    bool real = false;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.') {
        real = true;
        ++pos_;
      } else if (c == 'E' || c == 'e') {
        real = true;
        ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      } else {
        break;
      }
    }
    std::string text(s_.substr(start, pos_ - start));
    if (text.empty() || text == "+" || text == "-") fail("malformed number");
    std::string norm = text[0] == '+' ? text.substr(1) : text;
    // "1.E-05" and "5." are valid Part21 reals but not from_chars input.
    auto e = norm.find_first_of("Ee");
    std::string mant = norm.substr(0, e), expo = e == std::string::npos ? "" : norm.substr(e);
    if (!mant.empty() && mant.back() == '.') mant += '0';
    if (mant.size() > 1 && mant[0] == '-' && mant[1] == '.') mant.insert(1, "0");
    if (!mant.empty() && mant[0] == '.') mant.insert(0, "0");
    norm = mant + expo;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(norm.data(), norm.data() + norm.size(), v);
    if (ec != std::errc() || ptr != norm.data() + norm.size()) fail("malformed number '" + text + "'");
    return real ? Value::real(v) : Value::integer_value(static_cast<long>(v));
  }

  std::string string_literal() {
    ++pos_;  // opening quote
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      char c = s_[pos_];
      if (c == '\'') {
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
          out += '\'';
          pos_ += 2;
          continue;
        }
        ++pos_;
        return out;
      }
      if (c == '\n') ++line_;
      if (c == '\\') {
        auto rest = s_.substr(pos_);
        if (rest.substr(0, 2) == "\\\\") {
          out += '\\';
          pos_ += 2;
        } else if (rest.substr(0, 4) == "\\X2\\") {
          pos_ += 4;
          while (pos_ + 4 <= s_.size() && s_.substr(pos_, 4) != "\\X0\\") {
            unsigned cp = 0;
            auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + pos_ + 4, cp, 16);
            if (ec != std::errc() || p != s_.data() + pos_ + 4) fail("bad \\X2\\ escape");
            append_utf8(out, cp);
            pos_ += 4;
          }
          if (s_.substr(pos_, 4) != "\\X0\\") fail("unterminated \\X2\\ escape");
          pos_ += 4;
        } else if (rest.substr(0, 3) == "\\X\\" && rest.size() >= 5) {
          unsigned cp = 0;
          std::from_chars(s_.data() + pos_ + 3, s_.data() + pos_ + 5, cp, 16);
          append_utf8(out, cp);
          pos_ += 5;
        } else if (rest.substr(0, 3) == "\\S\\" && rest.size() >= 4) {
          append_utf8(out, static_cast<unsigned char>(s_[pos_ + 3]) + 128u);
          pos_ += 4;
        } else {
          out += c;
          ++pos_;
        }
        continue;
      }
      out += c;
      ++pos_;
    }
  }

 public:
  int line() const { return line_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

std::string first_string(const Value& v) {
  if (v.type == Value::Type::String) return v.text;
  if (v.type == Value::Type::List && !v.items.empty()) return first_string(v.items.front());
  return {};
}

void check_refs(const std::vector<Value>& args, const std::set<int>& ids, const Instance& inst) {
  for (const auto& v : args) {
    if (v.type == Value::Type::Ref && !ids.count(v.ref))
      throw ConversionError(ErrorKind::DanglingReference,
                            "#" + std::to_string(inst.id) + " refers to missing #" + std::to_string(v.ref),
                            inst.line);
    if (v.type == Value::Type::List) check_refs(v.items, ids, inst);
  }
}

const std::set<std::string>& known_types() {
  static const std::set<std::string> kTypes = [] {
    std::set<std::string> s = {
        "PROJECT", "WORKPLAN", "WORKPIECE", "SETUP", "WORKPIECE_SETUP", "MACHINING_WORKINGSTEP",
        "RAPID_MOVEMENT", "TOOLPATH_FEATURE", "PLANAR_FACE", "ROUND_HOLE", "CLOSED_POCKET",
        "OPEN_POCKET", "STEP", "SLOT", "GENERAL_OUTSIDE_PROFILE", "LINEAR_PATH", "LINEAR_PROFILE",
        "TOLERANCED_LENGTH_MEASURE", "PLUS_MINUS_VALUE", "NUMERIC_PARAMETER",
        "THROUGH_BOTTOM_CONDITION", "FLAT_HOLE_BOTTOM", "PLANAR_POCKET_BOTTOM_CONDITION",
        "RECTANGULAR_CLOSED_PROFILE", "GENERAL_CLOSED_PROFILE", "GENERAL_OPEN_PROFILE",
        "MILLING_CUTTING_TOOL", "MILLING_TOOL_DIMENSION", "CUTTING_COMPONENT",
        "MILLING_TECHNOLOGY", "MILLING_MACHINE_FUNCTIONS", "PLUNGE_TOOLAXIS",
        "BIDIRECTIONAL_MILLING", "UNIDIRECTIONAL_MILLING", "CONTOUR_PARALLEL", "CONTOUR_SPIRAL",
        "CENTER_MILLING", "DRILLING_TYPE_STRATEGY", "PLANE", "AXIS2_PLACEMENT_3D",
        "CARTESIAN_POINT", "DIRECTION", "TOOLPATH_LIST", "CUTTER_LOCATION_TRAJECTORY", "POLYLINE"};
    for (auto k : {OperationKind::Freeform, OperationKind::PlaneFinishMilling,
                   OperationKind::BottomAndSideRoughMilling,
                   OperationKind::BottomAndSideFinishMilling, OperationKind::Drilling,
                   OperationKind::Reaming})
      s.insert(std::string(keyword(k)));
    for (auto t : {ToolType::Endmill, ToolType::TaperedEndmill, ToolType::BallEndmill,
                   ToolType::BullnoseEndmill, ToolType::Facemill, ToolType::TSlotMill,
                   ToolType::DovetailMill, ToolType::WoodruffKeyseatMill, ToolType::TwistDrill,
                   ToolType::CenterDrill, ToolType::Reamer, ToolType::Tap})
      s.insert(std::string(keyword(t)));
    return s;
  }();
  return kTypes;
}

bool is_feature_type(const std::string& t) {
  return t == "TOOLPATH_FEATURE" || t == "PLANAR_FACE" || t == "ROUND_HOLE" ||
         t == "CLOSED_POCKET" || t == "OPEN_POCKET" || t == "STEP" || t == "SLOT" ||
         t == "GENERAL_OUTSIDE_PROFILE";
}

class Reader {
 public:
  Reader(const File& f, const ReadOptions& o) : f_(f), o_(o) {
    for (const auto& inst : f.instances) by_id_[inst.id] = &inst;
  }

  Project read() {
    for (const auto& inst : f_.instances)
      if (!known_types().count(inst.type))
        throw ConversionError(ErrorKind::UnknownEntity, "#" + std::to_string(inst.id) + "=" + inst.type,
                              inst.line);
    const Instance* root = nullptr;
    for (const auto& inst : f_.instances)
      if (inst.type == "PROJECT") {
        root = &inst;
        break;
      }
    if (!root) throw ConversionError(ErrorKind::SchemaError, "file has no PROJECT");
    Project p;
    arity(*root, 3);
    p.name = str(root->args[0]);
    const Instance& plan = get(root->args[1], {"WORKPLAN"});
    const auto& wps = list(root->args[2]);
    if (!wps.empty()) read_workpiece(get(wps[0], {"WORKPIECE"}), p.workpiece);

    for (const auto& inst : f_.instances)
      if (is_feature_type(inst.type)) {
        feature_index_[inst.id] = p.features.size();
        p.features.push_back(read_feature(inst));
      }

    arity(plan, 5);
    p.workplan_name = str(plan.args[0]);
    if (plan.args[4].type == Value::Type::Ref) {
      const Instance& setup = get(plan.args[4], {"SETUP"});
      arity(setup, 4);
      p.setup.name = str(setup.args[0]);
      p.setup.origin = placement(setup.args[1]);
      p.setup.security_plane = plane(setup.args[2]);
      for (const auto& ws : list(setup.args[3])) {
        const Instance& w = get(ws, {"WORKPIECE_SETUP"});
        arity(w, 2);
        p.workpiece.placement = placement(w.args[1]);
      }
    }
    for (const auto& e : list(plan.args[1])) {
      const Instance& ex = get(e, {"MACHINING_WORKINGSTEP", "RAPID_MOVEMENT"});
      if (ex.type == "RAPID_MOVEMENT") {
        arity(ex, 3);
        RapidMovement rm;
        rm.name = str(ex.args[0]);
        auto paths = toolpaths(ex.args[2]);
        if (paths.empty()) throw ConversionError(ErrorKind::SchemaError, "rapid movement without toolpath", ex.line);
        rm.path = paths.front();
        rm.path.rapid = true;
        p.executables.push_back(std::move(rm));
      } else {
        arity(ex, 4);
        MachiningWorkingstep ws;
        ws.name = str(ex.args[0]);
        const Instance& feat = get(ex.args[2], {});
        auto it = feature_index_.find(feat.id);
        if (it == feature_index_.end())
          throw ConversionError(ErrorKind::UnknownEntity, "workingstep feature #" + std::to_string(feat.id) + " is a " + feat.type, ex.line);
        ws.feature = it->second;
        ws.operation = operation(get(ex.args[3], {}));
        p.executables.push_back(std::move(ws));
      }
    }
    return p;
  }

 private:
  [[noreturn]] void fail(const Instance& inst, const std::string& what) const {
    throw ConversionError(ErrorKind::SchemaError, "#" + std::to_string(inst.id) + " " + inst.type + ": " + what, inst.line);
  }

  void arity(const Instance& inst, std::size_t n) const {
    if (inst.args.size() < n) fail(inst, "expected at least " + std::to_string(n) + " parameters");
  }

  const Instance& get(const Value& v, std::initializer_list<const char*> types) const {
    if (v.type != Value::Type::Ref)
      throw ConversionError(ErrorKind::SchemaError, "expected an entity reference");
    auto it = by_id_.find(v.ref);
    if (it == by_id_.end())
      throw ConversionError(ErrorKind::DanglingReference, "missing #" + std::to_string(v.ref));
    const Instance& inst = *it->second;
    if (types.size() && std::none_of(types.begin(), types.end(), [&](const char* t) { return inst.type == t; }))
      fail(inst, "unexpected entity type here");
    return inst;
  }

  static std::string str(const Value& v) { return v.type == Value::Type::String ? v.text : std::string(); }
  static double num(const Value& v) { return v.type == Value::Type::Number ? v.number : 0.0; }
  static std::optional<double> opt_num(const Value& v) {
    if (v.type == Value::Type::Number) return v.number;
    return std::nullopt;
  }
  static bool boolean(const Value& v) { return v.type == Value::Type::Enum && v.text == "T"; }
  static const std::vector<Value>& list(const Value& v) {
    static const std::vector<Value> kEmpty;
    return v.type == Value::Type::List ? v.items : kEmpty;
  }

  Vec3 coords(const Value& v) const {
    const auto& items = list(v);
    Vec3 out;
    if (items.size() > 0) out.x = num(items[0]);
    if (items.size() > 1) out.y = num(items[1]);
    if (items.size() > 2) out.z = num(items[2]);
    return out;
  }

  NamedPoint point(const Value& v) const {
    const Instance& p = get(v, {"CARTESIAN_POINT"});
    arity(p, 2);
    return {str(p.args[0]), coords(p.args[1])};
  }

  Vec3 direction(const Value& v, Vec3 fallback) const {
    if (v.type == Value::Type::Null) return fallback;
    const Instance& d = get(v, {"DIRECTION"});
    arity(d, 2);
    return coords(d.args[1]);
  }

  Placement placement(const Value& v) const {
    const Instance& a = get(v, {"AXIS2_PLACEMENT_3D"});
    arity(a, 2);
    Placement p;
    p.name = str(a.args[0]);
    p.location = point(a.args[1]).point;
    if (a.args.size() > 2) p.axis = direction(a.args[2], {0, 0, 1});
    if (a.args.size() > 3) p.ref_direction = direction(a.args[3], {1, 0, 0});
    return p;
  }

  Plane plane(const Value& v) const {
    const Instance& pl = get(v, {"PLANE"});
    arity(pl, 2);
    return {str(pl.args[0]), placement(pl.args[1])};
  }

  void read_workpiece(const Instance& w, Workpiece& out) const {
    arity(w, 7);
    out.name = str(w.args[0]);
    if (auto t = opt_num(w.args[2])) out.global_tolerance = *t;
    out.clamping_points.clear();
    for (const auto& c : list(w.args[6])) out.clamping_points.push_back(point(c));
  }

  double measure(const Value& v, std::optional<double>* tolerance = nullptr) const {
    const Instance& m = get(v, {"TOLERANCED_LENGTH_MEASURE"});
    arity(m, 1);
    if (tolerance && m.args.size() > 1 && m.args[1].type == Value::Type::Ref) {
      const Instance& pm = get(m.args[1], {"PLUS_MINUS_VALUE"});
      arity(pm, 1);
      *tolerance = num(pm.args[0]);
    }
    return num(m.args[0]);
  }

  std::vector<Vec3> polyline_points(const Value& v, std::string* name = nullptr) const {
    const Instance& pl = get(v, {"POLYLINE"});
    arity(pl, 2);
    if (name) *name = str(pl.args[0]);
    std::vector<Vec3> pts;
    for (const auto& r : list(pl.args[1])) pts.push_back(point(r).point);
    return pts;
  }

  PolylineProfile profile(const Value& v) const {
    const Instance& pr = get(v, {"GENERAL_CLOSED_PROFILE", "GENERAL_OPEN_PROFILE"});
    arity(pr, 2);
    return {polyline_points(pr.args[1]), pr.type == "GENERAL_CLOSED_PROFILE"};
  }

  Feature read_feature(const Instance& f) const {
    arity(f, 5);
    Feature out;
    out.name = str(f.args[0]);
    out.placement = placement(f.args[3]);
    out.depth = plane(f.args[4]);
    const std::string& t = f.type;
    if (t == "TOOLPATH_FEATURE") {
      out.shape = ToolpathShape{};
    } else if (t == "PLANAR_FACE") {
      arity(f, 7);
      PlanarFaceShape s;
      const Instance& course = get(f.args[5], {"LINEAR_PATH"});
      arity(course, 3);
      std::optional<double> tol;
      s.course_length = measure(course.args[1], &tol);
      if (tol) s.tolerance = *tol;
      s.course_direction = direction(course.args[2], {0, 1, 0});
      const Instance& prof = get(f.args[6], {"LINEAR_PROFILE"});
      arity(prof, 2);
      const Instance& param = get(prof.args[1], {"NUMERIC_PARAMETER", "TOLERANCED_LENGTH_MEASURE"});
      s.profile_length = param.type == "NUMERIC_PARAMETER" ? num(param.args.at(1)) : num(param.args.at(0));
      out.shape = s;
    } else if (t == "ROUND_HOLE") {
      arity(f, 8);
      RoundHoleShape s;
      std::optional<double> tol;
      s.diameter = measure(f.args[5], &tol);
      s.tolerance = tol.value_or(0.0);
      s.through = get(f.args[7], {}).type == "THROUGH_BOTTOM_CONDITION";
      out.shape = s;
    } else if (t == "CLOSED_POCKET" || t == "OPEN_POCKET") {
      arity(f, 11);
      double radius = f.args[9].type == Value::Type::Ref ? measure(f.args[9]) : 0.0;
      const Instance& pr = get(f.args[10], {});
      if (t == "CLOSED_POCKET") {
        ClosedPocketShape s;
        s.corner_radius = radius;
        if (pr.type == "RECTANGULAR_CLOSED_PROFILE") {
          arity(pr, 3);
          s.boundary = RectangularProfile{measure(pr.args[1]), measure(pr.args[2])};
        } else {
          s.boundary = profile(f.args[10]);
        }
        out.shape = s;
      } else {
        out.shape = OpenPocketShape{profile(f.args[10]), radius};
      }
    } else if (t == "STEP") {
      arity(f, 7);
      const Instance& wall = get(f.args[5], {"LINEAR_PATH"});
      arity(wall, 3);
      out.shape = StepShape{direction(wall.args[2], {1, 0, 0}), measure(wall.args[1]), measure(f.args[6])};
    } else if (t == "SLOT") {
      arity(f, 7);
      out.shape = SlotShape{{polyline_points(f.args[5]), false}, measure(f.args[6])};
    } else {
      arity(f, 6);
      out.shape = OutsideProfileShape{profile(f.args[5])};
    }
    return out;
  }

  ToolSpec tool(const Value& v) const {
    const Instance& t = get(v, {"MILLING_CUTTING_TOOL"});
    arity(t, 4);
    ToolSpec s;
    s.name = str(t.args[0]);
    const Instance& body = get(t.args[1], {});
    auto type = tool_type_from_name(body.type);
    if (!type) throw ConversionError(ErrorKind::UnknownEntity, "tool body " + body.type, body.line);
    s.type = *type;
    arity(body, 4);
    s.flute_count = static_cast<int>(num(body.args[1]));
    std::string hand = body.args[2].type == Value::Type::Enum ? body.args[2].text : "RIGHT";
    s.hand = hand == "LEFT" ? Hand::Left : hand == "NEUTRAL" ? Hand::Neutral : Hand::Right;
    s.coolant_through_tool = boolean(body.args[3]);
    const Instance& dim = get(body.args[0], {"MILLING_TOOL_DIMENSION"});
    arity(dim, 5);
    s.diameter = num(dim.args[0]);
    s.cutting_edge_length = opt_num(dim.args[3]);
    s.edge_radius = num(dim.args[4]);
    s.overall_length = opt_num(t.args[3]);
    return s;
  }

  std::optional<MachiningStrategy> strategy(const Value& v) const {
    if (v.type == Value::Type::Null) return std::nullopt;
    const Instance& s = get(v, {});
    auto cutmode = [&](const Value& e) {
      return e.type == Value::Type::Enum && e.text == "CONVENTIONAL" ? CutMode::Conventional : CutMode::Climb;
    };
    auto ccw = [&](const Value& e) { return !(e.type == Value::Type::Enum && e.text == "CW"); };
    if (s.type == "BIDIRECTIONAL_MILLING") {
      arity(s, 4);
      return BidirectionalMilling{num(s.args[0]), direction(s.args[2], {1, 0, 0}),
                                  s.args[3].text == "RIGHT" ? StepoverSide::Right : StepoverSide::Left};
    }
    if (s.type == "UNIDIRECTIONAL_MILLING") {
      arity(s, 4);
      return UnidirectionalMilling{num(s.args[0]), direction(s.args[2], {1, 0, 0}), cutmode(s.args[3])};
    }
    if (s.type == "CONTOUR_PARALLEL") {
      arity(s, 4);
      return ContourParallel{ccw(s.args[2]), cutmode(s.args[3])};
    }
    if (s.type == "CONTOUR_SPIRAL") {
      arity(s, 4);
      return ContourSpiral{ccw(s.args[2]), cutmode(s.args[3])};
    }
    if (s.type == "CENTER_MILLING") return CenterMilling{};
    if (s.type == "DRILLING_TYPE_STRATEGY") return DrillingStrategy{};
    throw ConversionError(ErrorKind::UnknownEntity, "strategy " + s.type, s.line);
  }

  std::vector<Trajectory> toolpaths(const Value& v) const {
    std::vector<Trajectory> out;
    if (v.type == Value::Type::Null) return out;
    const Instance& tl = get(v, {"TOOLPATH_LIST"});
    arity(tl, 1);
    for (const auto& r : list(tl.args[0])) {
      const Instance& c = get(r, {"CUTTER_LOCATION_TRAJECTORY"});
      arity(c, 7);
      Trajectory t;
      t.rapid = c.args[3].type == Value::Type::Null;
      auto pts = polyline_points(c.args[6], &t.name);
      if (pts.empty()) fail(c, "empty polyline");
      t.start = pts.front();
      for (std::size_t i = 1; i < pts.size(); ++i) t.segments.push_back({pts[i], std::nullopt});
      out.push_back(std::move(t));
    }
    return out;
  }

  Operation operation(const Instance& o) const {
    static const std::map<std::string, OperationKind> kKinds = {
        {"FREEFORM_OPERATION", OperationKind::Freeform},
        {"PLANE_FINISH_MILLING", OperationKind::PlaneFinishMilling},
        {"BOTTOM_AND_SIDE_ROUGH_MILLING", OperationKind::BottomAndSideRoughMilling},
        {"BOTTOM_AND_SIDE_FINISH_MILLING", OperationKind::BottomAndSideFinishMilling},
        {"DRILLING", OperationKind::Drilling},
        {"REAMING", OperationKind::Reaming}};
    auto k = kKinds.find(o.type);
    if (k == kKinds.end()) fail(o, "not an operation");
    arity(o, 8);
    Operation op;
    op.kind = k->second;
    op.toolpaths = toolpaths(o.args[0]);
    op.name = str(o.args[2]);
    op.retract_plane = num(o.args[3]);
    op.tool = tool(o.args[5]);
    const Instance& tech = get(o.args[6], {"MILLING_TECHNOLOGY"});
    arity(tech, 4);
    op.technology = {num(tech.args[0]) * o_.feedrate_divisor, num(tech.args[3]) * 60.0};
    const Instance& fn = get(o.args[7], {"MILLING_MACHINE_FUNCTIONS"});
    arity(fn, 7);
    op.functions = {boolean(fn.args[0]), boolean(fn.args[2]), boolean(fn.args[6])};
    auto at = [&](std::size_t i) -> const Value& {
      static const Value kNull;
      return i < o.args.size() ? o.args[i] : kNull;
    };
    switch (op.kind) {
      case OperationKind::Freeform:
        op.strategy = strategy(at(11));
        break;
      case OperationKind::PlaneFinishMilling:
        op.plunge_approach = at(9).type == Value::Type::Ref;
        op.strategy = strategy(at(11));
        op.axial_depth = opt_num(at(12));
        op.allowance_bottom = opt_num(at(13));
        break;
      case OperationKind::BottomAndSideRoughMilling:
      case OperationKind::BottomAndSideFinishMilling:
        op.plunge_approach = at(9).type == Value::Type::Ref;
        op.strategy = strategy(at(11));
        op.axial_depth = opt_num(at(12));
        op.radial_depth = opt_num(at(13));
        op.allowance_side = opt_num(at(14));
        op.allowance_bottom = opt_num(at(15));
        break;
      case OperationKind::Drilling:
      case OperationKind::Reaming:
        op.cutting_depth = opt_num(at(8));
        op.strategy = strategy(at(12));
        if (op.kind == OperationKind::Reaming) op.spindle_stop_at_bottom = boolean(at(13));
        break;
    }
    return op;
  }

  const File& f_;
  ReadOptions o_;
  std::map<int, const Instance*> by_id_;
  std::map<int, std::size_t> feature_index_;
};

}  // namespace

const Instance* File::find(int id) const {
  auto it = std::lower_bound(instances.begin(), instances.end(), id,
                             [](const Instance& a, int b) { return a.id < b; });
  return it != instances.end() && it->id == id ? &*it : nullptr;
}

File parse_file(std::string_view text) {
  Lexer lx(text);
  File file;
  if (lx.keyword() != "ISO-10303-21") lx.fail("missing ISO-10303-21 magic");
  lx.expect(';');
  if (lx.keyword() != "HEADER") lx.fail("missing HEADER");
  lx.expect(';');
  while (true) {
    std::string kw = lx.keyword();
    if (kw == "ENDSEC") {
      lx.expect(';');
      break;
    }
    lx.expect('(');
    std::vector<Value> args;
    if (!lx.accept(')')) {
      do args.push_back(lx.value());
      while (lx.accept(','));
      lx.expect(')');
    }
    lx.expect(';');
    if (kw == "FILE_DESCRIPTION" && !args.empty()) file.description = first_string(args[0]);
    if (kw == "FILE_NAME" && args.size() > 1) {
      file.name = first_string(args[0]);
      file.timestamp = first_string(args[1]);
    }
    if (kw == "FILE_SCHEMA" && !args.empty())
      for (const auto& s : args[0].items) file.schemas.push_back(s.text);
  }
  if (lx.keyword() != "DATA") lx.fail("missing DATA section");
  lx.expect(';');
  std::set<int> ids;
  while (true) {
    if (lx.peek() != '#') {
      if (lx.keyword() != "ENDSEC") lx.fail("expected an entity instance or ENDSEC");
      lx.expect(';');
      break;
    }
    Instance inst;
    inst.id = lx.entity_id();
    inst.line = lx.line();
    lx.expect('=');
    if (lx.peek() == '(') lx.fail("complex entity instances are not supported");
    inst.type = lx.keyword();
    lx.expect('(');
    if (!lx.accept(')')) {
      do inst.args.push_back(lx.value());
      while (lx.accept(','));
      lx.expect(')');
    }
    lx.expect(';');
    if (!ids.insert(inst.id).second) lx.fail("duplicate id #" + std::to_string(inst.id));
    file.instances.push_back(std::move(inst));
  }
  if (!lx.at_end()) {
    if (lx.keyword() != "END-ISO-10303-21") lx.fail("missing END-ISO-10303-21");
    lx.expect(';');
  }
  std::sort(file.instances.begin(), file.instances.end(),
            [](const Instance& a, const Instance& b) { return a.id < b.id; });
  for (const auto& inst : file.instances) check_refs(inst.args, ids, inst);
  return file;
}

Project to_project(const File& file, const ReadOptions& options) { return Reader(file, options).read(); }

Project parse_part21(std::string_view text, const ReadOptions& options) {
  return to_project(parse_file(text), options);
}

}  // namespace g2s::p21
