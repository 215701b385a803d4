#include "g2s/setup.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace g2s {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ConversionError(ErrorKind::SchemaError, path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing");
  return *it;
}

const json* optional_field(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(path, "expected a finite number");
  return d;
}

double positive(const json& v, const std::string& path) {
  double d = number(v, path);
  if (d <= 0.0) schema_error(path, "expected a positive number");
  return d;
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) schema_error(path, "expected a string");
  return v.get<std::string>();
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) schema_error(path, "expected [x, y, z]");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]"), number(v[2], path + "[2]")};
}

int integer_key(const std::string& key, const std::string& path, char prefix = 0) {
  std::string digits = key;
  if (prefix && !digits.empty() && (digits[0] == prefix || digits[0] == prefix + 32))
    digits.erase(0, 1);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    schema_error(path + "." + key, "expected an integer key");
  return std::stoi(digits);
}

std::string default_tool_name(const ToolSpec& t) {
  std::string kw(keyword(t.type));
  if (t.type == ToolType::TaperedEndmill) kw = "ENDMILL";
  return kw + "_" + format_number(t.diameter) + "MM";
}

ToolSpec parse_tool(const json& v, int id, const std::string& path,
                    std::map<int, double>& length_offsets) {
  ToolSpec t;
  t.id = id;
  std::string type_name = text(require(v, "type", path), path + ".type");
  auto type = tool_type_from_name(type_name == "spiral_drill" ? "twist_drill" : type_name);
  if (!type)
    throw ConversionError(ErrorKind::UnknownToolType, path + ".type: '" + type_name + "'");
  t.type = *type;
  t.diameter = positive(require(v, "diameter", path), path + ".diameter");
  if (auto* f = optional_field(v, "flutes")) {
    if (!f->is_number_integer() || f->get<int>() < 0)
      schema_error(path + ".flutes", "expected a non-negative integer");
    t.flute_count = f->get<int>();
  }
  if (auto* f = optional_field(v, "cutting_edge_length"))
    t.cutting_edge_length = positive(*f, path + ".cutting_edge_length");
  if (auto* f = optional_field(v, "overall_length"))
    t.overall_length = positive(*f, path + ".overall_length");
  if (auto* f = optional_field(v, "edge_radius")) t.edge_radius = number(*f, path + ".edge_radius");
  if (auto* f = optional_field(v, "hand")) {
    std::string h = text(*f, path + ".hand");
    if (h == "right") t.hand = Hand::Right;
    else if (h == "left") t.hand = Hand::Left;
    else if (h == "neutral") t.hand = Hand::Neutral;
    else schema_error(path + ".hand", "expected right, left or neutral");
  }
  if (auto* f = optional_field(v, "coolant_through_tool")) {
    if (!f->is_boolean()) schema_error(path + ".coolant_through_tool", "expected a boolean");
    t.coolant_through_tool = f->get<bool>();
  }
  t.name = default_tool_name(t);
  if (auto* f = optional_field(v, "name")) t.name = text(*f, path + ".name");
  if (auto* f = optional_field(v, "length_offsets")) {
    if (!f->is_object()) schema_error(path + ".length_offsets", "expected an object");
    for (auto it = f->begin(); it != f->end(); ++it) {
      std::string p = path + ".length_offsets." + it.key();
      int h = integer_key(it.key(), path + ".length_offsets", 'H');
      double len = number(it.value(), p);
      if (len < 0) schema_error(p, "expected a non-negative length");
      length_offsets[h] = len;
    }
  }
  return t;
}

}  // namespace

JobSetup parse_setup(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConversionError(ErrorKind::SchemaError, std::string("setup is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("$", "expected an object");

  JobSetup s;
  if (auto* p = optional_field(doc, "project")) s.project_name = text(*p, "project");

  const json& m = require(doc, "machine", "$");
  if (auto* a = optional_field(m, "axis_count")) {
    if (!a->is_number_integer() || a->get<int>() < 3 || a->get<int>() > 5)
      schema_error("machine.axis_count", "expected 3, 4 or 5");
    s.machine.axis_count = a->get<int>();
  }
  if (auto* p = optional_field(m, "process")) {
    s.machine.process = text(*p, "machine.process");
    if (s.machine.process != "milling") schema_error("machine.process", "only milling is supported");
  }
  if (auto* w = optional_field(m, "work_offsets")) {
    if (!w->is_object()) schema_error("machine.work_offsets", "expected an object");
    for (auto it = w->begin(); it != w->end(); ++it) {
      int code = integer_key(it.key(), "machine.work_offsets", 'G');
      if (code < 54 || code > 59) schema_error("machine.work_offsets." + it.key(), "expected G54..G59");
      s.machine.work_offsets[code] = vec3(it.value(), "machine.work_offsets." + it.key());
    }
  }
  s.machine.security_plane_z = number(require(m, "security_plane_z", "machine"),
                                      "machine.security_plane_z");
  if (auto* p = optional_field(m, "initial_position"))
    s.machine.initial_position = vec3(*p, "machine.initial_position");

  const json& w = require(doc, "workpiece", "$");
  if (auto* n = optional_field(w, "name")) s.workpiece.name = text(*n, "workpiece.name");
  s.workpiece.placement.name = s.workpiece.name;
  const json& box = require(w, "box", "workpiece");
  Box b;
  b.origin = vec3(require(box, "origin", "workpiece.box"), "workpiece.box.origin");
  b.size = vec3(require(box, "dims", "workpiece.box"), "workpiece.box.dims");
  if (b.size.x <= 0 || b.size.y <= 0 || b.size.z <= 0)
    schema_error("workpiece.box.dims", "dimensions must be positive");
  s.workpiece.rawpiece = b;
  if (auto* p = optional_field(w, "placement")) {
    if (auto* o = optional_field(*p, "origin"))
      s.workpiece.placement.location = vec3(*o, "workpiece.placement.origin");
  }
  if (auto* t = optional_field(w, "global_tolerance"))
    s.workpiece.global_tolerance = positive(*t, "workpiece.global_tolerance");
  if (auto* c = optional_field(w, "clamping_points")) {
    if (!c->is_array()) schema_error("workpiece.clamping_points", "expected an array");
    for (std::size_t i = 0; i < c->size(); ++i)
      s.workpiece.clamping_points.push_back(
          {"CLAMPING_P" + std::to_string(i + 1),
           vec3((*c)[i], "workpiece.clamping_points[" + std::to_string(i) + "]")});
  }

  const json& tools = require(doc, "tools", "$");
  if (!tools.is_object()) schema_error("tools", "expected an object");
  for (auto it = tools.begin(); it != tools.end(); ++it) {
    int id = integer_key(it.key(), "tools", 'T');
    s.machine.tool_table[id] =
        parse_tool(it.value(), id, "tools." + it.key(), s.machine.length_offsets);
  }

  if (auto* c = optional_field(doc, "conventions")) {
    if (auto* f = optional_field(*c, "feedrate_divisor"))
      s.feedrate_divisor = positive(*f, "conventions.feedrate_divisor");
  }
  return s;
}

JobSetup load_setup(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConversionError(ErrorKind::Io, "cannot read setup file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_setup(ss.str());
}

void check_tools_defined(const Program& program, const JobSetup& setup) {
  for (const auto& block : program.blocks) {
    if (auto t = block.get('T')) {
      int id = static_cast<int>(std::lround(*t));
      if (!setup.machine.tool_table.count(id))
        throw ConversionError(ErrorKind::UndefinedTool, "T" + std::to_string(id) + " not in setup",
                              block.line_index);
    }
    if (auto h = block.get('H'); h && block.has_g(43)) {
      int id = static_cast<int>(std::lround(*h));
      if (!setup.machine.length_offsets.count(id))
        throw ConversionError(ErrorKind::UndefinedTool,
                              "H" + std::to_string(id) + " has no length offset", block.line_index);
    }
  }
}

}  // namespace g2s
