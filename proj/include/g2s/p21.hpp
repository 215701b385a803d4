#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/stepnc.hpp"

namespace g2s::p21 {

// Generic ISO 10303-21 parameter value.
struct Value {
  enum class Type { Null, Derived, Number, String, Enum, Ref, List };

  Type type = Type::Null;
  double number = 0.0;
  bool integer = false;
  std::string text;  // string body or enum name without dots
  int ref = 0;
  std::vector<Value> items;

  bool operator==(const Value&) const = default;

  static Value null() { return {}; }
  static Value real(double v) { return {Type::Number, v, false, {}, 0, {}}; }
  static Value integer_value(long v) {
    return {Type::Number, static_cast<double>(v), true, {}, 0, {}};
  }
  static Value string(std::string s) { return {Type::String, 0, false, std::move(s), 0, {}}; }
  static Value enumeration(std::string e) { return {Type::Enum, 0, false, std::move(e), 0, {}}; }
  static Value boolean(bool b) { return enumeration(b ? "T" : "F"); }
  static Value reference(int id) { return {Type::Ref, 0, false, {}, id, {}}; }
  static Value list(std::vector<Value> items) {
    return {Type::List, 0, false, {}, 0, std::move(items)};
  }
};

struct Instance {
  int id = 0;
  std::string type;
  std::vector<Value> args;
  int line = 0;  // source line when parsed

  bool operator==(const Instance& o) const { return id == o.id && type == o.type && args == o.args; }
};

struct File {
  std::string description;
  std::string name;
  std::string timestamp;
  std::vector<std::string> schemas;
  std::vector<Instance> instances;  // ascending id

  const Instance* find(int id) const;
};

struct WriteOptions {
  int decimals = 2;
  bool full_precision = false;
  double feedrate_divisor = 60.0;  // file feedrate = mm/min / divisor
  double chord_tolerance = 0.01;   // arc discretization for polylines
  std::string file_name = "output.p21";
  std::string timestamp = "1970-01-01T00:00:00";
  std::string description = "STEP-NC milling program";
};

struct ReadOptions {
  double feedrate_divisor = 60.0;
};

// Model to entity graph with ids assigned in category order.
File to_file(const Project& project, const WriteOptions& options = {});
std::string write_file(const File& file, const WriteOptions& options = {});
std::string serialize(const Project& project, const WriteOptions& options = {});

File parse_file(std::string_view text);
Project to_project(const File& file, const ReadOptions& options = {});
Project parse_part21(std::string_view text, const ReadOptions& options = {});

struct CompareOptions {
  bool ignore_labels = false;
  double tolerance = 1e-6;
};

struct CompareResult {
  bool isomorphic = false;
  std::string divergence;  // first mismatch, empty when isomorphic
};

// Structural comparison from the PROJECT roots; entity ids are irrelevant.
CompareResult graph_isomorphic(const File& a, const File& b, const CompareOptions& options = {});
CompareResult graph_isomorphic(std::string_view a, std::string_view b,
                               const CompareOptions& options = {});

std::string format_real(double v, int decimals, bool full_precision);
std::string encode_string(std::string_view utf8);

}  // namespace g2s::p21
