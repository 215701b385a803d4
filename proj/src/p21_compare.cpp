#include <cmath>
#include <map>

#include "g2s/p21.hpp"

namespace g2s::p21 {

namespace {

// Unifies the two graphs from their roots, following references in
// parameter order and keeping the id mapping a bijection.
class Unifier {
 public:
  Unifier(const File& a, const File& b, const CompareOptions& o) : a_(a), b_(b), o_(o) {}

  bool entity(int ia, int ib, const std::string& path) {
    auto fa = fwd_.find(ia);
    auto fb = back_.find(ib);
    if (fa != fwd_.end() || fb != back_.end()) {
      if (fa != fwd_.end() && fa->second == ib) return true;
      return fail(path, "reference #" + std::to_string(ia) + " / #" + std::to_string(ib) +
                            " breaks the id bijection");
    }
    const Instance* x = a_.find(ia);
    const Instance* y = b_.find(ib);
    if (!x || !y) return fail(path, "dangling reference");
    std::string here = path + "/" + x->type + "#" + std::to_string(ia);
    if (x->type != y->type) return fail(here, "type " + x->type + " vs " + y->type);
    if (x->args.size() != y->args.size()) return fail(here, "parameter count differs");
    fwd_[ia] = ib;
    back_[ib] = ia;
    for (std::size_t i = 0; i < x->args.size(); ++i)
      if (!value(x->args[i], y->args[i], here + "[" + std::to_string(i) + "]")) return false;
    return true;
  }

  std::size_t mapped() const { return fwd_.size(); }
  const std::string& divergence() const { return divergence_; }

  bool fail(const std::string& path, const std::string& what) {
    if (divergence_.empty()) divergence_ = path + ": " + what;
    return false;
  }

 private:
  bool value(const Value& x, const Value& y, const std::string& path) {
    if (x.type != y.type) return fail(path, "value kinds differ");
    switch (x.type) {
      case Value::Type::Null:
      case Value::Type::Derived:
        return true;
      case Value::Type::Number:
        if (std::abs(x.number - y.number) > o_.tolerance)
          return fail(path, std::to_string(x.number) + " vs " + std::to_string(y.number));
        return true;
      case Value::Type::String:
        if (!o_.ignore_labels && x.text != y.text)
          return fail(path, "'" + x.text + "' vs '" + y.text + "'");
        return true;
      case Value::Type::Enum:
        if (x.text != y.text) return fail(path, "." + x.text + ". vs ." + y.text + ".");
        return true;
      case Value::Type::Ref:
        return entity(x.ref, y.ref, path);
      case Value::Type::List:
        if (x.items.size() != y.items.size())
          return fail(path, "list lengths " + std::to_string(x.items.size()) + " vs " +
                                std::to_string(y.items.size()));
        for (std::size_t i = 0; i < x.items.size(); ++i)
          if (!value(x.items[i], y.items[i], path + "(" + std::to_string(i) + ")")) return false;
        return true;
    }
    return true;
  }

  const File& a_;
  const File& b_;
  const CompareOptions& o_;
  std::map<int, int> fwd_;
  std::map<int, int> back_;
  std::string divergence_;
};

const Instance* root_of(const File& f) {
  for (const auto& inst : f.instances)
    if (inst.type == "PROJECT") return &inst;
  return nullptr;
}

}  // namespace

CompareResult graph_isomorphic(const File& a, const File& b, const CompareOptions& options) {
  CompareResult out;
  const Instance* ra = root_of(a);
  const Instance* rb = root_of(b);
  if (!ra || !rb) {
    out.divergence = "missing PROJECT root";
    return out;
  }
  Unifier u(a, b, options);
  if (!u.entity(ra->id, rb->id, "")) {
    out.divergence = u.divergence();
    return out;
  }
  if (a.instances.size() != b.instances.size() || u.mapped() != a.instances.size()) {
    out.divergence = "entity counts " + std::to_string(a.instances.size()) + " vs " +
                     std::to_string(b.instances.size()) + ", " + std::to_string(u.mapped()) +
                     " reachable";
    return out;
  }
  out.isomorphic = true;
  return out;
}

CompareResult graph_isomorphic(std::string_view a, std::string_view b, const CompareOptions& options) {
  return graph_isomorphic(parse_file(a), parse_file(b), options);
}

}  // namespace g2s::p21
