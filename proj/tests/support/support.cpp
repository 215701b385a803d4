#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace g2s::testing {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string data_path(std::string_view name) { return std::string(G2S_TEST_DATA) + "/" + std::string(name); }

std::string golden_path(std::string_view name) {
  return std::string(G2S_TEST_GOLDEN) + "/" + std::string(name);
}

JobSetup load_data_setup(std::string_view name) { return parse_setup(read_text(data_path(name))); }

JobSetup generic_setup(Vec3 g55) {
  char offsets[160];
  std::snprintf(offsets, sizeof offsets, "\"G54\": [0, 0, 0], \"G55\": [%.12f, %.12f, %.12f]", g55.x,
                g55.y, g55.z);
  std::string json = R"({
  "project": "RANDOM PROGRAM",
  "machine": {"axis_count": 3, "process": "milling", "security_plane_z": 100,
              "work_offsets": {)" + std::string(offsets) + R"(}},
  "workpiece": {"box": {"origin": [-100, -100, -40], "dims": [200, 200, 40]},
                "global_tolerance": 0.01},
  "tools": {
    "T1": {"type": "endmill", "name": "ENDMILL_10MM", "diameter": 10, "flutes": 3,
           "cutting_edge_length": 30, "overall_length": 75, "length_offsets": {"H1": 40}},
    "T2": {"type": "twist_drill", "name": "DRILL_8MM", "diameter": 8, "flutes": 2,
           "overall_length": 90, "length_offsets": {"H2": 60}},
    "T3": {"type": "reamer", "name": "REAMER_8.5MM", "diameter": 8.5, "flutes": 6,
           "overall_length": 90, "length_offsets": {"H3": 55}}
  },
  "conventions": {"feedrate_divisor": 60}
})";
  return parse_setup(json);
}

// ---------------------------------------------------------------------------
// Scanline oracle

namespace {

struct Interval {
  double lo;
  double hi;
};

void widen(std::optional<Interval>& acc, double lo, double hi) {
  if (!acc) {
    acc = Interval{lo, hi};
  } else {
    acc->lo = std::min(acc->lo, lo);
    acc->hi = std::max(acc->hi, hi);
  }
}

void disc_row(std::optional<Interval>& acc, geom::Point2 c, double r, double y) {
  double dy = y - c.y;
  if (std::abs(dy) > r) return;
  double h = std::sqrt(r * r - dy * dy);
  widen(acc, c.x - h, c.x + h);
}

// Row through the capsule of segment ab. The capsule is convex, so the row
// is one interval: the hull of the two end discs and the swept rectangle.
std::optional<Interval> capsule_row(geom::Point2 a, geom::Point2 b, double r, double y) {
  std::optional<Interval> acc;
  disc_row(acc, a, r, y);
  disc_row(acc, b, r, y);
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double len = std::hypot(dx, dy);
  if (len > 0) {
    double nx = -dy / len * r;
    double ny = dx / len * r;
    geom::Point2 q[4] = {{a.x + nx, a.y + ny}, {b.x + nx, b.y + ny}, {b.x - nx, b.y - ny}, {a.x - nx, a.y - ny}};
    for (int i = 0; i < 4; ++i) {
      geom::Point2 p = q[i];
      geom::Point2 s = q[(i + 1) % 4];
      if ((p.y - y) * (s.y - y) > 0) continue;
      if (p.y == s.y) {
        if (p.y == y) widen(acc, std::min(p.x, s.x), std::max(p.x, s.x));
        continue;
      }
      double t = (y - p.y) / (s.y - p.y);
      double x = p.x + t * (s.x - p.x);
      widen(acc, x, x);
    }
  }
  return acc;
}

}  // namespace

double raster_sweep_area(const std::vector<geom::Point2>& poly, double radius, double step) {
  if (poly.empty()) return 0.0;
  double ymin = poly[0].y;
  double ymax = poly[0].y;
  for (auto p : poly) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  ymin -= radius;
  ymax += radius;
  double total = 0.0;
  std::vector<Interval> row;
  const long rows = static_cast<long>(std::ceil((ymax - ymin) / step));
  for (long k = 0; k < rows; ++k) {
    double y = ymin + (static_cast<double>(k) + 0.5) * step;
    row.clear();
    if (poly.size() == 1) {
      std::optional<Interval> acc;
      disc_row(acc, poly[0], radius, y);
      if (acc) row.push_back(*acc);
    }
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
      if (auto iv = capsule_row(poly[i], poly[i + 1], radius, y)) row.push_back(*iv);
    std::sort(row.begin(), row.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double covered = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool open = false;
    for (const auto& iv : row) {
      if (open && iv.lo <= hi) {
        hi = std::max(hi, iv.hi);
        continue;
      }
      if (open) covered += hi - lo;
      lo = iv.lo;
      hi = iv.hi;
      open = true;
    }
    if (open) covered += hi - lo;
    total += covered * step;
  }
  return total;
}

std::vector<geom::Point2> random_simple_polyline(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<geom::Point2> out;
  int n = count(rng);
  if (u(rng) < 0.5) {
    double x = -30.0 + 10.0 * u(rng);
    for (int i = 0; i < n; ++i) {
      out.push_back({x, -20.0 + 40.0 * u(rng)});
      x += 1.0 + 9.0 * u(rng);
    }
  } else {
    // Increasing polar angle with steps below pi keeps the path simple.
    double angle = 2 * std::numbers::pi * u(rng);
    const double span = 2 * std::numbers::pi * (0.3 + 0.6 * u(rng));
    for (int i = 0; i < n; ++i) {
      double rho = 3.0 + 22.0 * u(rng);
      out.push_back({rho * std::cos(angle), rho * std::sin(angle)});
      angle += span / n;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// G-code generation

namespace {

constexpr double kInch = 25.4;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.push_back('0');
  if (s == "-0.0") s = "0.0";
  return s;
}

// Emits blocks while tracking the modes the text puts the controller in.
class Writer {
 public:
  bool inch = false;
  bool incremental = false;
  Vec3 pos;          // work coordinates, mm
  bool known = false;

  void line(const std::string& s) { out_ << s << '\n'; }

  std::string len(double mm) const { return fmt(inch ? mm / kInch : mm); }

  std::string axes(const Vec3& target, bool all = false) const {
    Vec3 v = incremental && known ? target - pos : target;
    std::string s;
    auto add = [&](char c, double value, double current) {
      if (!all && known && std::abs(value - current) < 1e-12 && !incremental) return;
      if (!all && incremental && known && std::abs(value) < 1e-12) return;
      s += ' ';
      s += c;
      s += len(value);
    };
    add('X', v.x, pos.x);
    add('Y', v.y, pos.y);
    add('Z', v.z, pos.z);
    return s;
  }

  void rapid(const Vec3& t) {
    std::string a = axes(t, !known);
    if (!a.empty()) line("G0" + a);
    pos = t;
    known = true;
  }

  void feed_line(const Vec3& t, double feed) {
    std::string a = axes(t);
    if (a.empty()) a = " X" + len(incremental ? 0.0 : t.x);
    line("G1" + a + (feed > 0 ? " F" + len(feed) : ""));
    pos = t;
  }

  void arc(const Vec3& t, geom::Point2 c, bool ccw, double feed) {
    std::string s = ccw ? "G3" : "G2";
    s += axes(t, true);
    s += " I" + len(c.x - pos.x) + " J" + len(c.y - pos.y);
    if (feed > 0) s += " F" + len(feed);
    line(s);
    pos = t;
  }

  // Absolute mode only. Position afterwards is the hole at the R plane.
  void cycle(const Motion& m) {
    std::string s = "G99 G" + std::to_string(m.cycle) + " X" + len(m.target.x) + " Y" +
                    len(m.target.y) + " Z" + len(m.target.z) + " R" + len(m.r);
    if (m.cycle == 83) s += " Q" + len(m.q);
    if (m.cycle == 82) s += " P0.5";
    if (m.feed > 0) s += " F" + len(m.feed);
    line(s);
    pos = {m.target.x, m.target.y, m.r};
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

Vec3 random_point(std::mt19937_64& rng, double zlo, double zhi) {
  return {uniform(rng, -80, 80), uniform(rng, -80, 80), uniform(rng, zlo, zhi)};
}

// Arc from `from` around a random centre, returned as a motion.
Motion random_arc(std::mt19937_64& rng, const Vec3& from) {
  Motion m;
  m.kind = Motion::Kind::Arc;
  double r = uniform(rng, 2, 30);
  double phi = uniform(rng, 0, 2 * std::numbers::pi);
  m.center = {from.x - r * std::cos(phi), from.y - r * std::sin(phi)};
  double sweep = uniform(rng, 0.2, 6.0) * (chance(rng, 0.5) ? 1 : -1);
  m.ccw = sweep > 0;
  double a = phi + sweep;
  double dz = chance(rng, 0.3) ? uniform(rng, -3, 3) : 0.0;
  m.target = {m.center.x + r * std::cos(a), m.center.y + r * std::sin(a), from.z + dz};
  return m;
}

}  // namespace

ProgramSpec random_spec(std::mt19937_64& rng, bool cycles) {
  ProgramSpec spec;
  spec.work_offset = chance(rng, 0.5) ? 54 : 55;
  Motion first;
  first.target = random_point(rng, 5, 20);
  spec.motions.push_back(first);
  Vec3 pos = first.target;
  bool have_feed = false;
  int n = std::uniform_int_distribution<int>(5, 30)(rng);
  for (int i = 0; i < n; ++i) {
    double pick = uniform(rng, 0, 1);
    Motion m;
    if (cycles && pick < 0.1) {
      Motion up;
      up.target = {pos.x, pos.y, 15.0};
      spec.motions.push_back(up);
      m.kind = Motion::Kind::Cycle;
      m.cycle = std::array{81, 82, 83, 85}[std::uniform_int_distribution<int>(0, 3)(rng)];
      m.r = uniform(rng, 1, 5);
      m.target = {uniform(rng, -80, 80), uniform(rng, -80, 80), m.r - uniform(rng, 2, 20)};
      m.q = uniform(rng, 1, 4);
      m.feed = uniform(rng, 100, 600);
      have_feed = true;
      spec.motions.push_back(m);
      pos = {m.target.x, m.target.y, m.r};
      continue;
    }
    if (pick < 0.3) {
      m.kind = Motion::Kind::Rapid;
      m.target = random_point(rng, -10, 20);
    } else if (pick < 0.7) {
      m.kind = Motion::Kind::Line;
      m.target = random_point(rng, -10, 20);
    } else {
      m = random_arc(rng, pos);
    }
    if (m.kind != Motion::Kind::Rapid && (!have_feed || chance(rng, 0.2))) {
      m.feed = uniform(rng, 100, 2000);
      have_feed = true;
    }
    spec.motions.push_back(m);
    pos = m.target;
  }
  return spec;
}

std::string render_spec(const ProgramSpec& spec, const RenderMode& mode) {
  Writer w;
  w.inch = mode.inch;
  w.line(std::string("G17 ") + (mode.inch ? "G20" : "G21") + " G40 G49 G80 G90 G94");
  w.line("G" + std::to_string(spec.work_offset));
  w.line("T1 M6");
  w.line("G43 H1");
  w.line("S1200 M3");
  w.line("M8");
  bool in_cycle = false;
  for (std::size_t i = 0; i < spec.motions.size(); ++i) {
    const Motion& m = spec.motions[i];
    if (in_cycle && m.kind != Motion::Kind::Cycle) {
      w.line("G80");
      in_cycle = false;
    }
    switch (m.kind) {
      case Motion::Kind::Rapid:
        w.rapid(m.target);
        break;
      case Motion::Kind::Line:
        w.feed_line(m.target, m.feed);
        break;
      case Motion::Kind::Arc:
        w.arc(m.target, m.center, m.ccw, m.feed);
        break;
      case Motion::Kind::Cycle:
        w.cycle(m);
        in_cycle = true;
        break;
    }
    if (i == 0 && mode.incremental) {
      w.line("G91");
      w.incremental = true;
    }
  }
  if (in_cycle) w.line("G80");
  w.line("M9");
  w.line("M5");
  w.line("M30");
  return w.str();
}

std::string random_fuzz_program(std::mt19937_64& rng) {
  Writer w;
  auto maybe_comment = [&] {
    if (chance(rng, 0.15)) w.line("(" + std::string(chance(rng, 0.5) ? "layer" : "next pass") + ")");
  };
  w.inch = chance(rng, 0.2);
  w.line(std::string("G17 ") + (w.inch ? "G20" : "G21") + " G40 G49 G80 G90 G94");
  w.line(chance(rng, 0.5) ? "G54" : "G55");
  int tool = 0;
  auto use_tool = [&](int t) {
    if (tool == t) return;
    if (tool != 0) w.line("M5");
    w.line("T" + std::to_string(t) + " M6");
    w.line("G43 H" + std::to_string(t));
    w.line("S" + fmt(uniform(rng, 500, 3000)) + (chance(rng, 0.85) ? " M3" : " M4"));
    if (chance(rng, 0.7)) w.line(chance(rng, 0.8) ? "M8" : "M7");
    tool = t;
  };
  auto absolute = [&] {
    if (w.incremental) {
      w.line("G90");
      w.incremental = false;
    }
  };
  auto safe = [&](double x, double y) {
    w.rapid({w.known ? w.pos.x : x, w.known ? w.pos.y : y, 20.0});
    w.rapid({x, y, 20.0});
  };

  use_tool(1);
  int chunks = std::uniform_int_distribution<int>(1, 6)(rng);
  for (int c = 0; c < chunks; ++c) {
    maybe_comment();
    int kind = std::uniform_int_distribution<int>(0, 4)(rng);
    if (kind == 0) {
      // Random moves in whatever modes are active.
      use_tool(1);
      // The start position is unknown in work coordinates, so the first
      // move is absolute.
      if (!w.known) {
        absolute();
        w.rapid(random_point(rng, 5, 20));
      }
      if (chance(rng, 0.3)) {
        w.line(w.incremental ? "G90" : "G91");
        w.incremental = !w.incremental;
      }
      if (chance(rng, 0.2)) {
        w.inch = !w.inch;
        w.line(w.inch ? "G20" : "G21");
      }
      w.line("F" + w.len(uniform(rng, 100, 2000)));
      int n = std::uniform_int_distribution<int>(1, 12)(rng);
      for (int i = 0; i < n; ++i) {
        double pick = uniform(rng, 0, 1);
        if (pick < 0.25) {
          w.rapid(random_point(rng, -10, 20));
        } else if (pick < 0.65) {
          w.feed_line(random_point(rng, -10, 20), chance(rng, 0.2) ? uniform(rng, 100, 2000) : 0.0);
        } else {
          Motion m = random_arc(rng, w.pos);
          w.arc(m.target, m.center, m.ccw, 0.0);
        }
      }
    } else if (kind == 1) {
      // Zigzag layers over a rectangle.
      use_tool(1);
      absolute();
      double x0 = uniform(rng, -90, 40);
      double y0 = uniform(rng, -90, 40);
      double wdt = uniform(rng, 10, 50);
      double hgt = uniform(rng, 10, 50);
      double step = uniform(rng, 3, 9);
      int layers = std::uniform_int_distribution<int>(1, 3)(rng);
      bool along_x = chance(rng, 0.5);
      safe(x0, y0);
      for (int l = 1; l <= layers; ++l) {
        double z = -2.0 * l;
        if (l > 1) w.rapid({x0, y0, w.pos.z});
        w.feed_line({x0, y0, z}, uniform(rng, 100, 600));
        int passes = static_cast<int>((along_x ? hgt : wdt) / step) + 1;
        for (int p = 0; p < passes; ++p) {
          double off = p * step;
          Vec3 a = along_x ? Vec3{x0, y0 + off, z} : Vec3{x0 + off, y0, z};
          Vec3 b = along_x ? Vec3{x0 + wdt, y0 + off, z} : Vec3{x0 + off, y0 + hgt, z};
          if (p % 2) std::swap(a, b);
          if (p > 0) w.feed_line(a, 0.0);
          w.feed_line(b, 0.0);
        }
        w.rapid({w.pos.x, w.pos.y, 5.0});
      }
      w.rapid({w.pos.x, w.pos.y, 20.0});
    } else if (kind == 2) {
      // Nested rectangular contours around a centre, one or two layers.
      use_tool(1);
      absolute();
      double cx = uniform(rng, -50, 50);
      double cy = uniform(rng, -50, 50);
      int loops = std::uniform_int_distribution<int>(1, 4)(rng);
      double step = uniform(rng, 3, 8);
      int layers = std::uniform_int_distribution<int>(1, 2)(rng);
      safe(cx, cy);
      for (int l = 1; l <= layers; ++l) {
        double z = -3.0 * l;
        if (l > 1) w.rapid({cx, cy, w.pos.z});
        w.feed_line({cx, cy, z}, uniform(rng, 100, 600));
        for (int k = 1; k <= loops; ++k) {
          double h = k * step;
          w.feed_line({cx, cy + h, z}, 0.0);
          w.feed_line({cx - h, cy + h, z}, 0.0);
          w.feed_line({cx - h, cy - h, z}, 0.0);
          w.feed_line({cx + h, cy - h, z}, 0.0);
          w.feed_line({cx + h, cy + h, z}, 0.0);
          w.feed_line({cx, cy + h, z}, 0.0);
        }
        w.feed_line({cx, cy + loops * step, 0.0}, 0.0);
      }
      w.rapid({w.pos.x, w.pos.y, 20.0});
    } else if (kind == 3) {
      // Drilling, sometimes followed by reaming the same holes.
      use_tool(2);
      absolute();
      int holes = std::uniform_int_distribution<int>(1, 3)(rng);
      std::vector<Motion> cycles;
      for (int h = 0; h < holes; ++h) {
        Motion m;
        m.kind = Motion::Kind::Cycle;
        m.cycle = std::array{81, 82, 83}[std::uniform_int_distribution<int>(0, 2)(rng)];
        m.r = 2.0;
        m.target = {uniform(rng, -80, 80), uniform(rng, -80, 80), -uniform(rng, 5, 45)};
        m.q = uniform(rng, 1, 5);
        m.feed = h == 0 ? uniform(rng, 100, 400) : 0.0;
        cycles.push_back(m);
      }
      safe(cycles[0].target.x, cycles[0].target.y);
      for (const auto& m : cycles) w.cycle(m);
      w.line("G80");
      if (chance(rng, 0.5)) {
        use_tool(3);
        w.rapid({w.pos.x, w.pos.y, 20.0});
        for (auto m : cycles) {
          m.cycle = 85;
          m.feed = 0.0;
          w.cycle(m);
        }
        w.line("G80");
      }
    } else {
      // Feed, speed and coolant changes.
      if (chance(rng, 0.5)) w.line("S" + fmt(uniform(rng, 500, 3000)) + " M3");
      if (chance(rng, 0.5)) w.line(chance(rng, 0.5) ? "M9" : "M8");
      w.line("F" + w.len(uniform(rng, 100, 2000)));
    }
  }
  w.line("M5");
  w.line("M9");
  w.line("M30");

  // Line numbers on some blocks.
  if (chance(rng, 0.3)) {
    std::istringstream in(w.str());
    std::ostringstream numbered;
    std::string l;
    int n = 10;
    while (std::getline(in, l)) {
      if (!l.empty() && l[0] != '(') {
        numbered << 'N' << n << ' ';
        n += 10;
      }
      numbered << l << '\n';
    }
    return numbered.str();
  }
  return w.str();
}

double call_length(const Vec3& from, const CanonicalCall& c) {
  if (c.kind != CanonKind::ArcFeed) return distance(from, c.position);
  // Only XY-plane arcs are generated by the tests.
  double r = std::hypot(from.x - c.center.x, from.y - c.center.y);
  double a0 = std::atan2(from.y - c.center.y, from.x - c.center.x);
  double a1 = std::atan2(c.position.y - c.center.y, c.position.x - c.center.x);
  double sweep = a1 - a0;
  if (c.rotation > 0) {
    while (sweep <= 1e-12) sweep += 2 * std::numbers::pi;
  } else {
    while (sweep >= -1e-12) sweep -= 2 * std::numbers::pi;
  }
  return std::hypot(r * sweep, c.position.z - from.z);
}

}  // namespace g2s::testing
