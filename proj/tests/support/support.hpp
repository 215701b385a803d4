#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/geom2d.hpp"
#include "g2s/pipeline.hpp"

namespace g2s::testing {

std::string read_text(const std::string& path);
std::string data_path(std::string_view name);    // tests/data
std::string golden_path(std::string_view name);  // tests/golden

JobSetup load_data_setup(std::string_view name);

// Three tools (T1 endmill D10, T2 twist drill D8, T3 reamer D8.5), a 200 x
// 200 x 40 rawpiece with its top at z=0, and G55 set to `g55`.
JobSetup generic_setup(Vec3 g55 = {});

// Area within `radius` of an open polyline, measured on horizontal scanlines
// `step` apart. Each scanline is intersected exactly with every segment's
// capsule, so the only error is the row sampling.
double raster_sweep_area(const std::vector<geom::Point2>& polyline, double radius,
                         double step = 0.01);

// Open polyline without self-intersections: x-monotone or star-shaped.
std::vector<geom::Point2> random_simple_polyline(std::mt19937_64& rng);

// Abstract tool motion in work coordinates (mm, before the work offset).
struct Motion {
  enum class Kind { Rapid, Line, Arc, Cycle };
  Kind kind = Kind::Rapid;
  Vec3 target;
  geom::Point2 center;  // arcs, absolute
  bool ccw = false;
  double feed = 0.0;    // mm/min, 0 keeps the current one
  int cycle = 81;       // 81, 82, 83 or 85
  double r = 0.0;       // cycle R plane
  double q = 0.0;       // G83 peck
};

struct ProgramSpec {
  std::vector<Motion> motions;  // the first one is a rapid
  int work_offset = 54;
};

struct RenderMode {
  bool inch = false;
  bool incremental = false;
};

// Random moves on tool T1 with occasional drilling cycles on T2 when
// `cycles` is set.
ProgramSpec random_spec(std::mt19937_64& rng, bool cycles);
std::string render_spec(const ProgramSpec& spec, const RenderMode& mode);

// Free-form program for the fallback fuzz: mixes random moves, zigzag and
// contour layers, drilling cycles, tool changes, unit and distance modes,
// comments and line numbers. No cutter compensation and no macros.
std::string random_fuzz_program(std::mt19937_64& rng);

// Length of each motion call, computed from the call list alone.
double call_length(const Vec3& from, const CanonicalCall& call);

struct PropertyReport {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;
  double seconds = 0.0;

  bool ok() const { return cases > 0 && failures == 0; }
};

PropertyReport check_unit_invariance(std::uint64_t seed, int cases);
PropertyReport check_distance_mode_invariance(std::uint64_t seed, int cases);
PropertyReport check_work_offset_linearity(std::uint64_t seed, int cases);
PropertyReport check_segmentation_coverage(std::uint64_t seed, int cases);
PropertyReport check_serialize_fixpoint(std::uint64_t seed, int cases);
PropertyReport check_sweep_area(std::uint64_t seed, int cases);
PropertyReport check_fallback_totality(std::uint64_t seed, int cases);

}  // namespace g2s::testing
