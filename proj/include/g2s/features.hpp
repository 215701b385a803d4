#pragma once

#include <optional>
#include <string>
#include <vector>

#include "g2s/geom2d.hpp"
#include "g2s/stepnc.hpp"

namespace g2s {

struct ExtractOptions {
  double tol_merge = 1e-3;  // xy equality for layer and hole matching, mm
  double tol_ang = 1e-3;    // parallelism, rad
  double chord_tol = 0.01;  // arc sampling for pointwise comparison
};

enum class Phase1Kind { RoundHole, PlanarFace, Slot, Region, Defer };

struct Phase1Result {
  Phase1Kind kind = Phase1Kind::Region;
  double diameter = 0.0;   // holes
  geom::Point2 axis;       // holes
  double level_z = 0.0;    // deepest planar level of a deferred 2.5D pass
};

// Classifies a freeform workingstep by tool type and the shape of its CL data.
Phase1Result phase1_classify(const MachiningWorkingstep& ws, const ExtractOptions& options = {});

// Workingsteps cutting successive layers of one feature. `members` index the
// project's executables; `z` holds the planar level of each member.
struct LayerGroup {
  std::vector<std::size_t> members;
  std::vector<double> z;
};

// Groups deferred workingsteps whose CL points match pointwise in xy while
// the level goes down. A candidate joins the latest open group it matches,
// so unrelated workingsteps in between do not split a group.
std::vector<LayerGroup> merge_layers(const Project& project, const std::vector<std::size_t>& candidates,
                                     const ExtractOptions& options = {});

struct StrategyLabel {
  enum class Kind { Unidirectional, Bidirectional, Center, ContourParallel, ContourSpiral, Unknown };
  Kind kind = Kind::Unknown;
  Vec3 direction{1, 0, 0};  // first pass direction for directional strategies
  double stepover = 0.0;    // pass spacing, or loop spacing for contours
  double overlap = 0.0;     // 1 - stepover / tool diameter
  StepoverSide side = StepoverSide::Left;
  bool ccw = true;  // contour loops
  int loops = 0;    // contour loops found
};

// Strategy of a single-level 2.5D path.
StrategyLabel classify_strategy(const geom::Path2D& path, double tool_diameter,
                                const ExtractOptions& options = {});

struct InferredFeature {
  FeatureShape shape;
  Vec3 origin;          // feature placement location in xy, z filled by the caller
  std::string prefix;   // naming stem, e.g. "POCKET"
};

// Decides the feature from the cutting region and the workpiece footprint;
// the strategy only breaks ties. Empty when nothing fits.
// `path` is the single-level path the strategy came from.
std::optional<InferredFeature> infer_feature(const StrategyLabel& strategy, const geom::Path2D& path,
                                             const geom::Region& region, const geom::Rect& footprint,
                                             const ExtractOptions& options = {});

// Longest run of horizontal moves at the deepest level of a trajectory.
geom::Path2D level_path(const Trajectory& t, double level_z);

struct Cc2Result {
  Project project;
  // CC1 workingstep indices absorbed by each CC2 workingstep, in CC2 order.
  std::vector<std::vector<std::size_t>> members;
  // Workingsteps kept as toolpath features.
  std::size_t retained = 0;
  // Cutting region of every recognized layer group, for debugging.
  std::vector<geom::Region> regions;
};

// Rewrites an explicit-toolpath project in terms of machining features.
// Content that cannot be recognized is carried over unchanged.
Cc2Result extract_features(const Project& cc1, const ExtractOptions& options = {});
Project build_cc2(const Project& cc1, const ExtractOptions& options = {});

}  // namespace g2s
