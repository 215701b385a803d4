#include <cmath>

#include "doctest.h"
#include "support/support.hpp"

using namespace g2s;
using namespace g2s::testing;

namespace {

Conversion convert_data(const char* ngc, const char* setup, Stage stage = Stage::Cc2) {
  ConvertOptions o;
  o.stage = stage;
  o.source_name = ngc;
  return convert(read_text(data_path(ngc)), load_data_setup(setup), o);
}

Conversion convert_text(const std::string& text, const char* setup, Stage stage = Stage::Cc2) {
  ConvertOptions o;
  o.stage = stage;
  return convert(text, load_data_setup(setup), o);
}

std::vector<const MachiningWorkingstep*> workingsteps(const Project& p) {
  std::vector<const MachiningWorkingstep*> out;
  for (const auto& e : p.executables)
    if (auto* ws = std::get_if<MachiningWorkingstep>(&e)) out.push_back(ws);
  return out;
}

std::vector<std::size_t> workingstep_indices(const Project& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.executables.size(); ++i)
    if (std::holds_alternative<MachiningWorkingstep>(p.executables[i])) out.push_back(i);
  return out;
}

const std::string kHeader = "G54 G90 G21 G40 G49 M5 M9\nT1 M6\nG43 H1\nM8 S720 M3\n";

}  // namespace

TEST_CASE("facing pass is a planar face candidate") {
  Conversion c = convert_data("example1.ngc", "example1_setup.json", Stage::Cc1);
  auto ws = workingsteps(*c.cc1);
  REQUIRE(ws.size() == 1);
  Phase1Result r = phase1_classify(*ws[0]);
  CHECK((r.kind == Phase1Kind::PlanarFace || r.kind == Phase1Kind::Defer));
  CHECK(r.level_z == doctest::Approx(0.0));
}

TEST_CASE("facing strategy is bidirectional along +Y") {
  Conversion c = convert_data("example1.ngc", "example1_setup.json", Stage::Cc1);
  const auto& op = *workingsteps(*c.cc1)[0]->operation;
  geom::Path2D path;
  for (const auto& t : op.toolpaths) {
    if (t.rapid) continue;
    path = level_path(t, 0.0);
    if (!path.segments.empty()) break;
  }
  StrategyLabel s = classify_strategy(path, op.tool.diameter);
  CHECK(s.kind == StrategyLabel::Kind::Bidirectional);
  CHECK(s.direction.x == doctest::Approx(0.0));
  CHECK(s.direction.y == doctest::Approx(1.0));
  CHECK(s.stepover == doctest::Approx(17.1));
  CHECK(s.overlap == doctest::Approx(0.05));
}

TEST_CASE("single pass and closed loop strategies") {
  geom::Path2D line;
  line.start = {0, 0};
  line.segments.push_back({{0, 0}, {0, 40}, {}, true});
  CHECK(classify_strategy(line, 10).kind == StrategyLabel::Kind::Center);

  geom::Path2D loop;
  loop.start = {0, 0};
  std::vector<geom::Point2> pts = {{0, 0}, {30, 0}, {30, 20}, {0, 20}, {0, 0}};
  for (std::size_t i = 1; i < pts.size(); ++i) loop.segments.push_back({pts[i - 1], pts[i], {}, true});
  StrategyLabel s = classify_strategy(loop, 10);
  CHECK((s.kind == StrategyLabel::Kind::ContourParallel || s.kind == StrategyLabel::Kind::ContourSpiral));
  CHECK(s.loops >= 1);
}

TEST_CASE("drilling cycles become round hole candidates") {
  Conversion c = convert_data("fig8.ngc", "fig8_setup.json", Stage::Cc1);
  int holes = 0;
  for (const auto* ws : workingsteps(*c.cc1)) {
    Phase1Result r = phase1_classify(*ws);
    if (r.kind == Phase1Kind::RoundHole) {
      ++holes;
      CHECK(r.axis.x == doctest::Approx(20.0));
      CHECK(r.axis.y == doctest::Approx(60.0));
    }
  }
  CHECK(holes >= 2);
}

TEST_CASE("layers at one level are not merged") {
  std::string layer =
      "G0 X91.90 Y-13.50 Z15.00\nG1 Z0.00 F240.00\nY133.50\nX74.80\nY-13.50\nG0 Z15.00\n";
  Conversion c = convert_text(kHeader + layer + layer + "M30\n", "example1_setup.json", Stage::Cc1);
  auto idx = workingstep_indices(*c.cc1);
  REQUIRE(idx.size() == 2);
  auto groups = merge_layers(*c.cc1, idx);
  CHECK(groups.size() == 2);
}

TEST_CASE("descending identical layers are merged") {
  Conversion c = convert_data("example1_two_layers.ngc", "example1_setup.json", Stage::Cc1);
  auto idx = workingstep_indices(*c.cc1);
  REQUIRE(idx.size() == 2);
  auto groups = merge_layers(*c.cc1, idx);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].members.size() == 2);
  CHECK(groups[0].z[0] == doctest::Approx(2.5));
  CHECK(groups[0].z[1] == doctest::Approx(0.0));
}

TEST_CASE("two-layer facing gives a 2.5 mm axial depth") {
  Conversion c = convert_data("example1_two_layers.ngc", "example1_setup.json");
  const Project& p = c.cc2->project;
  auto ws = workingsteps(p);
  REQUIRE(ws.size() == 1);
  CHECK(ws[0]->operation->kind == OperationKind::PlaneFinishMilling);
  CHECK(ws[0]->operation->axial_depth.value_or(0) == doctest::Approx(2.5));
  CHECK(std::holds_alternative<PlanarFaceShape>(p.features[ws[0]->feature].shape));
}

TEST_CASE("mixed part") {
  Conversion c = convert_data("fig8.ngc", "fig8_setup.json");
  const Project& p = c.cc2->project;
  auto ws = workingsteps(p);
  REQUIRE(ws.size() == 5);
  CHECK(ws[0]->operation->axial_depth.value_or(0) == doctest::Approx(2.5));
  CHECK(ws[1]->operation->kind == OperationKind::Drilling);
  CHECK(ws[2]->operation->kind == OperationKind::Reaming);
  CHECK(ws[1]->feature == ws[2]->feature);
  CHECK(ws[3]->feature == ws[4]->feature);
  const auto& rough = *ws[3]->operation;
  CHECK(rough.kind == OperationKind::BottomAndSideRoughMilling);
  CHECK(rough.axial_depth.value_or(0) == doctest::Approx(5.9));
  CHECK(rough.radial_depth.value_or(0) == doctest::Approx(5.0));
  const auto& finish = *ws[4]->operation;
  CHECK(finish.kind == OperationKind::BottomAndSideFinishMilling);
  CHECK(finish.axial_depth.value_or(0) == doctest::Approx(5.0));
  CHECK(c.cc2->members.size() == 5);
  CHECK(validate(p).empty());
}

TEST_CASE("three-dimensional moves are kept as toolpath features") {
  std::string text = kHeader + "G0 X0 Y0 Z10\nG1 Z-1 F240\nX10 Y10 Z-2\nX20 Y5 Z-4\nX35 Y20 Z-1\nG0 Z15\nM30\n";
  Conversion c = convert_text(text, "example1_setup.json");
  const Project& cc1 = *c.cc1;
  const Project& cc2 = c.cc2->project;
  CHECK(c.cc2->retained == cc1.workingstep_count());
  CHECK(cc2.features == cc1.features);
  auto a = workingsteps(cc1);
  auto b = workingsteps(cc2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
}

TEST_CASE("extraction is deterministic") {
  Conversion a = convert_data("fig8.ngc", "fig8_setup.json");
  Conversion b = convert_data("fig8.ngc", "fig8_setup.json");
  CHECK(a.cc2_text == b.cc2_text);
}
