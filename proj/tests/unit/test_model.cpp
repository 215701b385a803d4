#include "doctest.h"
#include "g2s/cc1.hpp"
#include "g2s/setup.hpp"
#include "g2s/stepnc.hpp"
#include "support/support.hpp"

using namespace g2s;

namespace {

template <class F>
ConversionError error_of(F&& f) {
  try {
    f();
  } catch (const ConversionError& e) {
    return e;
  }
  FAIL("expected a ConversionError");
  return ConversionError(ErrorKind::Internal, "unreachable");
}

CanonicalCall call(CanonKind kind, Vec3 p = {}, double value = 0) {
  CanonicalCall c;
  c.kind = kind;
  c.position = p;
  c.value = value;
  return c;
}

}  // namespace

TEST_CASE("example setups load") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  CHECK(ex1.project_name == "EXECUTE EXAMPLE1");
  CHECK(ex1.machine.security_plane_z == 100);
  REQUIRE(ex1.machine.tool_table.count(1));
  CHECK(ex1.machine.tool_table.at(1).diameter == 18);
  CHECK(ex1.machine.tool_table.at(1).flute_count == 4);
  CHECK(ex1.machine.length_offsets.at(1) == 50);
  REQUIRE(ex1.workpiece.rawpiece);
  CHECK(ex1.workpiece.rawpiece->top() == doctest::Approx(5));
  CHECK(ex1.workpiece.clamping_points.size() == 4);

  JobSetup fig8 = testing::load_data_setup("fig8_setup.json");
  CHECK(fig8.machine.tool_table.at(2).type == ToolType::TwistDrill);
  CHECK(fig8.machine.tool_table.at(3).type == ToolType::Reamer);
  CHECK(fig8.machine.tool_table.at(3).diameter == 22);
}

TEST_CASE("setup schema errors name the field") {
  auto e = error_of([] { parse_setup(R"({"machine": {"axis_count": "three"}})"); });
  CHECK(e.kind() == ErrorKind::SchemaError);
  CHECK(e.diagnostics().front().message.find("machine.axis_count") != std::string::npos);

  auto bad_diameter = error_of([] {
    parse_setup(R"({"machine": {"security_plane_z": 50}, "workpiece": {"box": {"origin": [0,0,0], "dims": [1,1,1]}},
                    "tools": {"T1": {"type": "endmill", "diameter": -2}}})");
  });
  CHECK(bad_diameter.kind() == ErrorKind::SchemaError);
  CHECK(bad_diameter.diagnostics().front().message.find("tools.T1.diameter") != std::string::npos);

  auto unknown = error_of([] {
    parse_setup(R"({"machine": {"security_plane_z": 50}, "workpiece": {"box": {"origin": [0,0,0], "dims": [1,1,1]}},
                    "tools": {"T1": {"type": "laser", "diameter": 2}}})");
  });
  CHECK(unknown.kind() == ErrorKind::UnknownToolType);

  CHECK(error_of([] { parse_setup("{not json"); }).kind() == ErrorKind::SchemaError);
}

TEST_CASE("program tools must be in the setup") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  Program p = parse_program("T2 M6\nM30");
  CHECK(error_of([&] { check_tools_defined(p, ex1); }).kind() == ErrorKind::UndefinedTool);
  Program h = parse_program("T1 M6\nG43 H4\nM30");
  CHECK(error_of([&] { check_tools_defined(h, ex1); }).kind() == ErrorKind::UndefinedTool);
  check_tools_defined(parse_program(testing::read_text(testing::data_path("example1.ngc"))), ex1);
}

TEST_CASE("new_project installs the security plane") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  Project p = new_project(ex1.machine, ex1.workpiece);
  CHECK(p.security_z() == 100);
  CHECK(p.executables.empty());

  MachineSetup m;
  m.security_plane_z = 2;
  Workpiece w;
  w.rawpiece = Box{{0, 0, 0}, {1, 1, 1}};
  CHECK_NOTHROW(new_project(m, w));
  m.security_plane_z = 0.5;
  CHECK(error_of([&] { new_project(m, w); }).kind() == ErrorKind::InvalidSetup);
}

TEST_CASE("validate reports broken invariants") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  Project cc1 = build_cc1(interpret_program(parse_program(testing::read_text(testing::data_path("example1.ngc"))),
                                            ex1.machine),
                          ex1);
  CHECK(validate(cc1).empty());

  Project no_op = cc1;
  std::get<MachiningWorkingstep>(no_op.executables[0]).operation.reset();
  CHECK(validate(no_op).size() == 1);

  Project hole = cc1;
  Feature f;
  f.name = "HOLE1";
  f.shape = RoundHoleShape{0.0, true, 0.0};
  hole.features.push_back(f);
  MachiningWorkingstep ws = std::get<MachiningWorkingstep>(cc1.executables[0]);
  ws.feature = hole.features.size() - 1;
  hole.executables.push_back(ws);
  CHECK(validate(hole).size() == 1);

  Project empty_path = cc1;
  std::get<MachiningWorkingstep>(empty_path.executables[0]).operation->toolpaths.clear();
  CHECK_FALSE(validate(empty_path).empty());

  Project bad_tool = cc1;
  std::get<MachiningWorkingstep>(bad_tool.executables[0]).operation->tool.diameter = 0;
  CHECK_FALSE(validate(bad_tool).empty());
}

TEST_CASE("feature_operations follows the workplan") {
  JobSetup setup = testing::load_data_setup("fig8_setup.json");
  Project cc1 = build_cc1(interpret_program(parse_program(testing::read_text(testing::data_path("fig8.ngc"))),
                                            setup.machine),
                          setup);
  std::size_t hole = cc1.features.size();
  for (std::size_t i = 0; i < cc1.features.size(); ++i)
    if (std::holds_alternative<RoundHoleShape>(cc1.features[i].shape)) hole = i;
  REQUIRE(hole < cc1.features.size());
  auto ops = feature_operations(cc1, hole);
  REQUIRE(ops.size() == 2);
  CHECK(ops[0]->kind == OperationKind::Drilling);
  CHECK(ops[1]->kind == OperationKind::Reaming);
}

TEST_CASE("segment splits maximal runs") {
  std::vector<CanonicalCall> calls = {
      call(CanonKind::StraightTraverse, {0, 0, 10}), call(CanonKind::StraightTraverse, {0, 0, 5}),
      call(CanonKind::StraightFeed, {0, 0, 0}),      call(CanonKind::StraightFeed, {10, 0, 0}),
      call(CanonKind::StraightFeed, {10, 10, 0}),    call(CanonKind::StraightTraverse, {10, 10, 10}),
  };
  auto s = segment(calls);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == Segment{SegmentKind::Rapid, {0, 1}});
  CHECK(s[1] == Segment{SegmentKind::Feed, {2, 3, 4}});
  CHECK(s[2] == Segment{SegmentKind::Rapid, {5}});
}

TEST_CASE("feed rate change breaks a feed chain, an equal value does not") {
  std::vector<CanonicalCall> calls = {
      call(CanonKind::SetFeedRate, {}, 100),      call(CanonKind::StraightTraverse, {0, 0, 0}),
      call(CanonKind::StraightFeed, {1, 0, 0}),   call(CanonKind::SetFeedRate, {}, 200),
      call(CanonKind::StraightFeed, {2, 0, 0}),   call(CanonKind::SetFeedRate, {}, 200),
      call(CanonKind::StraightFeed, {3, 0, 0}),
  };
  auto s = segment(calls);
  REQUIRE(s.size() == 3);
  CHECK(s[1].calls == std::vector<std::size_t>{2});
  CHECK(s[2].calls == std::vector<std::size_t>{4, 6});
}

TEST_CASE("example 1 CC1 structure") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  auto calls = interpret_program(parse_program(testing::read_text(testing::data_path("example1.ngc"))), ex1.machine);
  Project p = build_cc1(calls, ex1);
  REQUIRE(p.executables.size() == 2);
  const auto& ws = std::get<MachiningWorkingstep>(p.executables[0]);
  const Operation& op = *ws.operation;
  CHECK(op.kind == OperationKind::Freeform);
  CHECK(op.technology.feedrate == 240);
  CHECK(op.technology.spindle == -720);
  CHECK(op.functions.coolant);
  CHECK(op.tool.name == "ENDMILL_18MM");
  REQUIRE(op.toolpaths.size() == 1);
  auto pts = op.toolpaths[0].points();
  CHECK(pts.size() == 13);
  CHECK(distance(pts.front(), {91.9, -13.5, 15}) < 1e-9);
  CHECK(distance(pts.back(), {6.4, -13.5, 0}) < 1e-9);
  CHECK(std::holds_alternative<ToolpathShape>(p.features[ws.feature].shape));
  const auto& rapid = std::get<RapidMovement>(p.executables[1]);
  CHECK(rapid.path.rapid);
  CHECK(distance(rapid.path.start, {6.4, -13.5, 0}) < 1e-9);
  CHECK(distance(rapid.path.end(), {6.4, -13.5, 15}) < 1e-9);
}

TEST_CASE("traverse-only program has no workingsteps") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  ex1.machine.initial_position = Vec3{0, 0, 50};
  auto calls = interpret_program(parse_program("G0 X10 Y10 Z20\nG0 Z30\nM30"), ex1.machine);
  Project p = build_cc1(calls, ex1);
  CHECK(p.executables.size() == 1);
  CHECK(p.workingstep_count() == 0);
}

TEST_CASE("feed before a known position is a dangling feed") {
  JobSetup ex1 = testing::load_data_setup("example1_setup.json");
  auto calls = interpret_program(parse_program("F100\nS100 M3\nG1 X10\nM30"), ex1.machine);
  CHECK(error_of([&] { build_cc1(calls, ex1); }).kind() == ErrorKind::DanglingFeed);
}

TEST_CASE("trajectories start where the machine was") {
  JobSetup setup = testing::load_data_setup("fig8_setup.json");
  auto calls = interpret_program(parse_program(testing::read_text(testing::data_path("fig8.ngc"))), setup.machine);
  Project p = build_cc1(calls, setup);
  Vec3 last;
  bool first = true;
  for (const auto& e : p.executables) {
    const Trajectory* t = nullptr;
    if (auto* r = std::get_if<RapidMovement>(&e)) t = &r->path;
    if (auto* ws = std::get_if<MachiningWorkingstep>(&e)) t = &ws->operation->toolpaths.front();
    if (!first && !std::get_if<MachiningWorkingstep>(&e)) CHECK(distance(t->start, last) < 1e-9);
    first = false;
    if (auto* ws = std::get_if<MachiningWorkingstep>(&e)) last = ws->operation->toolpaths.back().end();
    else last = t->end();
  }
}

TEST_CASE("drill and ream cycles become one hole feature") {
  JobSetup setup = testing::load_data_setup("fig8_setup.json");
  auto calls = interpret_program(parse_program(testing::read_text(testing::data_path("fig8.ngc"))), setup.machine);
  Project p = build_cc1(calls, setup);
  int holes = 0;
  for (const auto& f : p.features)
    if (auto* h = std::get_if<RoundHoleShape>(&f.shape)) {
      ++holes;
      CHECK(h->diameter == 22);
      CHECK(h->through);
      CHECK(f.placement.location.x == doctest::Approx(20));
      CHECK(f.placement.location.y == doctest::Approx(60));
      CHECK(f.name == "HOLE1 D=22MM");
    }
  CHECK(holes == 1);
  int drilling = 0, reaming = 0;
  for (const auto& e : p.executables)
    if (auto* ws = std::get_if<MachiningWorkingstep>(&e)) {
      if (ws->operation->kind == OperationKind::Drilling) ++drilling;
      if (ws->operation->kind == OperationKind::Reaming) ++reaming;
    }
  CHECK(drilling == 1);
  CHECK(reaming == 1);
}
