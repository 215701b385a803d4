#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "support/support.hpp"

using namespace g2s;
using namespace g2s::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("g2s_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ConversionConfig config_for(const std::string& ngc, const std::string& setup, const fs::path& out) {
  ConversionConfig c;
  c.input = ngc;
  c.setup = setup;
  c.out_dir = out.string();
  c.reproducible = true;
  return c;
}

}  // namespace

TEST_CASE("run writes the stage files") {
  TempDir dir;
  std::ostringstream out, err;
  auto cfg = config_for(data_path("fig8.ngc"), data_path("fig8_setup.json"), dir.path);
  CHECK(run(cfg, out, err) == 0);
  CHECK(fs::exists(dir.path / "fig8.canon"));
  CHECK(fs::exists(dir.path / "fig8.cc1.p21"));
  CHECK(fs::exists(dir.path / "fig8.cc2.p21"));
  CHECK(read_text((dir.path / "fig8.cc2.p21").string()).rfind("ISO-10303-21;", 0) == 0);
}

TEST_CASE("reproducible runs are byte identical") {
  TempDir a, b;
  std::ostringstream out, err;
  REQUIRE(run(config_for(data_path("fig8.ngc"), data_path("fig8_setup.json"), a.path), out, err) == 0);
  REQUIRE(run(config_for(data_path("fig8.ngc"), data_path("fig8_setup.json"), b.path), out, err) == 0);
  for (const char* name : {"fig8.canon", "fig8.cc1.p21", "fig8.cc2.p21"})
    CHECK(read_text((a.path / name).string()) == read_text((b.path / name).string()));
}

TEST_CASE("stage canon stops early") {
  TempDir dir;
  std::ostringstream out, err;
  auto cfg = config_for(data_path("example1.ngc"), data_path("example1_setup.json"), dir.path);
  cfg.stage = Stage::Canon;
  CHECK(run(cfg, out, err) == 0);
  CHECK(fs::exists(dir.path / "example1.canon"));
  CHECK_FALSE(fs::exists(dir.path / "example1.cc1.p21"));
  CHECK_FALSE(fs::exists(dir.path / "example1.cc2.p21"));
}

TEST_CASE("unsupported input exits with status 2") {
  TempDir dir;
  fs::path ngc = dir.path / "comp.ngc";
  std::ofstream(ngc) << "G54 G90 G21\nT1 M6\nG41\nG0 X0 Y0\nM30\n";
  std::ostringstream out, err;
  CHECK(run(config_for(ngc.string(), data_path("example1_setup.json"), dir.path), out, err) == 2);
  CHECK(err.str().find("UnsupportedCode") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "comp.canon"));
}

TEST_CASE("missing input is an error") {
  TempDir dir;
  std::ostringstream out, err;
  CHECK(run(config_for((dir.path / "none.ngc").string(), data_path("example1_setup.json"), dir.path), out,
            err) != 0);
  CHECK_FALSE(err.str().empty());
}

TEST_CASE("stage names") {
  CHECK(stage_from_name("canon") == Stage::Canon);
  CHECK(stage_from_name("cc1") == Stage::Cc1);
  CHECK(stage_from_name("cc2") == Stage::Cc2);
  CHECK_FALSE(stage_from_name("cc3"));
}
