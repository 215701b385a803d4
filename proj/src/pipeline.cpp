#include "g2s/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace g2s {

namespace fs = std::filesystem;

std::optional<Stage> stage_from_name(std::string_view name) {
  if (name == "canon") return Stage::Canon;
  if (name == "cc1") return Stage::Cc1;
  if (name == "cc2") return Stage::Cc2;
  return std::nullopt;
}

Conversion convert(std::string_view gcode, const JobSetup& setup, const ConvertOptions& options,
                   std::string* failed_stage) {
  Conversion c;
  auto mark = [&](const char* stage) {
    if (failed_stage) *failed_stage = stage;
  };
  mark("gcode");
  c.program = parse_program(gcode, options.source_name);
  mark("setup");
  if (setup.machine.process != "milling")
    throw ConversionError(ErrorKind::SchemaError, "machine.process: only milling is supported");
  check_tools_defined(c.program, setup);
  mark("canon");
  c.calls = interpret_program(c.program, setup.machine);
  c.warnings = lint_canon(c.calls);
  c.canon_text = render_canon(c.calls);
  if (options.stage == Stage::Canon) return c;

  p21::WriteOptions wo;
  wo.decimals = options.decimals;
  wo.feedrate_divisor = setup.feedrate_divisor;
  wo.file_name = options.source_name;
  wo.timestamp = options.timestamp;

  mark("cc1");
  c.cc1 = build_cc1(c.calls, setup);
  mark("p21");
  wo.description = "CC1 explicit toolpaths";
  c.cc1_text = p21::serialize(*c.cc1, wo);
  if (options.stage == Stage::Cc1) return c;

  mark("features");
  if (setup.machine.axis_count != 3)
    throw ConversionError(ErrorKind::InvalidSetup, "feature extraction needs a 3-axis machine");
  c.cc2 = extract_features(*c.cc1, options.extract);
  mark("p21");
  wo.description = "CC2 machining features";
  c.cc2_text = p21::serialize(c.cc2->project, wo);
  return c;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConversionError(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ConversionError(ErrorKind::Io, "cannot write " + path.string());
}

std::string now_iso() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return buf;
}

}  // namespace

int run(const ConversionConfig& config, std::ostream& out, std::ostream& err) {
  std::string stage = "cli";
  try {
    JobSetup setup = load_setup(config.setup);
    std::string text = read_file(config.input);

    ConvertOptions options;
    options.stage = config.stage;
    if (config.tol_merge) options.extract.tol_merge = *config.tol_merge;
    options.source_name = fs::path(config.input).filename().string();
    if (!config.reproducible) options.timestamp = now_iso();

    Conversion c = convert(text, setup, options, &stage);
    stage = "cli";
    for (const auto& w : c.warnings) err << "warning: " << w.format() << "\n";

    fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const std::string stem = fs::path(config.input).stem().string();
    write_file(dir / (stem + ".canon"), c.canon_text);
    if (config.emit_canon) out << c.canon_text;
    if (c.cc1) write_file(dir / (stem + ".cc1.p21"), c.cc1_text);
    if (c.cc2) {
      write_file(dir / (stem + ".cc2.p21"), c.cc2_text);
      if (config.dump_regions) write_file(dir / (stem + ".regions.svg"), geom::to_svg(c.cc2->regions));
    }
    return 0;
  } catch (const ConversionError& e) {
    for (const auto& d : e.diagnostics()) err << stage << ": " << d.format() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << stage << ": Io " << e.what() << "\n";
    return exit_code(ErrorKind::Io);
  } catch (const std::exception& e) {
    err << stage << ": Internal " << e.what() << "\n";
    return exit_code(ErrorKind::Internal);
  }
}

}  // namespace g2s
