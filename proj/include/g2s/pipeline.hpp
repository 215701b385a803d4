#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "g2s/canon.hpp"
#include "g2s/cc1.hpp"
#include "g2s/features.hpp"
#include "g2s/gcode.hpp"
#include "g2s/p21.hpp"
#include "g2s/setup.hpp"
#include "g2s/stepnc.hpp"

namespace g2s {

enum class Stage { Canon, Cc1, Cc2 };

std::optional<Stage> stage_from_name(std::string_view name);

struct ConvertOptions {
  Stage stage = Stage::Cc2;
  ExtractOptions extract;
  std::string source_name = "input.ngc";
  std::string timestamp;  // empty keeps files reproducible
  int decimals = 2;
};

// Everything one conversion produces, in memory.
struct Conversion {
  Program program;
  std::vector<CanonicalCall> calls;
  std::vector<Diagnostic> warnings;  // lint findings, not fatal
  std::string canon_text;
  std::optional<Project> cc1;
  std::string cc1_text;
  std::optional<Cc2Result> cc2;
  std::string cc2_text;
};

// Runs the stages up to `options.stage`. Errors propagate as
// ConversionError; the stage that raised is reported by `failed_stage`.
Conversion convert(std::string_view gcode, const JobSetup& setup, const ConvertOptions& options,
                   std::string* failed_stage = nullptr);

struct ConversionConfig {
  std::string input;
  std::string setup;
  std::string out_dir = ".";
  Stage stage = Stage::Cc2;
  std::optional<double> tol_merge;
  bool reproducible = false;
  bool dump_regions = false;
  bool emit_canon = false;  // also print the canonical calls to stdout
};

// Batch driver: reads the inputs, writes <stem>.canon, <stem>.cc1.p21 and
// <stem>.cc2.p21 as far as the stage goes, reports errors on `err`.
// Returns the process exit status.
int run(const ConversionConfig& config, std::ostream& out, std::ostream& err);

}  // namespace g2s
