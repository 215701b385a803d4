#pragma once

#include <string>
#include <string_view>

#include "g2s/canon.hpp"
#include "g2s/stepnc.hpp"

namespace g2s {

// Everything a conversion needs besides the G-code itself.
struct JobSetup {
  std::string project_name = "EXECUTE PROJECT";
  MachineSetup machine;
  Workpiece workpiece;
  // File feedrate = mm/min divided by this. 60 gives mm/s.
  double feedrate_divisor = 60.0;
};

// Parses the JSON setup document. Errors carry the offending field path,
// e.g. "SchemaError tools.2.diameter: expected a positive number".
JobSetup parse_setup(std::string_view json_text);
JobSetup load_setup(const std::string& path);

// Throws UndefinedTool for the first T word or H word the setup cannot
// resolve.
void check_tools_defined(const Program& program, const JobSetup& setup);

}  // namespace g2s
