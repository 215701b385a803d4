// g2stepnc: G-code to STEP-NC Part 21 converter.
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "g2s/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Convert an ISO 6983 milling program to STEP-NC Part 21 (CC1 / CC2)"};
  g2s::ConversionConfig config;
  std::string stage = "cc2";
  double tol = 0.0;

  app.add_option("input", config.input, "G-code program")->required()->check(CLI::ExistingFile);
  app.add_option("--setup", config.setup, "JSON setup: machine, workpiece, tools")->required();
  app.add_option("--stage", stage, "last stage to run")
      ->check(CLI::IsMember({"canon", "cc1", "cc2"}));
  app.add_option("--out", config.out_dir, "output directory");
  auto* tol_opt = app.add_option("--tol-merge", tol, "xy tolerance for layer merging, mm")
                      ->check(CLI::PositiveNumber);
  app.add_flag("--reproducible", config.reproducible, "fixed header timestamp");
  app.add_flag("--dump-regions", config.dump_regions, "write cutting regions as SVG");
  app.add_flag("--emit-canon", config.emit_canon, "print canonical calls to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  config.stage = *g2s::stage_from_name(stage);
  if (*tol_opt) config.tol_merge = tol;
  return g2s::run(config, std::cout, std::cerr);
}
