#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cqed/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady-state photon statistics of a driven quantum dot in a bimodal cavity"};
  std::string config_path;
  std::string preset;
  std::string output;
  int workers = 0;
  int cutoff = 0;
  bool emit_plot = false;
  bool audit = false;
  app.add_option("config", config_path, "key = value configuration file");
  app.add_option("--preset", preset, "fig2, fig3, fig4, fig5 or ref31 (overrides the file)");
  app.add_option("--output", output, "CSV output path");
  app.add_option("--workers", workers, "number of concurrent solves")->check(CLI::PositiveNumber);
  app.add_flag("--emit-plot", emit_plot, "write a gnuplot script next to the CSV");
  app.add_option("--cutoff", cutoff, "Fock cutoff for both modes")->check(CLI::Range(1, 64));
  app.add_flag("--audit", audit, "re-solve a subsample at cutoff + 2 and report the changes");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read " << config_path << '\n';
      return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else if (preset.empty()) {
    std::cerr << "give a config file or --preset\n";
    return 1;
  }

  cqed::RunConfig config;
  try {
    config = cqed::parse_config(text);
  } catch (const cqed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  if (!preset.empty()) {
    if (!cqed::preset(preset)) {
      std::cerr << "unknown preset '" << preset << "'\n";
      return 1;
    }
    config.preset = preset;
  }
  if (!output.empty()) config.output = output;
  if (workers > 0) config.workers = workers;
  if (cutoff > 0) config.cutoff = cutoff;
  config.emit_plot = emit_plot;
  config.audit = audit;
  return cqed::run(config, std::cout, std::cerr);
}
