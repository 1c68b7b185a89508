// Command-line front end. All computation lives in the headers; this file
// only parses flags, loads the config, dispatches to a runner, and writes
// the JSON/SVG artifacts into the output directory.
//
// Exit codes: 0 success, 2 config error, 3 failed sweep rows, 4 numerical
// failure.

#include "lpspec/report.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct CliOptions {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool json = false;  // --json: write only the JSON document
  bool svg = false;   // --svg: write only the figures
};

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  f.flush();
  return bool(f);
}

int write_artifacts(const lpspec::RunArtifacts& art, const std::string& name,
                    const CliOptions& opt) {
  const bool want_json = opt.json || !opt.svg;  // neither flag selects both
  const bool want_svg = opt.svg || !opt.json;
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << opt.out << ": " << ec.message() << '\n';
    return 4;
  }
  if (want_json && !write_file(fs::path(opt.out) / (name + ".json"), art.doc.dump(2) + "\n")) {
    std::cerr << "cannot write " << name << ".json\n";
    return 4;
  }
  if (want_svg)
    for (const auto& [file, svg] : art.svgs)
      if (!write_file(fs::path(opt.out) / file, svg)) {
        std::cerr << "cannot write " << file << '\n';
        return 4;
      }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("LPSPEC_THREADS")) {
    const int threads = std::atoi(env);
    if (threads >= 1) Eigen::setNbThreads(threads);
  }

  CLI::App app{"L^p spectral regions of asymptotically hyperbolic model metrics"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opt;
  app.add_option("--config", opt.config, "experiment config file (key = value lines)")
      ->required();
  app.add_option("--out", opt.out, "output directory")->capture_default_str();
  CLI::Option* seed_opt = app.add_option("--seed", opt.seed, "override the config seed");
  app.add_flag("--json", opt.json, "write only the JSON document");
  app.add_flag("--svg", opt.svg, "write only the SVG figures");

  using Runner = std::function<lpspec::RunArtifacts(const lpspec::ExperimentConfig&)>;
  const std::pair<const char*, Runner> commands[] = {
      {"region", [](const auto& c) { return lpspec::run_region(c); }},
      {"quasimode", [](const auto& c) { return lpspec::run_quasimode(c); }},
      {"volume", [](const auto& c) { return lpspec::run_volume(c); }},
      {"bottom", [](const auto& c) { return lpspec::run_spectrum_bottom(c); }},
      {"report", [](const auto& c) { return lpspec::run_report(c); }},
  };
  for (const auto& [name, runner] : commands) app.add_subcommand(name, "");

  CLI11_PARSE(app, argc, argv);

  const std::string chosen = app.get_subcommands().front()->get_name();
  try {
    lpspec::ExperimentConfig cfg = lpspec::ExperimentConfig::from_file(opt.config);
    if (seed_opt->count() > 0) cfg.seed = opt.seed;

    for (const auto& [name, runner] : commands)
      if (chosen == name) {
        const lpspec::RunArtifacts art = runner(cfg);
        const int rc = write_artifacts(art, name, opt);
        if (rc != 0) return rc;
        return art.all_pass ? 0 : 3;
      }
    std::cerr << "unknown subcommand " << chosen << '\n';
    return 2;
  } catch (const lpspec::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 4;
  }
}
