// kanai-cavity: scenario runner.
//   kanai-cavity <command> --config <file.json> [--out <dir>] [--jobs N]
// Exit codes: 0 ok, 1 I/O or other failure, 2 invalid input, 3 numerical failure.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "kanai_cavity/cli/commands.hpp"
#include "kanai_cavity/cli/config.hpp"

namespace kc = kanai_cavity;

int main(int argc, char** argv) {
  CLI::App app{"Cavity simulations of the damped quantum oscillator"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  unsigned jobs = 1;
  for (const auto& name : kc::cli::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Scenario file (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides outputs.directory)");
    sub->add_option("--jobs", jobs, "Worker threads; 0 = all cores")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const kc::cli::ScenarioConfig cfg = kc::cli::load_config(config_path);
    const auto out = kc::cli::run_command(command, cfg, jobs);
    for (const auto& note : out.notes) std::fprintf(stderr, "note: %s\n", note.c_str());
    const std::filesystem::path dir = out_dir.empty() ? cfg.outputs.directory : std::filesystem::path(out_dir);
    kc::io::write_atomically(dir, out);
    for (const auto& f : out.files) std::printf("%s\n", (dir / f.first).string().c_str());
  } catch (const kc::ValidationError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const kc::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
