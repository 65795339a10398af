// seqpr: sequence-based place recognition over descriptor trajectories.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "run_config.hpp"
#include "seqpr/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sequence-based place recognition: embed, diff, search, eval, tune, simulate"};
  std::string config_path;
  std::string command;
  std::size_t threads = 0;
  std::string out_dir = "out";
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--command", command, "embed | diff | search | eval | tune | simulate | full")
      ->required();
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--out", out_dir, "output directory");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cmd = seqpr::app::parse_command(command);
    seqpr::app::RunConfig cfg;
    if (!config_path.empty()) cfg = seqpr::app::load_run_config(config_path);
    seqpr::app::PipelineOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    opt.log = &std::cout;
    const auto result = seqpr::app::run_pipeline(cfg, cmd, opt);
    std::cout << "wrote " << result.outputs.size() << " files to " << out_dir << '\n';
  } catch (const seqpr::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const seqpr::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
