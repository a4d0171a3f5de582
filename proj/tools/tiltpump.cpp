#include "tiltpump/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

using namespace tiltpump;

namespace {

int cmd_list() {
  std::printf("%-16s %-9s %s\n", "id", "runtime", "summary");
  for (const auto& e : experiment_registry()) {
    std::string id = e.id;
    if (!e.alias.empty()) id += " (" + e.alias + ")";
    std::printf("%-16s %-9s %s\n", id.c_str(), e.runtime.c_str(), e.summary.c_str());
  }
  std::printf("%zu experiments\n", experiment_registry().size());
  return 0;
}

int cmd_describe(const std::string& id) {
  const ExperimentInfo* info = find_experiment(id);
  if (!info) {
    std::fprintf(stderr, "unknown experiment '%s'; nearest match: %s\n", id.c_str(),
                 nearest_experiment(id).c_str());
    return 2;
  }
  std::printf("id:         %s\n", info->id.c_str());
  if (!info->alias.empty()) std::printf("alias:      %s\n", info->alias.c_str());
  std::printf("summary:    %s\n", info->summary.c_str());
  std::printf("parameters: %s\n", info->parameters.c_str());
  std::printf("runtime:    %s\n", info->runtime.c_str());
  return 0;
}

int cmd_run(const std::string& id, const std::string& config_path, const std::string& out_dir, int threads,
            bool strict) {
  const ExperimentInfo* info = find_experiment(id);
  if (!info) {
    std::fprintf(stderr, "unknown experiment '%s'; nearest match: %s\n", id.c_str(),
                 nearest_experiment(id).c_str());
    return 2;
  }
  ExperimentConfig cfg = load_config(config_path, experiment_defaults(id));
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;
  if (strict) cfg.strict = true;
  auto outcome = run_experiment(id, cfg);
  std::printf("%s: %s (manifest: %s)\n", id.c_str(), outcome.exit_code == 0 ? "pass" : "regression failure",
              outcome.manifest_path.string().c_str());
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tiltpump: correlated Thouless pumping of two interacting bosons in a tilted superlattice"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list registered experiments");

  std::string describe_id;
  auto* describe = app.add_subcommand("describe", "show an experiment's parameters and expected runtime");
  describe->add_option("experiment", describe_id, "experiment id")->required();

  std::string run_id, config_path, out_dir;
  int threads = 0;
  bool strict = false;
  auto* run = app.add_subcommand("run", "run an experiment and write its artifacts and manifest");
  run->add_option("experiment", run_id, "experiment id")->required();
  run->add_option("--config", config_path, "JSON config file (overrides the experiment defaults)");
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_option("--threads", threads, "worker threads (default: TILTPUMP_THREADS or hardware)");
  run->add_flag("--strict", strict, "treat numerical warnings as failures");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) return cmd_list();
    if (*describe) return cmd_describe(describe_id);
    if (*run) return cmd_run(run_id, config_path, out_dir, threads, strict);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
