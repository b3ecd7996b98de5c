// Command-line front end: runs the measurement-geometry experiments from JSON
// configs, writes CSV/JSON artifacts plus a run manifest, and replays
// manifests to verify byte-identical outputs.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "entgeo/runner.hpp"
#include "entgeo/version.hpp"

namespace {

struct CliArgs {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CliArgs& args, bool manifest_mode = false) {
  cmd->add_option("--config", args.config,
                  manifest_mode ? "manifest to replay" : "JSON config file")
      ->required();
  cmd->add_option("--out", args.out, "output directory");
  if (!manifest_mode) {
    cmd->add_option("--seed", [&args](const CLI::results_t& r) {
      args.seed = std::stoull(r[0]);
      return true;
    }, "override master seed");
    cmd->add_option("--samples", [&args](const CLI::results_t& r) {
      args.samples = std::stoull(r[0]);
      return true;
    }, "override realization count");
    cmd->add_option("--threads", [&args](const CLI::results_t& r) {
      args.threads = static_cast<unsigned>(std::stoul(r[0]));
      return true;
    }, "worker thread count");
  }
}

int fail(const std::string& command, const std::string& what) {
  nlohmann::json err;
  err["command"] = command;
  err["error"] = what;
  std::cerr << err.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monitored-circuit entanglement geometry toolkit"};
  app.set_version_flag("--version", entgeo::kVersion);
  app.require_subcommand(1);

  const char* kCommands[] = {"calibrate", "collapse", "ads",
                             "btz",       "mi",       "wedge"};
  const char* kHelp[] = {
      "uniform-rate transition curves (tripartite information vs rate)",
      "finite-size scaling collapse of calibration curves",
      "hyperbolic-schedule entropy profiles and tripartite information",
      "black-hole-slice entropy profile with the geodesic fit",
      "two-interval mutual information against the two-saddle model",
      "entanglement wedge imaging with reference qubits"};

  CliArgs args;
  for (int i = 0; i < 6; ++i)
    add_common(app.add_subcommand(kCommands[i], kHelp[i]), args);
  add_common(app.add_subcommand(
                 "replay", "re-run a manifest and verify byte-identical "
                           "artifacts"),
             args, true);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "replay") {
      const auto mismatched = entgeo::execute_replay(args.config, args.out);
      if (!mismatched.empty()) {
        std::string names;
        for (const auto& n : mismatched) names += n + " ";
        return fail(command, "artifacts differ: " + names);
      }
      std::cout << "replay ok: outputs byte-identical" << std::endl;
      return 0;
    }
    entgeo::RunOptions opt;
    opt.command = command;
    opt.config_path = args.config;
    opt.out_dir = args.out;
    opt.seed = args.seed;
    opt.samples = args.samples;
    opt.threads = args.threads;
    const std::string manifest = entgeo::execute_run(opt);
    std::cout << "wrote " << manifest << std::endl;
    return 0;
  } catch (const std::exception& e) {
    return fail(command, e.what());
  }
}
