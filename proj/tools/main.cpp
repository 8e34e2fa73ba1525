// apinn command-line entry point.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "apinn/cli/commands.hpp"
#include "apinn/cli/config.hpp"
#include "apinn/diff/kernels.hpp"
#include "apinn/errors.hpp"

namespace fs = std::filesystem;
using namespace apinn;

namespace {

std::vector<std::uint64_t> chosen_seeds(const cli::ExperimentConfig& c, const std::string& seed,
                                        const std::string& seeds) {
  if (!seed.empty()) return cli::parse_seeds(seed);
  if (!seeds.empty()) return cli::parse_seeds(seeds);
  return c.seeds;
}

cli::ExperimentConfig pretrain_config(const std::string& path, const std::string& problem,
                                      const std::string& target) {
  cli::ExperimentConfig c;
  if (!path.empty()) c = cli::load_config(path);
  if (!problem.empty()) c.problem = problem;
  if (!target.empty()) {
    const gates::GateTarget t = gates::target(target);
    c.model.kind = models::Kind::Apinn;
    c.model.gate_target = t.name;
    c.model.m = t.m;
    c.model.gate_form = t.m == 2 ? models::GateForm::Sigmoid : models::GateForm::Softmax;
  }
  if (path.empty()) c.name = "gate_" + c.model.gate_target;
  if (c.model.gate_target.empty()) {
    throw ConfigError("pretrain: give --target or a config with model.gate_target");
  }
  // Validates problem and target names against the registries.
  (void)problems::make_problem(c.problem, c.problem_options);
  (void)gates::target(c.model.gate_target);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  diff::tune_allocator();
  CLI::App app{"Physics-informed networks with hard and soft domain decomposition"};
  app.require_subcommand(1);

  std::string config, seed, seeds, preset, out, problem, target, checkpoint, field;
  int grid = 201;

  auto* pre = app.add_subcommand("pretrain", "Fit a gate network to a closed-form target");
  pre->add_option("--config", config, "Experiment config file");
  pre->add_option("--problem", problem, "Problem name (overrides the config)");
  pre->add_option("--target", target, "Gate target name (overrides the config)");
  pre->add_option("--seed", seed, "Seed for the gate initialization");
  pre->add_option("--out", out, "Output directory");

  auto* run = app.add_subcommand("run", "Train a model and record its error history");
  run->add_option("--config", config, "Experiment config file")->required();
  auto* s1 = run->add_option("--seed", seed, "Single seed");
  run->add_option("--seeds", seeds, "Comma-separated seeds, run sequentially")->excludes(s1);
  run->add_option("--preset", preset, "full or desk");
  run->add_option("--out", out, "Experiment output directory");

  auto* ev = app.add_subcommand("eval", "Relative L2 error and complexity of a checkpoint");
  ev->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  ev->add_option("--out", out, "CSV output file (default: stdout)");

  auto* dump = app.add_subcommand("dump-field", "Write a field on a grid as x,t,value CSV");
  dump->add_option("--checkpoint", checkpoint,
                   "Model or gate checkpoint, or reference:<problem>")
      ->required();
  dump->add_option("--field", field, "gate_<i>, solution[_u|_v] or error[_u|_v]")->required();
  dump->add_option("--grid", grid, "Points per axis")->check(CLI::Range(2, 100000));
  dump->add_option("--out", out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      cli::ExperimentConfig c = pretrain_config(config, problem, target);
      const auto seed_list = chosen_seeds(c, seed, "");
      const fs::path root = cli::experiment_dir(c, out);
      for (std::uint64_t s : seed_list) {
        const fs::path dir = seed_list.size() == 1 ? root : root / ("seed_" + std::to_string(s));
        const auto r = cli::cmd_pretrain(c, s, dir, std::cerr);
        std::cout << r.checkpoint.string() << '\n';
        if (r.result.validation_mse > c.pretrain.tol) return 3;
      }
    } else if (*run) {
      cli::ExperimentConfig c = cli::load_config(config);
      if (!preset.empty()) {
        (void)cli::preset(preset);
        c.preset = preset;
      }
      const auto seed_list = chosen_seeds(c, seed, seeds);
      const fs::path root = cli::experiment_dir(c, out);
      std::vector<cli::SummaryRow> rows;
      for (std::uint64_t s : seed_list) {
        rows.push_back(cli::cmd_run(c, s, root / ("seed_" + std::to_string(s)), std::cerr));
      }
      cli::write_summary(root / "summary.csv", rows);
      std::cerr << "summary: " << (root / "summary.csv").string() << '\n';
    } else if (*ev) {
      if (out.empty()) {
        cli::cmd_eval(checkpoint, std::cout);
      } else {
        std::ofstream os(out);
        if (!os) throw ConfigError("cannot write " + out);
        cli::cmd_eval(checkpoint, os);
      }
    } else if (*dump) {
      cli::cmd_dump_field(checkpoint, field, grid, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
