#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apinn/gates/gates.hpp"
#include "apinn/models/model.hpp"
#include "apinn/problems/problem.hpp"
#include "apinn/problems/sampling.hpp"
#include "apinn/train/trainer.hpp"

namespace apinn::cli {

/// One experiment: problem, model, loss weights, optimizer settings and
/// seeds. Text form is `key = value` per line with `#` comments; see
/// README.md for the key list. The model's domain, unknown count and
/// decomposition are taken from the problem.
struct ExperimentConfig {
  std::string name = "run";
  std::string problem = "burgers";
  problems::Options problem_options;
  models::ModelSpec model;
  int pieces = 2;  // XPINN subdomain count
  train::LossWeights weights;
  train::TrainConfig train;
  gates::PretrainConfig pretrain;
  std::string gate_checkpoint;  // empty: pretrain the gate inside the run
  problems::Sampler sampler = problems::Sampler::Uniform;
  std::string preset = "full";
  std::vector<std::uint64_t> seeds{1};
  std::string out;  // empty: runs/<problem>/<name>

  bool operator==(const ExperimentConfig&) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const ExperimentConfig& c);

/// Scaled settings of a preset. "full" is the identity; "desk" divides
/// epochs and snapshot epochs by 20, residual points by 10, and caps L-BFGS
/// at 2500 iterations.
struct Preset {
  long epoch_divisor = 1;
  int residual_divisor = 1;
  int lbfgs_cap = 50000;
};
Preset preset(const std::string& name);

/// Config with the preset applied to the training settings.
ExperimentConfig apply_preset(ExperimentConfig c, int* residual_divisor);

/// Model spec with problem-derived fields filled in.
models::ModelSpec resolve_spec(const ExperimentConfig& c, const problems::Problem& p);

std::vector<std::uint64_t> parse_seeds(const std::string& s);

}  // namespace apinn::cli
