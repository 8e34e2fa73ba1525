#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "apinn/cli/config.hpp"

namespace apinn::cli {

/// Output root: $APINN_OUT when set, else the working directory.
std::filesystem::path output_root();

/// Directory of one experiment: `override` when non-empty, else
/// output_root() / (config out or runs/<problem>/<name>).
std::filesystem::path experiment_dir(const ExperimentConfig& c, const std::string& override = "");

struct SummaryRow {
  std::string model;
  std::uint64_t seed = 0;
  std::optional<double> selected;    // mean over unknowns; nullopt when NA
  std::vector<double> per_unknown;
  int unknowns = 1;
};

/// Writes `model,seed,selected_rel_l2[,rel_l2_u,rel_l2_v]` rows.
void write_summary(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

/// Fresh gate for a config: the gate the model would be initialized with.
models::GateNet initial_gate(const ExperimentConfig& c, const problems::Problem& p,
                             std::uint64_t seed);

struct PretrainOutcome {
  std::filesystem::path checkpoint;
  gates::PretrainResult result;
};

/// Pretrains the config's gate target and writes gate.ckpt and manifest.csv
/// (`target,seed,epochs,train_mse,validation_mse,converged`) into dir.
PretrainOutcome cmd_pretrain(const ExperimentConfig& c, std::uint64_t seed,
                             const std::filesystem::path& dir, std::ostream& log);

/// One seed: sample, build, load or pretrain the gate, train, and write
/// record.csv, final.ckpt, gate_drift.csv, wall_time.txt and snapshots/ under
/// dir. Returns the summary row.
SummaryRow cmd_run(const ExperimentConfig& c, std::uint64_t seed,
                   const std::filesystem::path& dir, std::ostream& log);

/// Relative L2 per unknown of a checkpoint against its problem's reference,
/// plus complexity measures of every component. Prints a CSV block.
void cmd_eval(const std::filesystem::path& checkpoint, std::ostream& out);

/// Grid dump `x,t,value` of field gate_<i> (1-based), solution[_u|_v], or
/// error[_u|_v] (absolute). The checkpoint may be a model, a gate, or
/// `reference:<problem>`.
void cmd_dump_field(const std::string& checkpoint, const std::string& field, int grid,
                    const std::filesystem::path& out);

}  // namespace apinn::cli
