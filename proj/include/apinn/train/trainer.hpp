#pragma once

#include <functional>
#include <vector>

#include "apinn/problems/metrics.hpp"
#include "apinn/train/optim.hpp"
#include "apinn/train/record.hpp"

namespace apinn::train {

struct TrainConfig {
  double lr = 8e-4;
  long epochs = 100000;
  bool use_lbfgs = true;
  LbfgsConfig lbfgs;
  int log_every = 100;  // rel-L2 cadence in epochs (and L-BFGS iterations)
  Selection selection = Selection::BestOverRun;
  /// Adam epochs at which the snapshot hook fires.
  std::vector<long> snapshots{0, 10000, 20000, 30000, 40000, 50000};

  void validate() const;
};

struct GateDrift {
  long epoch = 0;
  double norm = 0.0;  // ||theta_gate - theta_gate(0)||_2
};

struct TrainResult {
  RunRecord record;
  std::optional<SelectedError> selected;
  std::vector<GateDrift> gate_drift;
  LbfgsStop lbfgs_stop = LbfgsStop::MaxIters;
  int lbfgs_iters = 0;
  double wall_seconds = 0.0;
};

using SnapshotHook = std::function<void(long epoch, const models::Model& model)>;

/// Full-batch Adam for cfg.epochs, then L-BFGS on the joint loss. The model
/// ends at the best L-BFGS iterate. Rows are logged every epoch; the error
/// is evaluated on `grid` every cfg.log_every epochs and at phase ends.
TrainResult train(models::Model& model, const Loss& loss, const problems::EvalGrid& grid,
                  const TrainConfig& cfg, const SnapshotHook& on_snapshot = {});

/// Relative L2 error per unknown on the grid; empty without a reference.
std::vector<double> evaluate_error(const models::Model& model, const problems::EvalGrid& grid,
                                   diff::Exec exec = diff::Exec::Parallel);

}  // namespace apinn::train
