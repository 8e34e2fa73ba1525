#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apinn/geometry.hpp"
#include "apinn/models/gate_net.hpp"

namespace apinn::gates {

/// Closed-form partition of unity: eval(x, t, out) writes m values summing
/// to one. `domain` is the box the target is meant for.
struct GateTarget {
  std::string name;
  int m = 2;
  Box domain;
  std::function<void(double, double, double*)> eval;

  /// Values (m x n) at points (2 x n).
  [[nodiscard]] models::RowMat at(const models::RowMat& pts) const;
};

/// Registered names, in registry order.
std::vector<std::string> target_names();
/// Throws ConfigError listing the registered names for an unknown one.
GateTarget target(const std::string& name);

struct PretrainConfig {
  int grid = 64;            // training grid is grid x grid
  int validation_grid = 101;
  double lr = 1e-3;
  int max_epochs = 20000;
  double stop_mse = 1e-5;   // early stop on training MSE
  double tol = 1e-4;        // validation MSE expected after fitting
  diff::Exec exec = diff::Exec::Parallel;
};

struct PretrainResult {
  models::GateNet gate;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  int epochs = 0;
  bool converged = false;  // validation_mse <= tol
};

/// Mean over points of the squared error norm sum_i (G_i - t_i)^2.
double gate_mse(const models::GateNet& gate, const GateTarget& target, const models::RowMat& pts);

/// Uniform n x n grid (t outer, x inner) over a box, corners included.
models::RowMat grid_points(const Box& box, int n);

/// Fits the gate outputs (after sigmoid/softmax) to the target by full-batch
/// Adam on a uniform grid. Missing the tolerance is reported, not thrown.
PretrainResult pretrain(models::GateNet gate, const GateTarget& target, const Box& domain,
                        const PretrainConfig& cfg = {});

}  // namespace apinn::gates
