#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "apinn/diff/jet.hpp"
#include "apinn/diff/tape.hpp"

namespace apinn::diff {

struct DenseLayer {
  RowMat weight;  // out x in
  Eigen::VectorXd bias;

  [[nodiscard]] Index in() const { return weight.cols(); }
  [[nodiscard]] Index out() const { return weight.rows(); }
};

/// Multilayer perceptron with tanh on every layer but the last.
///
/// A net with N weight matrices is an N-layer net. Parameters are flattened
/// layer by layer, each as the weight matrix in row-major order followed by
/// the bias.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases. dims = {in, hidden..., out}.
  static DenseNet glorot(std::span<const int> dims, std::mt19937_64& rng);
  static DenseNet zeros(std::span<const int> dims);
  /// Parameter count of the architecture without building it.
  static Index count(std::span<const int> dims);

  [[nodiscard]] Index input_dim() const;
  [[nodiscard]] Index output_dim() const;
  [[nodiscard]] int depth() const { return static_cast<int>(layers_.size()); }
  [[nodiscard]] Index parameter_count() const;
  [[nodiscard]] std::vector<int> dims() const;

  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }

  void write_parameters(std::span<double> out) const;
  void read_parameters(std::span<const double> in);

  /// Records the net on a tape. grad_offset = -1 freezes every layer.
  Var apply(Tape& tape, Var x, Index grad_offset) const;

  /// Plain evaluation at one point.
  [[nodiscard]] Eigen::VectorXd forward(std::span<const double> x, Exec exec = Exec::Parallel) const;
  /// Jets of every output along `axis` up to `order` (1..3) at one point.
  [[nodiscard]] std::vector<Jet> forward_jet(std::span<const double> x, int axis, int order,
                                             Exec exec = Exec::Parallel) const;

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace apinn::diff
