#pragma once

#include <random>

#include "apinn/diff/dense_net.hpp"
#include "apinn/geometry.hpp"

namespace apinn::models {

using diff::Index;
using diff::RowMat;

/// Scalar-sigmoid gates (g, 1 - g) serve m = 2; softmax gates any m >= 2.
enum class GateForm { Sigmoid, Softmax };

/// Maps logits to gate rows: (s, 1 - s) with s = sigmoid(logit), or softmax.
diff::Var gate_transform(diff::Tape& tape, diff::Var logits, GateForm form);

/// Partition-of-unity network G: R^2 -> simplex of dimension m. The inner
/// DenseNet sees normalized coordinates and emits 1 logit (sigmoid form) or
/// m logits (softmax form).
struct GateNet {
  GateForm form = GateForm::Sigmoid;
  int m = 2;
  diff::DenseNet net;
  Normalizer normalizer;
  bool trainable = true;

  /// depth counts weight matrices, as for every DenseNet.
  static GateNet make(GateForm form, int m, int depth, int width, const Normalizer& norm,
                      std::mt19937_64& rng);

  /// Gate rows (m x points) on the tape from normalized inputs z.
  diff::Var apply(diff::Tape& tape, diff::Var z, Index grad_offset) const;
  /// Gate values (m x n) at raw coordinates (2 x n).
  [[nodiscard]] RowMat values(const RowMat& pts,
                              diff::Exec exec = diff::Exec::Parallel) const;
  [[nodiscard]] Index parameter_count() const { return net.parameter_count(); }
};

}  // namespace apinn::models
