#include "apinn/models/gate_net.hpp"

#include <string>
#include <vector>

#include "apinn/errors.hpp"

namespace apinn::models {

GateNet GateNet::make(GateForm form, int m, int depth, int width, const Normalizer& norm,
                      std::mt19937_64& rng) {
  if (m < 2) throw ConfigError("gate needs at least two components");
  if (form == GateForm::Sigmoid && m != 2) {
    throw ConfigError("sigmoid gate supports m = 2 only, got m = " + std::to_string(m));
  }
  if (depth < 1) throw ConfigError("gate depth must be positive");
  std::vector<int> dims{2};
  for (int l = 0; l + 1 < depth; ++l) dims.push_back(width);
  dims.push_back(form == GateForm::Sigmoid ? 1 : m);
  GateNet g;
  g.form = form;
  g.m = m;
  g.net = diff::DenseNet::glorot(dims, rng);
  g.normalizer = norm;
  return g;
}

diff::Var gate_transform(diff::Tape& tape, diff::Var logits, GateForm form) {
  if (form == GateForm::Sigmoid) {
    const diff::Var g = tape.sigmoid(logits);
    const diff::Var rest = tape.shift(tape.scale(g, -1.0), 1.0);
    const diff::Var rows[2] = {g, rest};
    return tape.stack(rows);
  }
  const diff::Var e = tape.exp(tape.shift_rows_by_max(logits));
  return e * tape.reciprocal(tape.sum_rows(e));
}

diff::Var GateNet::apply(diff::Tape& tape, diff::Var z, Index grad_offset) const {
  return gate_transform(tape, net.apply(tape, z, grad_offset), form);
}

RowMat GateNet::values(const RowMat& pts, diff::Exec exec) const {
  constexpr Index kBatch = 4096;
  RowMat out(m, pts.cols());
  for (Index c0 = 0; c0 < pts.cols(); c0 += kBatch) {
    const Index n = std::min(kBatch, pts.cols() - c0);
    diff::Tape tape(exec);
    const diff::Var z =
        tape.input(pts.middleCols(c0, n), diff::JetLayout{}, normalizer.scale, normalizer.shift);
    out.middleCols(c0, n) = tape.block(apply(tape, z, -1)).data;
  }
  return out;
}

}  // namespace apinn::models
