#pragma once

#include <span>
#include <vector>

#include "apinn/diff/kernels.hpp"

namespace apinn::diff {

class Tape;
struct DenseLayer;

/// Handle to a node recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  [[nodiscard]] bool valid() const { return tape != nullptr && id >= 0; }
};

/// Reverse-mode record of one loss evaluation over jet blocks.
///
/// Nodes are created in topological order. Parameters enter only through
/// dense() with an offset into the caller's gradient vector; an offset of -1
/// marks the layer as frozen, which then receives no gradient entry. A tape is
/// built for one evaluation and discarded.
class Tape {
 public:
  explicit Tape(Exec exec = Exec::Parallel) : exec_(exec) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  [[nodiscard]] Exec exec() const { return exec_; }

  /// Coordinates (d x n) seeded as independent variables: the k = 1 stream of
  /// the slot for axis a is `scale[a]` on row a. value = scale * x + shift.
  Var input(const RowMat& coords, const JetLayout& layout, std::span<const double> scale = {},
            std::span<const double> shift = {});
  Var constant(JetBlock block);
  /// Value-only constant (rows x n).
  Var constant(const RowMat& values);
  Var scalar(double v);

  /// y = W x + b on every stream (bias on the value stream only).
  Var dense(Var x, const DenseLayer& layer, Index grad_offset);
  Var unary(Var x, Unary f);
  Var tanh(Var x) { return unary(x, Unary::Tanh); }
  Var sigmoid(Var x) { return unary(x, Unary::Sigmoid); }
  Var exp(Var x) { return unary(x, Unary::Exp); }
  Var reciprocal(Var x) { return unary(x, Unary::Reciprocal); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// Jet (Cauchy) product. A one-row operand broadcasts over the other's rows.
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  /// Adds a constant to the value stream.
  Var shift(Var a, double c);
  /// Subtracts a per-point constant from each row's value stream.
  Var shift_rows_by_max(Var a);

  Var row(Var a, Index r);
  Var stack(std::span<const Var> rows);
  Var sum_rows(Var a);

  /// Value-only node holding d^k/dx_axis^k (k! times the Taylor coefficient).
  Var derivative(Var a, int axis, int k);
  /// Same values, no gradient flows back.
  Var detach(Var a);
  /// Value-only a minus a constant matrix of the same shape.
  Var sub_constant(Var a, const RowMat& c);

  /// Scalar sum of squares over all entries of a value-only node.
  Var sum_squares(Var a);
  Var mean_squares(Var a);

  [[nodiscard]] const JetBlock& block(Var v) const;
  [[nodiscard]] double value(Var scalar) const;
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  /// Accumulates d(root)/d(params) into grad. The root must be a scalar.
  void backward(Var root, std::span<double> grad);

 private:
  enum class Op {
    Input, Constant, Dense, Unary, Add, Sub, Mul, Scale, Shift, ShiftMax, Row, Stack, SumRows,
    Derivative, Detach, SubConst, SumSquares
  };

  struct Node {
    Node(Op o, JetBlock v) : op(o), value(std::move(v)) {}
    Op op;
    JetBlock value;
    int a = -1;
    int b = -1;
    bool needs_grad = false;
    const DenseLayer* layer = nullptr;
    Index grad_offset = -1;
    Unary fn = Unary::Tanh;
    double s = 0.0;
    Index idx = 0;
    int k = 0;
    std::vector<int> inputs;
  };

  Var push(Node node);
  Node& at(Var v);
  const Node& at(Var v) const;

  Exec exec_;
  std::vector<Node> nodes_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(double s, Var a);
Var operator-(Var a);

}  // namespace apinn::diff
