#include "apinn/diff/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "apinn/diff/dense_net.hpp"
#include "apinn/errors.hpp"

namespace apinn::diff {
namespace {

void require_same_shape(const JetBlock& a, const JetBlock& b, const char* op) {
  if (a.rows != b.rows || a.points != b.points || !(a.layout == b.layout)) {
    throw ConfigError(std::string(op) + ": operand shapes differ");
  }
}

JetBlock zeros_like(const JetBlock& b) { return JetBlock(b.layout, b.rows, b.points); }

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::at(Var v) {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::logic_error("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

const Tape::Node& Tape::at(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::logic_error("variable does not belong to this tape");
  }
  return nodes_[v.id];
}

const JetBlock& Tape::block(Var v) const { return at(v).value; }

double Tape::value(Var v) const {
  const JetBlock& b = block(v);
  if (b.rows != 1 || b.points != 1 || !b.layout.value_only()) {
    throw std::logic_error("value(): node is not a scalar");
  }
  return b.data(0, 0);
}

Var Tape::input(const RowMat& coords, const JetLayout& layout, std::span<const double> scale,
                std::span<const double> shift) {
  const Index d = coords.rows();
  const Index n = coords.cols();
  if ((!scale.empty() && static_cast<Index>(scale.size()) != d) ||
      (!shift.empty() && static_cast<Index>(shift.size()) != d)) {
    throw ConfigError("input: scale/shift size mismatch");
  }
  Node node{Op::Input, JetBlock(layout, d, n)};
  for (Index r = 0; r < d; ++r) {
    const double sc = scale.empty() ? 1.0 : scale[r];
    const double sh = shift.empty() ? 0.0 : shift[r];
    double* v = node.value.stream(r, 0);
    for (Index p = 0; p < n; ++p) v[p] = sc * coords(r, p) + sh;
  }
  for (int s = 0; s < layout.slots(); ++s) {
    const int axis = layout.axis(s);
    if (axis < 0 || axis >= d) throw ConfigError("input: jet axis out of range");
    const double sc = scale.empty() ? 1.0 : scale[axis];
    double* v = node.value.stream(axis, layout.stream(s, 1));
    for (Index p = 0; p < n; ++p) v[p] = sc;
  }
  return push(std::move(node));
}

Var Tape::constant(JetBlock block) { return push(Node{Op::Constant, std::move(block)}); }

Var Tape::constant(const RowMat& values) {
  JetBlock b(JetLayout{}, values.rows(), values.cols());
  b.data = values;
  return constant(std::move(b));
}

Var Tape::scalar(double v) {
  JetBlock b(JetLayout{}, 1, 1);
  b.data(0, 0) = v;
  return constant(std::move(b));
}

Var Tape::dense(Var x, const DenseLayer& layer, Index grad_offset) {
  const Node& in = at(x);
  if (in.value.rows != layer.in()) {
    throw ConfigError("dense: input has " + std::to_string(in.value.rows) +
                      " rows, layer expects " + std::to_string(layer.in()));
  }
  Node node{Op::Dense, JetBlock::uninitialized(in.value.layout, layer.out(), in.value.points)};
  kernels::dense_forward(exec_, layer.weight, layer.bias, in.value, node.value);
  node.a = x.id;
  node.layer = &layer;
  node.grad_offset = grad_offset;
  node.needs_grad = in.needs_grad || grad_offset >= 0;
  return push(std::move(node));
}

Var Tape::unary(Var x, Unary f) {
  const Node& in = at(x);
  Node node{Op::Unary, JetBlock::uninitialized(in.value.layout, in.value.rows, in.value.points)};
  kernels::unary_forward(exec_, f, in.value, node.value);
  node.a = x.id;
  node.fn = f;
  node.needs_grad = in.needs_grad;
  return push(std::move(node));
}

Var Tape::add(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require_same_shape(na.value, nb.value, "add");
  Node node{Op::Add, na.value};
  node.value.data += nb.value.data;
  node.a = a.id;
  node.b = b.id;
  node.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(node));
}

Var Tape::sub(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  require_same_shape(na.value, nb.value, "sub");
  Node node{Op::Sub, na.value};
  node.value.data -= nb.value.data;
  node.a = a.id;
  node.b = b.id;
  node.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(node));
}

Var Tape::mul(Var a, Var b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  const JetBlock& va = na.value;
  const JetBlock& vb = nb.value;
  if (va.points != vb.points || !(va.layout == vb.layout)) {
    throw ConfigError("mul: operand layouts differ");
  }
  if (va.rows != vb.rows && va.rows != 1 && vb.rows != 1) {
    throw ConfigError("mul: row counts neither equal nor broadcastable");
  }
  Node node{Op::Mul, JetBlock(va.layout, std::max(va.rows, vb.rows), va.points)};
  kernels::mul_forward(exec_, va, vb, node.value);
  node.a = a.id;
  node.b = b.id;
  node.needs_grad = na.needs_grad || nb.needs_grad;
  return push(std::move(node));
}

Var Tape::scale(Var a, double s) {
  const Node& na = at(a);
  Node node{Op::Scale, na.value};
  node.value.data *= s;
  node.a = a.id;
  node.s = s;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::shift(Var a, double c) {
  const Node& na = at(a);
  Node node{Op::Shift, na.value};
  for (Index r = 0; r < node.value.rows; ++r) {
    double* v = node.value.stream(r, 0);
    for (Index p = 0; p < node.value.points; ++p) v[p] += c;
  }
  node.a = a.id;
  node.s = c;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

// The subtracted maximum is treated as a constant. This is exact only when
// the result feeds a shift-invariant map such as softmax.
Var Tape::shift_rows_by_max(Var a) {
  const Node& na = at(a);
  Node node{Op::ShiftMax, na.value};
  JetBlock& v = node.value;
  for (Index p = 0; p < v.points; ++p) {
    double m = v.stream(0, 0)[p];
    for (Index r = 1; r < v.rows; ++r) m = std::max(m, v.stream(r, 0)[p]);
    for (Index r = 0; r < v.rows; ++r) v.stream(r, 0)[p] -= m;
  }
  node.a = a.id;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::row(Var a, Index r) {
  const Node& na = at(a);
  if (r < 0 || r >= na.value.rows) throw ConfigError("row: index out of range");
  Node node{Op::Row, JetBlock(na.value.layout, 1, na.value.points)};
  node.value.data = na.value.data.row(r);
  node.a = a.id;
  node.idx = r;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::stack(std::span<const Var> rows) {
  if (rows.empty()) throw ConfigError("stack: no inputs");
  const JetBlock& first = at(rows[0]).value;
  Index total = 0;
  bool grad = false;
  for (Var v : rows) {
    const Node& n = at(v);
    if (n.value.points != first.points || !(n.value.layout == first.layout)) {
      throw ConfigError("stack: operand layouts differ");
    }
    total += n.value.rows;
    grad = grad || n.needs_grad;
  }
  Node node{Op::Stack, JetBlock(first.layout, total, first.points)};
  Index at_row = 0;
  for (Var v : rows) {
    const JetBlock& b = at(v).value;
    node.value.data.middleRows(at_row, b.rows) = b.data;
    at_row += b.rows;
    node.inputs.push_back(v.id);
  }
  node.needs_grad = grad;
  return push(std::move(node));
}

Var Tape::sum_rows(Var a) {
  const Node& na = at(a);
  Node node{Op::SumRows, JetBlock(na.value.layout, 1, na.value.points)};
  node.value.data = na.value.data.colwise().sum();
  node.a = a.id;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::derivative(Var a, int axis, int k) {
  const Node& na = at(a);
  const JetLayout& lay = na.value.layout;
  int stream = 0;
  if (k > 0) {
    const int slot = lay.find(axis);
    if (slot < 0 || lay.order(slot) < k) {
      throw std::logic_error("derivative: order " + std::to_string(k) + " along axis " +
                             std::to_string(axis) + " was not propagated");
    }
    stream = lay.stream(slot, k);
  }
  const double f = factorial(k);
  Node node{Op::Derivative, JetBlock(JetLayout{}, na.value.rows, na.value.points)};
  for (Index r = 0; r < na.value.rows; ++r) {
    const double* src = na.value.stream(r, stream);
    double* dst = node.value.stream(r, 0);
    for (Index p = 0; p < na.value.points; ++p) dst[p] = f * src[p];
  }
  node.a = a.id;
  node.k = stream;
  node.s = f;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::detach(Var a) {
  Node node{Op::Detach, at(a).value};
  node.a = a.id;
  return push(std::move(node));
}

Var Tape::sub_constant(Var a, const RowMat& c) {
  const Node& na = at(a);
  if (!na.value.layout.value_only() || na.value.rows != c.rows() || na.value.points != c.cols()) {
    throw ConfigError("sub_constant: shape mismatch");
  }
  Node node{Op::SubConst, na.value};
  node.value.data -= c;
  node.a = a.id;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::sum_squares(Var a) {
  const Node& na = at(a);
  if (!na.value.layout.value_only()) throw ConfigError("sum_squares: expects a value-only node");
  Node node{Op::SumSquares, JetBlock(JetLayout{}, 1, 1)};
  double acc = 0.0;
  const double* v = na.value.data.data();
  for (Index i = 0; i < na.value.data.size(); ++i) acc += v[i] * v[i];
  node.value.data(0, 0) = acc;
  node.a = a.id;
  node.needs_grad = na.needs_grad;
  return push(std::move(node));
}

Var Tape::mean_squares(Var a) {
  const JetBlock& b = block(a);
  const double n = static_cast<double>(b.rows * b.points);
  return scale(sum_squares(a), n > 0 ? 1.0 / n : 0.0);
}

void Tape::backward(Var root, std::span<double> grad) {
  const Node& r = at(root);
  if (r.value.rows != 1 || r.value.points != 1 || !r.value.layout.value_only()) {
    throw std::logic_error("backward: root is not a scalar");
  }
  std::vector<JetBlock> adj(nodes_.size());
  std::vector<char> live(nodes_.size(), 0);
  auto adjoint = [&](int id) -> JetBlock& {
    if (!live[id]) {
      adj[id] = zeros_like(nodes_[id].value);
      live[id] = 1;
    }
    return adj[id];
  };
  adjoint(root.id).data(0, 0) = 1.0;

  for (int id = root.id; id >= 0; --id) {
    if (!live[id]) continue;
    const Node& n = nodes_[id];
    if (!n.needs_grad) continue;
    const JetBlock& g = adj[id];
    auto wants = [&](int in) { return in >= 0 && nodes_[in].needs_grad; };
    switch (n.op) {
      case Op::Input:
      case Op::Constant:
      case Op::Detach:
        break;
      case Op::Dense: {
        double* wbar = nullptr;
        double* bbar = nullptr;
        if (n.grad_offset >= 0) {
          const Index need = n.grad_offset + n.layer->out() * n.layer->in() + n.layer->out();
          if (need > static_cast<Index>(grad.size())) {
            throw std::logic_error("backward: gradient buffer too small");
          }
          wbar = grad.data() + n.grad_offset;
          bbar = wbar + n.layer->out() * n.layer->in();
        }
        JetBlock* xbar = wants(n.a) ? &adjoint(n.a) : nullptr;
        kernels::dense_backward(exec_, n.layer->weight, nodes_[n.a].value, g, wbar, bbar, xbar);
        break;
      }
      case Op::Unary:
        if (wants(n.a)) {
          kernels::unary_backward(exec_, n.fn, nodes_[n.a].value, n.value, g, adjoint(n.a));
        }
        break;
      case Op::Add:
        if (wants(n.a)) adjoint(n.a).data += g.data;
        if (wants(n.b)) adjoint(n.b).data += g.data;
        break;
      case Op::Sub:
        if (wants(n.a)) adjoint(n.a).data += g.data;
        if (wants(n.b)) adjoint(n.b).data -= g.data;
        break;
      case Op::Mul: {
        JetBlock* ab = wants(n.a) ? &adjoint(n.a) : nullptr;
        JetBlock* bb = wants(n.b) ? &adjoint(n.b) : nullptr;
        kernels::mul_backward(exec_, nodes_[n.a].value, nodes_[n.b].value, g, ab, bb);
        break;
      }
      case Op::Scale:
        if (wants(n.a)) adjoint(n.a).data += n.s * g.data;
        break;
      case Op::Shift:
      case Op::ShiftMax:
      case Op::SubConst:
        if (wants(n.a)) adjoint(n.a).data += g.data;
        break;
      case Op::Row:
        if (wants(n.a)) adjoint(n.a).data.row(n.idx) += g.data.row(0);
        break;
      case Op::Stack: {
        Index at_row = 0;
        for (int in : n.inputs) {
          const Index rows = nodes_[in].value.rows;
          if (wants(in)) adjoint(in).data += g.data.middleRows(at_row, rows);
          at_row += rows;
        }
        break;
      }
      case Op::SumRows:
        if (wants(n.a)) adjoint(n.a).data.rowwise() += g.data.row(0);
        break;
      case Op::Derivative:
        if (wants(n.a)) {
          JetBlock& d = adjoint(n.a);
          for (Index rr = 0; rr < g.rows; ++rr) {
            const double* src = g.stream(rr, 0);
            double* dst = d.stream(rr, n.k);
            for (Index p = 0; p < g.points; ++p) dst[p] += n.s * src[p];
          }
        }
        break;
      case Op::SumSquares:
        if (wants(n.a)) adjoint(n.a).data += (2.0 * g.data(0, 0)) * nodes_[n.a].value.data;
        break;
    }
    adj[id] = JetBlock{};
  }
}

Var operator+(Var a, Var b) { return a.tape->add(a, b); }
Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
Var operator*(double s, Var a) { return a.tape->scale(a, s); }
Var operator-(Var a) { return a.tape->scale(a, -1.0); }

}  // namespace apinn::diff
