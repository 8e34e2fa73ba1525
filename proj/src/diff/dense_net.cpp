#include "apinn/diff/dense_net.hpp"

#include <cmath>
#include <string>

#include "apinn/errors.hpp"

namespace apinn::diff {
namespace {

void check_dims(std::span<const int> dims) {
  if (dims.size() < 2) throw ConfigError("a dense net needs at least one layer");
  for (int d : dims) {
    if (d <= 0) throw ConfigError("layer widths must be positive");
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("a dense net needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].out()) {
      throw ConfigError("layer " + std::to_string(l) + ": bias length differs from output width");
    }
    if (l > 0 && layers_[l].in() != layers_[l - 1].out()) {
      throw ConfigError("layer " + std::to_string(l) + ": input width " +
                        std::to_string(layers_[l].in()) + " does not chain with " +
                        std::to_string(layers_[l - 1].out()));
    }
  }
}

DenseNet DenseNet::glorot(std::span<const int> dims, std::mt19937_64& rng) {
  check_dims(dims);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    DenseLayer layer{RowMat(out, in), Eigen::VectorXd::Zero(out)};
    for (int o = 0; o < out; ++o) {
      for (int i = 0; i < in; ++i) layer.weight(o, i) = u(rng);
    }
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

DenseNet DenseNet::zeros(std::span<const int> dims) {
  check_dims(dims);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    layers.push_back({RowMat::Zero(dims[l + 1], dims[l]), Eigen::VectorXd::Zero(dims[l + 1])});
  }
  return DenseNet(std::move(layers));
}

Index DenseNet::count(std::span<const int> dims) {
  check_dims(dims);
  Index n = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    n += static_cast<Index>(dims[l + 1]) * dims[l] + dims[l + 1];
  }
  return n;
}

Index DenseNet::input_dim() const { return layers_.empty() ? 0 : layers_.front().in(); }
Index DenseNet::output_dim() const { return layers_.empty() ? 0 : layers_.back().out(); }

Index DenseNet::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<int> DenseNet::dims() const {
  std::vector<int> d;
  if (layers_.empty()) return d;
  d.push_back(static_cast<int>(layers_.front().in()));
  for (const auto& l : layers_) d.push_back(static_cast<int>(l.out()));
  return d;
}

void DenseNet::write_parameters(std::span<double> out) const {
  if (static_cast<Index>(out.size()) != parameter_count()) {
    throw ConfigError("write_parameters: buffer size mismatch");
  }
  std::size_t k = 0;
  for (const auto& l : layers_) {
    for (Index i = 0; i < l.weight.size(); ++i) out[k++] = l.weight.data()[i];
    for (Index i = 0; i < l.bias.size(); ++i) out[k++] = l.bias[i];
  }
}

void DenseNet::read_parameters(std::span<const double> in) {
  if (static_cast<Index>(in.size()) != parameter_count()) {
    throw ConfigError("read_parameters: expected " + std::to_string(parameter_count()) +
                      " values, got " + std::to_string(in.size()));
  }
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = in[k++];
    for (Index i = 0; i < l.bias.size(); ++i) l.bias[i] = in[k++];
  }
}

Var DenseNet::apply(Tape& tape, Var x, Index grad_offset) const {
  Var h = x;
  Index offset = grad_offset;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    h = tape.dense(h, layers_[l], offset);
    if (l + 1 < layers_.size()) h = tape.tanh(h);
    if (offset >= 0) offset += layers_[l].weight.size() + layers_[l].bias.size();
  }
  return h;
}

Eigen::VectorXd DenseNet::forward(std::span<const double> x, Exec exec) const {
  if (static_cast<Index>(x.size()) != input_dim()) {
    throw ConfigError("forward: input has dimension " + std::to_string(x.size()) +
                      ", net expects " + std::to_string(input_dim()));
  }
  Tape tape(exec);
  RowMat pt(static_cast<Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) pt(static_cast<Index>(i), 0) = x[i];
  const Var y = apply(tape, tape.input(pt, JetLayout{}), -1);
  return tape.block(y).data.col(0);
}

std::vector<Jet> DenseNet::forward_jet(std::span<const double> x, int axis, int order,
                                       Exec exec) const {
  if (order < 1 || order > kMaxOrder) {
    throw UnsupportedOrder("forward_jet: order " + std::to_string(order) + " not in 1..3");
  }
  if (static_cast<Index>(x.size()) != input_dim()) {
    throw ConfigError("forward_jet: input dimension mismatch");
  }
  if (axis < 0 || axis >= input_dim()) throw ConfigError("forward_jet: axis out of range");
  Tape tape(exec);
  RowMat pt(static_cast<Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) pt(static_cast<Index>(i), 0) = x[i];
  const JetLayout layout{AxisOrder{axis, order}};
  const Var y = apply(tape, tape.input(pt, layout), -1);
  const JetBlock& b = tape.block(y);
  std::vector<Jet> out;
  for (Index r = 0; r < b.rows; ++r) {
    Jet j{axis, std::vector<double>(order + 1)};
    for (int k = 0; k <= order; ++k) j.coeffs[k] = b.stream(r, layout.stream(0, k))[0];
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace apinn::diff
