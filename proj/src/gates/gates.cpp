#include "apinn/gates/gates.hpp"

#include <cmath>
#include <iostream>
#include <map>

#include "apinn/errors.hpp"
#include "apinn/train/optim.hpp"

namespace apinn::gates {
namespace {

using models::Index;
using models::RowMat;

GateTarget two_way(std::string name, Box box, std::function<double(double, double)> g1) {
  return GateTarget{std::move(name), 2, box, [g1 = std::move(g1)](double x, double t, double* o) {
                      o[0] = g1(x, t);
                      o[1] = 1.0 - o[0];
                    }};
}

const Box kBurgers{{-1, 0}, {1, 1}};
const Box kHelmholtz{{-1, -1}, {1, 1}};
const Box kUnit{{0, 0}, {1, 1}};
const Box kBoussinesq{{-10, -3}, {15, 2}};

const std::vector<GateTarget>& registry() {
  static const std::vector<GateTarget> r = [] {
    std::vector<GateTarget> v;
    v.push_back(two_way("burgers-X", kBurgers, [](double x, double) { return std::exp(x - 1); }));
    v.push_back(two_way("burgers-M", kBurgers, [](double, double) { return 0.8; }));
    v.push_back(
        two_way("helmholtz-X", kHelmholtz, [](double, double y) { return std::exp(y - 1); }));
    v.push_back(two_way("helmholtz-M", kHelmholtz, [](double, double) { return 0.8; }));
    v.push_back(two_way("klein_gordon-X", kUnit, [](double x, double) { return std::exp(-x); }));
    v.push_back(two_way("klein_gordon-M", kUnit, [](double, double) { return 0.8; }));
    v.push_back(two_way("wave-X", kUnit, [](double, double t) { return std::exp(-t); }));
    v.push_back(two_way("wave-M", kUnit, [](double, double) { return 0.8; }));
    v.push_back(two_way("bb-X", kBoussinesq,
                        [](double, double t) { return std::exp(0.35 * (t - 2)); }));
    v.push_back(two_way("bb-M", kBoussinesq, [](double, double) { return 0.8; }));
    v.push_back(GateTarget{"bb4-X", 4, kBoussinesq, [](double, double t, double* o) {
                             o[0] = std::exp(t - 2);
                             o[1] = std::exp(-std::abs(t - 1.0 / 3.0));
                             o[2] = std::exp(-std::abs(t + 4.0 / 3.0));
                             o[3] = std::exp(-3 - t);
                             const double s = o[0] + o[1] + o[2] + o[3];
                             for (int i = 0; i < 4; ++i) o[i] /= s;
                           }});
    v.push_back(GateTarget{"bb4-M", 4, kBoussinesq, [](double, double, double* o) {
                             o[0] = 0.8;
                             o[1] = o[2] = o[3] = 1.0 / 15.0;
                           }});
    v.push_back(two_way("upper-lower", kUnit, [](double, double t) { return std::exp(t - 1); }));
    v.push_back(two_way("inner-outer", kUnit, [](double x, double t) {
      return std::exp(-5 * (x - 0.5) * (x - 0.5) - 5 * (t - 0.5) * (t - 0.5));
    }));
    return v;
  }();
  return r;
}

}  // namespace

RowMat GateTarget::at(const RowMat& pts) const {
  RowMat out(m, pts.cols());
  std::vector<double> buf(m);
  for (Index p = 0; p < pts.cols(); ++p) {
    eval(pts(0, p), pts(1, p), buf.data());
    for (int i = 0; i < m; ++i) out(i, p) = buf[i];
  }
  return out;
}

std::vector<std::string> target_names() {
  std::vector<std::string> n;
  for (const auto& t : registry()) n.push_back(t.name);
  return n;
}

GateTarget target(const std::string& name) {
  for (const auto& t : registry()) {
    if (t.name == name) return t;
  }
  std::string msg = "unknown gate target '" + name + "'; registered:";
  for (const auto& t : registry()) msg += " " + t.name;
  throw ConfigError(msg);
}

RowMat grid_points(const Box& box, int n) {
  if (n < 2) throw ConfigError("grid needs at least 2 points per axis");
  RowMat pts(2, static_cast<Index>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      pts(0, j * n + i) = i == n - 1 ? box.hi[0] : box.lo[0] + box.width(0) * i / (n - 1);
      pts(1, j * n + i) = j == n - 1 ? box.hi[1] : box.lo[1] + box.width(1) * j / (n - 1);
    }
  }
  return pts;
}

double gate_mse(const models::GateNet& gate, const GateTarget& target, const RowMat& pts) {
  const RowMat diff = gate.values(pts) - target.at(pts);
  return diff.squaredNorm() / static_cast<double>(diff.cols());
}

PretrainResult pretrain(models::GateNet gate, const GateTarget& target, const Box& domain,
                        const PretrainConfig& cfg) {
  if (gate.m != target.m) {
    throw ConfigError("gate has " + std::to_string(gate.m) + " components, target " +
                      target.name + " has " + std::to_string(target.m));
  }
  if (cfg.max_epochs < 0 || !(cfg.lr > 0)) throw ConfigError("invalid pretraining config");
  const RowMat pts = grid_points(domain, cfg.grid);
  const RowMat goal = target.at(pts);
  train::Adam adam(cfg.lr);
  std::vector<double> theta(gate.parameter_count());
  std::vector<double> grad(theta.size());
  gate.net.write_parameters(theta);

  auto loss_and_grad = [&](bool want_grad) {
    diff::Tape tape(cfg.exec);
    const diff::Var z =
        tape.input(pts, diff::JetLayout{}, gate.normalizer.scale, gate.normalizer.shift);
    const diff::Var loss = tape.scale(
        tape.mean_squares(tape.sub_constant(gate.apply(tape, z, 0), goal)), target.m);
    if (want_grad) {
      std::fill(grad.begin(), grad.end(), 0.0);
      tape.backward(loss, grad);
    }
    return tape.value(loss);
  };

  PretrainResult res;
  double mse = loss_and_grad(true);
  int epoch = 0;
  for (; epoch < cfg.max_epochs && mse > cfg.stop_mse; ++epoch) {
    adam.step(theta, grad);
    gate.net.read_parameters(theta);
    mse = loss_and_grad(true);
  }
  res.train_mse = mse;
  res.epochs = epoch;
  res.validation_mse = gate_mse(gate, target, grid_points(domain, cfg.validation_grid));
  res.converged = res.validation_mse <= cfg.tol;
  if (!res.converged) {
    std::cerr << "warning: gate pretraining for " << target.name << " reached validation MSE "
              << res.validation_mse << " > " << cfg.tol << " after " << epoch << " epochs\n";
  }
  res.gate = std::move(gate);
  return res;
}

}  // namespace apinn::gates
