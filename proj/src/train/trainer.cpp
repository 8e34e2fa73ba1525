#include "apinn/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "apinn/errors.hpp"

namespace apinn::train {
namespace {

std::vector<double> gate_parameters(const models::Model& m) {
  const models::Component& g = m.component("gate");
  std::vector<double> v(g.net.parameter_count());
  g.net.write_parameters(v);
  return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (log_every < 1) throw ConfigError("log_every must be positive");
  if (use_lbfgs && (lbfgs.memory < 1 || lbfgs.max_iters < 0)) {
    throw ConfigError("invalid L-BFGS settings");
  }
}

std::vector<double> evaluate_error(const models::Model& model, const problems::EvalGrid& grid,
                                   diff::Exec exec) {
  if (!grid.reference) return {};
  return problems::rel_l2(model.predict(grid.pts, exec), *grid.reference);
}

TrainResult train(models::Model& model, const Loss& loss, const problems::EvalGrid& grid,
                  const TrainConfig& cfg, const SnapshotHook& on_snapshot) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult out;
  out.record.unknowns = model.unknowns();
  out.record.has_reference = grid.reference.has_value();

  const bool drift = model.has_gate() && model.spec().gate_trainable;
  const std::vector<double> gate0 = model.has_gate() ? gate_parameters(model) : std::vector<double>{};
  auto snapshot = [&](long epoch) {
    if (drift) out.gate_drift.push_back({epoch, distance(gate_parameters(model), gate0)});
    if (on_snapshot) on_snapshot(epoch, model);
  };
  auto log_row = [&](long epoch, const LossParts& parts, bool with_error) {
    RecordRow r{epoch, parts, {}};
    if (with_error) r.rel_l2 = evaluate_error(model, grid);
    out.record.rows.push_back(std::move(r));
  };

  std::vector<double> theta = model.parameters();
  std::vector<double> grad(theta.size(), 0.0);
  Adam adam(cfg.lr);
  for (long e = 0;; ++e) {
    const LossParts parts = loss(model, grad, GradMode::PerSubnet);
    log_row(e, parts, e % cfg.log_every == 0 || e == cfg.epochs);
    if (std::find(cfg.snapshots.begin(), cfg.snapshots.end(), e) != cfg.snapshots.end()) {
      snapshot(e);
    }
    if (e == cfg.epochs) break;
    adam.step(theta, grad);
    model.set_parameters(theta);
  }

  if (cfg.use_lbfgs && cfg.lbfgs.max_iters > 0) {
    LossParts last;
    const Objective f = [&](std::span<const double> th, std::span<double> g) {
      model.set_parameters(th);
      last = loss(model, g, GradMode::Joint);
      return last.total;
    };
    const LbfgsCallback cb = [&](int k, double, std::span<const double> th) {
      model.set_parameters(th);
      log_row(cfg.epochs + k, last, k % cfg.log_every == 0);
    };
    LbfgsResult res = lbfgs(f, theta, cfg.lbfgs, cb);
    out.lbfgs_stop = res.stop;
    out.lbfgs_iters = res.iters;
    model.set_parameters(res.theta);
    // Accepted iterates decrease the loss, so the best point differs from the
    // last logged row only when a failed line search probed lower.
    if (res.loss < out.record.rows.back().loss.total) {
      const LossParts parts = loss(model, {}, GradMode::Joint);
      log_row(out.record.rows.back().epoch + 1, parts, true);
    }
  }
  if (out.record.rows.back().rel_l2.empty()) {
    out.record.rows.back().rel_l2 = evaluate_error(model, grid);
  }
  out.selected = select_error(out.record, cfg.selection);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace apinn::train
