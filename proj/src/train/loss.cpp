#include "apinn/train/loss.hpp"

#include <algorithm>
#include <string>

#include "apinn/errors.hpp"

namespace apinn::train {
namespace {

using diff::Index;
using diff::JetLayout;
using diff::Tape;
using diff::Var;
using problems::RegionPoints;

struct Terms {
  Var boundary, residual, avg, res, deriv;
};

constexpr int kT = 1;

Var zero(Tape& tape) { return tape.scalar(0.0); }

// Boundary and residual means of one region for the subnet set `piece`.
void region_terms(Tape& tape, const models::Model& model, const problems::Problem& p,
                  const RegionPoints& r, int piece, Var& boundary, Var& residual) {
  const Index nb = r.boundary.size();
  boundary = zero(tape);
  if (nb > 0) {
    Var ss = zero(tape);
    if (r.boundary.dirichlet_pts.cols() > 0) {
      const Var u = model.evaluate(tape, model.input(tape, r.boundary.dirichlet_pts, {}), piece);
      ss = ss + tape.sum_squares(tape.sub_constant(u, r.boundary.dirichlet_vals));
    }
    if (r.boundary.neumann_pts.cols() > 0) {
      const JetLayout lay{{kT, 1}};
      const Var u = model.evaluate(tape, model.input(tape, r.boundary.neumann_pts, lay), piece);
      ss = ss + tape.sum_squares(tape.sub_constant(tape.derivative(u, kT, 1),
                                                   r.boundary.neumann_vals));
    }
    boundary = tape.scale(ss, 1.0 / static_cast<double>(nb));
  }
  residual = zero(tape);
  if (r.residual.cols() > 0) {
    const Var u = model.evaluate(tape, model.input(tape, r.residual, p.residual_layout()), piece);
    Var ss = zero(tape);
    for (const Var e : p.residual(tape, u, r.forcing)) ss = ss + tape.sum_squares(e);
    residual = tape.scale(ss, 1.0 / static_cast<double>(r.residual.cols()));
  }
}

JetLayout interface_layout(const problems::Problem& p, const LossWeights& w) {
  std::array<int, 2> need{0, 0};
  if (w.iface_res > 0) {
    const JetLayout lay = p.residual_layout();
    for (int s = 0; s < lay.slots(); ++s) need[lay.axis(s)] = std::max(need[lay.axis(s)], lay.order(s));
  }
  if (w.iface_deriv > 0) {
    need[0] = std::max(need[0], 1);
    need[1] = std::max(need[1], 1);
  }
  std::vector<diff::AxisOrder> axes;
  for (int a = 0; a < 2; ++a) {
    if (need[a] > 0) axes.push_back({a, need[a]});
  }
  return JetLayout(axes);
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {boundary, residual, iface_avg, iface_res, iface_deriv}) {
    if (!(v >= 0.0)) throw ConfigError("loss weights must be non-negative");
  }
}

Loss::Loss(const problems::Problem& problem, const problems::PointSet& points, LossWeights weights,
           diff::Exec exec)
    : problem_(&problem), points_(&points), w_(weights), exec_(exec) {
  w_.validate();
  if (points.regions.empty()) throw ConfigError("point set has no regions");
}

LossParts Loss::operator()(const models::Model& model, std::span<double> grad,
                           GradMode mode) const {
  const problems::Problem& p = *problem_;
  const problems::PointSet& ps = *points_;
  const bool xpinn = model.spec().kind == models::Kind::Xpinn;
  const int pieces = xpinn ? model.pieces() : 1;
  if (static_cast<int>(ps.regions.size()) != pieces) {
    throw ConfigError("point set has " + std::to_string(ps.regions.size()) +
                      " regions, model expects " + std::to_string(pieces));
  }
  if (!grad.empty() && static_cast<Index>(grad.size()) != model.parameter_count()) {
    throw ConfigError("gradient buffer size differs from the parameter count");
  }
  Tape tape(exec_);
  Terms sum{zero(tape), zero(tape), zero(tape), zero(tape), zero(tape)};
  for (int i = 0; i < pieces; ++i) {
    Var b, r;
    region_terms(tape, model, p, ps.regions[i], i, b, r);
    sum.boundary = sum.boundary + b;
    sum.residual = sum.residual + r;
  }

  if (xpinn && (w_.iface_avg > 0 || w_.iface_res > 0 || w_.iface_deriv > 0)) {
    const JetLayout lay = interface_layout(p, w_);
    for (const problems::InterfacePoints& ip : ps.interfaces) {
      const Index n = ip.pts.cols();
      if (n == 0) continue;
      const double inv = 1.0 / static_cast<double>(n);
      const Var z = model.input(tape, ip.pts, lay);
      const Var u[2] = {model.evaluate(tape, z, ip.left), model.evaluate(tape, z, ip.left + 1)};
      std::vector<Var> res[2];
      if (w_.iface_res > 0) {
        res[0] = p.residual(tape, u[0], ip.forcing);
        res[1] = p.residual(tape, u[1], ip.forcing);
      }
      auto fixed = [&](Var v) { return mode == GradMode::PerSubnet ? tape.detach(v) : v; };
      // Subnet `self` against its neighbour `other`.
      for (int self = 0; self < 2; ++self) {
        const int other = 1 - self;
        if (w_.iface_avg > 0) {
          const Var a = tape.derivative(u[self], 0, 0);
          const Var b = fixed(tape.derivative(u[other], 0, 0));
          const Var d = tape.scale(a - b, 0.5);
          sum.avg = sum.avg + tape.scale(tape.sum_squares(d), inv);
        }
        if (w_.iface_res > 0) {
          Var ss = zero(tape);
          for (std::size_t e = 0; e < res[self].size(); ++e) {
            ss = ss + tape.sum_squares(res[self][e] - fixed(res[other][e]));
          }
          sum.res = sum.res + tape.scale(ss, inv);
        }
        if (w_.iface_deriv > 0) {
          Var ss = zero(tape);
          for (int axis = 0; axis < 2; ++axis) {
            const Var a = tape.derivative(u[self], axis, 1);
            const Var b = fixed(tape.derivative(u[other], axis, 1));
            ss = ss + tape.sum_squares(a - b);
          }
          sum.deriv = sum.deriv + tape.scale(ss, inv);
        }
      }
    }
  }

  const Var total = tape.scale(sum.boundary, w_.boundary) + tape.scale(sum.residual, w_.residual) +
                    tape.scale(sum.avg, w_.iface_avg) + tape.scale(sum.res, w_.iface_res) +
                    tape.scale(sum.deriv, w_.iface_deriv);
  LossParts out;
  out.boundary = tape.value(sum.boundary);
  out.residual = tape.value(sum.residual);
  out.iface_avg = tape.value(sum.avg);
  out.iface_res = tape.value(sum.res);
  out.iface_deriv = tape.value(sum.deriv);
  out.total = tape.value(total);
  if (!grad.empty()) {
    std::fill(grad.begin(), grad.end(), 0.0);
    tape.backward(total, grad);
  }
  return out;
}

}  // namespace apinn::train
