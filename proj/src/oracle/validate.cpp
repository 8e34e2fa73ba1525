#include "apinn/oracle/validate.hpp"

#include <cmath>

#include "apinn/errors.hpp"
#include "apinn/problems/problem.hpp"

namespace apinn::oracle {
namespace {

// Derivatives of order 1..3 at node i of samples f on coordinates c, using
// fourth-order central stencils that assume locally uniform spacing. The
// third derivative needs three nodes of margin and is NaN closer to the edge.
std::array<double, 4> central(const std::vector<double>& c, const double* f, Index stride,
                              Index i) {
  const double h = 0.5 * (c[i + 1] - c[i - 1]);
  auto at = [&](Index k) { return f[k * stride]; };
  std::array<double, 4> d{at(i), 0, 0, 0};
  d[1] = (-at(i + 2) + 8 * at(i + 1) - 8 * at(i - 1) + at(i - 2)) / (12 * h);
  d[2] = (-at(i + 2) + 16 * at(i + 1) - 30 * at(i) + 16 * at(i - 1) - at(i - 2)) / (12 * h * h);
  const Index n = static_cast<Index>(c.size());
  if (i >= 3 && i + 3 < n) {
    d[3] = (-at(i + 3) + 8 * at(i + 2) - 13 * at(i + 1) + 13 * at(i - 1) - 8 * at(i - 2) +
            at(i - 3)) /
           (8 * h * h * h);
  } else {
    d[3] = std::nan("");
  }
  return d;
}

}  // namespace

ResidualReport validate_reference(const problems::Problem& p, const ReferenceGrid& g,
                                  const std::function<bool(double, double)>& keep) {
  if (g.unknowns() != p.unknowns()) {
    throw ConfigError("validate_reference: grid has " + std::to_string(g.unknowns()) +
                      " unknowns, problem " + p.name() + " has " + std::to_string(p.unknowns()));
  }
  const diff::JetLayout lay = p.residual_layout();
  int margin = 2;
  for (int s = 0; s < lay.slots(); ++s) {
    if (lay.order(s) >= 3) margin = 3;
  }
  if (g.nx() < 2 * margin + 1 || g.nt() < 2 * margin + 1) {
    throw ConfigError("validate_reference: grid too small for the stencil");
  }
  ResidualReport rep;
  double sum = 0.0;
  std::vector<double> f(p.unknowns());
  for (Index j = margin; j + margin < g.nt(); ++j) {
    for (Index i = margin; i + margin < g.nx(); ++i) {
      const double x = g.xs[i], t = g.ts[j];
      if (keep && !keep(x, t)) continue;
      problems::PointDerivs d;
      for (int k = 0; k < g.unknowns(); ++k) {
        const RowMat& v = g.values[k];
        const auto dx = central(g.xs, v.data() + j * g.nx(), 1, i);
        const auto dt = central(g.ts, v.data() + i, g.nx(), j);
        for (int o = 0; o < 4; ++o) {
          d.v[k][0][o] = dx[o];
          d.v[k][1][o] = dt[o];
        }
      }
      const std::vector<double> r = p.apply(d);
      p.forcing(x, t, f.data());
      for (std::size_t e = 0; e < r.size(); ++e) {
        const double a = std::abs(r[e] - f[e]);
        rep.max_abs = std::max(rep.max_abs, a);
        sum += a;
      }
      ++rep.nodes;
    }
  }
  rep.mean_abs = rep.nodes ? sum / (rep.nodes * static_cast<double>(p.unknowns())) : 0.0;
  return rep;
}

}  // namespace apinn::oracle
