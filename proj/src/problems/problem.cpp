#include "apinn/problems/problem.hpp"

#include "apinn/errors.hpp"

namespace apinn::problems {

TapeDerivs::TapeDerivs(diff::Tape& tape, diff::Var u, int unknowns)
    : tape_(&tape), u_(u), unknowns_(unknowns) {}

diff::Var TapeDerivs::d(int unknown, int axis, int order) const {
  if (unknown < 0 || unknown >= unknowns_) throw std::logic_error("derivative of unknown unknown");
  const std::array<int, 3> key{unknown, order == 0 ? 0 : axis, order};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const std::array<int, 3> all{-1, key[1], order};
  diff::Var full;
  if (auto it = cache_.find(all); it != cache_.end()) {
    full = it->second;
  } else {
    full = tape_->derivative(u_, key[1], order);
    cache_[all] = full;
  }
  const diff::Var v = unknowns_ == 1 ? full : tape_->row(full, unknown);
  cache_[key] = v;
  return v;
}

void Problem::forcing(double, double, double* f) const {
  for (int k = 0; k < unknowns(); ++k) f[k] = 0.0;
}

void Problem::boundary_value(const Segment& s, double x, double t, double* g) const {
  if (s.kind == Condition::NeumannT) {
    for (int k = 0; k < unknowns(); ++k) g[k] = 0.0;
    return;
  }
  reference(x, t, g);
}

std::optional<PointDerivs> Problem::reference_derivs(double, double) const { return std::nullopt; }

std::vector<diff::Var> Problem::residual(diff::Tape& tape, diff::Var u, const RowMat& f) const {
  const TapeDerivs d(tape, u, unknowns());
  std::vector<diff::Var> lu = apply(d);
  for (std::size_t k = 0; k < lu.size(); ++k) {
    lu[k] = tape.sub_constant(lu[k], f.row(static_cast<Index>(k)));
  }
  return lu;
}

RowMat Problem::forcing_at(const RowMat& pts) const {
  RowMat f(unknowns(), pts.cols());
  double buf[kMaxUnknowns];
  for (Index p = 0; p < pts.cols(); ++p) {
    forcing(pts(0, p), pts(1, p), buf);
    for (int k = 0; k < unknowns(); ++k) f(k, p) = buf[k];
  }
  return f;
}

RowMat Problem::reference_at(const RowMat& pts) const {
  RowMat u(unknowns(), pts.cols());
  double buf[kMaxUnknowns];
  for (Index p = 0; p < pts.cols(); ++p) {
    reference(pts(0, p), pts(1, p), buf);
    for (int k = 0; k < unknowns(); ++k) u(k, p) = buf[k];
  }
  return u;
}

}  // namespace apinn::problems
