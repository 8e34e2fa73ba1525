#include "apinn/models/complexity.hpp"

#include <cmath>

#include "apinn/errors.hpp"

namespace apinn::models {

double spectral_norm(const diff::RowMat& w, double tol, int max_iter) {
  const diff::Index n = w.cols();
  if (w.size() == 0) return 0.0;
  Eigen::VectorXd v(n);
  for (diff::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i) / n;
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd u = w * v;
    Eigen::VectorXd next = w.transpose() * u;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double s = std::sqrt(norm);
    v = next;
    if (std::abs(s - sigma) <= tol * s) {
      sigma = s;
      break;
    }
    sigma = s;
  }
  return (w * v).norm();
}

double norm_2_1(const diff::RowMat& w) {
  double s = 0.0;
  for (diff::Index c = 0; c < w.cols(); ++c) s += w.col(c).norm();
  return s;
}

long long snapped_ceil(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-8) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(v));
}

std::array<double, 3> r_values(const std::vector<long long>& M, const std::vector<long long>& N) {
  double prod = 1.0;
  for (long long m : M) prod *= static_cast<double>(m);
  double sum = 0.0;
  for (long long n : N) sum += std::pow(static_cast<double>(n), 2.0 / 3.0);
  const double tail = std::pow(sum, 1.5);
  std::array<double, 3> R{};
  for (int i = 0; i < 3; ++i) R[i] = std::pow(prod, i + 1) * tail;
  return R;
}

ComplexityReport complexity(const diff::DenseNet& net, const diff::DenseNet& refs) {
  if (net.dims() != refs.dims()) throw ConfigError("complexity: reference shapes differ");
  ComplexityReport rep;
  std::vector<long long> M, N;
  for (int l = 0; l < net.depth(); ++l) {
    const diff::RowMat& w = net.layers()[l].weight;
    LayerComplexity lc;
    lc.spectral_norm = spectral_norm(w);
    lc.distance = norm_2_1(w - refs.layers()[l].weight);
    lc.M = snapped_ceil(lc.spectral_norm);
    lc.N = lc.spectral_norm > 0.0 ? snapped_ceil(lc.distance / lc.spectral_norm) : 0;
    M.push_back(lc.M);
    N.push_back(lc.N);
    rep.layers.push_back(lc);
  }
  rep.R = r_values(M, N);
  return rep;
}

}  // namespace apinn::models
