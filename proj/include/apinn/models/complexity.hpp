#pragma once

#include <array>
#include <vector>

#include "apinn/diff/dense_net.hpp"

namespace apinn::models {

struct LayerComplexity {
  double spectral_norm = 0.0;  ///< ||W_l||_2
  double distance = 0.0;       ///< ||W_l - A_l||_{2,1}, column-wise
  long long M = 0;             ///< ceil(||W_l||_2)
  long long N = 0;             ///< ceil(||W_l - A_l||_{2,1} / ||W_l||_2)
};

struct ComplexityReport {
  std::vector<LayerComplexity> layers;
  /// R_i = (prod_l M(l))^(i+1) * (sum_l N(l)^(2/3))^(3/2), i = 0, 1, 2.
  std::array<double, 3> R{0.0, 0.0, 0.0};
};

/// Largest singular value by power iteration on W^T W.
double spectral_norm(const diff::RowMat& w, double tol = 1e-10, int max_iter = 1000);
/// Sum of the Euclidean norms of the columns.
double norm_2_1(const diff::RowMat& w);
/// Ceiling that first snaps values within 1e-8 of an integer.
long long snapped_ceil(double v);
/// R_i from per-layer integers.
std::array<double, 3> r_values(const std::vector<long long>& M, const std::vector<long long>& N);

/// Metrics of `net` against reference matrices `refs` (usually the
/// initialization). Biases are ignored.
ComplexityReport complexity(const diff::DenseNet& net, const diff::DenseNet& refs);

}  // namespace apinn::models
