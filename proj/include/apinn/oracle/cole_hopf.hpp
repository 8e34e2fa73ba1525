#pragma once

#include <vector>

namespace apinn::oracle {

/// Gauss-Hermite nodes and weights for weight exp(-z^2), nodes ascending.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
  static GaussHermite make(int q);
};

/// Exact solution of u_t + u u_x = nu u_xx on [-1, 1] with u(x, 0) = -sin(pi x)
/// through the Cole-Hopf transform, evaluated by Gauss-Hermite quadrature.
class ColeHopfSolver {
 public:
  explicit ColeHopfSolver(int q = 128, double nu = 0.0);  // nu = 0 selects 0.01 / pi

  /// t = 0 returns -sin(pi x) directly; t < 0 throws DomainError.
  [[nodiscard]] double operator()(double x, double t) const;
  [[nodiscard]] double nu() const { return nu_; }
  [[nodiscard]] int order() const { return static_cast<int>(gh_.nodes.size()); }

 private:
  GaussHermite gh_;
  double nu_;
};

/// Convenience wrapper with the default viscosity.
double burgers_exact(double x, double t, int q = 128);

}  // namespace apinn::oracle
