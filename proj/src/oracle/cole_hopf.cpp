#include "apinn/oracle/cole_hopf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "apinn/errors.hpp"

namespace apinn::oracle {

GaussHermite GaussHermite::make(int q) {
  if (q < 1) throw ConfigError("Gauss-Hermite order must be positive");
  // Newton iteration on the orthonormal Hermite recurrence; the initial
  // guesses are the usual asymptotic ones for the largest roots.
  constexpr double kPim4 = 0.7511255444649425;  // pi^(-1/4)
  const int n = q;
  std::vector<double> x(n), w(n);
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1) - 1.85575 * std::pow(2.0 * n + 1, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = kPim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  GaussHermite gh;
  gh.nodes.assign(x.rbegin(), x.rend());
  gh.weights.assign(w.rbegin(), w.rend());
  return gh;
}

ColeHopfSolver::ColeHopfSolver(int q, double nu)
    : gh_(GaussHermite::make(q)), nu_(nu > 0.0 ? nu : 0.01 / std::numbers::pi) {}

double ColeHopfSolver::operator()(double x, double t) const {
  using std::numbers::pi;
  if (t < 0.0) throw DomainError("Burgers oracle: t must be non-negative, got " + std::to_string(t));
  if (t == 0.0) return -std::sin(pi * x);
  // F(y) = exp(-cos(pi y) / (2 pi nu)); log F is shifted by its maximum so both
  // integrals stay in range. Shift cancels in the ratio.
  const double s = std::sqrt(4.0 * nu_ * t);
  const double c = 1.0 / (2.0 * pi * nu_);
  const std::size_t q = gh_.nodes.size();
  double lmax = -INFINITY;
  for (std::size_t i = 0; i < q; ++i) {
    lmax = std::max(lmax, -std::cos(pi * (x - s * gh_.nodes[i])) * c);
  }
  // Nodes are summed in mirrored pairs so the odd integrand cancels exactly
  // at x = 0.
  auto term = [&](std::size_t i, double& num, double& den) {
    const double y = x - s * gh_.nodes[i];
    const double f = gh_.weights[i] * std::exp(-std::cos(pi * y) * c - lmax);
    num += std::sin(pi * y) * f;
    den += f;
  };
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < q / 2; ++i) {
    double pn = 0.0;
    double pd = 0.0;
    term(i, pn, pd);
    term(q - 1 - i, pn, pd);
    num += pn;
    den += pd;
  }
  if (q % 2 == 1) term(q / 2, num, den);
  return -num / den;
}

double burgers_exact(double x, double t, int q) {
  static const ColeHopfSolver solver128(128);
  if (q == 128) return solver128(x, t);
  return ColeHopfSolver(q)(x, t);
}

}  // namespace apinn::oracle
