#pragma once

// Per-point jet kernels shared by the serial and OpenMP paths. Each function
// handles the point range [p0, p1) for every row and writes nothing outside it.

#include <cmath>

#include "apinn/diff/kernels.hpp"

namespace apinn::diff::kernels::detail {

struct Derivs {
  double d1, d2, d3, d4;
};

// Vectorized through Eigen's packet exp; tanh is evaluated as
// sign(z) (1 - e) / (1 + e) with e = exp(-2|z|), which never overflows.
template <Unary F>
inline void apply(const double* z, double* y, Index n) {
  const Eigen::Map<const Eigen::ArrayXd> a(z, n);
  Eigen::Map<Eigen::ArrayXd> out(y, n);
  if constexpr (F == Unary::Tanh) {
    out = (-2.0 * a.abs()).exp();
    out = a.sign() * (1.0 - out) / (1.0 + out);
  } else if constexpr (F == Unary::Sigmoid) {
    out = (-a.abs()).exp();
    out = 0.5 + 0.5 * a.sign() * (1.0 - out) / (1.0 + out);
  } else if constexpr (F == Unary::Exp) {
    out = a.exp();
  } else {
    out = a.inverse();
  }
}

// Derivatives expressed through the output value y = f(z).
template <Unary F>
inline Derivs derivs(double y) {
  if constexpr (F == Unary::Tanh) {
    const double s = 1.0 - y * y;
    return {s, -2.0 * y * s, -2.0 * s * (1.0 - 3.0 * y * y), 8.0 * y * s * (2.0 - 3.0 * y * y)};
  } else if constexpr (F == Unary::Sigmoid) {
    const double s = y * (1.0 - y);
    const double c = 1.0 - 2.0 * y;
    return {s, s * c, s * (1.0 - 6.0 * y + 6.0 * y * y), s * c * (1.0 - 12.0 * y + 12.0 * y * y)};
  } else if constexpr (F == Unary::Exp) {
    return {y, y, y, y};
  } else {
    const double y2 = y * y;
    return {-y2, 2.0 * y2 * y, -6.0 * y2 * y2, 24.0 * y2 * y2 * y};
  }
}

template <Unary F>
void unary_forward_range(const JetBlock& x, JetBlock& y, Index p0, Index p1) {
  const JetLayout& lay = x.layout;
  for (Index r = 0; r < x.rows; ++r) {
    const double* z0 = x.stream(r, 0);
    double* y0 = y.stream(r, 0);
    apply<F>(z0 + p0, y0 + p0, p1 - p0);
    for (int s = 0; s < lay.slots(); ++s) {
      const int order = lay.order(s);
      const double* z1 = x.stream(r, lay.stream(s, 1));
      double* y1 = y.stream(r, lay.stream(s, 1));
      if (order == 1) {
        for (Index p = p0; p < p1; ++p) y1[p] = derivs<F>(y0[p]).d1 * z1[p];
        continue;
      }
      const double* z2 = x.stream(r, lay.stream(s, 2));
      double* y2 = y.stream(r, lay.stream(s, 2));
      if (order == 2) {
        for (Index p = p0; p < p1; ++p) {
          const Derivs d = derivs<F>(y0[p]);
          y1[p] = d.d1 * z1[p];
          y2[p] = d.d1 * z2[p] + 0.5 * d.d2 * z1[p] * z1[p];
        }
        continue;
      }
      const double* z3 = x.stream(r, lay.stream(s, 3));
      double* y3 = y.stream(r, lay.stream(s, 3));
      for (Index p = p0; p < p1; ++p) {
        const Derivs d = derivs<F>(y0[p]);
        const double a = z1[p];
        y1[p] = d.d1 * a;
        y2[p] = d.d1 * z2[p] + 0.5 * d.d2 * a * a;
        y3[p] = d.d1 * z3[p] + d.d2 * a * z2[p] + (d.d3 / 6.0) * a * a * a;
      }
    }
  }
}

template <Unary F>
void unary_backward_range(const JetBlock& x, const JetBlock& y, const JetBlock& g, JetBlock& xb,
                          Index p0, Index p1) {
  const JetLayout& lay = x.layout;
  for (Index r = 0; r < x.rows; ++r) {
    const double* y0 = y.stream(r, 0);
    const double* g0 = g.stream(r, 0);
    double* b0 = xb.stream(r, 0);
    for (Index p = p0; p < p1; ++p) b0[p] += g0[p] * derivs<F>(y0[p]).d1;
    for (int s = 0; s < lay.slots(); ++s) {
      const int order = lay.order(s);
      const double* z1 = x.stream(r, lay.stream(s, 1));
      const double* g1 = g.stream(r, lay.stream(s, 1));
      double* b1 = xb.stream(r, lay.stream(s, 1));
      if (order == 1) {
        for (Index p = p0; p < p1; ++p) {
          const Derivs d = derivs<F>(y0[p]);
          b0[p] += g1[p] * d.d2 * z1[p];
          b1[p] += g1[p] * d.d1;
        }
        continue;
      }
      const double* z2 = x.stream(r, lay.stream(s, 2));
      const double* g2 = g.stream(r, lay.stream(s, 2));
      double* b2 = xb.stream(r, lay.stream(s, 2));
      if (order == 2) {
        for (Index p = p0; p < p1; ++p) {
          const Derivs d = derivs<F>(y0[p]);
          const double a = z1[p];
          b0[p] += g1[p] * d.d2 * a + g2[p] * (d.d2 * z2[p] + 0.5 * d.d3 * a * a);
          b1[p] += g1[p] * d.d1 + g2[p] * d.d2 * a;
          b2[p] += g2[p] * d.d1;
        }
        continue;
      }
      const double* z3 = x.stream(r, lay.stream(s, 3));
      const double* g3 = g.stream(r, lay.stream(s, 3));
      double* b3 = xb.stream(r, lay.stream(s, 3));
      for (Index p = p0; p < p1; ++p) {
        const Derivs d = derivs<F>(y0[p]);
        const double a = z1[p];
        const double c = z2[p];
        b0[p] += g1[p] * d.d2 * a + g2[p] * (d.d2 * c + 0.5 * d.d3 * a * a) +
                 g3[p] * (d.d2 * z3[p] + d.d3 * a * c + (d.d4 / 6.0) * a * a * a);
        b1[p] += g1[p] * d.d1 + g2[p] * d.d2 * a + g3[p] * (d.d2 * c + 0.5 * d.d3 * a * a);
        b2[p] += g2[p] * d.d1 + g3[p] * d.d2 * a;
        b3[p] += g3[p] * d.d1;
      }
    }
  }
}

inline void unary_forward_range(Unary f, const JetBlock& x, JetBlock& y, Index p0, Index p1) {
  switch (f) {
    case Unary::Tanh: return unary_forward_range<Unary::Tanh>(x, y, p0, p1);
    case Unary::Sigmoid: return unary_forward_range<Unary::Sigmoid>(x, y, p0, p1);
    case Unary::Exp: return unary_forward_range<Unary::Exp>(x, y, p0, p1);
    case Unary::Reciprocal: return unary_forward_range<Unary::Reciprocal>(x, y, p0, p1);
  }
}

inline void unary_backward_range(Unary f, const JetBlock& x, const JetBlock& y,
                                 const JetBlock& g, JetBlock& xb, Index p0, Index p1) {
  switch (f) {
    case Unary::Tanh: return unary_backward_range<Unary::Tanh>(x, y, g, xb, p0, p1);
    case Unary::Sigmoid: return unary_backward_range<Unary::Sigmoid>(x, y, g, xb, p0, p1);
    case Unary::Exp: return unary_backward_range<Unary::Exp>(x, y, g, xb, p0, p1);
    case Unary::Reciprocal: return unary_backward_range<Unary::Reciprocal>(x, y, g, xb, p0, p1);
  }
}

// Cauchy product per axis; the value stream is shared.
inline void mul_forward_range(const JetBlock& a, const JetBlock& b, JetBlock& y, Index p0,
                              Index p1) {
  const JetLayout& lay = y.layout;
  for (Index r = 0; r < y.rows; ++r) {
    const Index ra = a.rows == 1 ? 0 : r;
    const Index rb = b.rows == 1 ? 0 : r;
    const double* a0 = a.stream(ra, 0);
    const double* b0 = b.stream(rb, 0);
    double* y0 = y.stream(r, 0);
    for (Index p = p0; p < p1; ++p) y0[p] = a0[p] * b0[p];
    for (int s = 0; s < lay.slots(); ++s) {
      const int order = lay.order(s);
      const double* ak[kMaxOrder + 1] = {a0};
      const double* bk[kMaxOrder + 1] = {b0};
      for (int k = 1; k <= order; ++k) {
        ak[k] = a.stream(ra, lay.stream(s, k));
        bk[k] = b.stream(rb, lay.stream(s, k));
      }
      for (int k = 1; k <= order; ++k) {
        double* yk = y.stream(r, lay.stream(s, k));
        for (Index p = p0; p < p1; ++p) {
          double acc = 0.0;
          for (int i = 0; i <= k; ++i) acc += ak[i][p] * bk[k - i][p];
          yk[p] = acc;
        }
      }
    }
  }
}

inline void mul_backward_range(const JetBlock& a, const JetBlock& b, const JetBlock& g,
                               JetBlock* ab, JetBlock* bb, Index p0, Index p1) {
  const JetLayout& lay = g.layout;
  for (Index r = 0; r < g.rows; ++r) {
    const Index ra = a.rows == 1 ? 0 : r;
    const Index rb = b.rows == 1 ? 0 : r;
    const double* ak[kMaxOrder + 1] = {a.stream(ra, 0)};
    const double* bk[kMaxOrder + 1] = {b.stream(rb, 0)};
    const double* g0 = g.stream(r, 0);
    if (ab) {
      double* d = ab->stream(ra, 0);
      for (Index p = p0; p < p1; ++p) d[p] += g0[p] * bk[0][p];
    }
    if (bb) {
      double* d = bb->stream(rb, 0);
      for (Index p = p0; p < p1; ++p) d[p] += g0[p] * ak[0][p];
    }
    for (int s = 0; s < lay.slots(); ++s) {
      const int order = lay.order(s);
      const double* gk[kMaxOrder + 1] = {g0};
      for (int k = 1; k <= order; ++k) {
        ak[k] = a.stream(ra, lay.stream(s, k));
        bk[k] = b.stream(rb, lay.stream(s, k));
        gk[k] = g.stream(r, lay.stream(s, k));
      }
      // d y_k / d a_i = b_{k-i} for i <= k.
      for (int i = 0; i <= order; ++i) {
        const int st = lay.stream(s, i);
        double* da = ab ? ab->stream(ra, st) : nullptr;
        double* db = bb ? bb->stream(rb, st) : nullptr;
        for (Index p = p0; p < p1; ++p) {
          double sa = 0.0;
          double sb = 0.0;
          for (int k = (i == 0 ? 1 : i); k <= order; ++k) {
            sa += gk[k][p] * bk[k - i][p];
            sb += gk[k][p] * ak[k - i][p];
          }
          if (da) da[p] += sa;
          if (db) db[p] += sb;
        }
      }
    }
  }
}

}  // namespace apinn::diff::kernels::detail
