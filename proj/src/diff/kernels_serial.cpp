#include "kernel_detail.hpp"

namespace apinn::diff::kernels::serial {

void dense_forward(const RowMat& w, const Eigen::VectorXd& b, const JetBlock& x, JetBlock& y) {
  const Index cols = x.cols();
  const Index in = w.cols();
  for (Index o = 0; o < w.rows(); ++o) {
    for (Index c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (Index i = 0; i < in; ++i) acc += w(o, i) * x.data(i, c);
      y.data(o, c) = c < x.points ? acc + b(o) : acc;
    }
  }
}

void dense_backward(const RowMat& w, const JetBlock& x, const JetBlock& ybar, double* wbar,
                    double* bbar, JetBlock* xbar) {
  const Index cols = x.cols();
  const Index in = w.cols();
  const Index out = w.rows();
  if (xbar) {
    for (Index i = 0; i < in; ++i) {
      for (Index c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (Index o = 0; o < out; ++o) acc += w(o, i) * ybar.data(o, c);
        xbar->data(i, c) += acc;
      }
    }
  }
  if (wbar) {
    for (Index o = 0; o < out; ++o) {
      for (Index i = 0; i < in; ++i) {
        double acc = 0.0;
        for (Index c = 0; c < cols; ++c) acc += ybar.data(o, c) * x.data(i, c);
        wbar[o * in + i] += acc;
      }
    }
  }
  if (bbar) {
    for (Index o = 0; o < out; ++o) {
      double acc = 0.0;
      for (Index p = 0; p < x.points; ++p) acc += ybar.data(o, p);
      bbar[o] += acc;
    }
  }
}

void unary_forward(Unary f, const JetBlock& x, JetBlock& y) {
  detail::unary_forward_range(f, x, y, 0, x.points);
}

void unary_backward(Unary f, const JetBlock& x, const JetBlock& y, const JetBlock& ybar,
                    JetBlock& xbar) {
  detail::unary_backward_range(f, x, y, ybar, xbar, 0, x.points);
}

void mul_forward(const JetBlock& a, const JetBlock& b, JetBlock& y) {
  detail::mul_forward_range(a, b, y, 0, y.points);
}

void mul_backward(const JetBlock& a, const JetBlock& b, const JetBlock& ybar, JetBlock* abar,
                  JetBlock* bbar) {
  detail::mul_backward_range(a, b, ybar, abar, bbar, 0, ybar.points);
}

}  // namespace apinn::diff::kernels::serial
