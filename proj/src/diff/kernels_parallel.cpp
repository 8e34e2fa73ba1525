#include <algorithm>
#include <vector>

#include "kernel_detail.hpp"

namespace apinn::diff::kernels {
namespace {

Index tiles(Index n) { return (n + kChunk - 1) / kChunk; }

using Strided = Eigen::OuterStride<>;
using ColsMap = Eigen::Map<RowMat, 0, Strided>;
using ConstColsMap = Eigen::Map<const RowMat, 0, Strided>;

// Columns [c0, c1) of a rows x ld row-major buffer.
ColsMap cols_of(double* p, Index rows, Index ld, Index c0, Index c1) {
  return ColsMap(p + c0, rows, c1 - c0, Strided(ld));
}
ConstColsMap cols_of(const double* p, Index rows, Index ld, Index c0, Index c1) {
  return ConstColsMap(p + c0, rows, c1 - c0, Strided(ld));
}

// Y[:, c0:c1] = W X[:, c0:c1] (+ bias on columns below nval), W row-major
// (out x in). Every output entry is summed over i in increasing order
// whatever the block shape, so a column's value does not depend on how many
// columns are in the batch.
template <int OB, int CB>
inline void gemm_block(const double* w, Index in, const double* x, double* y, Index ld, Index o0,
                       Index c) {
  using Lane = Eigen::Array<double, CB, 1>;
  Lane acc[OB];
  for (int r = 0; r < OB; ++r) acc[r].setZero();
  for (Index i = 0; i < in; ++i) {
    const Lane xi = Eigen::Map<const Lane>(x + i * ld + c);
    for (int r = 0; r < OB; ++r) acc[r] += w[(o0 + r) * in + i] * xi;
  }
  for (int r = 0; r < OB; ++r) Eigen::Map<Lane>(y + (o0 + r) * ld + c) = acc[r];
}

void gemm_tile(const double* w, Index out, Index in, const double* bias, Index nval,
               const double* x, double* y, Index ld, Index c0, Index c1) {
  constexpr int kRows = 4;
  constexpr int kCols = 16;
  Index c = c0;
  for (; c + kCols <= c1; c += kCols) {
    Index o = 0;
    for (; o + kRows <= out; o += kRows) gemm_block<kRows, kCols>(w, in, x, y, ld, o, c);
    for (; o < out; ++o) gemm_block<1, kCols>(w, in, x, y, ld, o, c);
  }
  for (; c < c1; ++c) {
    for (Index o = 0; o < out; ++o) gemm_block<1, 1>(w, in, x, y, ld, o, c);
  }
  if (bias) {
    for (Index o = 0; o < out; ++o) {
      double* yo = y + o * ld;
      for (Index k = c0; k < std::min(c1, nval); ++k) yo[k] += bias[o];
    }
  }
}

}  // namespace

namespace parallel {

void dense_forward(const RowMat& w, const Eigen::VectorXd& b, const JetBlock& x, JetBlock& y) {
  const Index cols = x.cols();
  const Index nt = tiles(cols);
  const Index out = w.rows();
  const Index in = w.cols();
#pragma omp parallel for schedule(static) if (nt > 1)
  for (Index t = 0; t < nt; ++t) {
    const Index c0 = t * kChunk;
    const Index c1 = std::min(cols, c0 + kChunk);
    gemm_tile(w.data(), out, in, b.data(), x.points, x.data.data(), y.data.data(), cols, c0, c1);
  }
}

void dense_backward(const RowMat& w, const JetBlock& x, const JetBlock& ybar, double* wbar,
                    double* bbar, JetBlock* xbar) {
  const Index cols = x.cols();
  const Index in = w.cols();
  const Index out = w.rows();
  const Index nt = tiles(cols);
  std::vector<double> wpart(wbar ? nt * out * in : 0, 0.0);
  std::vector<double> bpart(bbar ? nt * out : 0, 0.0);
#pragma omp parallel for schedule(static) if (nt > 1)
  for (Index t = 0; t < nt; ++t) {
    const Index c0 = t * kChunk;
    const Index c1 = std::min(cols, c0 + kChunk);
    const auto g = cols_of(ybar.data.data(), out, cols, c0, c1);
    if (xbar) cols_of(xbar->data.data(), in, cols, c0, c1).noalias() += w.transpose() * g;
    if (wbar) {
      Eigen::Map<RowMat> part(wpart.data() + t * out * in, out, in);
      part.noalias() = g * cols_of(x.data.data(), in, cols, c0, c1).transpose();
    }
    if (bbar) {
      const Index v1 = std::min(c1, x.points);
      for (Index o = 0; o < out; ++o) {
        const double* go = ybar.data.data() + o * cols;
        double acc = 0.0;
        for (Index c = c0; c < v1; ++c) acc += go[c];
        bpart[t * out + o] = acc;
      }
    }
  }
  for (Index t = 0; t < nt; ++t) {
    if (wbar) {
      for (Index j = 0; j < out * in; ++j) wbar[j] += wpart[t * out * in + j];
    }
    if (bbar) {
      for (Index o = 0; o < out; ++o) bbar[o] += bpart[t * out + o];
    }
  }
}

void unary_forward(Unary f, const JetBlock& x, JetBlock& y) {
  const Index nt = tiles(x.points);
#pragma omp parallel for schedule(static) if (nt > 1)
  for (Index t = 0; t < nt; ++t) {
    detail::unary_forward_range(f, x, y, t * kChunk, std::min(x.points, (t + 1) * kChunk));
  }
}

void unary_backward(Unary f, const JetBlock& x, const JetBlock& y, const JetBlock& ybar,
                    JetBlock& xbar) {
  const Index nt = tiles(x.points);
#pragma omp parallel for schedule(static) if (nt > 1)
  for (Index t = 0; t < nt; ++t) {
    detail::unary_backward_range(f, x, y, ybar, xbar, t * kChunk,
                                 std::min(x.points, (t + 1) * kChunk));
  }
}

void mul_forward(const JetBlock& a, const JetBlock& b, JetBlock& y) {
  const Index nt = tiles(y.points);
#pragma omp parallel for schedule(static) if (nt > 1)
  for (Index t = 0; t < nt; ++t) {
    detail::mul_forward_range(a, b, y, t * kChunk, std::min(y.points, (t + 1) * kChunk));
  }
}

void mul_backward(const JetBlock& a, const JetBlock& b, const JetBlock& ybar, JetBlock* abar,
                  JetBlock* bbar) {
  const Index nt = tiles(ybar.points);
#pragma omp parallel for schedule(static) if (nt > 1)
  for (Index t = 0; t < nt; ++t) {
    detail::mul_backward_range(a, b, ybar, abar, bbar, t * kChunk,
                               std::min(ybar.points, (t + 1) * kChunk));
  }
}

}  // namespace parallel

void dense_forward(Exec e, const RowMat& w, const Eigen::VectorXd& b, const JetBlock& x,
                   JetBlock& y) {
  e == Exec::Serial ? serial::dense_forward(w, b, x, y) : parallel::dense_forward(w, b, x, y);
}

void dense_backward(Exec e, const RowMat& w, const JetBlock& x, const JetBlock& ybar,
                    double* wbar, double* bbar, JetBlock* xbar) {
  e == Exec::Serial ? serial::dense_backward(w, x, ybar, wbar, bbar, xbar)
                    : parallel::dense_backward(w, x, ybar, wbar, bbar, xbar);
}

void unary_forward(Exec e, Unary f, const JetBlock& x, JetBlock& y) {
  e == Exec::Serial ? serial::unary_forward(f, x, y) : parallel::unary_forward(f, x, y);
}

void unary_backward(Exec e, Unary f, const JetBlock& x, const JetBlock& y, const JetBlock& ybar,
                    JetBlock& xbar) {
  e == Exec::Serial ? serial::unary_backward(f, x, y, ybar, xbar)
                    : parallel::unary_backward(f, x, y, ybar, xbar);
}

void mul_forward(Exec e, const JetBlock& a, const JetBlock& b, JetBlock& y) {
  e == Exec::Serial ? serial::mul_forward(a, b, y) : parallel::mul_forward(a, b, y);
}

void mul_backward(Exec e, const JetBlock& a, const JetBlock& b, const JetBlock& ybar,
                  JetBlock* abar, JetBlock* bbar) {
  e == Exec::Serial ? serial::mul_backward(a, b, ybar, abar, bbar)
                    : parallel::mul_backward(a, b, ybar, abar, bbar);
}

}  // namespace apinn::diff::kernels

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace apinn::diff {

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace apinn::diff
