#pragma once

#include <Eigen/Core>

#include "apinn/diff/jet.hpp"

namespace apinn::diff {

using Index = Eigen::Index;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A batch of multi-axis jets: `rows` features at `points` points.
///
/// Row r holds streams back to back: data(r, s * points + p) is stream s of
/// feature r at point p. Stream numbering follows `layout`.
struct JetBlock {
  JetLayout layout;
  Index rows = 0;
  Index points = 0;
  RowMat data;

  JetBlock() = default;
  JetBlock(JetLayout l, Index r, Index n)
      : layout(std::move(l)), rows(r), points(n), data(RowMat::Zero(r, layout.streams() * n)) {}

  /// Storage left uninitialized; for outputs a kernel overwrites entirely.
  static JetBlock uninitialized(JetLayout l, Index r, Index n) {
    JetBlock b;
    b.rows = r;
    b.points = n;
    b.data.resize(r, l.streams() * n);
    b.layout = std::move(l);
    return b;
  }

  [[nodiscard]] double* stream(Index r, int s) { return data.data() + r * data.cols() + s * points; }
  [[nodiscard]] const double* stream(Index r, int s) const {
    return data.data() + r * data.cols() + s * points;
  }
  [[nodiscard]] Index cols() const { return data.cols(); }
};

/// Execution policy for the data-parallel kernels.
///
/// Serial is the plain reference loop nest. Parallel tiles the point range
/// into fixed-size chunks processed under OpenMP; reductions over points are
/// combined in chunk order, so results do not depend on the thread count.
enum class Exec { Serial, Parallel };

enum class Unary { Tanh, Sigmoid, Exp, Reciprocal };

/// Keeps large jet blocks on the heap instead of fresh mmap pages. Training
/// allocates and frees the same block sizes every epoch; call once at startup.
void tune_allocator();

namespace kernels {

inline constexpr Index kChunk = 256;

namespace serial {
void dense_forward(const RowMat& w, const Eigen::VectorXd& b, const JetBlock& x, JetBlock& y);
// Accumulates into wbar (out x in, row-major), bbar and xbar; any may be null.
void dense_backward(const RowMat& w, const JetBlock& x, const JetBlock& ybar, double* wbar,
                    double* bbar, JetBlock* xbar);
void unary_forward(Unary f, const JetBlock& x, JetBlock& y);
void unary_backward(Unary f, const JetBlock& x, const JetBlock& y, const JetBlock& ybar,
                    JetBlock& xbar);
void mul_forward(const JetBlock& a, const JetBlock& b, JetBlock& y);
void mul_backward(const JetBlock& a, const JetBlock& b, const JetBlock& ybar, JetBlock* abar,
                  JetBlock* bbar);
}  // namespace serial

namespace parallel {
void dense_forward(const RowMat& w, const Eigen::VectorXd& b, const JetBlock& x, JetBlock& y);
void dense_backward(const RowMat& w, const JetBlock& x, const JetBlock& ybar, double* wbar,
                    double* bbar, JetBlock* xbar);
void unary_forward(Unary f, const JetBlock& x, JetBlock& y);
void unary_backward(Unary f, const JetBlock& x, const JetBlock& y, const JetBlock& ybar,
                    JetBlock& xbar);
void mul_forward(const JetBlock& a, const JetBlock& b, JetBlock& y);
void mul_backward(const JetBlock& a, const JetBlock& b, const JetBlock& ybar, JetBlock* abar,
                  JetBlock* bbar);
}  // namespace parallel

void dense_forward(Exec e, const RowMat& w, const Eigen::VectorXd& b, const JetBlock& x,
                   JetBlock& y);
void dense_backward(Exec e, const RowMat& w, const JetBlock& x, const JetBlock& ybar,
                    double* wbar, double* bbar, JetBlock* xbar);
void unary_forward(Exec e, Unary f, const JetBlock& x, JetBlock& y);
void unary_backward(Exec e, Unary f, const JetBlock& x, const JetBlock& y, const JetBlock& ybar,
                    JetBlock& xbar);
void mul_forward(Exec e, const JetBlock& a, const JetBlock& b, JetBlock& y);
void mul_backward(Exec e, const JetBlock& a, const JetBlock& b, const JetBlock& ybar,
                  JetBlock* abar, JetBlock* bbar);

}  // namespace kernels
}  // namespace apinn::diff
