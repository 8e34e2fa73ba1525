// Serial reference vs OpenMP kernels on a width-20 layer with the jet layout
// used by second-order PDE residuals (x to order 2, t to order 1).

#include <benchmark/benchmark.h>

#include <random>

#include "apinn/diff/kernels.hpp"

using namespace apinn::diff;

namespace {

constexpr Index kWidth = 20;

JetBlock random_block(Index rows, Index points, std::mt19937_64& rng) {
  JetBlock b(JetLayout{{0, 2}, {1, 1}}, rows, points);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Index i = 0; i < b.data.size(); ++i) b.data.data()[i] = u(rng);
  return b;
}

struct Layer {
  RowMat w;
  Eigen::VectorXd b;
  JetBlock x, y, g;
  explicit Layer(Index points) {
    std::mt19937_64 rng(3);
    w = RowMat::Random(kWidth, kWidth);
    b = Eigen::VectorXd::Random(kWidth);
    x = random_block(kWidth, points, rng);
    y = random_block(kWidth, points, rng);
    g = random_block(kWidth, points, rng);
  }
};

void set_items(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Exec E>
void BM_DenseForward(benchmark::State& state) {
  Layer l(state.range(0));
  for (auto _ : state) {
    kernels::dense_forward(E, l.w, l.b, l.x, l.y);
    benchmark::DoNotOptimize(l.y.data.data());
  }
  set_items(state);
}

template <Exec E>
void BM_DenseBackward(benchmark::State& state) {
  Layer l(state.range(0));
  RowMat wbar = RowMat::Zero(kWidth, kWidth);
  Eigen::VectorXd bbar = Eigen::VectorXd::Zero(kWidth);
  JetBlock xbar(l.x.layout, kWidth, l.x.points);
  for (auto _ : state) {
    kernels::dense_backward(E, l.w, l.x, l.g, wbar.data(), bbar.data(), &xbar);
    benchmark::DoNotOptimize(wbar.data());
  }
  set_items(state);
}

template <Exec E>
void BM_TanhForward(benchmark::State& state) {
  Layer l(state.range(0));
  for (auto _ : state) {
    kernels::unary_forward(E, Unary::Tanh, l.x, l.y);
    benchmark::DoNotOptimize(l.y.data.data());
  }
  set_items(state);
}

template <Exec E>
void BM_TanhBackward(benchmark::State& state) {
  Layer l(state.range(0));
  JetBlock xbar(l.x.layout, kWidth, l.x.points);
  for (auto _ : state) {
    kernels::unary_backward(E, Unary::Tanh, l.x, l.y, l.g, xbar);
    benchmark::DoNotOptimize(xbar.data.data());
  }
  set_items(state);
}

template <Exec E>
void BM_Mul(benchmark::State& state) {
  Layer l(state.range(0));
  for (auto _ : state) {
    kernels::mul_forward(E, l.x, l.g, l.y);
    benchmark::DoNotOptimize(l.y.data.data());
  }
  set_items(state);
}

}  // namespace

#define APINN_BENCH(fn)                                                        \
  BENCHMARK(fn<Exec::Serial>)->Name(#fn "/serial")->Range(1 << 10, 1 << 15);   \
  BENCHMARK(fn<Exec::Parallel>)->Name(#fn "/parallel")->Range(1 << 10, 1 << 15)

APINN_BENCH(BM_DenseForward);
APINN_BENCH(BM_DenseBackward);
APINN_BENCH(BM_TanhForward);
APINN_BENCH(BM_TanhBackward);
APINN_BENCH(BM_Mul);

BENCHMARK_MAIN();
