#include "apinn/problems/metrics.hpp"

#include <string>

#include "apinn/errors.hpp"

namespace apinn::problems {

EvalGrid make_eval_grid(const Problem& p, int n,
                        const std::optional<std::filesystem::path>& cache_dir) {
  const Box box = p.domain();
  EvalGrid g;
  g.grid.xs = oracle::linspace(box.lo[0], box.hi[0], n);
  g.grid.ts = oracle::linspace(box.lo[1], box.hi[1], n);
  g.pts.resize(2, static_cast<Index>(n) * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      g.pts(0, j * n + i) = g.grid.xs[i];
      g.pts(1, j * n + i) = g.grid.ts[j];
    }
  }
  if (!p.has_reference()) return g;

  std::optional<std::filesystem::path> file;
  if (cache_dir) {
    file = *cache_dir / (p.name() + "_ref_" + std::to_string(n) + ".csv");
    if (std::filesystem::exists(*file)) {
      oracle::ReferenceGrid cached = oracle::ReferenceGrid::load(*file);
      if (cached.xs == g.grid.xs && cached.ts == g.grid.ts &&
          cached.unknowns() == p.unknowns()) {
        g.grid.values = std::move(cached.values);
      }
    }
  }
  if (g.grid.values.empty()) {
    g.grid = oracle::ReferenceGrid::sample(
        g.grid.xs, g.grid.ts, p.unknowns(),
        [&p](double x, double t, double* u) { p.reference(x, t, u); });
    if (file) {
      std::filesystem::create_directories(file->parent_path());
      g.grid.save(*file);
    }
  }
  RowMat ref(p.unknowns(), g.pts.cols());
  for (int k = 0; k < p.unknowns(); ++k) {
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) ref(k, j * n + i) = g.grid.values[k](j, i);
    }
  }
  g.reference = std::move(ref);
  return g;
}

std::vector<double> rel_l2(const RowMat& pred, const RowMat& ref) {
  if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) {
    throw ConfigError("rel_l2: prediction and reference shapes differ");
  }
  std::vector<double> out;
  for (Index k = 0; k < ref.rows(); ++k) {
    const double den = ref.row(k).norm();
    if (den == 0.0) throw DomainError("rel_l2: reference has zero norm");
    out.push_back((pred.row(k) - ref.row(k)).norm() / den);
  }
  return out;
}

}  // namespace apinn::problems
