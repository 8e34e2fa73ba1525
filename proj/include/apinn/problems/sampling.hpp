#pragma once

#include <cstdint>
#include <vector>

#include "apinn/problems/problem.hpp"

namespace apinn::problems {

/// Boundary collocation points split by condition kind. Targets are
/// unknowns x n, points 2 x n.
struct BoundaryPoints {
  RowMat dirichlet_pts{2, 0};
  RowMat dirichlet_vals;
  RowMat neumann_pts{2, 0};
  RowMat neumann_vals;

  [[nodiscard]] Index size() const { return dirichlet_pts.cols() + neumann_pts.cols(); }
};

/// Points of one region (the whole domain or one XPINN slab).
struct RegionPoints {
  Box box;
  BoundaryPoints boundary;
  RowMat residual{2, 0};
  RowMat forcing;
};

/// Points on the cut between pieces `left` and `left + 1`.
struct InterfacePoints {
  int left = 0;
  RowMat pts{2, 0};
  RowMat forcing;
};

enum class Sampler { Uniform, LatinHypercube };

struct SampleOptions {
  std::uint64_t seed = 0;
  Sampler sampler = Sampler::Uniform;
  /// Residual budget divisor (desk presets).
  int residual_divisor = 1;
};

/// Global variant: one region covering the domain.
/// Per-subdomain variant: one region per slab plus one interface per cut.
struct PointSet {
  std::vector<RegionPoints> regions;
  std::vector<InterfacePoints> interfaces;
  std::uint64_t seed = 0;
};

/// Splits `total` over `weights` in proportion using largest remainders
/// (ties to the lower index).
std::vector<int> split_budget(int total, const std::vector<double>& weights);

PointSet sample_global(const Problem& p, const SampleOptions& opt);
PointSet sample_pieces(const Problem& p, int pieces, const SampleOptions& opt);

/// Boundary points on the segments of `p` clipped to `box`. When `p` has no
/// reference data the Dirichlet set is left empty.
BoundaryPoints sample_boundary(const Problem& p, const Box& box, int count, std::uint64_t seed);

/// Points strictly inside `box`.
RowMat sample_interior(const Box& box, int count, Sampler s, std::uint64_t seed);

}  // namespace apinn::problems
