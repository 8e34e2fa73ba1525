#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "apinn/problems/problem.hpp"

namespace apinn::problems {

inline constexpr int kEvalGridSize = 256;

/// Uniform n x n evaluation grid over the domain, t outer and x inner, with
/// the reference sampled once. `reference` is empty when unavailable.
struct EvalGrid {
  oracle::ReferenceGrid grid;
  RowMat pts;
  std::optional<RowMat> reference;
};

/// Builds the grid. With a cache directory the reference is read from
/// `<dir>/<problem>_ref_<n>.csv` when present and written there otherwise.
EvalGrid make_eval_grid(const Problem& p, int n = kEvalGridSize,
                        const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// ||pred_k - ref_k|| / ||ref_k|| for each unknown row.
std::vector<double> rel_l2(const RowMat& pred, const RowMat& ref);

}  // namespace apinn::problems
