#pragma once

#include <functional>

#include "apinn/oracle/reference_grid.hpp"

namespace apinn::problems {
class Problem;
}

namespace apinn::oracle {

struct ResidualReport {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  Index nodes = 0;
};

/// Finite-difference PDE residual of gridded data on interior nodes.
///
/// Derivatives use fourth-order central differences and assume uniform
/// spacing along each axis; nodes within the stencil margin of the edge are
/// skipped. Nodes for
/// which `keep(x, t)` is false are skipped. Throws ConfigError when the grid
/// is smaller than the stencil or the unknown counts differ.
ResidualReport validate_reference(const problems::Problem& p, const ReferenceGrid& g,
                                  const std::function<bool(double, double)>& keep = {});

}  // namespace apinn::oracle
