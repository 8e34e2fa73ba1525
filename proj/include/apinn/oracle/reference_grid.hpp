#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "apinn/diff/kernels.hpp"

namespace apinn::oracle {

using diff::Index;
using diff::RowMat;

/// Values of one or two unknowns on a rectilinear (x, t) grid.
///
/// CSV form: header `x,t,u` or `x,t,u,v`, one row per node, t outer and
/// x inner. `values[k]` is nt x nx.
struct ReferenceGrid {
  std::vector<double> xs;
  std::vector<double> ts;
  std::vector<RowMat> values;

  [[nodiscard]] int unknowns() const { return static_cast<int>(values.size()); }
  [[nodiscard]] Index nx() const { return static_cast<Index>(xs.size()); }
  [[nodiscard]] Index nt() const { return static_cast<Index>(ts.size()); }

  /// Samples f(x, t, out) with out sized to `unknowns`.
  static ReferenceGrid sample(const std::vector<double>& xs, const std::vector<double>& ts,
                              int unknowns,
                              const std::function<void(double, double, double*)>& f);
  /// Throws NotAvailable when the file is missing, ConfigError when it is
  /// malformed or not rectilinear.
  static ReferenceGrid load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Bilinear interpolation; throws DomainError outside the grid.
  [[nodiscard]] double interpolate(int k, double x, double t) const;
};

std::vector<double> linspace(double a, double b, Index n);

}  // namespace apinn::oracle
