#pragma once

#include <array>
#include <utility>
#include <vector>

namespace apinn {

/// Axis-aligned box [lo0, hi0] x [lo1, hi1]. Axis 0 is x; axis 1 is t (or y).
struct Box {
  std::array<double, 2> lo{-1.0, -1.0};
  std::array<double, 2> hi{1.0, 1.0};

  [[nodiscard]] double width(int axis) const { return hi[axis] - lo[axis]; }
  [[nodiscard]] bool contains(double x, double t, double tol = 1e-12) const;
  bool operator==(const Box&) const = default;
};

/// Fixed affine map of a box onto [-1, 1]^2, applied before every network.
struct Normalizer {
  std::array<double, 2> scale{1.0, 1.0};
  std::array<double, 2> shift{0.0, 0.0};

  static Normalizer of(const Box& box);
};

/// Hard split of a box into slabs along one axis at ascending cut positions.
/// Piece i covers [cut[i-1], cut[i]]; a point on a cut belongs to both sides.
struct Decomposition {
  int axis = 0;
  std::vector<double> cuts;

  [[nodiscard]] int pieces() const { return static_cast<int>(cuts.size()) + 1; }
  /// Owning pieces (first, last) of a coordinate along `axis`; equal unless
  /// the coordinate lies on a cut.
  [[nodiscard]] std::pair<int, int> owners(double coord) const;
  /// Slab of piece i inside `box`.
  [[nodiscard]] Box slab(const Box& box, int i) const;
  bool operator==(const Decomposition&) const = default;
};

}  // namespace apinn
