#include "apinn/geometry.hpp"

#include <cmath>
#include <string>

#include "apinn/errors.hpp"

namespace apinn {

bool Box::contains(double x, double t, double tol) const {
  return x >= lo[0] - tol && x <= hi[0] + tol && t >= lo[1] - tol && t <= hi[1] + tol;
}

Normalizer Normalizer::of(const Box& box) {
  Normalizer n;
  for (int a = 0; a < 2; ++a) {
    const double w = box.width(a);
    if (!(w > 0.0)) throw ConfigError("box has non-positive width on axis " + std::to_string(a));
    n.scale[a] = 2.0 / w;
    n.shift[a] = -(box.hi[a] + box.lo[a]) / w;
  }
  return n;
}

std::pair<int, int> Decomposition::owners(double coord) const {
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double tol = 1e-12 * std::max(1.0, std::abs(cuts[i]));
    if (std::abs(coord - cuts[i]) <= tol) return {static_cast<int>(i), static_cast<int>(i) + 1};
    if (coord < cuts[i]) return {static_cast<int>(i), static_cast<int>(i)};
  }
  const int last = static_cast<int>(cuts.size());
  return {last, last};
}

Box Decomposition::slab(const Box& box, int i) const {
  if (i < 0 || i >= pieces()) throw ConfigError("slab index out of range");
  Box b = box;
  if (i > 0) b.lo[axis] = cuts[i - 1];
  if (i < pieces() - 1) b.hi[axis] = cuts[i];
  return b;
}

}  // namespace apinn
