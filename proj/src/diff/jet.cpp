#include "apinn/diff/jet.hpp"

#include <algorithm>
#include <string>

#include "apinn/errors.hpp"

namespace apinn::diff {

JetLayout::JetLayout(std::initializer_list<AxisOrder> axes) : axes_(axes) { index(); }

JetLayout::JetLayout(std::vector<AxisOrder> axes) : axes_(std::move(axes)) { index(); }

void JetLayout::index() {
  offsets_.clear();
  streams_ = 1;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto& a = axes_[i];
    if (a.order < 1 || a.order > kMaxOrder) {
      throw UnsupportedOrder("jet order " + std::to_string(a.order) + " outside 1.." +
                             std::to_string(kMaxOrder));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (axes_[j].axis == a.axis) throw ConfigError("duplicate axis in jet layout");
    }
    offsets_.push_back(streams_);
    streams_ += a.order;
  }
}

int JetLayout::find(int axis) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].axis == axis) return static_cast<int>(i);
  }
  return -1;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

double Jet::derivative(int k) const { return coeffs.at(k) * factorial(k); }

Jet Jet::variable(int axis, int order, double x) {
  Jet j{axis, std::vector<double>(order + 1, 0.0)};
  j.coeffs[0] = x;
  if (order >= 1) j.coeffs[1] = 1.0;
  return j;
}

Jet Jet::constant(int axis, int order, double c) {
  Jet j{axis, std::vector<double>(order + 1, 0.0)};
  j.coeffs[0] = c;
  return j;
}

namespace {
void check_compatible(const Jet& a, const Jet& b) {
  if (a.axis != b.axis || a.coeffs.size() != b.coeffs.size()) {
    throw ConfigError("jet arithmetic needs equal axis and order");
  }
}
}  // namespace

Jet operator+(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  Jet r = a;
  for (std::size_t k = 0; k < r.coeffs.size(); ++k) r.coeffs[k] += b.coeffs[k];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  Jet r = a;
  for (std::size_t k = 0; k < r.coeffs.size(); ++k) r.coeffs[k] -= b.coeffs[k];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  Jet r{a.axis, std::vector<double>(a.coeffs.size(), 0.0)};
  for (std::size_t k = 0; k < r.coeffs.size(); ++k) {
    for (std::size_t i = 0; i <= k; ++i) r.coeffs[k] += a.coeffs[i] * b.coeffs[k - i];
  }
  return r;
}

Jet operator*(double s, const Jet& a) {
  Jet r = a;
  for (auto& c : r.coeffs) c *= s;
  return r;
}

}  // namespace apinn::diff
