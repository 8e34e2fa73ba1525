#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace apinn::diff {

inline constexpr int kMaxOrder = 3;

/// Pure-partial Taylor order requested along one input coordinate.
struct AxisOrder {
  int axis = 0;
  int order = 1;
  friend bool operator==(const AxisOrder&, const AxisOrder&) = default;
};

/// Describes how the streams of a jet block are laid out.
///
/// Stream 0 is the plain value and is shared by every axis. Each listed axis
/// then contributes `order` streams holding its Taylor coefficients 1..order.
/// An empty layout is a value-only block.
class JetLayout {
 public:
  JetLayout() = default;
  JetLayout(std::initializer_list<AxisOrder> axes);
  explicit JetLayout(std::vector<AxisOrder> axes);

  [[nodiscard]] int streams() const { return streams_; }
  [[nodiscard]] int slots() const { return static_cast<int>(axes_.size()); }
  [[nodiscard]] const std::vector<AxisOrder>& axes() const { return axes_; }
  [[nodiscard]] int order(int slot) const { return axes_[slot].order; }
  [[nodiscard]] int axis(int slot) const { return axes_[slot].axis; }
  /// Slot holding `axis`, or -1.
  [[nodiscard]] int find(int axis) const;
  /// Stream index of coefficient k (k = 0 is the value).
  [[nodiscard]] int stream(int slot, int k) const { return k == 0 ? 0 : offsets_[slot] + k - 1; }
  [[nodiscard]] bool value_only() const { return axes_.empty(); }

  friend bool operator==(const JetLayout& a, const JetLayout& b) { return a.axes_ == b.axes_; }

 private:
  void index();

  std::vector<AxisOrder> axes_;
  std::vector<int> offsets_;
  int streams_ = 1;
};

/// Truncated Taylor series of a scalar along one coordinate axis.
///
/// coeffs[k] is the k-th Taylor coefficient, so the k-th derivative equals
/// coeffs[k] * k!. Arithmetic is closed for jets of equal axis and order.
struct Jet {
  int axis = 0;
  std::vector<double> coeffs;

  [[nodiscard]] int order() const { return static_cast<int>(coeffs.size()) - 1; }
  [[nodiscard]] double value() const { return coeffs[0]; }
  [[nodiscard]] double derivative(int k) const;

  static Jet variable(int axis, int order, double x);
  static Jet constant(int axis, int order, double c);
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);

[[nodiscard]] double factorial(int k);

}  // namespace apinn::diff
