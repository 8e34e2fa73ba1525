#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apinn/diff/tape.hpp"
#include "apinn/geometry.hpp"
#include "apinn/oracle/reference_grid.hpp"

namespace apinn::problems {

using diff::Index;
using diff::RowMat;

inline constexpr int kMaxUnknowns = 2;

/// Dirichlet: u = g. NeumannT: u_t = g (initial velocity).
enum class Condition { Dirichlet, NeumannT };

/// A boundary line {coord[fixed_axis] = value} of the domain.
struct Segment {
  std::string name;
  int fixed_axis = 0;
  double value = 0.0;
  Condition kind = Condition::Dirichlet;
};

/// Point budgets: boundary, residual, and per-interface counts.
struct Budget {
  int boundary = 0;
  int residual = 0;
  int interface = 0;
};

/// Partial derivatives at points: d(k, axis, order) is the order-th pure
/// partial of unknown k along axis (order 0 is the value). T is a tape Var
/// or a double.
template <class T>
struct Derivs {
  virtual ~Derivs() = default;
  virtual T d(int unknown, int axis, int order) const = 0;
};

/// Derivatives of a model output node on a tape.
class TapeDerivs final : public Derivs<diff::Var> {
 public:
  TapeDerivs(diff::Tape& tape, diff::Var u, int unknowns);
  diff::Var d(int unknown, int axis, int order) const override;

 private:
  diff::Tape* tape_;
  diff::Var u_;
  int unknowns_;
  mutable std::map<std::array<int, 3>, diff::Var> cache_;
};

/// Derivatives at a single point supplied as numbers.
class PointDerivs final : public Derivs<double> {
 public:
  /// v[k][axis][order], order 0..3; order 0 should agree across axes.
  std::array<std::array<std::array<double, 4>, 2>, kMaxUnknowns> v{};
  double d(int unknown, int axis, int order) const override { return v[unknown][axis][order]; }
};

/// Benchmark PDE: Lu = f in the box, boundary/initial data on segments.
class Problem {
 public:
  virtual ~Problem() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual Box domain() const = 0;
  [[nodiscard]] virtual int unknowns() const { return 1; }
  /// Jet orders needed by the operator.
  [[nodiscard]] virtual diff::JetLayout residual_layout() const = 0;
  [[nodiscard]] virtual std::vector<Segment> segments() const = 0;

  /// Operator part L u (one entry per equation); the forcing is separate.
  virtual std::vector<diff::Var> apply(const Derivs<diff::Var>& d) const = 0;
  virtual std::vector<double> apply(const Derivs<double>& d) const = 0;
  /// Forcing f at a point, one entry per equation.
  virtual void forcing(double x, double t, double* f) const;

  /// True if reference() can be evaluated.
  [[nodiscard]] virtual bool has_reference() const { return true; }
  /// Reference values; throws NotAvailable when absent.
  virtual void reference(double x, double t, double* u) const = 0;
  /// Boundary target for a segment point; defaults to the reference for
  /// Dirichlet and zero for NeumannT.
  virtual void boundary_value(const Segment& s, double x, double t, double* g) const;
  /// Analytic derivatives of the reference where a closed form exists.
  [[nodiscard]] virtual std::optional<PointDerivs> reference_derivs(double x, double t) const;

  /// Hard decomposition used by XPINN with the given piece count.
  [[nodiscard]] virtual Decomposition decomposition(int pieces) const = 0;
  [[nodiscard]] virtual Budget budget_global() const = 0;
  [[nodiscard]] virtual Budget budget_piece(int pieces) const = 0;

  /// Residual L u - f at points (rows = equations) from a model output node.
  std::vector<diff::Var> residual(diff::Tape& tape, diff::Var u, const RowMat& forcing) const;
  /// Forcing matrix (equations x n) at points.
  [[nodiscard]] RowMat forcing_at(const RowMat& pts) const;
  /// Reference values (unknowns x n); throws NotAvailable when absent.
  [[nodiscard]] RowMat reference_at(const RowMat& pts) const;
};

/// Registered problem names.
std::vector<std::string> problem_names();

/// Problem options (all optional); unknown keys are rejected.
///   helmholtz: a1, a2, k
///   boussinesq: reference_file
using Options = std::map<std::string, std::string>;
std::unique_ptr<Problem> make_problem(const std::string& name, const Options& options = {});

}  // namespace apinn::problems
