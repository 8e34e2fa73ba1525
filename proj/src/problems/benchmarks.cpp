#include <cmath>
#include <numbers>
#include <string>

#include "apinn/errors.hpp"
#include "apinn/oracle/cole_hopf.hpp"
#include "apinn/problems/problem.hpp"

namespace apinn::problems {
namespace {

using diff::AxisOrder;
using diff::JetLayout;
using diff::Var;
using std::numbers::pi;

constexpr int X = 0;
constexpr int T = 1;

Decomposition single_cut(int pieces, int axis, double cut, const std::string& name) {
  if (pieces != 2) {
    throw ConfigError(name + " defines a two-piece decomposition only, got " +
                      std::to_string(pieces));
  }
  return Decomposition{axis, {cut}};
}

double parse_option(const Options& o, const std::string& key, double fallback) {
  auto it = o.find(key);
  return it == o.end() ? fallback : std::stod(it->second);
}

// u_t + u u_x - (0.01 / pi) u_xx = 0 on [-1, 1] x [0, 1].
class Burgers final : public Problem {
 public:
  std::string name() const override { return "burgers"; }
  Box domain() const override { return Box{{-1, 0}, {1, 1}}; }
  JetLayout residual_layout() const override { return JetLayout{{X, 2}, {T, 1}}; }
  std::vector<Segment> segments() const override {
    return {{"initial", T, 0.0, Condition::Dirichlet},
            {"left", X, -1.0, Condition::Dirichlet},
            {"right", X, 1.0, Condition::Dirichlet}};
  }
  template <class V>
  std::vector<V> op(const Derivs<V>& d) const {
    const double nu = 0.01 / pi;
    return {d.d(0, T, 1) + d.d(0, X, 0) * d.d(0, X, 1) - nu * d.d(0, X, 2)};
  }
  std::vector<Var> apply(const Derivs<Var>& d) const override { return op(d); }
  std::vector<double> apply(const Derivs<double>& d) const override { return op(d); }
  void reference(double x, double t, double* u) const override {
    u[0] = oracle::burgers_exact(x, t);
  }
  void boundary_value(const Segment& s, double x, double, double* g) const override {
    g[0] = s.fixed_axis == T ? -std::sin(pi * x) : 0.0;
  }
  Decomposition decomposition(int pieces) const override {
    return single_cut(pieces, X, 0.0, name());
  }
  Budget budget_global() const override { return {300, 20000, 0}; }
  Budget budget_piece(int pieces) const override {
    (void)decomposition(pieces);
    return {150, 10000, 1000};
  }
};

// u_xx + u_yy + k^2 u = q on [-1, 1]^2, u = sin(a1 pi x) sin(a2 pi y).
class Helmholtz final : public Problem {
 public:
  Helmholtz(double a1, double a2, double k) : a1_(a1), a2_(a2), k_(k) {}
  std::string name() const override { return "helmholtz"; }
  Box domain() const override { return Box{{-1, -1}, {1, 1}}; }
  JetLayout residual_layout() const override { return JetLayout{{X, 2}, {T, 2}}; }
  std::vector<Segment> segments() const override {
    return {{"left", X, -1.0, Condition::Dirichlet},
            {"right", X, 1.0, Condition::Dirichlet},
            {"bottom", T, -1.0, Condition::Dirichlet},
            {"top", T, 1.0, Condition::Dirichlet}};
  }
  template <class V>
  std::vector<V> op(const Derivs<V>& d) const {
    return {d.d(0, X, 2) + d.d(0, T, 2) + (k_ * k_) * d.d(0, X, 0)};
  }
  std::vector<Var> apply(const Derivs<Var>& d) const override { return op(d); }
  std::vector<double> apply(const Derivs<double>& d) const override { return op(d); }
  void forcing(double x, double y, double* f) const override {
    const double c = -(a1_ * pi) * (a1_ * pi) - (a2_ * pi) * (a2_ * pi) + k_ * k_;
    f[0] = c * std::sin(a1_ * pi * x) * std::sin(a2_ * pi * y);
  }
  void reference(double x, double y, double* u) const override {
    u[0] = std::sin(a1_ * pi * x) * std::sin(a2_ * pi * y);
  }
  std::optional<PointDerivs> reference_derivs(double x, double y) const override {
    const double w1 = a1_ * pi, w2 = a2_ * pi;
    const double sx = std::sin(w1 * x), cx = std::cos(w1 * x);
    const double sy = std::sin(w2 * y), cy = std::cos(w2 * y);
    PointDerivs p;
    p.v[0][X] = {sx * sy, w1 * cx * sy, -w1 * w1 * sx * sy, -w1 * w1 * w1 * cx * sy};
    p.v[0][T] = {sx * sy, w2 * sx * cy, -w2 * w2 * sx * sy, -w2 * w2 * w2 * sx * cy};
    return p;
  }
  Decomposition decomposition(int pieces) const override {
    return single_cut(pieces, T, 0.0, name());
  }
  Budget budget_global() const override { return {400, 10000, 0}; }
  Budget budget_piece(int pieces) const override {
    (void)decomposition(pieces);
    return {200, 5000, 400};
  }

 private:
  double a1_, a2_, k_;
};

// Shared geometry of the Klein-Gordon and wave problems on [0, 1]^2 with
// value and velocity prescribed at t = 0.
class UnitSquareInitialValue : public Problem {
 public:
  Box domain() const override { return Box{{0, 0}, {1, 1}}; }
  JetLayout residual_layout() const override { return JetLayout{{X, 2}, {T, 2}}; }
  std::vector<Segment> segments() const override {
    return {{"left", X, 0.0, Condition::Dirichlet},
            {"right", X, 1.0, Condition::Dirichlet},
            {"initial", T, 0.0, Condition::Dirichlet},
            {"initial_velocity", T, 0.0, Condition::NeumannT}};
  }
  Budget budget_global() const override { return {400, 10000, 0}; }
  Budget budget_piece(int pieces) const override {
    (void)decomposition(pieces);
    return {200, 5000, 400};
  }
};

// u_tt - u_xx + u^3 = f, u = x cos(5 pi t) + (x t)^3.
class KleinGordon final : public UnitSquareInitialValue {
 public:
  std::string name() const override { return "klein_gordon"; }
  template <class V>
  std::vector<V> op(const Derivs<V>& d) const {
    const V u = d.d(0, X, 0);
    return {d.d(0, T, 2) - d.d(0, X, 2) + u * u * u};
  }
  std::vector<Var> apply(const Derivs<Var>& d) const override { return op(d); }
  std::vector<double> apply(const Derivs<double>& d) const override { return op(d); }
  void forcing(double x, double t, double* f) const override {
    const PointDerivs p = *reference_derivs(x, t);
    const double u = p.v[0][X][0];
    f[0] = p.v[0][T][2] - p.v[0][X][2] + u * u * u;
  }
  void reference(double x, double t, double* u) const override {
    u[0] = x * std::cos(5 * pi * t) + std::pow(x * t, 3);
  }
  std::optional<PointDerivs> reference_derivs(double x, double t) const override {
    const double w = 5 * pi;
    const double c = std::cos(w * t), s = std::sin(w * t);
    const double u = x * c + x * x * x * t * t * t;
    PointDerivs p;
    p.v[0][X] = {u, c + 3 * x * x * t * t * t, 6 * x * t * t * t, 6 * t * t * t};
    p.v[0][T] = {u, -w * x * s + 3 * x * x * x * t * t, -w * w * x * c + 6 * x * x * x * t,
                 w * w * w * x * s + 6 * x * x * x};
    return p;
  }
  Decomposition decomposition(int pieces) const override {
    return single_cut(pieces, X, 0.5, name());
  }
};

// u_tt = 4 u_xx, u = sin(pi x) cos(2 pi t).
class Wave final : public UnitSquareInitialValue {
 public:
  std::string name() const override { return "wave"; }
  template <class V>
  std::vector<V> op(const Derivs<V>& d) const {
    return {d.d(0, T, 2) - 4.0 * d.d(0, X, 2)};
  }
  std::vector<Var> apply(const Derivs<Var>& d) const override { return op(d); }
  std::vector<double> apply(const Derivs<double>& d) const override { return op(d); }
  void reference(double x, double t, double* u) const override {
    u[0] = std::sin(pi * x) * std::cos(2 * pi * t);
  }
  std::optional<PointDerivs> reference_derivs(double x, double t) const override {
    const double sx = std::sin(pi * x), cx = std::cos(pi * x);
    const double w = 2 * pi;
    const double ct = std::cos(w * t), st = std::sin(w * t);
    PointDerivs p;
    p.v[0][X] = {sx * ct, pi * cx * ct, -pi * pi * sx * ct, -pi * pi * pi * cx * ct};
    p.v[0][T] = {sx * ct, -w * sx * st, -w * w * sx * ct, w * w * w * sx * st};
    return p;
  }
  Decomposition decomposition(int pieces) const override {
    return single_cut(pieces, T, 0.5, name());
  }
};

// u_t = 2 u u_x + v_x / 2, v_t = v_xxx / 2 + 2 (u v)_x on [-10, 15] x [-3, 2].
// Reference and Dirichlet data come from an external grid file.
class BoussinesqBurgers final : public Problem {
 public:
  explicit BoussinesqBurgers(std::string file) : file_(std::move(file)) {
    if (file_.empty()) return;
    try {
      grid_ = oracle::ReferenceGrid::load(file_);
    } catch (const NotAvailable&) {
      grid_.reset();
    }
    if (grid_ && grid_->unknowns() != 2) {
      throw ConfigError("Boussinesq-Burgers reference grid must have columns x,t,u,v");
    }
  }
  std::string name() const override { return "boussinesq_burgers"; }
  Box domain() const override { return Box{{-10, -3}, {15, 2}}; }
  int unknowns() const override { return 2; }
  JetLayout residual_layout() const override { return JetLayout{{X, 3}, {T, 1}}; }
  std::vector<Segment> segments() const override {
    return {{"left", X, -10.0, Condition::Dirichlet},
            {"right", X, 15.0, Condition::Dirichlet},
            {"initial", T, -3.0, Condition::Dirichlet}};
  }
  template <class V>
  std::vector<V> op(const Derivs<V>& d) const {
    const V u = d.d(0, X, 0);
    const V v = d.d(1, X, 0);
    const V ux = d.d(0, X, 1);
    const V vx = d.d(1, X, 1);
    return {d.d(0, T, 1) - 2.0 * (u * ux) - 0.5 * vx,
            d.d(1, T, 1) - 0.5 * d.d(1, X, 3) - 2.0 * (ux * v + u * vx)};
  }
  std::vector<Var> apply(const Derivs<Var>& d) const override { return op(d); }
  std::vector<double> apply(const Derivs<double>& d) const override { return op(d); }
  bool has_reference() const override { return grid_.has_value(); }
  void reference(double x, double t, double* u) const override {
    if (!grid_) {
      throw NotAvailable("Boussinesq-Burgers reference grid not available" +
                         (file_.empty() ? std::string(" (no reference_file given)")
                                        : " at " + file_));
    }
    u[0] = grid_->interpolate(0, x, t);
    u[1] = grid_->interpolate(1, x, t);
  }
  Decomposition decomposition(int pieces) const override {
    if (pieces == 2) return Decomposition{T, {-0.5}};
    if (pieces == 4) return Decomposition{T, {-1.75, -0.5, 0.75}};
    throw ConfigError("boussinesq_burgers defines 2- and 4-piece decompositions, got " +
                      std::to_string(pieces));
  }
  Budget budget_global() const override { return {400, 10000, 0}; }
  Budget budget_piece(int pieces) const override {
    (void)decomposition(pieces);
    return pieces == 2 ? Budget{200, 5000, 400} : Budget{100, 2500, 400};
  }

 private:
  std::string file_;
  std::optional<oracle::ReferenceGrid> grid_;
};

void reject_unknown(const Options& o, std::initializer_list<const char*> allowed,
                    const std::string& problem) {
  for (const auto& [k, v] : o) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown option '" + k + "' for problem " + problem);
  }
}

}  // namespace

std::vector<std::string> problem_names() {
  return {"burgers", "helmholtz", "klein_gordon", "wave", "boussinesq_burgers"};
}

std::unique_ptr<Problem> make_problem(const std::string& name, const Options& o) {
  if (name == "burgers") {
    reject_unknown(o, {}, name);
    return std::make_unique<Burgers>();
  }
  if (name == "helmholtz") {
    reject_unknown(o, {"a1", "a2", "k"}, name);
    return std::make_unique<Helmholtz>(parse_option(o, "a1", 1.0), parse_option(o, "a2", 4.0),
                                       parse_option(o, "k", 1.0));
  }
  if (name == "klein_gordon") {
    reject_unknown(o, {}, name);
    return std::make_unique<KleinGordon>();
  }
  if (name == "wave") {
    reject_unknown(o, {}, name);
    return std::make_unique<Wave>();
  }
  if (name == "boussinesq_burgers") {
    reject_unknown(o, {"reference_file"}, name);
    auto it = o.find("reference_file");
    return std::make_unique<BoussinesqBurgers>(it == o.end() ? "" : it->second);
  }
  std::string msg = "unknown problem '" + name + "'; registered:";
  for (const auto& n : problem_names()) msg += " " + n;
  throw ConfigError(msg);
}

}  // namespace apinn::problems
