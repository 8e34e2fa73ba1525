#include <cmath>
#include <random>
#include <string>

#include "apinn/errors.hpp"
#include "apinn/gates/gates.hpp"
#include "doctest.h"

using namespace apinn;
using namespace apinn::gates;
using models::GateForm;
using models::GateNet;
using models::RowMat;

namespace {

GateNet fresh_gate(int m, const Box& domain, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const GateForm form = m == 2 ? GateForm::Sigmoid : GateForm::Softmax;
  return GateNet::make(form, m, 2, 20, Normalizer::of(domain), rng);
}

}  // namespace

TEST_CASE("every registered target sums to one on its domain") {
  for (const std::string& name : target_names()) {
    CAPTURE(name);
    const GateTarget t = target(name);
    const RowMat v = t.at(grid_points(t.domain, 64));
    REQUIRE(v.rows() == t.m);
    CHECK((v.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(v.minCoeff() >= 0.0);
  }
}

TEST_CASE("burgers-X closed form at the ends of the domain") {
  const GateTarget t = target("burgers-X");
  RowMat pts(2, 2);
  pts << 1.0, -1.0, 0.3, 0.7;
  const RowMat v = t.at(pts);
  CHECK(v(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v(1, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(v(0, 1) == doctest::Approx(0.1353352832366127).epsilon(1e-14));
  CHECK(v(1, 1) == doctest::Approx(0.8646647167633873).epsilon(1e-14));
}

TEST_CASE("four-way Boussinesq target is the normalized exponential family") {
  const GateTarget t = target("bb4-X");
  double out[4];
  for (double tt : {-3.0, -1.0, 0.0, 1.5}) {
    t.eval(2.0, tt, out);
    const double u[4] = {std::exp(tt - 2), std::exp(-std::abs(tt - 1.0 / 3)),
                         std::exp(-std::abs(tt + 4.0 / 3)), std::exp(-3 - tt)};
    const double s = u[0] + u[1] + u[2] + u[3];
    for (int i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(u[i] / s).epsilon(1e-14));
  }
}

TEST_CASE("unknown target names the registered ones") {
  try {
    (void)target("no-such-gate");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const std::string& n : target_names()) CHECK(msg.find(n) != std::string::npos);
  }
}

TEST_CASE("pretrain rejects a component-count mismatch") {
  const GateTarget t = target("bb4-M");
  CHECK_THROWS_AS((void)pretrain(fresh_gate(2, t.domain, 1), t, t.domain), ConfigError);
}

TEST_CASE("constant 0.8 target fits within 0.01 pointwise") {
  const GateTarget t = target("burgers-M");
  const PretrainResult r = pretrain(fresh_gate(2, t.domain, 3), t, t.domain);
  CHECK(r.converged);
  CHECK(r.validation_mse <= 1e-4);
  const RowMat pts = grid_points(t.domain, 101);
  const RowMat dev = (r.gate.values(pts) - t.at(pts)).cwiseAbs();
  CHECK(dev.maxCoeff() <= 0.01);
  // The sigmoid form carries the second component for free.
  CHECK((r.gate.values(pts).colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("exp(y-1) target on [-1,1]^2 reaches validation MSE 1e-4") {
  const GateTarget t = target("helmholtz-X");
  CHECK(t.domain.lo[0] == -1.0);
  CHECK(t.domain.hi[1] == 1.0);
  const PretrainResult r = pretrain(fresh_gate(2, t.domain, 5), t, t.domain);
  CHECK(r.validation_mse <= 1e-4);
  CHECK(r.validation_mse == doctest::Approx(gate_mse(r.gate, t, grid_points(t.domain, 101))));
}

TEST_CASE("pretraining an already fitted gate is a no-op") {
  const GateTarget t = target("burgers-M");
  const PretrainResult first = pretrain(fresh_gate(2, t.domain, 3), t, t.domain);
  const PretrainResult again = pretrain(first.gate, t, t.domain);
  CHECK(again.epochs == 0);
  CHECK(again.validation_mse == first.validation_mse);
  std::vector<double> a(first.gate.parameter_count()), b(a.size());
  first.gate.net.write_parameters(a);
  again.gate.net.write_parameters(b);
  CHECK(a == b);
}

TEST_CASE("non-convergence is reported, not thrown") {
  const GateTarget t = target("burgers-X");
  PretrainConfig cfg;
  cfg.max_epochs = 3;
  const PretrainResult r = pretrain(fresh_gate(2, t.domain, 1), t, t.domain, cfg);
  CHECK(r.epochs == 3);
  CHECK_FALSE(r.converged);
}
