#include <Eigen/SVD>
#include <cmath>
#include <filesystem>
#include <random>

#include "apinn/errors.hpp"
#include "apinn/models/checkpoint.hpp"
#include "apinn/models/complexity.hpp"
#include "apinn/models/model.hpp"
#include "doctest.h"
#include "support/fd.hpp"

using namespace apinn;
using namespace apinn::models;
using diff::JetLayout;
using diff::Tape;
using diff::Var;

namespace {

ModelSpec pinn_spec() {
  ModelSpec s;
  s.kind = Kind::Pinn;
  s.domain = Box{{-1, 0}, {1, 1}};
  return s;
}

ModelSpec xpinn_spec(int unknowns = 1, std::vector<double> cuts = {0.0}, int depth = 6) {
  ModelSpec s;
  s.kind = Kind::Xpinn;
  s.unknowns = unknowns;
  s.domain = Box{{-1, 0}, {1, 1}};
  s.depth = depth;
  s.decomposition = Decomposition{0, std::move(cuts)};
  return s;
}

ModelSpec apinn_spec(bool trainable = true) {
  ModelSpec s;
  s.kind = Kind::Apinn;
  s.domain = Box{{-1, 0}, {1, 1}};
  s.depth = 4;
  s.shared_depth = 3;
  s.gate_depth = 2;
  s.gate_trainable = trainable;
  return s;
}

RowMat random_points(std::mt19937_64& rng, Index n, const Box& box) {
  std::uniform_real_distribution<double> u(0, 1);
  RowMat p(2, n);
  for (Index i = 0; i < n; ++i) {
    p(0, i) = box.lo[0] + box.width(0) * u(rng);
    p(1, i) = box.lo[1] + box.width(1) * u(rng);
  }
  return p;
}

// Copies subnet 0 into every other subnet of an APINN.
Model with_identical_subnets(const Model& m) {
  std::vector<Component> parts = m.components();
  const diff::DenseNet* first = nullptr;
  for (auto& c : parts) {
    if (c.name.rfind("e", 0) != 0) continue;
    if (!first) {
      first = &c.net;
    } else {
      c.net = *first;
    }
  }
  return Model::assemble(m.spec(), parts);
}

}  // namespace

TEST_CASE("parameter counts of the benchmark configurations") {
  CHECK(Model::build(pinn_spec(), 1).parameter_count() == 3441);
  CHECK(Model::build(xpinn_spec(), 1).parameter_count() == 3522);
  CHECK(Model::build(apinn_spec(false), 1).parameter_count() == 3462);
  CHECK(Model::build(apinn_spec(true), 1).parameter_count() == 3543);
  CHECK(Model::build(apinn_spec(false), 1).total_parameter_count() == 3543);

  ModelSpec bb = pinn_spec();
  bb.unknowns = 2;
  CHECK(Model::build(bb, 1).parameter_count() == 6882);
  CHECK(Model::build(xpinn_spec(2, {-0.5}), 1).parameter_count() == 7044);
  CHECK(Model::build(xpinn_spec(2, {-1.75, -0.5, 0.75}, 4), 1).parameter_count() == 7368);
  ModelSpec ab = apinn_spec(true);
  ab.unknowns = 2;
  ab.shared_depth = 5;
  CHECK(Model::build(ab, 1).parameter_count() == 6945);

  // Four-way APINN as described in prose: h 20 wide / 3 deep, subnets 18 wide
  // / 4 deep, 4-output softmax gate.
  ModelSpec a4 = ab;
  a4.shared_depth = 3;
  a4.width = 18;
  a4.m = 4;
  a4.gate_form = GateForm::Softmax;
  CHECK(Model::build(a4, 1).parameter_count() == 900 + 8 * 1081 + 144);
}

TEST_CASE("build is deterministic in the seed") {
  const Model a = Model::build(apinn_spec(), 42);
  const Model b = Model::build(apinn_spec(), 42);
  const Model c = Model::build(apinn_spec(), 43);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  auto bad = apinn_spec();
  bad.gate_form = GateForm::Sigmoid;
  bad.m = 3;
  CHECK_THROWS_AS(Model::build(bad, 1), ConfigError);
  CHECK_THROWS_AS(Model::build(xpinn_spec(1, {}), 1), ConfigError);
}

TEST_CASE("gate outputs lie on the simplex") {
  std::mt19937_64 rng(9);
  const Box box{{-1, -1}, {1, 1}};
  const RowMat pts = random_points(rng, 1000000, box);
  for (GateForm form : {GateForm::Sigmoid, GateForm::Softmax}) {
    const int m = form == GateForm::Sigmoid ? 2 : 4;
    const GateNet g = GateNet::make(form, m, 2, 20, Normalizer::of(box), rng);
    const RowMat v = g.values(pts);
    CHECK(v.rows() == m);
    const double worst = (v.colwise().sum().array() - 1.0).abs().maxCoeff();
    CHECK(worst < 1e-12);
    CHECK(v.minCoeff() >= 0.0);
    CHECK(v.maxCoeff() <= 1.0);
  }
  CHECK(GateNet::make(GateForm::Sigmoid, 2, 2, 20, Normalizer::of(box), rng).parameter_count() ==
        81);
}

TEST_CASE("identical subnets make the output gate-independent") {
  std::mt19937_64 rng(5);
  for (GateForm form : {GateForm::Sigmoid, GateForm::Softmax}) {
    ModelSpec s = apinn_spec();
    s.gate_form = form;
    s.m = form == GateForm::Sigmoid ? 2 : 4;
    const Model m = with_identical_subnets(Model::build(s, 3));
    const RowMat pts = random_points(rng, 2000, s.domain);
    const RowMat u = m.predict(pts);
    // E(h(x)) directly.
    Tape tape;
    const Var z = m.input(tape, pts, JetLayout{});
    const Component& h = m.component("h");
    const Component& e = m.component("e0.u0");
    const RowMat direct = tape.block(e.net.apply(tape, h.net.apply(tape, z, -1), -1)).data;
    CHECK((u - direct).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gate fixed at one corner or at one half") {
  ModelSpec s = apinn_spec();
  Model m = Model::build(s, 11);
  std::mt19937_64 rng(2);
  const RowMat pts = random_points(rng, 500, s.domain);

  GateNet zero = m.gate();
  for (auto& l : zero.net.layers()) {
    l.weight.setZero();
    l.bias.setZero();
  }
  m.set_gate(zero);
  Tape tape;
  const Var z = m.input(tape, pts, JetLayout{});
  const Var feats = m.component("h").net.apply(tape, z, -1);
  const RowMat e0 = tape.block(m.component("e0.u0").net.apply(tape, feats, -1)).data;
  const RowMat e1 = tape.block(m.component("e1.u0").net.apply(tape, feats, -1)).data;
  CHECK((m.predict(pts) - 0.5 * (e0 + e1)).cwiseAbs().maxCoeff() < 1e-14);

  // A huge positive bias saturates the sigmoid: gate = (1, 0).
  GateNet one = zero;
  one.net.layers().back().bias[0] = 800.0;
  m.set_gate(one);
  CHECK((m.predict(pts) - e0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sharing inside with identity h equals no sharing") {
  ModelSpec inside = apinn_spec();
  inside.sharing = Sharing::ShareInside;
  inside.shared_depth = 1;
  inside.shared_width = 2;
  ModelSpec none = inside;
  none.sharing = Sharing::NoShare;
  const Model a = Model::build(none, 21);
  std::vector<Component> parts;
  Component h{"h", diff::DenseNet::zeros(std::vector<int>{2, 2}), {}, -1};
  h.net.layers()[0].weight.setIdentity();
  parts.push_back(h);
  for (const auto& c : a.components()) parts.push_back(c);
  const Model b = Model::assemble(inside, parts);
  std::mt19937_64 rng(1);
  const RowMat pts = random_points(rng, 300, inside.domain);
  CHECK((a.predict(pts) - b.predict(pts)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sharing outside wires h after the gated sum") {
  ModelSpec s = apinn_spec();
  s.sharing = Sharing::ShareOutside;
  const Model m = Model::build(s, 4);
  RowMat pt(2, 1);
  pt << 0.3, 0.6;
  Tape tape;
  const Var z = m.input(tape, pt, JetLayout{});
  const RowMat g = tape.block(m.gate_rows(tape, z)).data;
  const RowMat e0 = tape.block(m.component("e0").net.apply(tape, z, -1)).data;
  const RowMat e1 = tape.block(m.component("e1").net.apply(tape, z, -1)).data;
  const RowMat mix = g(0, 0) * e0 + g(1, 0) * e1;
  const double x = m.component("h").net.forward(std::vector<double>(mix.data(), mix.data() + mix.size()))(0);
  CHECK(m.predict(pt)(0, 0) == doctest::Approx(x).epsilon(1e-13));
}

TEST_CASE("second derivative of the gated model follows the product rule") {
  ModelSpec s = apinn_spec();
  const Model m = Model::build(s, 8);
  std::mt19937_64 rng(3);
  const RowMat pts = random_points(rng, 64, s.domain);
  for (int axis = 0; axis < 2; ++axis) {
    Tape tape;
    const JetLayout lay{{axis, 2}};
    const Var z = m.input(tape, pts, lay);
    const Var u = m.evaluate(tape, z);
    const Var g = m.gate_rows(tape, z);
    const Var feats = m.component("h").net.apply(tape, z, -1);
    RowMat assembled = RowMat::Zero(1, pts.cols());
    for (int j = 0; j < 2; ++j) {
      const Var e = m.component("e" + std::to_string(j) + ".u0").net.apply(tape, feats, -1);
      const Var gj = tape.row(g, j);
      const RowMat g0 = tape.block(tape.derivative(gj, axis, 0)).data;
      const RowMat g1 = tape.block(tape.derivative(gj, axis, 1)).data;
      const RowMat g2 = tape.block(tape.derivative(gj, axis, 2)).data;
      const RowMat e0 = tape.block(tape.derivative(e, axis, 0)).data;
      const RowMat e1 = tape.block(tape.derivative(e, axis, 1)).data;
      const RowMat e2 = tape.block(tape.derivative(e, axis, 2)).data;
      assembled.array() += g2.array() * e0.array() + 2.0 * g1.array() * e1.array() +
                           g0.array() * e2.array();
    }
    const RowMat uxx = tape.block(tape.derivative(u, axis, 2)).data;
    for (Index p = 0; p < pts.cols(); ++p) {
      CHECK(apinn::testing::rel_err(uxx(0, p), assembled(0, p), 1e-12) < 1e-12);
    }
  }
}

TEST_CASE("XPINN routing") {
  const Model m = Model::build(xpinn_spec(), 6);
  RowMat pts(2, 3);
  pts << -0.3, 0.4, 0.0, 0.5, 0.5, 0.5;
  const RowMat u = m.predict(pts);
  Tape tape;
  const Var z = m.input(tape, pts, JetLayout{});
  const RowMat left = tape.block(m.evaluate(tape, z, 0)).data;
  const RowMat right = tape.block(m.evaluate(tape, z, 1)).data;
  CHECK(u(0, 0) == left(0, 0));
  CHECK(u(0, 1) == right(0, 1));
  CHECK(u(0, 2) == doctest::Approx(0.5 * (left(0, 2) + right(0, 2))));

  RowMat outside(2, 1);
  outside << 1.5, 0.5;
  CHECK_THROWS_AS((void)m.predict(outside), DomainError);

  // Identical subnets: continuous across the interface.
  std::vector<Component> parts = m.components();
  parts[1].net = parts[0].net;
  const Model same = Model::assemble(m.spec(), parts);
  RowMat near(2, 2);
  near << -1e-9, 1e-9, 0.3, 0.3;
  const RowMat v = same.predict(near);
  CHECK(std::abs(v(0, 0) - v(0, 1)) < 1e-7);
}

TEST_CASE("complexity: trivial cases") {
  diff::DenseNet id = diff::DenseNet::zeros(std::vector<int>{20, 20, 20});
  for (auto& l : id.layers()) l.weight.setIdentity();
  const ComplexityReport r = complexity(id, id);
  for (const auto& l : r.layers) {
    CHECK(l.M == 1);
    CHECK(l.N == 0);
  }
  for (double v : r.R) CHECK(v == 0.0);
  CHECK(r_values({1, 1, 1}, {0, 0, 0}) == std::array<double, 3>{0, 0, 0});
  CHECK(snapped_ceil(2.000000000001) == 2);
  CHECK(snapped_ceil(2.01) == 3);
}

TEST_CASE("complexity matches a dense SVD oracle") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const diff::DenseNet init = apinn::testing::random_net(rng, 2 + trial % 5, 5 + trial % 16);
    diff::DenseNet net = init;
    for (auto& l : net.layers()) {
      for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] += noise(rng);
    }
    const ComplexityReport rep = complexity(net, init);
    std::vector<long long> M, N;
    for (int l = 0; l < net.depth(); ++l) {
      const diff::RowMat w = net.layers()[l].weight;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
      const double s = svd.singularValues()(0);
      const diff::RowMat diffm = w - init.layers()[l].weight;
      double d = 0.0;
      for (Index c = 0; c < diffm.cols(); ++c) d += std::sqrt(diffm.col(c).squaredNorm());
      M.push_back(static_cast<long long>(std::ceil(s)));
      N.push_back(static_cast<long long>(std::ceil(d / s)));
      CHECK(rep.layers[l].M == M.back());
      CHECK(rep.layers[l].N == N.back());
      CHECK(rep.layers[l].spectral_norm == doctest::Approx(s).epsilon(1e-9));
    }
    double prod = 1.0, sum = 0.0;
    for (auto v : M) prod *= static_cast<double>(v);
    for (auto v : N) sum += std::cbrt(static_cast<double>(v) * static_cast<double>(v));
    for (int i = 0; i < 3; ++i) {
      CHECK(rep.R[i] == doctest::Approx(std::pow(prod, i + 1) * std::pow(sum, 1.5)).epsilon(1e-12));
    }
  }
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "apinn_test_ckpt";
  std::filesystem::create_directories(dir);
  ModelSpec s = apinn_spec();
  s.gate_target = "burgers-X";
  Model m = Model::build(s, 77);
  auto theta = m.parameters();
  for (auto& v : theta) v *= 1.0 + 1e-3;
  m.set_parameters(theta);
  save_model(dir / "m.ckpt", m, {{"seed", "77"}});
  Meta meta;
  const Model back = load_model(dir / "m.ckpt", &meta);
  CHECK(meta.at("seed") == "77");
  CHECK(back.spec() == m.spec());
  CHECK(back.parameters() == m.parameters());
  for (std::size_t i = 0; i < m.components().size(); ++i) {
    CHECK(back.components()[i].init.dims() == m.components()[i].init.dims());
    std::vector<double> a(m.components()[i].init.parameter_count()), b(a.size());
    m.components()[i].init.write_parameters(a);
    back.components()[i].init.write_parameters(b);
    CHECK(a == b);
  }
  const GateNet g = m.gate();
  save_gate(dir / "g.ckpt", g, {{"mse", "1e-6"}});
  const GateNet gb = load_gate(dir / "g.ckpt", &meta);
  CHECK(meta.at("mse") == "1e-6");
  CHECK(gb.form == g.form);
  CHECK(gb.normalizer.scale == g.normalizer.scale);
  std::mt19937_64 rng(1);
  const RowMat pts = random_points(rng, 100, s.domain);
  CHECK((gb.values(pts) - g.values(pts)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(checkpoint_kind(dir / "g.ckpt") == "gate");
  CHECK_THROWS_AS(load_gate(dir / "m.ckpt"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("spec key/value round trip") {
  ModelSpec s = xpinn_spec(2, {-1.75, -0.5, 0.75}, 4);
  s.version = XpinnVersion::V2;
  s.domain = Box{{-10, -3}, {15, 2}};
  std::map<std::string, std::string> kv;
  for (auto& [k, v] : to_kv(s)) kv[k] = v;
  CHECK(from_kv(kv) == s);
  kv["bogus"] = "1";
  CHECK_THROWS_AS(from_kv(kv), ConfigError);
}
