// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// non-zero when any selected criterion fails.
//
//   apinn_acceptance [--criteria 1,2,...] [--work DIR]
//
// Criteria 6 and 7 train nine models each at the desk preset and take tens
// of minutes; the others finish in a few minutes together.

#include <CLI11.hpp>
#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apinn/cli/commands.hpp"
#include "apinn/cli/config.hpp"
#include "apinn/diff/kernels.hpp"
#include "apinn/gates/gates.hpp"
#include "apinn/models/complexity.hpp"
#include "apinn/models/model.hpp"
#include "apinn/oracle/cole_hopf.hpp"
#include "apinn/problems/metrics.hpp"
#include "apinn/problems/problem.hpp"
#include "apinn/problems/sampling.hpp"
#include "apinn/train/loss.hpp"
#include "support/burgers_fd.hpp"
#include "support/fd.hpp"

using namespace apinn;
namespace fs = std::filesystem;
using diff::Index;
using diff::RowMat;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path config_path(const std::string& rel) { return fs::path(APINN_SOURCE_DIR) / "configs" / rel; }

double net_at(const diff::DenseNet& net, double x, double t) {
  const double p[2] = {x, t};
  return net.forward(p)[0];
}

Outcome derivative_engine() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> depth(2, 6), width(2, 20);
  double worst[3] = {0, 0, 0};
  const double steps[3] = {1e-3, 5e-3, 1e-2};
  for (int trial = 0; trial < 100; ++trial) {
    const diff::DenseNet net = testing::random_net(rng, depth(rng), width(rng));
    const double x0 = u(rng), t0v = u(rng);
    for (int axis = 0; axis < 2; ++axis) {
      const double p[2] = {x0, t0v};
      const diff::Jet j = net.forward_jet(p, axis, 3)[0];
      auto f = [&](double s) { return axis == 0 ? net_at(net, s, t0v) : net_at(net, x0, s); };
      const double c = axis == 0 ? x0 : t0v;
      worst[0] = std::max(worst[0], testing::rel_err(j.derivative(1), testing::fd_first(f, c, steps[0])));
      worst[1] = std::max(worst[1], testing::rel_err(j.derivative(2), testing::fd_second(f, c, steps[1])));
      worst[2] = std::max(worst[2], testing::rel_err(j.derivative(3), testing::fd_third(f, c, steps[2])));
    }
  }

  // Parameter gradient of the assembled Burgers loss.
  const auto p = problems::make_problem("burgers");
  models::ModelSpec s;
  s.domain = p->domain();
  s.depth = 6;
  s.width = 12;
  models::Model m = models::Model::build(s, 5);
  const problems::PointSet ps = problems::sample_global(*p, {.seed = 5, .residual_divisor = 50});
  const train::Loss loss(*p, ps, train::LossWeights{});
  std::vector<double> theta = m.parameters();
  std::vector<double> g(theta.size());
  (void)loss(m, g);
  std::uniform_int_distribution<std::size_t> pick(0, theta.size() - 1);
  double gworst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t i = pick(rng);
    auto f = [&](double v) {
      std::vector<double> th = theta;
      th[i] = v;
      m.set_parameters(th);
      return loss(m, {}).total;
    };
    gworst = std::max(gworst, testing::rel_err(g[i], testing::fd_first(f, theta[i], 1e-3), 1e-8));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst[0] < 1e-5 && worst[1] < 1e-4 && worst[2] < 1e-3 && gworst < 1e-5 && secs < 60;
  o.detail = "jet rel err " + num(worst[0]) + " / " + num(worst[1]) + " / " + num(worst[2]) +
             ", grad rel err " + num(gworst) + ", " + num(secs) + " s";
  return o;
}

Outcome parameter_counts() {
  const std::pair<const char*, Index> cases[] = {
      {"burgers/pinn.cfg", 3441},           {"burgers/xpinn_v1.cfg", 3522},
      {"burgers/apinn_x_f.cfg", 3462},      {"burgers/apinn_x.cfg", 3543},
      {"boussinesq_burgers/pinn.cfg", 6882}, {"boussinesq_burgers/xpinn.cfg", 7044},
      {"boussinesq_burgers/xpinn4.cfg", 7368}, {"boussinesq_burgers/apinn_x.cfg", 6945}};
  Outcome o{true, ""};
  for (const auto& [cfg, want] : cases) {
    const cli::ExperimentConfig c = cli::load_config(config_path(cfg));
    const auto p = problems::make_problem(c.problem, c.problem_options);
    const Index got = models::Model::build(cli::resolve_spec(c, *p), 1).parameter_count();
    if (got != want) o.pass = false;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + std::to_string(got);
  }
  return o;
}

Outcome partition_of_unity() {
  std::mt19937_64 rng(7);
  const Box box{{-1, 0}, {1, 1}};
  RowMat pts(2, 1000000);
  std::uniform_real_distribution<double> ux(-1, 1), ut(0, 1);
  for (Index i = 0; i < pts.cols(); ++i) {
    pts(0, i) = ux(rng);
    pts(1, i) = ut(rng);
  }
  double sum_err = 0.0;
  for (auto [form, m] : {std::pair{models::GateForm::Sigmoid, 2}, {models::GateForm::Softmax, 4}}) {
    const models::GateNet g = models::GateNet::make(form, m, 2, 20, Normalizer::of(box), rng);
    const RowMat v = g.values(pts);
    sum_err = std::max(sum_err, (v.colwise().sum().array() - 1.0).abs().maxCoeff());
  }

  // All E_i equal: two different gates must give the same output.
  double collapse = 0.0;
  const RowMat probe = pts.leftCols(20000);
  for (int m : {2, 4}) {
    models::ModelSpec s;
    s.kind = models::Kind::Apinn;
    s.domain = box;
    s.depth = 4;
    s.m = m;
    s.gate_form = m == 2 ? models::GateForm::Sigmoid : models::GateForm::Softmax;
    const models::Model base = models::Model::build(s, 3);
    std::vector<models::Component> parts = base.components();
    const diff::DenseNet* first = nullptr;
    for (auto& c : parts) {
      if (c.name.rfind("e", 0) != 0) continue;
      if (!first) {
        first = &c.net;
      } else {
        c.net = *first;
      }
    }
    models::Model a = models::Model::assemble(s, parts);
    models::Model b = a;
    b.set_gate(models::Model::build(s, 99).gate());
    collapse = std::max(collapse, (a.predict(probe) - b.predict(probe)).cwiseAbs().maxCoeff());
  }
  return {sum_err <= 1e-12 && collapse <= 1e-12,
          "max |sum G - 1| " + num(sum_err) + ", collapse difference " + num(collapse)};
}

Outcome manufactured() {
  double worst = 0.0;
  bool self_zero = true;
  for (const char* name : {"helmholtz", "klein_gordon", "wave"}) {
    const auto p = problems::make_problem(name);
    const RowMat pts = gates::grid_points(p->domain(), 64);
    for (Index i = 0; i < pts.cols(); ++i) {
      const auto d = p->reference_derivs(pts(0, i), pts(1, i));
      if (!d) return {false, std::string(name) + " has no analytic derivatives"};
      const std::vector<double> lu = p->apply(*d);
      double f[2] = {0, 0};
      p->forcing(pts(0, i), pts(1, i), f);
      for (std::size_t e = 0; e < lu.size(); ++e) worst = std::max(worst, std::abs(lu[e] - f[e]));
    }
    const RowMat ref = p->reference_at(pts);
    for (double v : problems::rel_l2(ref, ref)) self_zero = self_zero && v == 0.0;
  }
  return {worst < 1e-8 && self_zero,
          "max residual " + num(worst) + (self_zero ? ", self rel_l2 0" : ", self rel_l2 nonzero")};
}

Outcome burgers_oracle() {
  const oracle::ColeHopfSolver exact;
  testing::BurgersFd fd;
  const double times[5] = {0.2, 0.4, 0.6, 0.8, 1.0};
  const double xs[10] = {-0.875, -0.625, -0.375, -0.1875, -0.0625,
                         0.0625, 0.1875, 0.375, 0.625, 0.875};
  double worst = 0.0;
  for (double t : times) {
    fd.advance_to(std::lround(t / 1e-4));
    for (double x : xs) worst = std::max(worst, std::abs(fd.u()[fd.node(x)] - exact(x, t)));
  }
  double sym = 0.0, init = 0.0;
  for (int k = 0; k <= 20; ++k) sym = std::max(sym, std::abs(exact(0.0, k / 20.0)));
  for (int k = 0; k <= 40; ++k) {
    const double x = -1.0 + k / 20.0;
    init = std::max(init, std::abs(exact(x, 0.0) + std::sin(std::numbers::pi * x)));
  }
  return {worst < 1e-4 && sym == 0.0 && init == 0.0,
          "50 probes max |CH - CN| " + num(worst) + ", |u(0,t)| " + num(sym) + ", |u(x,0) + sin| " + num(init)};
}

struct DeskResult {
  std::vector<double> errors;  // one per seed, NaN if unavailable
  double seconds = 0.0;
};

DeskResult desk_runs(const std::string& cfg, const fs::path& work) {
  cli::ExperimentConfig c = cli::load_config(config_path(cfg));
  c.preset = "desk";
  DeskResult r;
  const auto t0 = Clock::now();
  for (std::uint64_t seed : {1, 2, 3}) {
    const fs::path dir = work / c.problem / c.name / ("seed_" + std::to_string(seed));
    const cli::SummaryRow row = cli::cmd_run(c, seed, dir, std::cerr);
    r.errors.push_back(row.selected ? *row.selected : std::nan(""));
  }
  r.seconds = seconds_since(t0);
  return r;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + num(x);
  return s;
}

Outcome burgers_ordering(const fs::path& work) {
  const DeskResult pinn = desk_runs("burgers/pinn.cfg", work);
  const DeskResult apinn = desk_runs("burgers/apinn_x.cfg", work);
  const DeskResult xpinn = desk_runs("burgers/xpinn_v1.cfg", work);
  const double mp = median(pinn.errors), ma = median(apinn.errors), mx = median(xpinn.errors);
  const double minutes = (pinn.seconds + apinn.seconds + xpinn.seconds) / 60.0;
  const std::string detail = "median APINN-X " + num(ma) + " [" + list(apinn.errors) + "], PINN " +
                             num(mp) + " [" + list(pinn.errors) + "], XPINNv1 " + num(mx) + " [" +
                             list(xpinn.errors) + "], " + num(minutes) + " min";
  return {ma < mp && mx >= 3.0 * mp && minutes < 30.0, detail};
}

Outcome wave_ordering(const fs::path& work) {
  const DeskResult pinn = desk_runs("wave/pinn.cfg", work);
  const DeskResult xpinn = desk_runs("wave/xpinn_v2.cfg", work);
  const DeskResult apinn = desk_runs("wave/apinn_m.cfg", work);
  int xw = 0, aw = 0;
  for (int s = 0; s < 3; ++s) {
    xw += xpinn.errors[s] < pinn.errors[s];
    aw += apinn.errors[s] < pinn.errors[s];
  }
  const double minutes = (pinn.seconds + xpinn.seconds + apinn.seconds) / 60.0;
  return {xw >= 2 && aw >= 2,
          "XPINNv2 beats PINN in " + std::to_string(xw) + "/3, APINN-M in " + std::to_string(aw) +
              "/3; PINN [" + list(pinn.errors) + "], XPINNv2 [" + list(xpinn.errors) +
              "], APINN-M [" + list(apinn.errors) + "], " + num(minutes) + " min"};
}

Outcome gate_pretraining() {
  Outcome o{true, ""};
  double worst_mse = 0.0, worst_dev = 0.0;
  int worst_epochs = 0;
  for (const std::string& name : gates::target_names()) {
    const gates::GateTarget t = gates::target(name);
    std::mt19937_64 rng(1);
    const models::GateForm form = t.m == 2 ? models::GateForm::Sigmoid : models::GateForm::Softmax;
    const models::GateNet g0 = models::GateNet::make(form, t.m, 2, 20, Normalizer::of(t.domain), rng);
    const gates::PretrainResult r = gates::pretrain(g0, t, t.domain);
    worst_mse = std::max(worst_mse, r.validation_mse);
    worst_epochs = std::max(worst_epochs, r.epochs);
    if (r.validation_mse > 1e-4 || r.epochs > 20000) {
      o.pass = false;
      o.detail += name + " MSE " + num(r.validation_mse) + "; ";
    }
    if (name.size() > 2 && name.compare(name.size() - 2, 2, "-M") == 0) {
      const RowMat pts = gates::grid_points(t.domain, 101);
      const double dev = (r.gate.values(pts) - t.at(pts)).cwiseAbs().maxCoeff();
      worst_dev = std::max(worst_dev, dev);
      if (dev > 0.01) {
        o.pass = false;
        o.detail += name + " deviation " + num(dev) + "; ";
      }
    }
  }
  o.detail += std::to_string(gates::target_names().size()) + " targets, worst validation MSE " +
              num(worst_mse) + ", most epochs " + std::to_string(worst_epochs) +
              ", worst constant deviation " + num(worst_dev);
  return o;
}

Outcome complexity_oracle() {
  std::mt19937_64 rng(909);
  std::normal_distribution<double> noise(0.0, 0.4);
  int mismatches = 0;
  double worst_r = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const diff::DenseNet init = testing::random_net(rng, 2 + trial % 5, 4 + trial % 17);
    diff::DenseNet net = init;
    for (auto& l : net.layers()) {
      for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] += noise(rng);
    }
    const models::ComplexityReport rep = models::complexity(net, init);
    double prod = 1.0, sum = 0.0;
    for (int l = 0; l < net.depth(); ++l) {
      const Eigen::MatrixXd w = net.layers()[l].weight;
      const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(w).singularValues()(0);
      const Eigen::MatrixXd d = w - Eigen::MatrixXd(init.layers()[l].weight);
      double n21 = 0.0;
      for (Index c = 0; c < d.cols(); ++c) n21 += d.col(c).norm();
      const auto M = static_cast<long long>(std::ceil(s));
      const auto N = static_cast<long long>(std::ceil(n21 / s));
      mismatches += rep.layers[l].M != M;
      mismatches += rep.layers[l].N != N;
      prod *= static_cast<double>(M);
      sum += std::cbrt(static_cast<double>(N) * static_cast<double>(N));
    }
    for (int i = 0; i < 3; ++i) {
      const double want = std::pow(prod, i + 1) * std::pow(sum, 1.5);
      worst_r = std::max(worst_r, std::abs(rep.R[i] - want) / want);
    }
  }
  return {mismatches == 0 && worst_r <= 1e-12,
          std::to_string(mismatches) + " integer mismatches, worst R relative difference " + num(worst_r)};
}

Outcome determinism(const fs::path& work) {
  const fs::path cfg = work / "determinism.cfg";
  {
    std::ofstream os(cfg);
    os << "name = determinism\nproblem = burgers\nmodel.kind = apinn\nmodel.gate_target = burgers-X\n"
          "train.epochs = 3000\ntrain.lbfgs_max_iters = 50\ntrain.snapshots = 0,1500\n"
          "pretrain.max_epochs = 2000\n";
  }
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + APINN_CLI_PATH + "\" run --config \"" + cfg.string() +
                            "\" --seed 7 --preset desk --out \"" + (work / run).string() +
                            "\" 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "apinn run failed"};
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(work / "a" / "seed_7" / "record.csv");
  const std::string b = slurp(work / "b" / "seed_7" / "record.csv");
  const bool same = !a.empty() && a == b &&
                    slurp(work / "a" / "summary.csv") == slurp(work / "b" / "summary.csv") &&
                    slurp(work / "a" / "seed_7" / "final.ckpt") == slurp(work / "b" / "seed_7" / "final.ckpt");
  return {same, std::to_string(a.size()) + "-byte records " + (same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  diff::tune_allocator();
  CLI::App app{"Acceptance criteria"};
  std::string criteria = "1,2,3,4,5,6,7,8,9,10";
  std::string work = (fs::temp_directory_path() / "apinn_acceptance").string();
  app.add_option("--criteria", criteria, "Comma-separated criterion numbers");
  app.add_option("--work", work, "Scratch directory for runs");
  CLI11_PARSE(app, argc, argv);

  std::set<int> chosen;
  std::stringstream ss(criteria);
  for (std::string item; std::getline(ss, item, ',');) chosen.insert(std::stoi(item));
  fs::create_directories(work);
  ::setenv("APINN_OUT", work.c_str(), 1);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"derivative engine vs finite differences", derivative_engine},
      {"parameter counts", parameter_counts},
      {"partition of unity and subnet collapse", partition_of_unity},
      {"manufactured solutions", manufactured},
      {"Burgers oracle vs Crank-Nicolson", burgers_oracle},
      {"desk Burgers ordering", [&] { return burgers_ordering(work); }},
      {"desk Wave ordering", [&] { return wave_ordering(work); }},
      {"gate pretraining", gate_pretraining},
      {"complexity vs SVD oracle", complexity_oracle},
      {"determinism", [&] { return determinism(work); }},
  };
  bool ok = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!chosen.count(id)) continue;
    Outcome o;
    try {
      o = all[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ok = ok && o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << all[i].first
              << ": " << o.detail << std::endl;
  }
  return ok ? 0 : 1;
}
