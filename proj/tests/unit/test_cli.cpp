#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "apinn/cli/commands.hpp"
#include "apinn/cli/config.hpp"
#include "apinn/errors.hpp"
#include "apinn/models/checkpoint.hpp"
#include "doctest.h"

using namespace apinn;
using namespace apinn::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("apinn_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Parses a CSV of `x,t,value` rows into triples.
std::vector<std::array<double, 3>> read_field(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,t,value");
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    std::array<double, 3> r{};
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    ls >> r[0] >> c1 >> r[1] >> c2 >> r[2];
    rows.push_back(r);
  }
  return rows;
}

const char* kTinyRun = R"(# small run for tests
name = tiny
problem = wave
model.kind = apinn
model.depth = 2
model.width = 6
model.shared_depth = 2
model.shared_width = 6
model.gate_width = 6
model.gate_target = wave-M
train.epochs = 20
train.lbfgs_max_iters = 5
train.log_every = 10
train.snapshots = 0,10,20
pretrain.max_epochs = 50
)";

}  // namespace

TEST_CASE("config round trip is the identity") {
  const ExperimentConfig c = parse_config(kTinyRun);
  CHECK(c.name == "tiny");
  CHECK(c.model.kind == models::Kind::Apinn);
  CHECK(c.train.snapshots == std::vector<long>{0, 10, 20});
  const ExperimentConfig back = parse_config(serialize(c));
  CHECK(back == c);
  CHECK(serialize(back) == serialize(c));
}

TEST_CASE("shipped configs parse and round trip") {
  const fs::path dir = fs::path(APINN_SOURCE_DIR) / "configs";
  REQUIRE(fs::is_directory(dir));
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    const ExperimentConfig c = load_config(e.path());
    CHECK(parse_config(serialize(c)) == c);
    const auto p = problems::make_problem(c.problem, c.problem_options);
    CHECK_NOTHROW((void)models::Model::build(resolve_spec(c, *p), 1));
    ++n;
  }
  CHECK(n >= 30);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS((void)parse_config("problem = burgers\nmodel.colour = red\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("frobnicate = 1\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("problem = burgers\nproblem = wave\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("problem = heat\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("problem = burgers\nproblem.k = 2\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("model.domain = 0,1\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("model.gate_target = nope\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("train.epochs = ten\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("just some words\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("preset = huge\n"), ConfigError);
}

TEST_CASE("seed lists") {
  CHECK(parse_seeds("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seeds("1,2, 5") == std::vector<std::uint64_t>{1, 2, 5});
  CHECK_THROWS_AS((void)parse_seeds(""), ConfigError);
  CHECK_THROWS_AS((void)parse_seeds("1,x"), ConfigError);
}

TEST_CASE("desk preset scales epochs, snapshots and residual points") {
  ExperimentConfig c = parse_config("problem = burgers\npreset = desk\n");
  int div = 0;
  const ExperimentConfig d = apply_preset(c, &div);
  CHECK(div == 10);
  CHECK(d.train.epochs == 5000);
  CHECK(d.train.snapshots == std::vector<long>{0, 500, 1000, 1500, 2000, 2500});
  c.preset = "full";
  const ExperimentConfig f = apply_preset(c, &div);
  CHECK(div == 1);
  CHECK(f.train.epochs == 100000);
}

TEST_CASE("pretrain writes a checkpoint and manifest, bytewise reproducible") {
  const fs::path dir = scratch("pretrain");
  ExperimentConfig c = parse_config("problem = burgers\nmodel.kind = apinn\nmodel.gate_target = burgers-X\n");
  std::ostringstream log;
  const PretrainOutcome a = cmd_pretrain(c, 1, dir / "a", log);
  const PretrainOutcome b = cmd_pretrain(c, 1, dir / "b", log);
  CHECK(a.result.validation_mse <= 1e-4);
  CHECK(slurp(a.checkpoint) == slurp(b.checkpoint));
  const std::string manifest = slurp(dir / "a" / "manifest.csv");
  CHECK(manifest.rfind("target,seed,epochs,train_mse,validation_mse,converged\nburgers-X,1,", 0) == 0);
  CHECK(models::checkpoint_kind(a.checkpoint) == "gate");

  // gate_1 along the x = 1 edge is exp(0) = 1.
  const fs::path field = dir / "gate_1.csv";
  cmd_dump_field(a.checkpoint.string(), "gate_1", 201, field);
  const auto rows = read_field(field);
  CHECK(rows.size() == 201u * 201u);
  int edge = 0;
  for (const auto& r : rows) {
    if (r[0] != 1.0) continue;
    ++edge;
    CHECK(std::abs(r[2] - 1.0) <= 0.02);
  }
  CHECK(edge == 201);
  CHECK_THROWS_AS(cmd_dump_field(a.checkpoint.string(), "gate_3", 11, field), ConfigError);
  CHECK_THROWS_AS(cmd_dump_field(a.checkpoint.string(), "gate_0", 11, field), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("pretrain needs a registered target") {
  ExperimentConfig c = parse_config("problem = burgers\n");
  std::ostringstream log;
  CHECK_THROWS_AS((void)cmd_pretrain(c, 1, scratch("notarget"), log), ConfigError);
}

TEST_CASE("reference fields") {
  const fs::path dir = scratch("reference");
  cmd_dump_field("reference:wave", "solution", 201, dir / "s.csv");
  bool found = false;
  for (const auto& r : read_field(dir / "s.csv")) {
    if (r[0] == 0.5 && r[1] == 0.0) {
      found = true;
      CHECK(r[2] == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  CHECK(found);
  cmd_dump_field("reference:wave", "error", 21, dir / "e.csv");
  for (const auto& r : read_field(dir / "e.csv")) CHECK(r[2] == 0.0);
  CHECK_THROWS_AS(cmd_dump_field("reference:wave", "pressure", 21, dir / "x.csv"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("run writes its outputs and is deterministic") {
  const fs::path dir = scratch("run");
  const ExperimentConfig c = parse_config(kTinyRun);
  std::ostringstream log;
  const SummaryRow a = cmd_run(c, 4, dir / "a", log);
  const SummaryRow b = cmd_run(c, 4, dir / "b", log);
  REQUIRE(a.selected);
  CHECK(a.selected == b.selected);
  CHECK(slurp(dir / "a" / "record.csv") == slurp(dir / "b" / "record.csv"));
  for (const char* f : {"record.csv", "final.ckpt", "gate_drift.csv", "wall_time.txt", "gate.ckpt",
                        "snapshots/epoch_0.ckpt", "snapshots/epoch_20.ckpt"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  const std::string drift = slurp(dir / "a" / "gate_drift.csv");
  CHECK(drift.rfind("epoch,gate_param_drift\n0,0\n10,", 0) == 0);

  write_summary(dir / "summary.csv", {a, b});
  CHECK(slurp(dir / "summary.csv").rfind("model,seed,selected_rel_l2\ntiny,4,", 0) == 0);

  std::ostringstream ev;
  cmd_eval(dir / "a" / "final.ckpt", ev);
  const std::string out = ev.str();
  CHECK(out.find("rel_l2_u,") != std::string::npos);
  CHECK(out.find("gate.R0,") != std::string::npos);

  // eval against the checkpoint's own problem reproduces the logged final error.
  std::ostringstream dump_err;
  cmd_dump_field((dir / "a" / "final.ckpt").string(), "error", 11, dir / "err.csv");
  for (const auto& r : read_field(dir / "err.csv")) CHECK(r[2] >= 0.0);
  fs::remove_all(dir);
}

TEST_CASE("run without a reference reports NA") {
  const fs::path dir = scratch("na");
  const ExperimentConfig c = parse_config(
      "name = bb\nproblem = boussinesq_burgers\nproblem.reference_file = /nonexistent.csv\n"
      "model.depth = 2\nmodel.width = 6\ntrain.epochs = 3\ntrain.lbfgs = false\n"
      "train.snapshots = 0\n");
  std::ostringstream log;
  const SummaryRow r = cmd_run(c, 1, dir, log);
  CHECK_FALSE(r.selected.has_value());
  write_summary(dir / "summary.csv", {r});
  CHECK(slurp(dir / "summary.csv") == "model,seed,selected_rel_l2,rel_l2_u,rel_l2_v\nbb,1,NA,NA,NA\n");
  const std::string rec = slurp(dir / "record.csv");
  CHECK(rec.find(",NA,NA\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("output root follows APINN_OUT") {
  ::setenv("APINN_OUT", "/tmp/apinn_out_root", 1);
  const ExperimentConfig c = parse_config("name = x\nproblem = wave\n");
  CHECK(experiment_dir(c) == fs::path("/tmp/apinn_out_root/runs/wave/x"));
  CHECK(experiment_dir(c, "/elsewhere") == fs::path("/elsewhere"));
  ::unsetenv("APINN_OUT");
}
