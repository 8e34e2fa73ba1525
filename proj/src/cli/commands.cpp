#include "apinn/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "apinn/errors.hpp"
#include "apinn/models/checkpoint.hpp"
#include "apinn/models/complexity.hpp"
#include "apinn/problems/metrics.hpp"
#include "apinn/train/record.hpp"

namespace apinn::cli {
namespace {

namespace fs = std::filesystem;
using diff::Index;
using diff::RowMat;
using train::format_double;

models::Meta problem_meta(const ExperimentConfig& c, std::uint64_t seed) {
  models::Meta m{{"problem", c.problem}, {"name", c.name}, {"seed", std::to_string(seed)}};
  for (const auto& [k, v] : c.problem_options) m["problem." + k] = v;
  return m;
}

problems::Options options_from_meta(const models::Meta& meta) {
  problems::Options o;
  for (const auto& [k, v] : meta) {
    if (k.rfind("problem.", 0) == 0) o[k.substr(8)] = v;
  }
  return o;
}

std::unique_ptr<problems::Problem> problem_from_meta(const models::Meta& meta,
                                                     const fs::path& ckpt) {
  auto it = meta.find("problem");
  if (it == meta.end()) throw ConfigError(ckpt.string() + ": checkpoint has no meta.problem");
  return problems::make_problem(it->second, options_from_meta(meta));
}

fs::path cache_dir() { return output_root() / "cache"; }

Box box_of(const Normalizer& n) {
  Box b;
  for (int a = 0; a < 2; ++a) {
    b.lo[a] = (-1.0 - n.shift[a]) / n.scale[a];
    b.hi[a] = (1.0 - n.shift[a]) / n.scale[a];
  }
  return b;
}

// Field name -> unknown index for solution/error fields.
int unknown_of(const std::string& field, const std::string& stem) {
  if (field == stem || field == stem + "_u") return 0;
  if (field == stem + "_v") return 1;
  return -1;
}

}  // namespace

fs::path output_root() {
  if (const char* env = std::getenv("APINN_OUT"); env && *env) return fs::path(env);
  return fs::current_path();
}

fs::path experiment_dir(const ExperimentConfig& c, const std::string& override) {
  if (!override.empty()) return fs::path(override);
  const fs::path rel = c.out.empty() ? fs::path("runs") / c.problem / c.name : fs::path(c.out);
  return output_root() / rel;
}

void write_summary(const fs::path& path, const std::vector<SummaryRow>& rows) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  const int nu = rows.empty() ? 1 : rows.front().unknowns;
  os << "model,seed,selected_rel_l2";
  if (nu == 2) os << ",rel_l2_u,rel_l2_v";
  os << '\n';
  for (const SummaryRow& r : rows) {
    os << r.model << ',' << r.seed << ',' << (r.selected ? format_double(*r.selected) : "NA");
    if (nu == 2) {
      for (int k = 0; k < 2; ++k) {
        os << ',' << (r.selected ? format_double(r.per_unknown.at(k)) : "NA");
      }
    }
    os << '\n';
  }
}

models::GateNet initial_gate(const ExperimentConfig& c, const problems::Problem& p,
                             std::uint64_t seed) {
  models::ModelSpec s = resolve_spec(c, p);
  s.kind = models::Kind::Apinn;
  return models::Model::build(s, seed).gate();
}

PretrainOutcome cmd_pretrain(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir,
                             std::ostream& log) {
  if (c.model.gate_target.empty()) throw ConfigError("pretrain: model.gate_target is not set");
  const auto p = problems::make_problem(c.problem, c.problem_options);
  const gates::GateTarget target = gates::target(c.model.gate_target);
  if (target.m != c.model.m) {
    throw ConfigError("gate target " + target.name + " has " + std::to_string(target.m) +
                      " components but model.m = " + std::to_string(c.model.m));
  }
  PretrainOutcome out;
  out.result = gates::pretrain(initial_gate(c, *p, seed), target, p->domain(), c.pretrain);
  fs::create_directories(dir);
  out.checkpoint = dir / "gate.ckpt";
  models::Meta meta = problem_meta(c, seed);
  meta["target"] = target.name;
  meta["validation_mse"] = format_double(out.result.validation_mse);
  models::save_gate(out.checkpoint, out.result.gate, meta);
  std::ofstream os(dir / "manifest.csv", std::ios::binary);
  os << "target,seed,epochs,train_mse,validation_mse,converged\n"
     << target.name << ',' << seed << ',' << out.result.epochs << ','
     << format_double(out.result.train_mse) << ',' << format_double(out.result.validation_mse)
     << ',' << (out.result.converged ? "true" : "false") << '\n';
  log << "pretrain " << target.name << " seed " << seed << ": " << out.result.epochs
      << " epochs, validation MSE " << out.result.validation_mse << '\n';
  return out;
}

SummaryRow cmd_run(const ExperimentConfig& base, std::uint64_t seed, const fs::path& dir,
                   std::ostream& log) {
  int residual_divisor = 1;
  const ExperimentConfig c = apply_preset(base, &residual_divisor);
  const auto p = problems::make_problem(c.problem, c.problem_options);
  const models::ModelSpec spec = resolve_spec(c, *p);
  fs::create_directories(dir);

  const problems::SampleOptions so{seed, c.sampler, residual_divisor};
  const problems::PointSet points = spec.kind == models::Kind::Xpinn
                                        ? problems::sample_pieces(*p, c.pieces, so)
                                        : problems::sample_global(*p, so);
  models::Model model = models::Model::build(spec, seed);

  if (model.has_gate()) {
    if (!c.gate_checkpoint.empty()) {
      fs::path gp = c.gate_checkpoint;
      if (gp.is_relative() && !fs::exists(gp)) gp = output_root() / gp;
      const models::GateNet g = models::load_gate(gp);
      if (g.m != spec.m || g.form != spec.gate_form) {
        throw ConfigError(gp.string() + ": gate shape does not match the model spec");
      }
      model.set_gate(g);
      log << "loaded gate " << gp.string() << '\n';
    } else if (!spec.gate_target.empty()) {
      PretrainOutcome pre = cmd_pretrain(c, seed, dir, log);
      model.set_gate(pre.result.gate);
    }
  }

  const problems::EvalGrid grid = problems::make_eval_grid(*p, problems::kEvalGridSize, cache_dir());
  if (!grid.reference) log << "reference for " << p->name() << " not available; errors are NA\n";
  const train::Loss loss(*p, points, c.weights);
  const models::Meta meta = problem_meta(c, seed);
  const train::SnapshotHook hook = [&](long epoch, const models::Model& m) {
    models::Meta sm = meta;
    sm["epoch"] = std::to_string(epoch);
    models::save_model(dir / "snapshots" / ("epoch_" + std::to_string(epoch) + ".ckpt"), m, sm);
  };
  fs::create_directories(dir / "snapshots");
  const train::TrainResult res = train::train(model, loss, grid, c.train, hook);

  res.record.write_csv(dir / "record.csv");
  models::Meta fm = meta;
  fm["epoch"] = std::to_string(res.record.rows.back().epoch);
  models::save_model(dir / "final.ckpt", model, fm);
  {
    std::ofstream os(dir / "gate_drift.csv", std::ios::binary);
    os << "epoch,gate_param_drift\n";
    for (const auto& d : res.gate_drift) os << d.epoch << ',' << format_double(d.norm) << '\n';
  }
  {
    std::ofstream os(dir / "wall_time.txt");
    os << res.wall_seconds << '\n';
  }
  SummaryRow row;
  row.model = c.name;
  row.seed = seed;
  row.unknowns = p->unknowns();
  if (res.selected) {
    row.selected = res.selected->value;
    row.per_unknown = res.selected->per_unknown;
  }
  log << c.name << " seed " << seed << ": selected rel_l2 "
      << (row.selected ? format_double(*row.selected) : "NA") << " (L-BFGS "
      << res.lbfgs_iters << " iters, " << train::to_string(res.lbfgs_stop) << ", "
      << res.wall_seconds << " s)\n";
  return row;
}

void cmd_eval(const fs::path& checkpoint, std::ostream& out) {
  models::Meta meta;
  const models::Model model = models::load_model(checkpoint, &meta);
  const auto p = problem_from_meta(meta, checkpoint);
  const problems::EvalGrid grid = problems::make_eval_grid(*p, problems::kEvalGridSize, cache_dir());
  out << "metric,value\n";
  if (grid.reference) {
    const auto err = train::evaluate_error(model, grid);
    const char* names[] = {"rel_l2_u", "rel_l2_v"};
    double mean = 0.0;
    for (std::size_t k = 0; k < err.size(); ++k) {
      out << names[k] << ',' << format_double(err[k]) << '\n';
      mean += err[k] / static_cast<double>(err.size());
    }
    out << "rel_l2_mean," << format_double(mean) << '\n';
  } else {
    out << "rel_l2_mean,NA\n";
  }
  out << "parameters," << model.parameter_count() << '\n';
  for (const models::Component& c : model.components()) {
    const models::ComplexityReport r = models::complexity(c.net, c.init);
    for (int i = 0; i < 3; ++i) {
      out << c.name << ".R" << i << ',' << format_double(r.R[i]) << '\n';
    }
  }
}

void cmd_dump_field(const std::string& checkpoint, const std::string& field, int n,
                    const fs::path& path) {
  if (n < 2) throw ConfigError("dump-field: grid must be at least 2");
  std::unique_ptr<problems::Problem> problem;
  std::optional<models::Model> model;
  std::optional<models::GateNet> gate;
  Box box;
  if (checkpoint.rfind("reference:", 0) == 0) {
    problem = problems::make_problem(checkpoint.substr(10));
    box = problem->domain();
  } else {
    models::Meta meta;
    if (models::checkpoint_kind(checkpoint) == "gate") {
      gate = models::load_gate(checkpoint, &meta);
      box = box_of(gate->normalizer);
    } else {
      model = models::load_model(checkpoint, &meta);
      gate = model->has_gate() ? std::optional(model->gate()) : std::nullopt;
      box = model->spec().domain;
    }
    if (meta.count("problem")) problem = problem_from_meta(meta, checkpoint);
  }
  const RowMat pts = gates::grid_points(box, n);
  RowMat values;
  if (field.rfind("gate_", 0) == 0) {
    if (!gate) throw ConfigError("dump-field: " + checkpoint + " has no gate");
    int idx = 0;
    try {
      idx = std::stoi(field.substr(5));
    } catch (const std::exception&) {
      throw ConfigError("dump-field: bad gate field '" + field + "'");
    }
    if (idx < 1 || idx > gate->m) {
      throw ConfigError("dump-field: " + field + " out of range; gate has " +
                        std::to_string(gate->m) + " components (gate_1..gate_" +
                        std::to_string(gate->m) + ")");
    }
    values = gate->values(pts).row(idx - 1);
  } else if (const int k = unknown_of(field, "solution"); k >= 0) {
    if (model) {
      values = model->predict(pts).row(k);
    } else if (problem) {
      values = problem->reference_at(pts).row(k);
    } else {
      throw ConfigError("dump-field: solution needs a model checkpoint or reference:<problem>");
    }
  } else if (const int e = unknown_of(field, "error"); e >= 0) {
    if (!problem) throw ConfigError("dump-field: error needs the checkpoint's problem");
    const RowMat ref = problem->reference_at(pts);
    values = model ? RowMat((model->predict(pts) - ref).cwiseAbs().row(e))
                   : RowMat(RowMat::Zero(1, pts.cols()));
  } else {
    throw ConfigError("dump-field: unknown field '" + field +
                      "'; expected gate_<i>, solution[_u|_v] or error[_u|_v]");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "x,t,value\n";
  for (Index i = 0; i < pts.cols(); ++i) {
    os << format_double(pts(0, i)) << ',' << format_double(pts(1, i)) << ','
       << format_double(values(0, i)) << '\n';
  }
}

}  // namespace apinn::cli
