#include "apinn/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "apinn/errors.hpp"
#include "apinn/train/record.hpp"

namespace apinn::cli {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long d = std::stol(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

// Model keys the problem determines.
bool derived_key(const std::string& k) {
  return k == "domain" || k == "unknowns" || k == "split_axis" || k == "cuts";
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return serialize(*this) == serialize(o);
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split(s, ',')) {
    const long v = to_long("seeds", item);
    if (v < 0) throw ConfigError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw ConfigError("seeds: at least one seed required");
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::map<std::string, std::string> model_kv;
  std::map<std::string, std::string> seen;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (!seen.emplace(k, v).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + k + "'");
    }
    auto& t = c.train;
    auto& pre = c.pretrain;
    if (k == "name") {
      c.name = v;
    } else if (k == "problem") {
      c.problem = v;
    } else if (k.rfind("problem.", 0) == 0) {
      c.problem_options[k.substr(8)] = v;
    } else if (k == "model.pieces") {
      c.pieces = static_cast<int>(to_long(k, v));
    } else if (k.rfind("model.", 0) == 0) {
      const std::string mk = k.substr(6);
      if (derived_key(mk)) throw ConfigError(k + " is derived from the problem");
      if (!models::is_spec_key(mk)) throw ConfigError("unknown key '" + k + "'");
      model_kv[mk] = v;
    } else if (k == "loss.boundary") {
      c.weights.boundary = to_double(k, v);
    } else if (k == "loss.residual") {
      c.weights.residual = to_double(k, v);
    } else if (k == "loss.iface_avg") {
      c.weights.iface_avg = to_double(k, v);
    } else if (k == "loss.iface_res") {
      c.weights.iface_res = to_double(k, v);
    } else if (k == "loss.iface_deriv") {
      c.weights.iface_deriv = to_double(k, v);
    } else if (k == "train.lr") {
      t.lr = to_double(k, v);
    } else if (k == "train.epochs") {
      t.epochs = to_long(k, v);
    } else if (k == "train.lbfgs") {
      t.use_lbfgs = to_bool(k, v);
    } else if (k == "train.lbfgs_memory") {
      t.lbfgs.memory = static_cast<int>(to_long(k, v));
    } else if (k == "train.lbfgs_max_iters") {
      t.lbfgs.max_iters = static_cast<int>(to_long(k, v));
    } else if (k == "train.lbfgs_grad_tol") {
      t.lbfgs.grad_tol = to_double(k, v);
    } else if (k == "train.lbfgs_rel_tol") {
      t.lbfgs.rel_tol = to_double(k, v);
    } else if (k == "train.log_every") {
      t.log_every = static_cast<int>(to_long(k, v));
    } else if (k == "train.selection") {
      t.selection = train::parse_selection(v);
    } else if (k == "train.snapshots") {
      t.snapshots.clear();
      for (const auto& s : split(v, ',')) t.snapshots.push_back(to_long(k, s));
    } else if (k == "pretrain.grid") {
      pre.grid = static_cast<int>(to_long(k, v));
    } else if (k == "pretrain.validation_grid") {
      pre.validation_grid = static_cast<int>(to_long(k, v));
    } else if (k == "pretrain.lr") {
      pre.lr = to_double(k, v);
    } else if (k == "pretrain.max_epochs") {
      pre.max_epochs = static_cast<int>(to_long(k, v));
    } else if (k == "pretrain.stop_mse") {
      pre.stop_mse = to_double(k, v);
    } else if (k == "pretrain.tol") {
      pre.tol = to_double(k, v);
    } else if (k == "gate_checkpoint") {
      c.gate_checkpoint = v;
    } else if (k == "sampler") {
      if (v == "uniform") {
        c.sampler = problems::Sampler::Uniform;
      } else if (v == "lhs") {
        c.sampler = problems::Sampler::LatinHypercube;
      } else {
        throw ConfigError("sampler: expected uniform or lhs, got '" + v + "'");
      }
    } else if (k == "preset") {
      (void)preset(v);
      c.preset = v;
    } else if (k == "seeds") {
      c.seeds = parse_seeds(v);
    } else if (k == "out") {
      c.out = v;
    } else {
      throw ConfigError("unknown key '" + k + "'");
    }
  }
  c.model = models::from_kv(model_kv, c.model);
  c.weights.validate();
  c.train.validate();
  (void)problems::make_problem(c.problem, c.problem_options);  // validates name and options
  if (!c.model.gate_target.empty()) {
    const gates::GateTarget t = gates::target(c.model.gate_target);
    if (c.model.kind == models::Kind::Apinn && t.m != c.model.m) {
      throw ConfigError("gate target " + t.name + " has " + std::to_string(t.m) +
                        " components but model.m = " + std::to_string(c.model.m));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  kv("name", c.name);
  kv("problem", c.problem);
  for (const auto& [k, v] : c.problem_options) kv("problem." + k, v);
  for (const auto& [k, v] : models::to_kv(c.model)) {
    if (!derived_key(k)) kv("model." + k, v);
  }
  kv("model.pieces", std::to_string(c.pieces));
  kv("loss.boundary", fmt(c.weights.boundary));
  kv("loss.residual", fmt(c.weights.residual));
  kv("loss.iface_avg", fmt(c.weights.iface_avg));
  kv("loss.iface_res", fmt(c.weights.iface_res));
  kv("loss.iface_deriv", fmt(c.weights.iface_deriv));
  const auto& t = c.train;
  kv("train.lr", fmt(t.lr));
  kv("train.epochs", std::to_string(t.epochs));
  kv("train.lbfgs", t.use_lbfgs ? "true" : "false");
  kv("train.lbfgs_memory", std::to_string(t.lbfgs.memory));
  kv("train.lbfgs_max_iters", std::to_string(t.lbfgs.max_iters));
  kv("train.lbfgs_grad_tol", fmt(t.lbfgs.grad_tol));
  kv("train.lbfgs_rel_tol", fmt(t.lbfgs.rel_tol));
  kv("train.log_every", std::to_string(t.log_every));
  kv("train.selection", train::to_string(t.selection));
  std::string snaps;
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) {
    snaps += (i ? "," : "") + std::to_string(t.snapshots[i]);
  }
  kv("train.snapshots", snaps);
  const auto& p = c.pretrain;
  kv("pretrain.grid", std::to_string(p.grid));
  kv("pretrain.validation_grid", std::to_string(p.validation_grid));
  kv("pretrain.lr", fmt(p.lr));
  kv("pretrain.max_epochs", std::to_string(p.max_epochs));
  kv("pretrain.stop_mse", fmt(p.stop_mse));
  kv("pretrain.tol", fmt(p.tol));
  if (!c.gate_checkpoint.empty()) kv("gate_checkpoint", c.gate_checkpoint);
  kv("sampler", c.sampler == problems::Sampler::Uniform ? "uniform" : "lhs");
  kv("preset", c.preset);
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    seeds += (i ? "," : "") + std::to_string(c.seeds[i]);
  }
  kv("seeds", seeds);
  if (!c.out.empty()) kv("out", c.out);
  return os.str();
}

Preset preset(const std::string& name) {
  if (name == "full") return Preset{};
  if (name == "desk") return Preset{20, 10, 2500};
  throw ConfigError("unknown preset '" + name + "'; expected full or desk");
}

ExperimentConfig apply_preset(ExperimentConfig c, int* residual_divisor) {
  const Preset p = preset(c.preset);
  c.train.epochs /= p.epoch_divisor;
  for (long& s : c.train.snapshots) s /= p.epoch_divisor;
  c.train.lbfgs.max_iters = std::min(c.train.lbfgs.max_iters, p.lbfgs_cap);
  if (residual_divisor) *residual_divisor = p.residual_divisor;
  return c;
}

models::ModelSpec resolve_spec(const ExperimentConfig& c, const problems::Problem& p) {
  models::ModelSpec s = c.model;
  s.domain = p.domain();
  s.unknowns = p.unknowns();
  if (s.kind == models::Kind::Xpinn) s.decomposition = p.decomposition(c.pieces);
  return s;
}

}  // namespace apinn::cli
