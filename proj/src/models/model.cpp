#include "apinn/models/model.hpp"

#include <algorithm>
#include <sstream>

#include "apinn/errors.hpp"

namespace apinn::models {
namespace {

using diff::DenseNet;
using diff::Tape;
using diff::Var;

std::vector<int> mlp_dims(int in, int depth, int width, int out) {
  if (depth < 1) throw ConfigError("network depth must be at least 1");
  if (width < 1) throw ConfigError("network width must be at least 1");
  std::vector<int> dims{in};
  for (int l = 0; l + 1 < depth; ++l) dims.push_back(width);
  dims.push_back(out);
  return dims;
}

std::mt19937_64 component_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

void validate(const ModelSpec& s) {
  if (s.unknowns < 1 || s.unknowns > 2) throw ConfigError("unknowns must be 1 or 2");
  if (s.kind == Kind::Xpinn) {
    if (s.decomposition.cuts.empty()) throw ConfigError("XPINN needs at least one cut");
    if (s.decomposition.axis < 0 || s.decomposition.axis > 1) {
      throw ConfigError("decomposition axis must be 0 or 1");
    }
    if (!std::is_sorted(s.decomposition.cuts.begin(), s.decomposition.cuts.end())) {
      throw ConfigError("decomposition cuts must be ascending");
    }
  }
  if (s.kind == Kind::Apinn) {
    if (s.m < 2) throw ConfigError("APINN needs m >= 2");
    if (s.gate_form == GateForm::Sigmoid && s.m != 2) {
      throw ConfigError("sigmoid gate supports m = 2 only");
    }
    if (s.sharing != Sharing::NoShare && s.shared_depth < 1) {
      throw ConfigError("shared network depth must be at least 1");
    }
  }
  (void)Normalizer::of(s.domain);
}

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
             const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  std::string msg = std::string("unknown ") + what + " '" + s + "'; expected one of:";
  for (const auto& [name, value] : table) msg += std::string(" ") + name;
  throw ConfigError(msg);
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw ConfigError("bad number '" + item + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  int x = 0;
  try {
    x = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

const std::vector<std::string>& spec_keys() {
  static const std::vector<std::string> keys{
      "kind",         "unknowns",     "domain",     "depth",      "width",
      "version",      "split_axis",   "cuts",       "sharing",    "shared_depth",
      "shared_width", "gate_depth",   "gate_width", "m",          "gate_form",
      "gate_trainable", "gate_target"};
  return keys;
}

}  // namespace

std::string to_string(Kind k) {
  switch (k) {
    case Kind::Pinn: return "pinn";
    case Kind::Xpinn: return "xpinn";
    case Kind::Apinn: return "apinn";
  }
  return "?";
}
std::string to_string(XpinnVersion v) { return v == XpinnVersion::V1 ? "v1" : "v2"; }
std::string to_string(Sharing s) {
  switch (s) {
    case Sharing::NoShare: return "none";
    case Sharing::ShareInside: return "inside";
    case Sharing::ShareOutside: return "outside";
  }
  return "?";
}
std::string to_string(GateForm f) { return f == GateForm::Sigmoid ? "sigmoid" : "softmax"; }

Kind parse_kind(const std::string& s) {
  return parse_enum<Kind>(s, {{"pinn", Kind::Pinn}, {"xpinn", Kind::Xpinn}, {"apinn", Kind::Apinn}},
                          "model kind");
}
XpinnVersion parse_version(const std::string& s) {
  return parse_enum<XpinnVersion>(s, {{"v1", XpinnVersion::V1}, {"v2", XpinnVersion::V2}},
                                  "XPINN version");
}
Sharing parse_sharing(const std::string& s) {
  return parse_enum<Sharing>(s,
                             {{"none", Sharing::NoShare},
                              {"inside", Sharing::ShareInside},
                              {"outside", Sharing::ShareOutside}},
                             "sharing placement");
}
GateForm parse_gate_form(const std::string& s) {
  return parse_enum<GateForm>(s, {{"sigmoid", GateForm::Sigmoid}, {"softmax", GateForm::Softmax}},
                              "gate form");
}

std::vector<std::pair<std::string, std::string>> to_kv(const ModelSpec& s) {
  return {
      {"kind", to_string(s.kind)},
      {"unknowns", std::to_string(s.unknowns)},
      {"domain", join({s.domain.lo[0], s.domain.hi[0], s.domain.lo[1], s.domain.hi[1]})},
      {"depth", std::to_string(s.depth)},
      {"width", std::to_string(s.width)},
      {"version", to_string(s.version)},
      {"split_axis", std::to_string(s.decomposition.axis)},
      {"cuts", join(s.decomposition.cuts)},
      {"sharing", to_string(s.sharing)},
      {"shared_depth", std::to_string(s.shared_depth)},
      {"shared_width", std::to_string(s.shared_width)},
      {"gate_depth", std::to_string(s.gate_depth)},
      {"gate_width", std::to_string(s.gate_width)},
      {"m", std::to_string(s.m)},
      {"gate_form", to_string(s.gate_form)},
      {"gate_trainable", s.gate_trainable ? "true" : "false"},
      {"gate_target", s.gate_target},
  };
}

bool is_spec_key(const std::string& key) {
  const auto& keys = spec_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

ModelSpec from_kv(const std::map<std::string, std::string>& kv, ModelSpec s) {
  for (const auto& [k, v] : kv) {
    if (k == "kind") {
      s.kind = parse_kind(v);
    } else if (k == "unknowns") {
      s.unknowns = to_int(k, v);
    } else if (k == "domain") {
      const auto d = split_doubles(v);
      if (d.size() != 4) throw ConfigError("domain: expected x_lo,x_hi,t_lo,t_hi");
      s.domain.lo = {d[0], d[2]};
      s.domain.hi = {d[1], d[3]};
    } else if (k == "depth") {
      s.depth = to_int(k, v);
    } else if (k == "width") {
      s.width = to_int(k, v);
    } else if (k == "version") {
      s.version = parse_version(v);
    } else if (k == "split_axis") {
      s.decomposition.axis = to_int(k, v);
    } else if (k == "cuts") {
      s.decomposition.cuts = split_doubles(v);
    } else if (k == "sharing") {
      s.sharing = parse_sharing(v);
    } else if (k == "shared_depth") {
      s.shared_depth = to_int(k, v);
    } else if (k == "shared_width") {
      s.shared_width = to_int(k, v);
    } else if (k == "gate_depth") {
      s.gate_depth = to_int(k, v);
    } else if (k == "gate_width") {
      s.gate_width = to_int(k, v);
    } else if (k == "m") {
      s.m = to_int(k, v);
    } else if (k == "gate_form") {
      s.gate_form = parse_gate_form(v);
    } else if (k == "gate_trainable") {
      s.gate_trainable = to_bool(k, v);
    } else if (k == "gate_target") {
      s.gate_target = v;
    } else {
      throw ConfigError("unknown model key '" + k + "'");
    }
  }
  return s;
}

std::vector<std::string> component_names(const ModelSpec& s) {
  std::vector<std::string> names;
  const auto u = [](int k) { return "u" + std::to_string(k); };
  switch (s.kind) {
    case Kind::Pinn:
      for (int k = 0; k < s.unknowns; ++k) names.push_back(u(k));
      break;
    case Kind::Xpinn:
      for (int i = 0; i < s.decomposition.pieces(); ++i) {
        for (int k = 0; k < s.unknowns; ++k) names.push_back("p" + std::to_string(i) + "." + u(k));
      }
      break;
    case Kind::Apinn:
      if (s.sharing == Sharing::ShareOutside) {
        for (int i = 0; i < s.m; ++i) names.push_back("e" + std::to_string(i));
        names.emplace_back("h");
      } else {
        if (s.sharing == Sharing::ShareInside) names.emplace_back("h");
        for (int i = 0; i < s.m; ++i) {
          for (int k = 0; k < s.unknowns; ++k) names.push_back("e" + std::to_string(i) + "." + u(k));
        }
      }
      names.emplace_back("gate");
      break;
  }
  return names;
}

Model Model::build(const ModelSpec& spec, std::uint64_t seed) {
  validate(spec);
  const auto names = component_names(spec);
  std::vector<Component> parts;
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto rng = component_rng(seed, j);
    const std::string& name = names[j];
    std::vector<int> dims;
    if (spec.kind != Kind::Apinn) {
      dims = mlp_dims(2, spec.depth, spec.width, 1);
    } else if (name == "gate") {
      GateNet g = GateNet::make(spec.gate_form, spec.m, spec.gate_depth, spec.gate_width,
                                Normalizer::of(spec.domain), rng);
      parts.push_back({name, g.net, g.net, -1});
      continue;
    } else if (spec.sharing == Sharing::ShareOutside) {
      dims = name == "h" ? mlp_dims(spec.shared_width, spec.shared_depth, spec.shared_width,
                                    spec.unknowns)
                         : mlp_dims(2, spec.depth, spec.width, spec.shared_width);
    } else if (name == "h") {
      dims = mlp_dims(2, spec.shared_depth, spec.shared_width, spec.shared_width);
    } else {
      const int in = spec.sharing == Sharing::ShareInside ? spec.shared_width : 2;
      dims = mlp_dims(in, spec.depth, spec.width, 1);
    }
    DenseNet net = DenseNet::glorot(dims, rng);
    parts.push_back({name, net, net, -1});
  }
  return assemble(spec, std::move(parts));
}

Model Model::assemble(const ModelSpec& spec, std::vector<Component> components) {
  validate(spec);
  const auto names = component_names(spec);
  if (components.size() != names.size()) {
    throw ConfigError("model expects " + std::to_string(names.size()) + " networks, got " +
                      std::to_string(components.size()));
  }
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (components[j].name != names[j]) {
      throw ConfigError("expected network '" + names[j] + "', got '" + components[j].name + "'");
    }
    if (components[j].init.depth() == 0) components[j].init = components[j].net;
    if (components[j].init.dims() != components[j].net.dims()) {
      throw ConfigError("reference shape mismatch for network '" + names[j] + "'");
    }
  }
  Model m;
  m.spec_ = spec;
  m.norm_ = Normalizer::of(spec.domain);
  m.parts_ = std::move(components);
  m.assign_offsets();
  return m;
}

void Model::assign_offsets() {
  Index off = 0;
  for (auto& c : parts_) {
    const bool frozen = c.name == "gate" && !spec_.gate_trainable;
    c.offset = frozen ? -1 : off;
    if (!frozen) off += c.net.parameter_count();
  }
  trainable_ = off;
}

int Model::pieces() const {
  return spec_.kind == Kind::Xpinn ? spec_.decomposition.pieces() : 1;
}

Index Model::total_parameter_count() const {
  Index n = 0;
  for (const auto& c : parts_) n += c.net.parameter_count();
  return n;
}

std::vector<double> Model::parameters() const {
  std::vector<double> theta(trainable_);
  for (const auto& c : parts_) {
    if (c.offset < 0) continue;
    c.net.write_parameters(std::span<double>(theta).subspan(c.offset, c.net.parameter_count()));
  }
  return theta;
}

void Model::set_parameters(std::span<const double> theta) {
  if (static_cast<Index>(theta.size()) != trainable_) {
    throw ConfigError("parameter vector has " + std::to_string(theta.size()) + " entries, model has " +
                      std::to_string(trainable_));
  }
  for (auto& c : parts_) {
    if (c.offset < 0) continue;
    c.net.read_parameters(theta.subspan(c.offset, c.net.parameter_count()));
  }
}

const Component& Model::component(const std::string& name) const {
  for (const auto& c : parts_) {
    if (c.name == name) return c;
  }
  throw ConfigError("model has no network '" + name + "'");
}

GateNet Model::gate() const {
  if (!has_gate()) throw ConfigError("model has no gate");
  GateNet g;
  g.form = spec_.gate_form;
  g.m = spec_.m;
  g.net = component("gate").net;
  g.normalizer = norm_;
  g.trainable = spec_.gate_trainable;
  return g;
}

void Model::set_gate(const GateNet& gate) {
  if (!has_gate()) throw ConfigError("model has no gate");
  if (gate.form != spec_.gate_form || gate.m != spec_.m) {
    throw ConfigError("gate form/components do not match the model");
  }
  for (auto& c : parts_) {
    if (c.name != "gate") continue;
    if (gate.net.dims() != c.net.dims()) throw ConfigError("gate network shape does not match");
    c.net = gate.net;
    c.init = gate.net;
  }
}

Var Model::input(Tape& tape, const RowMat& pts, const diff::JetLayout& layout) const {
  if (pts.rows() != 2) throw ConfigError("points must have 2 rows");
  return tape.input(pts, layout, norm_.scale, norm_.shift);
}

Var Model::gate_rows(Tape& tape, Var z) const {
  const Component& c = component("gate");
  return gate_transform(tape, c.net.apply(tape, z, c.offset), spec_.gate_form);
}

Var Model::evaluate(Tape& tape, Var z, int piece) const {
  const int U = spec_.unknowns;
  std::vector<Var> rows;
  switch (spec_.kind) {
    case Kind::Pinn:
      for (int k = 0; k < U; ++k) rows.push_back(part(k).net.apply(tape, z, part(k).offset));
      break;
    case Kind::Xpinn: {
      if (piece < 0 || piece >= pieces()) throw ConfigError("XPINN piece out of range");
      for (int k = 0; k < U; ++k) {
        const Component& c = part(static_cast<std::size_t>(piece * U + k));
        rows.push_back(c.net.apply(tape, z, c.offset));
      }
      break;
    }
    case Kind::Apinn: {
      const Var g = gate_rows(tape, z);
      if (spec_.sharing == Sharing::ShareOutside) {
        Var mix;
        for (int i = 0; i < spec_.m; ++i) {
          const Var term = tape.row(g, i) * part(i).net.apply(tape, z, part(i).offset);
          mix = i == 0 ? term : mix + term;
        }
        const Component& h = part(static_cast<std::size_t>(spec_.m));
        return h.net.apply(tape, mix, h.offset);
      }
      std::size_t first = 0;
      Var feats = z;
      if (spec_.sharing == Sharing::ShareInside) {
        feats = part(0).net.apply(tape, z, part(0).offset);
        first = 1;
      }
      for (int k = 0; k < U; ++k) {
        Var acc;
        for (int i = 0; i < spec_.m; ++i) {
          const Component& e = part(first + static_cast<std::size_t>(i * U + k));
          const Var term = tape.row(g, i) * e.net.apply(tape, feats, e.offset);
          acc = i == 0 ? term : acc + term;
        }
        rows.push_back(acc);
      }
      break;
    }
  }
  return rows.size() == 1 ? rows[0] : tape.stack(rows);
}

RowMat Model::evaluate_values(const RowMat& pts, int piece, diff::Exec exec) const {
  constexpr Index kBatch = 4096;
  RowMat out(spec_.unknowns, pts.cols());
  for (Index c0 = 0; c0 < pts.cols(); c0 += kBatch) {
    const Index n = std::min(kBatch, pts.cols() - c0);
    Tape tape(exec);
    const Var z = input(tape, pts.middleCols(c0, n), diff::JetLayout{});
    out.middleCols(c0, n) = tape.block(evaluate(tape, z, piece)).data;
  }
  return out;
}

RowMat Model::predict(const RowMat& pts, diff::Exec exec) const {
  for (Index p = 0; p < pts.cols(); ++p) {
    if (!spec_.domain.contains(pts(0, p), pts(1, p), 1e-9)) {
      std::ostringstream os;
      os << "point (" << pts(0, p) << ", " << pts(1, p) << ") is outside the domain";
      throw DomainError(os.str());
    }
  }
  if (spec_.kind != Kind::Xpinn) return evaluate_values(pts, 0, exec);
  const Decomposition& d = spec_.decomposition;
  std::vector<std::vector<Index>> members(pieces());
  std::vector<std::pair<int, int>> own(pts.cols());
  for (Index p = 0; p < pts.cols(); ++p) {
    own[p] = d.owners(pts(d.axis, p));
    members[own[p].first].push_back(p);
    if (own[p].second != own[p].first) members[own[p].second].push_back(p);
  }
  RowMat out = RowMat::Zero(spec_.unknowns, pts.cols());
  for (int i = 0; i < pieces(); ++i) {
    if (members[i].empty()) continue;
    RowMat sub(2, static_cast<Index>(members[i].size()));
    for (std::size_t j = 0; j < members[i].size(); ++j) sub.col(j) = pts.col(members[i][j]);
    const RowMat v = evaluate_values(sub, i, exec);
    for (std::size_t j = 0; j < members[i].size(); ++j) {
      const Index p = members[i][j];
      const double w = own[p].first == own[p].second ? 1.0 : 0.5;
      out.col(p) += w * v.col(j);
    }
  }
  return out;
}

RowMat Model::gate_values(const RowMat& pts, diff::Exec exec) const { return gate().values(pts, exec); }

}  // namespace apinn::models
