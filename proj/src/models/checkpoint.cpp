#include "apinn/models/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "apinn/errors.hpp"

namespace apinn::models {
namespace {

constexpr const char* kFormat = "apinn-ckpt/1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void write_values(std::ostream& os, const char* tag, const diff::DenseNet& net) {
  std::vector<double> v(net.parameter_count());
  net.write_parameters(v);
  os << tag;
  for (double x : v) os << ' ' << x;
  os << '\n';
}

void write_net(std::ostream& os, const std::string& name, const diff::DenseNet& net,
               const diff::DenseNet& init) {
  os << "net " << name << ' ';
  const auto dims = net.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << '\n';
  write_values(os, "param", net);
  write_values(os, "init", init);
}

struct Parsed {
  std::map<std::string, std::string> header;
  std::vector<Component> nets;
};

std::vector<double> read_values(std::istream& is, const char* tag, std::size_t count,
                                const std::string& name) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("checkpoint truncated in network " + name);
  std::istringstream ls(line);
  std::string t;
  ls >> t;
  if (t != tag) throw ConfigError("checkpoint: expected '" + std::string(tag) + "' for " + name);
  std::vector<double> v;
  v.reserve(count);
  std::string tok;
  while (ls >> tok) v.push_back(std::stod(tok));
  if (v.size() != count) {
    throw ConfigError("checkpoint: network " + name + " has " + std::to_string(v.size()) +
                      " values, expected " + std::to_string(count));
  }
  return v;
}

diff::DenseNet shaped(const std::vector<int>& dims, const std::vector<double>& v) {
  diff::DenseNet net = diff::DenseNet::zeros(dims);
  net.read_parameters(v);
  return net;
}

Parsed parse(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open checkpoint " + path.string());
  Parsed out;
  std::string line;
  bool ended = false;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == "end_header") {
      ended = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("checkpoint header line without '=': " + line);
    out.header[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!ended) throw ConfigError("checkpoint " + path.string() + " has no end_header");
  if (out.header["format"] != kFormat) {
    throw ConfigError("unsupported checkpoint format '" + out.header["format"] + "'");
  }
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, name, dims_s;
    ls >> tag >> name >> dims_s;
    if (tag != "net") throw ConfigError("checkpoint: expected 'net', got '" + tag + "'");
    std::vector<int> dims;
    std::stringstream ds(dims_s);
    std::string d;
    while (std::getline(ds, d, ',')) dims.push_back(std::stoi(d));
    if (dims.size() < 2) throw ConfigError("checkpoint: bad dims for network " + name);
    const auto count = static_cast<std::size_t>(diff::DenseNet::count(dims));
    Component c;
    c.name = name;
    c.net = shaped(dims, read_values(is, "param", count, name));
    c.init = shaped(dims, read_values(is, "init", count, name));
    out.nets.push_back(std::move(c));
  }
  return out;
}

void write_header(std::ostream& os, const char* kind,
                  const std::vector<std::pair<std::string, std::string>>& kv, const Meta& meta) {
  os << "format = " << kFormat << '\n' << "kind = " << kind << '\n';
  for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
  for (const auto& [k, v] : meta) os << "meta." << k << " = " << v << '\n';
  os << "end_header\n";
}

void extract_meta(const std::map<std::string, std::string>& header, Meta* meta) {
  if (!meta) return;
  for (const auto& [k, v] : header) {
    if (k.rfind("meta.", 0) == 0) (*meta)[k.substr(5)] = v;
  }
}

std::string join4(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  std::ostringstream os;
  os.precision(17);
  os << a[0] << ',' << a[1] << ',' << b[0] << ',' << b[1];
  return os.str();
}

void open_out(std::ofstream& os, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  os.open(path);
  if (!os) throw ConfigError("cannot write checkpoint " + path.string());
  os.precision(17);
}

}  // namespace

void save_model(const std::filesystem::path& path, const Model& model, const Meta& meta) {
  std::ofstream os;
  open_out(os, path);
  std::vector<std::pair<std::string, std::string>> kv;
  for (auto& [k, v] : to_kv(model.spec())) kv.emplace_back("spec." + k, v);
  write_header(os, "model", kv, meta);
  for (const auto& c : model.components()) write_net(os, c.name, c.net, c.init);
}

Model load_model(const std::filesystem::path& path, Meta* meta) {
  Parsed p = parse(path);
  if (p.header["kind"] != "model") throw ConfigError(path.string() + " is not a model checkpoint");
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : p.header) {
    if (k.rfind("spec.", 0) == 0) kv[k.substr(5)] = v;
  }
  extract_meta(p.header, meta);
  return Model::assemble(from_kv(kv), std::move(p.nets));
}

void save_gate(const std::filesystem::path& path, const GateNet& gate, const Meta& meta) {
  std::ofstream os;
  open_out(os, path);
  write_header(os, "gate",
               {{"gate.form", to_string(gate.form)},
                {"gate.m", std::to_string(gate.m)},
                {"gate.normalizer", join4(gate.normalizer.scale, gate.normalizer.shift)},
                {"gate.trainable", gate.trainable ? "true" : "false"}},
               meta);
  write_net(os, "gate", gate.net, gate.net);
}

GateNet load_gate(const std::filesystem::path& path, Meta* meta) {
  Parsed p = parse(path);
  if (p.header["kind"] != "gate") throw ConfigError(path.string() + " is not a gate checkpoint");
  if (p.nets.size() != 1) throw ConfigError("gate checkpoint must hold exactly one network");
  GateNet g;
  g.form = parse_gate_form(p.header["gate.form"]);
  g.m = std::stoi(p.header["gate.m"]);
  std::vector<double> n;
  std::stringstream ss(p.header["gate.normalizer"]);
  std::string item;
  while (std::getline(ss, item, ',')) n.push_back(std::stod(item));
  if (n.size() != 4) throw ConfigError("gate checkpoint: bad normalizer");
  g.normalizer.scale = {n[0], n[1]};
  g.normalizer.shift = {n[2], n[3]};
  g.trainable = p.header["gate.trainable"] == "true";
  g.net = std::move(p.nets[0].net);
  extract_meta(p.header, meta);
  return g;
}

std::string checkpoint_kind(const std::filesystem::path& path) {
  return parse(path).header["kind"];
}

}  // namespace apinn::models
