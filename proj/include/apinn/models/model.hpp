#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apinn/diff/dense_net.hpp"
#include "apinn/geometry.hpp"
#include "apinn/models/gate_net.hpp"

namespace apinn::models {

enum class Kind { Pinn, Xpinn, Apinn };
enum class XpinnVersion { V1, V2 };
/// Where the shared network h sits: E_i(x), E_i(h(x)), or h(sum_i G_i E_i(x)).
enum class Sharing { NoShare, ShareInside, ShareOutside };

/// Declarative model description. Depths count weight matrices.
///
/// PINN: one `depth` x `width` net per unknown. XPINN: one such net per
/// (piece, unknown). APINN: shared h (`shared_depth`, `shared_width`), one
/// subnet per (gate component, unknown) of size `depth` x `width`, and a gate
/// of `gate_depth` x `gate_width` with `m` components.
struct ModelSpec {
  Kind kind = Kind::Pinn;
  int unknowns = 1;
  Box domain;
  int depth = 10;
  int width = 20;

  XpinnVersion version = XpinnVersion::V1;
  Decomposition decomposition;

  Sharing sharing = Sharing::ShareInside;
  int shared_depth = 3;
  int shared_width = 20;
  int gate_depth = 2;
  int gate_width = 20;
  int m = 2;
  GateForm gate_form = GateForm::Sigmoid;
  bool gate_trainable = true;
  std::string gate_target;

  bool operator==(const ModelSpec&) const = default;
};

std::string to_string(Kind k);
std::string to_string(XpinnVersion v);
std::string to_string(Sharing s);
std::string to_string(GateForm f);
Kind parse_kind(const std::string& s);
XpinnVersion parse_version(const std::string& s);
Sharing parse_sharing(const std::string& s);
GateForm parse_gate_form(const std::string& s);

/// Flat key/value form of a spec, used by checkpoints and configs.
std::vector<std::pair<std::string, std::string>> to_kv(const ModelSpec& spec);
/// Reads keys present in `kv` over `base`; unknown keys are rejected.
ModelSpec from_kv(const std::map<std::string, std::string>& kv, ModelSpec base = {});
/// True if `key` is one of the spec keys understood by from_kv.
bool is_spec_key(const std::string& key);

/// One named network of a model, with its initialization kept as the
/// reference matrices for complexity metrics.
struct Component {
  std::string name;
  diff::DenseNet net;
  diff::DenseNet init;
  Index offset = -1;
};

/// Instantiated PINN, XPINN, or APINN.
///
/// Trainable parameters are the concatenation of every component's
/// parameters in component order, skipping a frozen gate.
class Model {
 public:
  static Model build(const ModelSpec& spec, std::uint64_t seed);
  /// Reassembles a model from stored components (checkpoint loading).
  static Model assemble(const ModelSpec& spec, std::vector<Component> components);

  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] const Normalizer& normalizer() const { return norm_; }
  [[nodiscard]] int unknowns() const { return spec_.unknowns; }
  /// XPINN subdomain count; 1 for PINN and APINN.
  [[nodiscard]] int pieces() const;

  [[nodiscard]] Index parameter_count() const { return trainable_; }
  [[nodiscard]] Index total_parameter_count() const;
  [[nodiscard]] std::vector<double> parameters() const;
  void set_parameters(std::span<const double> theta);

  [[nodiscard]] const std::vector<Component>& components() const { return parts_; }
  [[nodiscard]] const Component& component(const std::string& name) const;

  [[nodiscard]] bool has_gate() const { return spec_.kind == Kind::Apinn; }
  [[nodiscard]] GateNet gate() const;
  /// Replaces the gate network (keeps the spec's trainable flag) and resets
  /// its reference matrices to the new values.
  void set_gate(const GateNet& gate);

  /// Normalized coordinates on the tape, seeded for the derivatives in layout.
  diff::Var input(diff::Tape& tape, const RowMat& pts, const diff::JetLayout& layout) const;
  /// Output rows (one per unknown). For XPINN, `piece` picks the subnet set.
  diff::Var evaluate(diff::Tape& tape, diff::Var z, int piece = 0) const;
  /// Gate rows (m) on the tape; APINN only.
  diff::Var gate_rows(diff::Tape& tape, diff::Var z) const;

  /// Values (unknowns x n) at raw coordinates. XPINN routes each point to its
  /// owning subnet and averages the two neighbours on an interface.
  [[nodiscard]] RowMat predict(const RowMat& pts, diff::Exec exec = diff::Exec::Parallel) const;
  [[nodiscard]] RowMat gate_values(const RowMat& pts,
                                   diff::Exec exec = diff::Exec::Parallel) const;

 private:
  Model() = default;
  void assign_offsets();
  [[nodiscard]] const Component& part(std::size_t i) const { return parts_[i]; }
  [[nodiscard]] RowMat evaluate_values(const RowMat& pts, int piece, diff::Exec exec) const;

  ModelSpec spec_;
  Normalizer norm_;
  std::vector<Component> parts_;
  Index trainable_ = 0;
};

/// Component names by convention: "u<k>" (PINN), "p<i>.u<k>" (XPINN),
/// "h", "e<i>.u<k>" and "gate" (APINN).
std::vector<std::string> component_names(const ModelSpec& spec);

}  // namespace apinn::models
