#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "apinn/models/gate_net.hpp"
#include "apinn/models/model.hpp"

namespace apinn::models {

using Meta = std::map<std::string, std::string>;

/// Text checkpoint:
///
///   format = apinn-ckpt/1
///   kind = model | gate
///   <key> = <value>            spec (model) or gate.* keys, plus meta.* keys
///   end_header
///   net <name> <d0,d1,...>
///   param <values...>          weights row-major then bias, layer by layer
///   init <values...>           reference matrices (initialization)
///
/// Values are written with 17 significant digits, so a save/load round trip
/// is exact.
void save_model(const std::filesystem::path& path, const Model& model, const Meta& meta = {});
Model load_model(const std::filesystem::path& path, Meta* meta = nullptr);

void save_gate(const std::filesystem::path& path, const GateNet& gate, const Meta& meta = {});
GateNet load_gate(const std::filesystem::path& path, Meta* meta = nullptr);

/// Reads only the `kind` line of a checkpoint.
std::string checkpoint_kind(const std::filesystem::path& path);

}  // namespace apinn::models
