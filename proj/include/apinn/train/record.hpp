#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apinn/train/loss.hpp"

namespace apinn::train {

/// Error-selection rule applied to a finished run.
enum class Selection { BestOverRun, LowestTrainLast10Pct };
std::string to_string(Selection s);
Selection parse_selection(const std::string& s);

/// One logged epoch. `rel_l2` is empty on epochs where the error was not
/// evaluated.
struct RecordRow {
  long epoch = 0;
  LossParts loss;
  std::vector<double> rel_l2;
};

/// Training trajectory. CSV header:
/// epoch,total,boundary,residual,iface_avg,iface_res,iface_deriv,rel_l2_u[,rel_l2_v]
/// Unevaluated error cells are empty; without a reference every error cell
/// is NA. Numbers use 17 significant digits.
struct RunRecord {
  int unknowns = 1;
  bool has_reference = true;
  std::vector<RecordRow> rows;

  void write_csv(const std::filesystem::path& path) const;
  static RunRecord read_csv(const std::filesystem::path& path);
};

struct SelectedError {
  long epoch = 0;
  double value = 0.0;                // mean over unknowns
  std::vector<double> per_unknown;
};

/// Applies the policy to rows with an evaluated error.
///
/// BestOverRun: the row with the smallest error. LowestTrainLast10Pct: among
/// rows whose epoch lies in the last 10% of the run's epoch range
/// (epoch >= last - floor(0.1 * last)), the row with the smallest total loss.
/// Ties go to the earliest epoch. Returns nullopt without a reference; throws
/// ConfigError for an empty record.
std::optional<SelectedError> select_error(const RunRecord& record, Selection policy);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace apinn::train
