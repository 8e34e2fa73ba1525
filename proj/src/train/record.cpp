#include "apinn/train/record.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "apinn/errors.hpp"

namespace apinn::train {

std::string to_string(Selection s) {
  return s == Selection::BestOverRun ? "best_over_run" : "lowest_train_last_10pct";
}

Selection parse_selection(const std::string& s) {
  if (s == "best_over_run") return Selection::BestOverRun;
  if (s == "lowest_train_last_10pct") return Selection::LowestTrainLast10Pct;
  throw ConfigError("unknown selection policy '" + s +
                    "'; expected best_over_run or lowest_train_last_10pct");
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void RunRecord::write_csv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "epoch,total,boundary,residual,iface_avg,iface_res,iface_deriv,rel_l2_u";
  if (unknowns == 2) os << ",rel_l2_v";
  os << '\n';
  for (const RecordRow& r : rows) {
    os << r.epoch;
    for (double v : {r.loss.total, r.loss.boundary, r.loss.residual, r.loss.iface_avg,
                     r.loss.iface_res, r.loss.iface_deriv}) {
      os << ',' << format_double(v);
    }
    for (int k = 0; k < unknowns; ++k) {
      os << ',';
      if (!has_reference) {
        os << "NA";
      } else if (!r.rel_l2.empty()) {
        os << format_double(r.rel_l2[k]);
      }
    }
    os << '\n';
  }
}

RunRecord RunRecord::read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw NotAvailable("run record " + path.string() + " not found");
  std::string line;
  std::getline(is, line);
  RunRecord rec;
  if (line == "epoch,total,boundary,residual,iface_avg,iface_res,iface_deriv,rel_l2_u") {
    rec.unknowns = 1;
  } else if (line ==
             "epoch,total,boundary,residual,iface_avg,iface_res,iface_deriv,rel_l2_u,rel_l2_v") {
    rec.unknowns = 2;
  } else {
    throw ConfigError("unexpected run record header: " + line);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (line.back() == ',') cells.emplace_back();
    if (static_cast<int>(cells.size()) != 7 + rec.unknowns) {
      throw ConfigError("run record row has wrong column count: " + line);
    }
    RecordRow r;
    r.epoch = std::stol(cells[0]);
    double* parts[] = {&r.loss.total,     &r.loss.boundary,  &r.loss.residual,
                       &r.loss.iface_avg, &r.loss.iface_res, &r.loss.iface_deriv};
    for (int i = 0; i < 6; ++i) *parts[i] = std::stod(cells[1 + i]);
    if (cells[7] == "NA") {
      rec.has_reference = false;
    } else if (!cells[7].empty()) {
      for (int k = 0; k < rec.unknowns; ++k) r.rel_l2.push_back(std::stod(cells[7 + k]));
    }
    rec.rows.push_back(std::move(r));
  }
  return rec;
}

std::optional<SelectedError> select_error(const RunRecord& record, Selection policy) {
  if (record.rows.empty()) throw ConfigError("select_error: empty run record");
  if (!record.has_reference) return std::nullopt;
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const long last = record.rows.back().epoch;
  const long first_allowed =
      policy == Selection::BestOverRun ? std::numeric_limits<long>::min() : last - last / 10;
  const RecordRow* best = nullptr;
  double best_key = 0.0;
  for (const RecordRow& r : record.rows) {
    if (r.rel_l2.empty() || r.epoch < first_allowed) continue;
    const double key = policy == Selection::BestOverRun ? mean(r.rel_l2) : r.loss.total;
    if (!best || key < best_key) {
      best = &r;
      best_key = key;
    }
  }
  if (!best) throw ConfigError("select_error: no evaluated error in the selection window");
  return SelectedError{best->epoch, mean(best->rel_l2), best->rel_l2};
}

}  // namespace apinn::train
