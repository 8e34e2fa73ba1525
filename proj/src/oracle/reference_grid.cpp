#include "apinn/oracle/reference_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <array>
#include <string>

#include "apinn/errors.hpp"

namespace apinn::oracle {

std::vector<double> linspace(double a, double b, Index n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (Index i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  v[n - 1] = b;
  return v;
}

ReferenceGrid ReferenceGrid::sample(const std::vector<double>& xs, const std::vector<double>& ts,
                                    int unknowns,
                                    const std::function<void(double, double, double*)>& f) {
  ReferenceGrid g;
  g.xs = xs;
  g.ts = ts;
  g.values.assign(unknowns, RowMat(g.nt(), g.nx()));
  std::vector<double> out(unknowns);
  for (Index j = 0; j < g.nt(); ++j) {
    for (Index i = 0; i < g.nx(); ++i) {
      f(xs[i], ts[j], out.data());
      for (int k = 0; k < unknowns; ++k) g.values[k](j, i) = out[k];
    }
  }
  return g;
}

ReferenceGrid ReferenceGrid::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw NotAvailable("reference grid " + path.string() + " not found");
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("reference grid " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  int unknowns = 0;
  if (line == "x,t,u") {
    unknowns = 1;
  } else if (line == "x,t,u,v") {
    unknowns = 2;
  } else {
    throw ConfigError("reference grid header must be 'x,t,u' or 'x,t,u,v', got '" + line + "'");
  }
  std::vector<std::array<double, 4>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::array<double, 4> r{};
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= 2 + unknowns) throw ConfigError("reference grid: too many columns: " + line);
      r[c++] = std::stod(cell);
    }
    if (c != 2 + unknowns) throw ConfigError("reference grid: too few columns: " + line);
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError("reference grid has no data rows");
  ReferenceGrid g;
  for (const auto& r : rows) {
    if (r[1] != rows[0][1]) break;
    g.xs.push_back(r[0]);
  }
  const Index nx = g.nx();
  if (rows.size() % nx != 0) throw ConfigError("reference grid is not rectilinear");
  const Index nt = static_cast<Index>(rows.size()) / nx;
  g.values.assign(unknowns, RowMat(nt, nx));
  for (Index j = 0; j < nt; ++j) {
    g.ts.push_back(rows[j * nx][1]);
    for (Index i = 0; i < nx; ++i) {
      const auto& r = rows[j * nx + i];
      if (r[0] != g.xs[i] || r[1] != g.ts[j]) {
        throw ConfigError("reference grid is not rectilinear (row-major, t outer, x inner)");
      }
      for (int k = 0; k < unknowns; ++k) g.values[k](j, i) = r[2 + k];
    }
  }
  if (!std::is_sorted(g.xs.begin(), g.xs.end()) || !std::is_sorted(g.ts.begin(), g.ts.end()) ||
      std::adjacent_find(g.xs.begin(), g.xs.end()) != g.xs.end() ||
      std::adjacent_find(g.ts.begin(), g.ts.end()) != g.ts.end()) {
    throw ConfigError("reference grid coordinates must be strictly increasing");
  }
  return g;
}

void ReferenceGrid::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os.precision(17);
  os << (unknowns() == 1 ? "x,t,u\n" : "x,t,u,v\n");
  for (Index j = 0; j < nt(); ++j) {
    for (Index i = 0; i < nx(); ++i) {
      os << xs[i] << ',' << ts[j];
      for (int k = 0; k < unknowns(); ++k) os << ',' << values[k](j, i);
      os << '\n';
    }
  }
}

namespace {

// Cell index i with axis[i] <= v <= axis[i+1] and the local coordinate.
std::pair<Index, double> locate(const std::vector<double>& axis, double v) {
  const double tol = 1e-12 * std::max(1.0, std::abs(axis.back() - axis.front()));
  if (v < axis.front() - tol || v > axis.back() + tol) {
    throw DomainError("reference grid: coordinate " + std::to_string(v) + " outside grid");
  }
  if (axis.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  Index i = std::clamp<Index>(static_cast<Index>(it - axis.begin()) - 1, 0,
                              static_cast<Index>(axis.size()) - 2);
  const double s = std::clamp((v - axis[i]) / (axis[i + 1] - axis[i]), 0.0, 1.0);
  return {i, s};
}

}  // namespace

double ReferenceGrid::interpolate(int k, double x, double t) const {
  const auto [i, a] = locate(xs, x);
  const auto [j, b] = locate(ts, t);
  const RowMat& v = values.at(k);
  if (nx() == 1 || nt() == 1) {
    const Index i1 = std::min(i + 1, nx() - 1);
    const Index j1 = std::min(j + 1, nt() - 1);
    return (1 - a) * (1 - b) * v(j, i) + a * (1 - b) * v(j, i1) + (1 - a) * b * v(j1, i) +
           a * b * v(j1, i1);
  }
  return (1 - a) * (1 - b) * v(j, i) + a * (1 - b) * v(j, i + 1) + (1 - a) * b * v(j + 1, i) +
         a * b * v(j + 1, i + 1);
}

}  // namespace apinn::oracle
