#include "slip/control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "slip/error.hpp"
#include "slip/format.hpp"

namespace slip {

LabelSet::LabelSet(std::vector<int> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw UsageError("label set must not be empty");
  std::sort(labels_.begin(), labels_.end());
  if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end()) {
    throw UsageError("labels must be distinct");
  }
}

bool LabelSet::contains(int value) const {
  return std::binary_search(labels_.begin(), labels_.end(), value);
}

std::optional<std::size_t> LabelSet::index_of(int value) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), value);
  if (it == labels_.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<int> LabelSet::floor(double x) const {
  std::optional<int> best;
  for (int l : labels_) {
    if (l <= x) best = l;
  }
  return best;
}

std::optional<int> LabelSet::ceil(double x) const {
  for (int l : labels_) {
    if (l >= x) return l;
  }
  return std::nullopt;
}

ControlField::ControlField(GridSpec grid, LabelSet labels, std::vector<int> values)
    : grid_(grid), labels_(std::move(labels)), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(grid_.num_cells())) {
    throw UsageError("control has " + std::to_string(values_.size()) + " values for " +
                     std::to_string(grid_.num_cells()) + " cells");
  }
  for (int v : values_) {
    if (!labels_.contains(v)) throw UsageError("control value " + std::to_string(v) + " not in V");
  }
}

ControlField::ControlField(GridSpec grid, LabelSet labels, int value)
    : ControlField(grid, labels, std::vector<int>(static_cast<std::size_t>(grid.num_cells()), value)) {}

void ControlField::set(int cell, int value) {
  if (cell < 0 || cell >= grid_.num_cells()) throw UsageError("cell index out of range");
  if (!labels_.contains(value)) throw UsageError("control value " + std::to_string(value) + " not in V");
  values_[static_cast<std::size_t>(cell)] = value;
}

std::vector<double> ControlField::as_real() const { return {values_.begin(), values_.end()}; }

double tv(const ControlField& v) {
  double total = 0.0;
  for (const Facet& f : interior_facets(v.grid())) {
    total += f.measure * std::abs(v[f.cell_a] - v[f.cell_b]);
  }
  return total;
}

InterfaceMap pairwise_interfaces(const ControlField& v) {
  const LabelSet& labels = v.labels();
  InterfaceMap out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) out[{i, j}] = 0.0;
  }
  for (const Facet& f : interior_facets(v.grid())) {
    const int a = v[f.cell_a];
    const int b = v[f.cell_b];
    if (a == b) continue;
    std::size_t ia = *labels.index_of(a);
    std::size_t ib = *labels.index_of(b);
    if (ia > ib) std::swap(ia, ib);
    out[{ia, ib}] += f.measure;
  }
  return out;
}

double tv_from_interfaces(const LabelSet& labels, const InterfaceMap& interfaces) {
  double total = 0.0;
  for (const auto& [key, measure] : interfaces) {
    total += std::abs(labels[key.first] - labels[key.second]) * measure;
  }
  return total;
}

double l1_dist(const ControlField& v, const ControlField& w) {
  if (!(v.grid() == w.grid())) throw UsageError("l1_dist: fields live on different grids");
  if (!(v.labels() == w.labels())) throw UsageError("l1_dist: fields use different label sets");
  long total = 0;
  for (int p = 0; p < v.grid().num_cells(); ++p) total += std::abs(v[p] - w[p]);
  return static_cast<double>(total) * v.grid().cell_measure();
}

std::vector<double> level_set_perimeters(const ControlField& v) {
  std::vector<double> perimeters(v.labels().size(), 0.0);
  for (const Facet& f : interior_facets(v.grid())) {
    const int a = v[f.cell_a];
    const int b = v[f.cell_b];
    if (a == b) continue;
    perimeters[*v.labels().index_of(a)] += f.measure;
    perimeters[*v.labels().index_of(b)] += f.measure;
  }
  return perimeters;
}

bool perimeter_lower_bound_check(const ControlField& v) {
  double half_sum = 0.0;
  for (double p : level_set_perimeters(v)) half_sum += 0.5 * p;
  return tv(v) >= half_sum - 1e-12;
}

void write_csv(std::ostream& out, const ControlField& v) {
  const GridSpec& g = v.grid();
  out << g.nx() << ',' << g.ny() << ',' << format_double(g.lx()) << ',' << format_double(g.ly())
      << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i > 0) out << ',';
      out << v.at(i, j);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

ControlField read_csv(std::istream& in, const LabelSet& labels) {
  std::string line;
  if (!next_data_line(in, line)) throw ConfigError("control csv: missing header");
  const auto header = split_csv_line(line);
  if (header.size() != 4) throw ConfigError("control csv: header must be nx,ny,lx,ly");
  int nx = 0;
  int ny = 0;
  double lx = 0.0;
  double ly = 0.0;
  try {
    nx = std::stoi(header[0]);
    ny = std::stoi(header[1]);
    lx = std::stod(header[2]);
    ly = std::stod(header[3]);
  } catch (const std::exception&) {
    throw ConfigError("control csv: malformed header '" + line + "'");
  }
  GridSpec grid(nx, ny, lx, ly);
  std::vector<int> values;
  values.reserve(static_cast<std::size_t>(grid.num_cells()));
  for (int j = 0; j < ny; ++j) {
    if (!next_data_line(in, line)) throw ConfigError("control csv: expected " + std::to_string(ny) + " rows");
    const auto cells = split_csv_line(line);
    if (cells.size() != static_cast<std::size_t>(nx)) {
      throw ConfigError("control csv: row " + std::to_string(j) + " has " + std::to_string(cells.size()) +
                        " entries, expected " + std::to_string(nx));
    }
    for (const auto& c : cells) {
      try {
        values.push_back(std::stoi(c));
      } catch (const std::exception&) {
        throw ConfigError("control csv: bad label '" + c + "'");
      }
    }
  }
  for (int value : values) {
    if (!labels.contains(value)) throw ConfigError("control csv: label " + std::to_string(value) + " not in V");
  }
  return ControlField(grid, labels, std::move(values));
}

void write_pgm(std::ostream& out, const ControlField& v) {
  const GridSpec& g = v.grid();
  const int lo = v.labels().min();
  const int hi = v.labels().max();
  out << "P2\n" << g.nx() << ' ' << g.ny() << "\n255\n";
  for (int j = g.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < g.nx(); ++i) {
      const int gray = hi == lo ? 0 : static_cast<int>(std::lround(255.0 * (v.at(i, j) - lo) / (hi - lo)));
      out << gray << (i + 1 < g.nx() ? ' ' : '\n');
    }
  }
}

}  // namespace slip
