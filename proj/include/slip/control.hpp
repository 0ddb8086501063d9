#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "slip/grid.hpp"

namespace slip {

// Admissible control values nu_1 < ... < nu_M (distinct integers).
class LabelSet {
 public:
  explicit LabelSet(std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t k) const { return labels_[k]; }
  int min() const { return labels_.front(); }
  int max() const { return labels_.back(); }
  const std::vector<int>& values() const { return labels_; }

  bool contains(int value) const;
  std::optional<std::size_t> index_of(int value) const;

  // Largest member <= x and smallest member >= x (nullopt when none exists).
  std::optional<int> floor(double x) const;
  std::optional<int> ceil(double x) const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<int> labels_;
};

// Piecewise-constant integer control: one label value per grid cell.
class ControlField {
 public:
  ControlField(GridSpec grid, LabelSet labels, std::vector<int> values);
  // Every cell set to `value`.
  ControlField(GridSpec grid, LabelSet labels, int value);

  const GridSpec& grid() const { return grid_; }
  const LabelSet& labels() const { return labels_; }
  std::span<const int> values() const { return values_; }

  int operator[](int cell) const { return values_[static_cast<std::size_t>(cell)]; }
  int at(int i, int j) const { return values_[static_cast<std::size_t>(grid_.index(i, j))]; }
  void set(int cell, int value);

  std::vector<double> as_real() const;

  friend bool operator==(const ControlField& a, const ControlField& b) {
    return a.grid_ == b.grid_ && a.labels_ == b.labels_ && a.values_ == b.values_;
  }

 private:
  GridSpec grid_;
  LabelSet labels_;
  std::vector<int> values_;
};

/// Anisotropic total variation: sum over interior facets of measure * |jump|.
double tv(const ControlField& v);

// Total facet measure between level sets, keyed by 0-based label indices (i < j).
// Every unordered pair is present, including zero entries.
using InterfaceMap = std::map<std::pair<std::size_t, std::size_t>, double>;
InterfaceMap pairwise_interfaces(const ControlField& v);

// sum_{i<j} |nu_i - nu_j| * measure(i, j)
double tv_from_interfaces(const LabelSet& labels, const InterfaceMap& interfaces);

/// sum_P |v_P - w_P| * lambda(P)
double l1_dist(const ControlField& v, const ControlField& w);

// Perimeter of each level set relative to the domain (domain-boundary facets excluded).
std::vector<double> level_set_perimeters(const ControlField& v);

// tv(v) >= 1/2 * sum_i P(E_i) - 1e-12. Always holds for fields over integer labels.
bool perimeter_lower_bound_check(const ControlField& v);

// CSV: first line "nx,ny,lx,ly", then ny lines of nx comma-separated labels,
// starting with row j = 0.
void write_csv(std::ostream& out, const ControlField& v);
ControlField read_csv(std::istream& in, const LabelSet& labels);

// ASCII PGM (P2), top image row = top grid row; labels mapped linearly onto 0..255.
void write_pgm(std::ostream& out, const ControlField& v);

}  // namespace slip
