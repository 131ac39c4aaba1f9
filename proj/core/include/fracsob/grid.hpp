#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fracsob/geometry.hpp"

namespace fracsob {

enum class CellMask : std::uint8_t { Exterior = 0, Interior = 1, DCollar = 2, GammaCollar = 3 };

// Uniform cell-centred grid over a square window; cell (i, j) has index j * n + i.
struct GridSpec {
  Box window;
  double h = 0.0;
  int n = 0;

  static GridSpec make(const Box& window, double h);
  std::size_t size() const { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i); }
  Vec2 center(int i, int j) const { return {window.lo.x + (i + 0.5) * h, window.lo.y + (j + 0.5) * h}; }
  Vec2 center(std::size_t k) const { return center(static_cast<int>(k % static_cast<std::size_t>(n)), static_cast<int>(k / static_cast<std::size_t>(n))); }
  Box cell_box(int i, int j) const {
    return {{window.lo.x + i * h, window.lo.y + j * h}, {window.lo.x + (i + 1) * h, window.lo.y + (j + 1) * h}};
  }
  Box cell_box(std::size_t k) const { return cell_box(static_cast<int>(k % static_cast<std::size_t>(n)), static_cast<int>(k / static_cast<std::size_t>(n))); }
  bool operator==(const GridSpec& o) const {
    return window.lo == o.window.lo && window.hi == o.window.hi && h == o.h && n == o.n;
  }
};

struct GridFunction {
  GridSpec spec;
  std::vector<double> values;
  std::vector<CellMask> mask;

  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
  bool interior(std::size_t k) const { return mask[k] == CellMask::Interior; }
};

// Interior: centre strictly inside Omega. Gamma-collar: centre on Gamma. D-collar: any other cell
// whose closed box touches D and whose centre is nearer to D than to Gamma.
std::vector<CellMask> classify_cells(const DomainModel& domain, const GridSpec& spec);

// Zero function on the domain window at resolution h, with cell masks.
GridFunction make_grid(const DomainModel& domain, double h);
// Samples fn at interior cell centres; every other cell holds 0.
GridFunction sample_on_omega(const DomainModel& domain, double h, const std::function<double(Vec2)>& fn);
// Same masks, values zeroed outside Omega.
GridFunction restrict_to_omega(const GridFunction& f);

// Plain-text grid format, see docs/gridfn.md.
void write_grid(std::ostream& out, const GridFunction& f);
GridFunction read_grid(std::istream& in);

}  // namespace fracsob
