#include "fracsob/grid.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fracsob/error.hpp"

namespace fracsob {

GridSpec GridSpec::make(const Box& window, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::InvalidParameters, "extension", "make_grid", "cell side must be positive");
  const double side = window.width();
  if (std::abs(window.height() - side) > 1e-12 * side)
    throw Error(ErrorCode::InvalidParameters, "extension", "make_grid", "window must be square");
  const double cells = side / h;
  const long n = std::lround(cells);
  if (n < 1 || std::abs(cells - static_cast<double>(n)) > 1e-9 * cells)
    throw Error(ErrorCode::InvalidParameters, "extension", "make_grid", "h must divide the window side");
  return {window, h, static_cast<int>(n)};
}

std::vector<CellMask> classify_cells(const DomainModel& domain, const GridSpec& spec) {
  std::vector<CellMask> mask(spec.size(), CellMask::Exterior);
  const double on_tol = 1e-12 * std::max(1.0, domain.diameter());
  const SegmentSet& d = domain.d_set();
  const SegmentSet& g = domain.gamma_set();
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const Vec2 c = spec.center(k);
    if (domain.contains(c)) {
      mask[k] = CellMask::Interior;
      continue;
    }
    const double dg = g.dist(c);
    if (dg <= on_tol) {
      mask[k] = CellMask::GammaCollar;
      continue;
    }
    if (!d.empty() && d.dist(spec.cell_box(k)) <= on_tol && d.dist(c) < dg) mask[k] = CellMask::DCollar;
  }
  return mask;
}

GridFunction make_grid(const DomainModel& domain, double h) {
  GridFunction f;
  f.spec = GridSpec::make(domain.window(), h);
  f.values.assign(f.spec.size(), 0.0);
  f.mask = classify_cells(domain, f.spec);
  return f;
}

GridFunction sample_on_omega(const DomainModel& domain, double h, const std::function<double(Vec2)>& fn) {
  GridFunction f = make_grid(domain, h);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    if (f.interior(k)) f.values[k] = fn(f.spec.center(k));
  return f;
}

GridFunction restrict_to_omega(const GridFunction& f) {
  GridFunction out = f;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    if (!out.interior(k)) out.values[k] = 0.0;
  return out;
}

void write_grid(std::ostream& out, const GridFunction& f) {
  std::ostringstream s;
  s.precision(17);
  s << "fracsob-grid 1\n";
  s << "window " << f.spec.window.lo.x << ' ' << f.spec.window.lo.y << ' ' << f.spec.window.hi.x << ' '
    << f.spec.window.hi.y << '\n';
  s << "h " << f.spec.h << '\n';
  s << "n " << f.spec.n << '\n';
  s << "values\n";
  for (int j = 0; j < f.spec.n; ++j) {
    for (int i = 0; i < f.spec.n; ++i) s << (i ? " " : "") << f.values[f.spec.index(i, j)];
    s << '\n';
  }
  s << "mask\n";
  for (int j = 0; j < f.spec.n; ++j) {
    for (int i = 0; i < f.spec.n; ++i) s << (i ? " " : "") << static_cast<int>(f.mask[f.spec.index(i, j)]);
    s << '\n';
  }
  out << s.str();
}

GridFunction read_grid(std::istream& in) {
  auto fail = [](const std::string& what) -> GridFunction {
    throw Error(ErrorCode::MalformedSpec, "extension", "read_grid", what);
  };
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "fracsob-grid" || version != 1) return fail("bad header");
  Box w;
  double h = 0.0;
  int n = 0;
  if (!(in >> tag >> w.lo.x >> w.lo.y >> w.hi.x >> w.hi.y) || tag != "window") return fail("bad window line");
  if (!(in >> tag >> h) || tag != "h") return fail("bad h line");
  if (!(in >> tag >> n) || tag != "n") return fail("bad n line");
  GridFunction f;
  f.spec = GridSpec::make(w, h);
  if (f.spec.n != n) return fail("n disagrees with window and h");
  f.values.resize(f.spec.size());
  f.mask.resize(f.spec.size());
  if (!(in >> tag) || tag != "values") return fail("missing values block");
  for (auto& v : f.values)
    if (!(in >> v)) return fail("truncated values block");
  if (!(in >> tag) || tag != "mask") return fail("missing mask block");
  for (auto& m : f.mask) {
    int code = -1;
    if (!(in >> code) || code < 0 || code > 3) return fail("bad mask code");
    m = static_cast<CellMask>(code);
  }
  return f;
}

}  // namespace fracsob
