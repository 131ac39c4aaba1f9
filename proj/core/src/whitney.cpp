#include "fracsob/whitney.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "fracsob/error.hpp"
#include "fracsob/hash.hpp"

namespace fracsob {

namespace {

[[noreturn]] void whitney_error(ErrorCode code, const std::string& op, const std::string& detail) {
  throw Error(code, "whitney", op, detail);
}

bool canonical_less(const DyadicCube& a, const DyadicCube& b) {
  return std::tie(a.level, a.ix, a.iy) < std::tie(b.level, b.ix, b.iy);
}

}  // namespace

Box DyadicCube::scaled_box(double factor) const {
  const Vec2 c = center();
  const double half = 0.5 * side * factor;
  return {{c.x - half, c.y - half}, {c.x + half, c.y + half}};
}

double long_distance(const DyadicCube& p, const DyadicCube& q) {
  return p.diam() + q.diam() + dist_box_box(p.box(), q.box());
}

bool cubes_touch(const DyadicCube& p, const DyadicCube& q) {
  if (p.level == q.level && p.ix == q.ix && p.iy == q.iy) return false;
  return dist_box_box(p.box(), q.box()) == 0.0;
}

ClosedSet::ClosedSet(std::string id, SegmentSet segments, std::vector<Ring> filled)
    : id_(std::move(id)), segments_(std::move(segments)), filled_(std::move(filled)) {}

ClosedSet ClosedSet::gamma_closure(const DomainModel& d) { return ClosedSet("closure(Gamma)", d.gamma_set()); }
ClosedSet ClosedSet::d_closure(const DomainModel& d) { return ClosedSet("closure(D)", d.d_set()); }
ClosedSet ClosedSet::omega_closure(const DomainModel& d) {
  return ClosedSet("closure(Omega)", d.boundary_set(), d.rings());
}

double ClosedSet::dist(Vec2 p) const {
  if (!filled_.empty() && point_in_rings(filled_, p)) return 0.0;
  return segments_.dist(p);
}

double ClosedSet::dist(const Box& b) const {
  const double d = segments_.dist(b);
  if (d == 0.0) return 0.0;
  if (!filled_.empty() && point_in_rings(filled_, b.center())) return 0.0;
  return d;
}

bool ClosedSet::box_inside(const Box& b) const {
  if (filled_.empty()) return false;
  return segments_.dist(b) > 0.0 && point_in_rings(filled_, b.center());
}

DyadicCube WhitneyDecomposition::make_cube(int level, std::int64_t ix, std::int64_t iy) const {
  DyadicCube c;
  c.level = level;
  c.ix = ix;
  c.iy = iy;
  c.side = std::ldexp(window_.width(), -level);
  c.lo = {window_.lo.x + static_cast<double>(ix) * c.side, window_.lo.y + static_cast<double>(iy) * c.side};
  return c;
}

double WhitneyDecomposition::collar_area() const {
  double a = 0.0;
  for (const auto& c : collar_) a += c.side * c.side;
  return a;
}

std::optional<LeafRef> WhitneyDecomposition::find_leaf(int level, std::int64_t ix, std::int64_t iy) const {
  const auto it = leaf_map_.find(key(level, ix, iy));
  if (it == leaf_map_.end()) return std::nullopt;
  return it->second;
}

int WhitneyDecomposition::find(int level, std::int64_t ix, std::int64_t iy) const {
  const auto leaf = find_leaf(level, ix, iy);
  return leaf && leaf->kind == LeafKind::Accepted ? leaf->index : -1;
}

std::optional<LeafRef> WhitneyDecomposition::leaf_at_fine(std::int64_t fx, std::int64_t fy) const {
  for (int k = 0; k <= max_level_; ++k) {
    const int shift = max_level_ - k;
    const auto it = leaf_map_.find(key(k, fx >> shift, fy >> shift));
    if (it != leaf_map_.end()) return it->second;
  }
  return std::nullopt;
}

std::optional<LeafRef> WhitneyDecomposition::leaf_at(Vec2 p) const {
  if (!window_.contains(p)) return std::nullopt;
  const std::int64_t n = std::int64_t{1} << max_level_;
  const double fine = std::ldexp(window_.width(), -max_level_);
  const auto fx = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((p.x - window_.lo.x) / fine)), 0, n - 1);
  const auto fy = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((p.y - window_.lo.y) / fine)), 0, n - 1);
  return leaf_at_fine(fx, fy);
}

int WhitneyDecomposition::locate(Vec2 p) const {
  const auto leaf = leaf_at(p);
  return leaf && leaf->kind == LeafKind::Accepted ? leaf->index : -1;
}

std::vector<int> WhitneyDecomposition::touching_accepted(int level, std::int64_t ix, std::int64_t iy) const {
  std::vector<int> out;
  const int shift = max_level_ - level;
  const std::int64_t s = std::int64_t{1} << shift;
  const std::int64_t n = std::int64_t{1} << max_level_;
  const std::int64_t x0 = ix << shift;
  const std::int64_t y0 = iy << shift;
  auto take = [&](const LeafRef& leaf) {
    if (leaf.kind == LeafKind::Accepted) out.push_back(leaf.index);
  };
  auto size_of = [&](const LeafRef& leaf) { return std::int64_t{1} << (max_level_ - leaf.level); };
  for (const std::int64_t x : {x0 - 1, x0 + s}) {
    if (x < 0 || x >= n) continue;
    std::int64_t y = std::max<std::int64_t>(y0 - 1, 0);
    const std::int64_t y_end = std::min(y0 + s, n - 1);
    while (y <= y_end) {
      const auto leaf = leaf_at_fine(x, y);
      if (!leaf) break;
      take(*leaf);
      y = (leaf->iy + 1) * size_of(*leaf);
    }
  }
  for (const std::int64_t y : {y0 - 1, y0 + s}) {
    if (y < 0 || y >= n) continue;
    std::int64_t x = x0;
    while (x < x0 + s) {
      const auto leaf = leaf_at_fine(x, y);
      if (!leaf) break;
      take(*leaf);
      x = (leaf->ix + 1) * size_of(*leaf);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<LeafRef> WhitneyDecomposition::leaves() const {
  std::vector<LeafRef> out;
  out.reserve(leaf_map_.size());
  for (const auto& [k, v] : leaf_map_) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const LeafRef& a, const LeafRef& b) {
    return std::tie(a.level, a.ix, a.iy) < std::tie(b.level, b.ix, b.iy);
  });
  return out;
}

WhitneyDecomposition whitney_decompose(const ClosedSet& f, const Box& window, int max_level) {
  if (f.empty()) whitney_error(ErrorCode::EmptyClosedSet, "whitney_decompose", "closed set " + f.id() + " is empty");
  if (max_level < 1 || max_level > 27)
    whitney_error(ErrorCode::InvalidParameters, "whitney_decompose", "max_level must lie in [1, 27]");
  if (!(window.width() > 0.0) || std::abs(window.width() - window.height()) > 1e-12 * window.width())
    whitney_error(ErrorCode::InvalidParameters, "whitney_decompose", "window must be a square");

  WhitneyDecomposition dec;
  dec.closed_set_id_ = f.id();
  dec.window_ = window;
  dec.max_level_ = max_level;

  struct Item {
    int level;
    std::int64_t ix, iy;
  };
  std::vector<Item> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const DyadicCube c = dec.make_cube(it.level, it.ix, it.iy);
    const Box b = c.box();
    if (f.box_inside(b)) {
      dec.inside_.push_back(c);
      continue;
    }
    const double d = f.dist(b);
    if (c.diam() <= d) {
      if (it.level == 0)
        whitney_error(ErrorCode::WindowTooSmall, "whitney_decompose", "the whole window is a Whitney cube");
      dec.cubes_.push_back(c);
      continue;
    }
    if (it.level == max_level) {
      dec.collar_.push_back(c);
      dec.truncated_ = true;
      continue;
    }
    for (int k = 0; k < 4; ++k)
      stack.push_back({it.level + 1, 2 * it.ix + (k & 1), 2 * it.iy + (k >> 1)});
  }

  std::sort(dec.cubes_.begin(), dec.cubes_.end(), canonical_less);
  std::sort(dec.collar_.begin(), dec.collar_.end(), canonical_less);
  std::sort(dec.inside_.begin(), dec.inside_.end(), canonical_less);
  dec.dist_.resize(dec.cubes_.size());
  dec.min_level_ = max_level;
  Fnv1a hash;
  hash.add(f.id());
  for (size_t i = 0; i < dec.cubes_.size(); ++i) {
    const auto& c = dec.cubes_[i];
    dec.dist_[i] = f.dist(c.box());
    dec.min_level_ = std::min(dec.min_level_, c.level);
    dec.leaf_map_.emplace(WhitneyDecomposition::key(c.level, c.ix, c.iy),
                          LeafRef{LeafKind::Accepted, static_cast<int>(i), c.level, c.ix, c.iy});
    hash.add(c.level);
    hash.add(c.ix);
    hash.add(c.iy);
  }
  for (size_t i = 0; i < dec.collar_.size(); ++i) {
    const auto& c = dec.collar_[i];
    dec.leaf_map_.emplace(WhitneyDecomposition::key(c.level, c.ix, c.iy),
                          LeafRef{LeafKind::Collar, static_cast<int>(i), c.level, c.ix, c.iy});
  }
  for (const auto& c : dec.inside_)
    dec.leaf_map_.emplace(WhitneyDecomposition::key(c.level, c.ix, c.iy),
                          LeafRef{LeafKind::InsideSet, -1, c.level, c.ix, c.iy});
  dec.fingerprint_ = hash.value();

  dec.nbr_offset_.assign(1, 0);
  for (const auto& c : dec.cubes_) {
    const auto nb = dec.touching_accepted(c.level, c.ix, c.iy);
    dec.nbr_index_.insert(dec.nbr_index_.end(), nb.begin(), nb.end());
    dec.nbr_offset_.push_back(static_cast<int>(dec.nbr_index_.size()));
  }
  return dec;
}

WhitneyAudit audit_whitney(const WhitneyDecomposition& dec, const ClosedSet& f, int coverage_samples) {
  WhitneyAudit a;
  const auto& cubes = dec.cubes();
  a.cube_count = cubes.size();
  a.collar_count = dec.collar().size();
  const int m = dec.max_level();
  const Box& w = dec.window();

  a.dyadic = true;
  a.disjoint = true;
  for (const auto& c : cubes) {
    const DyadicCube ref = dec.make_cube(c.level, c.ix, c.iy);
    const std::int64_t n = std::int64_t{1} << c.level;
    if (c.side != std::ldexp(w.width(), -c.level) || !(ref.lo == c.lo) || c.ix < 0 || c.iy < 0 || c.ix >= n ||
        c.iy >= n)
      a.dyadic = false;
    for (int k = 0; k < c.level; ++k) {
      const int shift = c.level - k;
      if (dec.find_leaf(k, c.ix >> shift, c.iy >> shift)) a.disjoint = false;
    }
  }

  // Area accounting in units of the finest cell; leaves must tile the window exactly.
  std::uint64_t units = 0;
  for (const auto& leaf : dec.leaves()) units += std::uint64_t{1} << (2 * (m - leaf.level));
  const bool tiles = units == (std::uint64_t{1} << (2 * m));
  const double fine = std::ldexp(w.width(), -m);
  std::size_t eligible = 0, covered = 0;
  for (int j = 0; j < coverage_samples; ++j)
    for (int i = 0; i < coverage_samples; ++i) {
      const Vec2 p{w.lo.x + (i + 0.5) * w.width() / coverage_samples,
                   w.lo.y + (j + 0.5) * w.height() / coverage_samples};
      if (f.dist(p) < 4.0 * std::sqrt(2.0) * fine) continue;
      ++eligible;
      if (dec.locate(p) >= 0) ++covered;
    }
  a.coverage_fraction = eligible ? static_cast<double>(covered) / eligible : 1.0;
  a.coverage = tiles && a.coverage_fraction >= 0.99;
  a.collar_area_fraction = dec.collar_area() / (w.width() * w.height());

  a.sandwich = true;
  for (const auto& c : cubes) {
    const double d = f.dist(c.box());
    if (!(c.diam() <= d && d <= 4.0 * c.diam())) {
      a.sandwich = false;
      ++a.sandwich_violations;
    }
  }

  a.neighbor_ratio = true;
  a.neighbor_count = true;
  for (size_t i = 0; i < cubes.size(); ++i) {
    const auto nb = dec.neighbors(static_cast<int>(i));
    a.max_neighbors = std::max(a.max_neighbors, static_cast<int>(nb.size()));
    if (nb.size() > 144) a.neighbor_count = false;
    for (int j : nb) {
      const double r = cubes[static_cast<size_t>(j)].side / cubes[i].side;
      a.max_neighbor_ratio = std::max(a.max_neighbor_ratio, r);
      if (r < 0.25 || r > 4.0 || !cubes_touch(cubes[i], cubes[static_cast<size_t>(j)])) a.neighbor_ratio = false;
    }
  }
  return a;
}

CubeClasses classify_cubes(std::shared_ptr<const WhitneyDecomposition> dec_gamma,
                           std::shared_ptr<const WhitneyDecomposition> dec_omega, const DomainModel& domain,
                           ClassParams params) {
  if (!(params.A > 0.0) || !(params.B > 2.0))
    whitney_error(ErrorCode::InvalidParameters, "classify_cubes", "need A > 0 and B > 2");
  if (!dec_omega) whitney_error(ErrorCode::InvalidParameters, "classify_cubes", "missing decomposition of Omega");
  if (dec_gamma) {
    const Box a = dec_gamma->window(), b = dec_omega->window();
    if (!(a.lo == b.lo) || !(a.hi == b.hi))
      whitney_error(ErrorCode::InvalidParameters, "classify_cubes", "decompositions use different windows");
  }
  CubeClasses cls;
  cls.dec_gamma = dec_gamma;
  cls.dec_omega = dec_omega;
  cls.A = params.A;
  cls.B = params.B;
  cls.delta = domain.delta();

  if (dec_gamma) {
    const auto& cubes = dec_gamma->cubes();
    cls.gamma_flags.assign(cubes.size(), 0);
    for (size_t i = 0; i < cubes.size(); ++i) {
      const auto& c = cubes[i];
      bool meets = false;
      for (int a = 0; a <= 4 && !meets; ++a)
        for (int b = 0; b <= 4 && !meets; ++b)
          meets = domain.contains({c.lo.x + 0.25 * a * c.side, c.lo.y + 0.25 * b * c.side});
      if (meets) {
        cls.gamma_flags[i] = kFlagWi;
        cls.w_i.push_back(static_cast<int>(i));
      }
    }
  }

  const auto& oc = dec_omega->cubes();
  const size_t n = oc.size();
  cls.omega_flags.assign(n, 0);
  cls.omega_dist_d.resize(n);
  cls.omega_dist_gamma.resize(n);
  const double size_cap = params.A * cls.delta;
  for (size_t i = 0; i < n; ++i) {
    const Box b = oc[i].box();
    const double dd = domain.d_set().dist(b);
    const double dg = domain.gamma_set().dist(b);
    cls.omega_dist_d[i] = dd;
    cls.omega_dist_gamma[i] = dg;
    // dist(., empty) = +inf, so an empty D makes the right-hand side infinite.
    const bool cone = std::isinf(dd) ? !std::isinf(dg) : dg < params.B * dd;
    if (oc[i].side <= size_cap && cone) cls.omega_flags[i] |= kFlagWe;
  }
  for (size_t i = 0; i < n; ++i) {
    if (!(cls.omega_flags[i] & kFlagWe)) continue;
    bool inner = true;
    for (int j : dec_omega->neighbors(static_cast<int>(i))) inner = inner && (cls.omega_flags[static_cast<size_t>(j)] & kFlagWe);
    if (inner) cls.omega_flags[i] |= kFlagWePrime;
  }
  for (size_t i = 0; i < n; ++i) {
    if (!(cls.omega_flags[i] & kFlagWe)) continue;
    bool inner = true;
    for (int j : dec_omega->neighbors(static_cast<int>(i)))
      inner = inner && (cls.omega_flags[static_cast<size_t>(j)] & kFlagWePrime);
    if (inner) cls.omega_flags[i] |= kFlagWeDoublePrime;
  }
  for (size_t i = 0; i < n; ++i) {
    if (cls.omega_flags[i] & kFlagWe) cls.w_e.push_back(static_cast<int>(i));
    if (cls.omega_flags[i] & kFlagWePrime) cls.w_e_prime.push_back(static_cast<int>(i));
    if (cls.omega_flags[i] & kFlagWeDoublePrime) cls.w_e_dprime.push_back(static_cast<int>(i));
  }

  Fnv1a hash;
  hash.add(dec_omega->fingerprint());
  hash.add(dec_gamma ? dec_gamma->fingerprint() : 0);
  hash.add(params.A);
  hash.add(params.B);
  hash.add(cls.delta);
  hash.add(domain.name());
  cls.fingerprint = hash.value();
  return cls;
}

std::string classes_csv(const CubeClasses& classes) {
  std::ostringstream out;
  out.precision(17);
  out << "decomposition,level,ix,iy,side,flags\n";
  auto dump = [&](const char* name, const WhitneyDecomposition& dec, const std::vector<std::uint8_t>& flags) {
    const auto& cubes = dec.cubes();
    for (size_t i = 0; i < cubes.size(); ++i)
      out << name << ',' << cubes[i].level << ',' << cubes[i].ix << ',' << cubes[i].iy << ',' << cubes[i].side << ','
          << static_cast<int>(flags.empty() ? 0 : flags[i]) << '\n';
  };
  if (classes.dec_gamma) dump("gamma", *classes.dec_gamma, classes.gamma_flags);
  dump("omega", *classes.dec_omega, classes.omega_flags);
  return out.str();
}

namespace {

std::vector<Vec2> interior_lattice(const DomainModel& domain, int k) {
  std::vector<Vec2> pts;
  const Box bb = domain.bounding_box();
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      const Vec2 p{bb.lo.x + (i + 0.5) * bb.width() / k, bb.lo.y + (j + 0.5) * bb.height() / k};
      if (domain.contains(p)) pts.push_back(p);
    }
  return pts;
}

}  // namespace

LemmaReplay replay_lemma_interior_shadow(const CubeClasses& classes, const DomainModel& domain, int x_samples,
                                         int y_lattice) {
  LemmaReplay rep;
  if (!classes.dec_gamma) return rep;
  const auto xs = interior_lattice(domain, x_samples);
  std::vector<double> xd(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) xd[i] = domain.dist_to(xs[i], DistTarget::D);
  const auto& cubes = classes.dec_gamma->cubes();
  for (int qi : classes.w_i) {
    const auto& q = cubes[static_cast<size_t>(qi)];
    std::vector<Vec2> ys;
    for (int b = 0; b < y_lattice; ++b)
      for (int a = 0; a < y_lattice; ++a) {
        const Vec2 y{q.lo.x + q.side * a / (y_lattice - 1), q.lo.y + q.side * b / (y_lattice - 1)};
        if (!domain.contains(y)) ys.push_back(y);
      }
    for (const Vec2& y : ys)
      for (size_t i = 0; i < xs.size(); ++i) {
        const double rhs = 2.0 * distance(xs[i], y);
        ++rep.checks;
        rep.worst_ratio = std::max(rep.worst_ratio, xd[i] / rhs);
        if (xd[i] > rhs * (1.0 + 1e-12)) ++rep.violations;
      }
  }
  return rep;
}

LemmaReplay replay_lemma_band(const CubeClasses& classes) {
  LemmaReplay rep;
  const auto& cubes = classes.dec_omega->cubes();
  for (int qi : classes.w_e) {
    const auto i = static_cast<size_t>(qi);
    if (classes.omega_flags[i] & kFlagWePrime) continue;
    if (cubes[i].side > classes.A * classes.delta / 4.0) continue;
    const double dd = classes.omega_dist_d[i];
    const double dg = classes.omega_dist_gamma[i];
    ++rep.checks;
    rep.worst_ratio = std::max(rep.worst_ratio, dd / (21.0 * dg));
    if (!(dg / classes.B < dd && dd <= 21.0 * dg)) ++rep.violations;
  }
  return rep;
}

SeparationReplay replay_lemma_separation(const CubeClasses& classes, const DomainModel& domain, int lattice) {
  SeparationReplay rep;
  rep.best_constant = kInf;
  const auto xs = interior_lattice(domain, lattice);
  std::vector<double> xd(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) xd[i] = domain.dist_to(xs[i], DistTarget::D);
  const auto& dec = *classes.dec_omega;
  const Box w = dec.window();
  for (int j = 0; j < lattice; ++j)
    for (int i = 0; i < lattice; ++i) {
      const Vec2 y{w.lo.x + (i + 0.5) * w.width() / lattice, w.lo.y + (j + 0.5) * w.height() / lattice};
      if (domain.contains(y)) continue;
      const auto leaf = dec.leaf_at(y);
      // Collar points are excluded: the truncated decomposition cannot classify them.
      if (!leaf || leaf->kind != LeafKind::Accepted) continue;
      if (classes.omega_flags[static_cast<size_t>(leaf->index)] & kFlagWePrime) continue;
      for (size_t k = 0; k < xs.size(); ++k) {
        const double r = distance(xs[k], y);
        const double c = std::isinf(xd[k]) ? r : std::max(r, r / xd[k]);
        rep.best_constant = std::min(rep.best_constant, c);
        ++rep.pairs;
      }
    }
  return rep;
}

}  // namespace fracsob
