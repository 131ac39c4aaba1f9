#include "fracsob/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <deque>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "fracsob/error.hpp"

namespace fracsob {

namespace {

constexpr int kBucketShift = 3;
constexpr double kSearchCap = 64.0;  // search radius in units of diam Q

std::uint64_t bucket_key(std::int64_t bx, std::int64_t by) {
  return (static_cast<std::uint64_t>(bx) << 32) ^ static_cast<std::uint64_t>(by);
}

// w_i cubes bucketed per level on a lattice three levels coarser.
struct LevelIndex {
  int bucket_level = 0;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets;
};

double log_ratio(const DyadicCube& a, const DyadicCube& b) { return std::abs(std::log(b.side / a.side)); }

}  // namespace

ReflectionMap build_reflection(const CubeClasses& classes, double size_band) {
  if (!(size_band >= 4.0))
    throw Error(ErrorCode::InvalidParameters, "reflection", "build_reflection", "size band must be at least 4");
  ReflectionMap map;
  map.size_band = size_band;
  map.classes_fingerprint = classes.fingerprint;
  const auto& oc = classes.dec_omega->cubes();
  map.partner.assign(oc.size(), -1);
  if (classes.w_e.empty()) return map;
  if (classes.w_i.empty())
    throw Error(ErrorCode::EmptyInteriorClass, "reflection", "build_reflection", "w_i is empty");

  const auto& gdec = *classes.dec_gamma;
  const auto& gc = gdec.cubes();
  const int max_level = gdec.max_level();
  std::vector<LevelIndex> index(static_cast<size_t>(max_level + 1));
  for (int l = 0; l <= max_level; ++l) index[static_cast<size_t>(l)].bucket_level = std::max(0, l - kBucketShift);
  for (int i : classes.w_i) {
    const auto& c = gc[static_cast<size_t>(i)];
    auto& li = index[static_cast<size_t>(c.level)];
    const int shift = c.level - li.bucket_level;
    li.buckets[bucket_key(c.ix >> shift, c.iy >> shift)].push_back(i);
  }

  const int band_levels = static_cast<int>(std::floor(std::log2(size_band) + 1e-12));
  const Box w = gdec.window();
  for (int qi : classes.w_e) {
    const auto& q = oc[static_cast<size_t>(qi)];
    const Box qb = q.box();
    const Vec2 qc = q.center();
    int best = -1;
    double best_dist = kInf;
    double best_log = kInf;
    auto consider = [&](int si) {
      const auto& s = gc[static_cast<size_t>(si)];
      const double d = dist_box_box(qb, s.box());
      const double lr = log_ratio(q, s);
      if (std::tie(d, lr, si) < std::tie(best_dist, best_log, best)) {
        best = si;
        best_dist = d;
        best_log = lr;
      }
    };
    // Levels nearest to Q first so the distance bound tightens early.
    std::vector<int> levels;
    for (int dl = 0; dl <= band_levels; ++dl)
      for (int sgn : {1, -1}) {
        const int l = q.level + sgn * dl;
        if (dl == 0 && sgn < 0) continue;
        if (l >= 0 && l <= max_level) levels.push_back(l);
      }
    for (int l : levels) {
      const auto& li = index[static_cast<size_t>(l)];
      if (li.buckets.empty()) continue;
      const double bside = std::ldexp(w.width(), -li.bucket_level);
      const auto bx = static_cast<std::int64_t>(std::floor((qc.x - w.lo.x) / bside));
      const auto by = static_cast<std::int64_t>(std::floor((qc.y - w.lo.y) / bside));
      const std::int64_t nb = std::int64_t{1} << li.bucket_level;
      for (std::int64_t r = 0;; ++r) {
        const double lb = std::max(0.0, (static_cast<double>(r) - 1.0) * bside - 0.5 * q.side);
        if (lb > best_dist || lb > kSearchCap * q.diam()) break;
        if (r > nb) break;
        for (std::int64_t y = by - r; y <= by + r; ++y)
          for (std::int64_t x = bx - r; x <= bx + r; ++x) {
            if (std::max(std::abs(x - bx), std::abs(y - by)) != r) continue;
            if (x < 0 || y < 0 || x >= nb || y >= nb) continue;
            const auto it = li.buckets.find(bucket_key(x, y));
            if (it == li.buckets.end()) continue;
            for (int si : it->second) consider(si);
          }
      }
    }
    if (best >= 0 && best_dist <= kSearchCap * q.diam())
      map.partner[static_cast<size_t>(qi)] = best;
    else
      map.unpaired.push_back(qi);
  }

  ReflectionConstants& d = map.diag;
  std::unordered_map<int, int> preimages;
  for (int qi : classes.w_e) {
    const int s = map.star(qi);
    if (s < 0) continue;
    const auto& q = oc[static_cast<size_t>(qi)];
    const auto& qs = gc[static_cast<size_t>(s)];
    d.c_size = std::max({d.c_size, qs.diam() / q.diam(), q.diam() / qs.diam()});
    d.c_dist = std::max(d.c_dist, dist_box_box(q.box(), qs.box()) / q.diam());
    d.multiplicity = std::max(d.multiplicity, ++preimages[s]);
    for (int pi : classes.dec_omega->neighbors(qi)) {
      const int ps = map.star(pi);
      if (ps < 0 || !(classes.omega_flags[static_cast<size_t>(pi)] & kFlagWe)) continue;
      d.c_neighbor = std::max(d.c_neighbor, dist_box_box(qs.box(), gc[static_cast<size_t>(ps)].box()) / q.diam());
    }
  }
  return map;
}

ReflectionDiagnostics verify_reflection(const ReflectionMap& map, const CubeClasses& classes, const DomainModel& domain,
                                        double anchor_budget) {
  ReflectionDiagnostics out;
  out.anchor_budget = anchor_budget;
  const auto& oc = classes.dec_omega->cubes();
  if (classes.w_e.empty()) {
    out.multiplicity_histogram.assign(1, 0);
    return out;
  }
  const auto& gc = classes.dec_gamma->cubes();
  auto star_cube = [&](int q) -> const DyadicCube& { return gc[static_cast<size_t>(map.star(q))]; };

  std::vector<int> count(gc.size(), 0);
  for (int q : classes.w_e)
    if (map.star(q) >= 0) ++count[static_cast<size_t>(map.star(q))];
  int max_count = 0;
  for (int c : count) max_count = std::max(max_count, c);
  out.diag.multiplicity = max_count;
  out.multiplicity_histogram.assign(static_cast<size_t>(max_count + 1), 0);
  for (int q : classes.w_e) {
    const int s = map.star(q);
    ++out.multiplicity_histogram[s < 0 ? 0 : static_cast<size_t>(count[static_cast<size_t>(s)])];
  }

  for (int q : classes.w_e) {
    if (map.star(q) < 0) continue;
    const auto& cq = oc[static_cast<size_t>(q)];
    const auto& cs = star_cube(q);
    out.diag.c_size = std::max(out.diag.c_size, std::max(cs.diam() / cq.diam(), cq.diam() / cs.diam()));
    out.diag.c_dist = std::max(out.diag.c_dist, dist_box_box(cq.box(), cs.box()) / cq.diam());
    for (int p : classes.dec_omega->neighbors(q)) {
      if (!(classes.omega_flags[static_cast<size_t>(p)] & kFlagWe) || map.star(p) < 0) continue;
      out.diag.c_neighbor = std::max(out.diag.c_neighbor, dist_box_box(cs.box(), star_cube(p).box()) / cq.diam());
    }
  }

  // Long-distance bound over touching (P, Q) and a deterministic subsample of S.
  const double cn = 1.0 + 1.0 / (16.0 * std::sqrt(static_cast<double>(kDim)));
  std::vector<int> paired;
  for (int q : classes.w_e)
    if (map.star(q) >= 0) paired.push_back(q);
  const size_t q_stride = std::max<size_t>(1, paired.size() / 1500);
  const size_t s_stride = std::max<size_t>(1, paired.size() / 48);
  for (size_t qi = 0; qi < paired.size(); qi += q_stride) {
    const int q = paired[qi];
    const auto& cq = oc[static_cast<size_t>(q)];
    std::vector<int> ss;
    for (size_t k = 0; k < paired.size(); k += s_stride) ss.push_back(paired[k]);
    for (int n1 : classes.dec_omega->neighbors(q)) {
      ss.push_back(n1);
      for (int n2 : classes.dec_omega->neighbors(n1)) ss.push_back(n2);
    }
    const Vec2 xs[5] = {cq.lo, {cq.lo.x + cq.side, cq.lo.y}, {cq.lo.x, cq.lo.y + cq.side},
                        {cq.lo.x + cq.side, cq.lo.y + cq.side}, cq.center()};
    for (int p : classes.dec_omega->neighbors(q)) {
      if (!(classes.omega_flags[static_cast<size_t>(p)] & kFlagWe) || map.star(p) < 0) continue;
      for (int s : ss) {
        if (!(classes.omega_flags[static_cast<size_t>(s)] & kFlagWe) || map.star(s) < 0) continue;
        const Box cs = oc[static_cast<size_t>(s)].scaled_box(cn);
        const double ld = long_distance(star_cube(p), star_cube(s));
        for (const Vec2& x : xs) {
          const Vec2 far{std::max(std::abs(x.x - cs.lo.x), std::abs(x.x - cs.hi.x)),
                         std::max(std::abs(x.y - cs.lo.y), std::abs(x.y - cs.hi.y))};
          if (norm(far) < cq.side / 10.0) continue;
          const double r = std::max(dist_point_box(x, cs), cq.side / 10.0);
          out.long_distance_constant = std::max(out.long_distance_constant, ld / r);
          ++out.long_distance_checks;
        }
      }
    }
  }

  // Anchor bound: dist(x, D) <= C diam Q for Q outside w_e'' with l(Q) <= A delta / 16.
  for (size_t qi = 0; qi < oc.size(); ++qi) {
    if (classes.omega_flags[qi] & kFlagWeDoublePrime) continue;
    const auto& cq = oc[qi];
    if (cq.side > classes.A * classes.delta / 16.0) continue;
    for (int p : classes.dec_omega->neighbors(static_cast<int>(qi))) {
      if (!(classes.omega_flags[static_cast<size_t>(p)] & kFlagWe) || map.star(p) < 0) continue;
      const auto& ps = star_cube(p);
      for (int b = 0; b <= 4; ++b)
        for (int a = 0; a <= 4; ++a) {
          const Vec2 x{ps.lo.x + 0.25 * a * ps.side, ps.lo.y + 0.25 * b * ps.side};
          if (!domain.contains(x)) continue;
          const double c = domain.dist_to(x, DistTarget::D) / cq.diam();
          ++out.anchor_checks;
          out.anchor_constant = std::max(out.anchor_constant, c);
          if (!(c <= anchor_budget)) ++out.anchor_violations;
        }
    }
  }
  return out;
}

std::string reflection_csv(const ReflectionMap& map, const CubeClasses& classes) {
  std::ostringstream out;
  out.precision(17);
  out << "cube,level,ix,iy,partner,partner_level,dist,diam_ratio\n";
  const auto& oc = classes.dec_omega->cubes();
  for (int q : classes.w_e) {
    const auto& c = oc[static_cast<size_t>(q)];
    out << q << ',' << c.level << ',' << c.ix << ',' << c.iy << ',';
    const int s = map.star(q);
    if (s < 0) {
      out << "-1,,,\n";
      continue;
    }
    const auto& cs = classes.dec_gamma->cubes()[static_cast<size_t>(s)];
    out << s << ',' << cs.level << ',' << dist_box_box(c.box(), cs.box()) << ',' << cs.diam() / c.diam() << '\n';
  }
  return out.str();
}

namespace {

Chain bfs_chain(const CubeClasses& classes, int start, const std::function<bool(int)>& is_target) {
  Chain chain;
  const auto& gdec = *classes.dec_gamma;
  std::unordered_map<int, int> parent;
  std::deque<int> queue{start};
  parent[start] = -1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (is_target(u)) {
      for (int c = u; c >= 0; c = parent[c]) chain.cubes.push_back(c);
      std::reverse(chain.cubes.begin(), chain.cubes.end());
      chain.found = true;
      return chain;
    }
    for (int v : gdec.neighbors(u)) {
      if (!(classes.gamma_flags[static_cast<size_t>(v)] & kFlagWi) || parent.count(v)) continue;
      parent[v] = u;
      queue.push_back(v);
    }
  }
  return chain;
}

}  // namespace

Chain touching_chain(int p, int q, const CubeClasses& classes, const ReflectionMap& map) {
  const int ps = map.star(p);
  const int qs = map.star(q);
  if (ps < 0 || qs < 0) return {};
  return bfs_chain(classes, ps, [qs](int u) { return u == qs; });
}

Chain boundary_chain(int q, const CubeClasses& classes, const ReflectionMap& map, double comparability) {
  const int qs = map.star(q);
  if (qs < 0) return {};
  const auto& cq = classes.dec_omega->cubes()[static_cast<size_t>(q)];
  const auto& gc = classes.dec_gamma->cubes();
  return bfs_chain(classes, qs, [&](int u) {
    const auto& s = gc[static_cast<size_t>(u)];
    if (s.level <= cq.level) {
      const int sh = cq.level - s.level;
      return (cq.ix >> sh) == s.ix && (cq.iy >> sh) == s.iy;
    }
    const int sh = s.level - cq.level;
    return (s.ix >> sh) == cq.ix && (s.iy >> sh) == cq.iy && std::ldexp(1.0, 2 * sh) <= comparability;
  });
}

}  // namespace fracsob
