#include "fracsob/metric.hpp"

#include <numbers>
#include <queue>
#include <tuple>

#include "fracsob/error.hpp"

namespace fracsob {

QuasihyperbolicGraph::QuasihyperbolicGraph(std::shared_ptr<const WhitneyDecomposition> dec, ClosedSet excluded)
    : dec_(std::move(dec)), excluded_(std::move(excluded)) {
  const auto& cubes = dec_->cubes();
  for (size_t i = 0; i < cubes.size(); ++i) {
    const Vec2 ci = cubes[i].center();
    for (int j : dec_->neighbors(static_cast<int>(i))) {
      const Vec2 cj = cubes[static_cast<size_t>(j)].center();
      edge_weight_.push_back(fracsob::distance(ci, cj) / excluded_.dist(0.5 * (ci + cj)));
    }
  }
}

int QuasihyperbolicGraph::cube_of(Vec2 p, const char* op) const {
  const int c = dec_->locate(p);
  if (c < 0)
    throw Error(ErrorCode::UnreachablePoints, "geometry", op, "point lies outside every Whitney cube at this depth");
  return c;
}

double QuasihyperbolicGraph::hop_weight(Vec2 x, int cube) const {
  const Vec2 c = dec_->cubes()[static_cast<size_t>(cube)].center();
  if (x == c) return 0.0;
  return fracsob::distance(x, c) / excluded_.dist(0.5 * (x + c));
}

std::vector<double> QuasihyperbolicGraph::dijkstra(const std::vector<int>& sources, std::vector<int>* parent) const {
  const size_t n = dec_->cubes().size();
  std::vector<double> dist(n, kInf);
  if (parent) parent->assign(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int s : sources) {
    dist[static_cast<size_t>(s)] = 0.0;
    pq.push({0.0, s});
  }
  // Offsets of the CSR neighbour list, rebuilt from span sizes.
  std::vector<size_t> offset(n + 1, 0);
  for (size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + dec_->neighbors(static_cast<int>(i)).size();
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<size_t>(u)]) continue;
    const auto nb = dec_->neighbors(u);
    for (size_t k = 0; k < nb.size(); ++k) {
      const int v = nb[k];
      const double nd = d + edge_weight_[offset[static_cast<size_t>(u)] + k];
      if (nd < dist[static_cast<size_t>(v)]) {
        dist[static_cast<size_t>(v)] = nd;
        if (parent) (*parent)[static_cast<size_t>(v)] = u;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

std::vector<double> QuasihyperbolicGraph::distances_from(const std::vector<int>& sources) const {
  return dijkstra(sources, nullptr);
}

double QuasihyperbolicGraph::distance(Vec2 x, Vec2 y) const {
  if (x == y) return 0.0;
  // Fixed orientation makes the result exactly symmetric.
  if (std::tie(y.x, y.y) < std::tie(x.x, x.y)) std::swap(x, y);
  const int cx = cube_of(x, "quasihyperbolic_distance");
  const int cy = cube_of(y, "quasihyperbolic_distance");
  const auto dist = dijkstra({cx}, nullptr);
  const double g = dist[static_cast<size_t>(cy)];
  if (std::isinf(g))
    throw Error(ErrorCode::UnreachablePoints, "geometry", "quasihyperbolic_distance", "points in different components");
  return hop_weight(x, cx) + g + hop_weight(y, cy);
}

std::vector<int> QuasihyperbolicGraph::cube_path(Vec2 x, Vec2 y) const {
  const int cx = cube_of(x, "cube_path");
  const int cy = cube_of(y, "cube_path");
  std::vector<int> parent;
  const auto dist = dijkstra({cx}, &parent);
  if (std::isinf(dist[static_cast<size_t>(cy)]))
    throw Error(ErrorCode::UnreachablePoints, "geometry", "cube_path", "points in different components");
  std::vector<int> path;
  for (int c = cy; c >= 0; c = parent[static_cast<size_t>(c)]) path.push_back(c);
  std::reverse(path.begin(), path.end());
  return path;
}

double quasihyperbolic_distance(Vec2 x, Vec2 y, const QuasihyperbolicGraph& graph) { return graph.distance(x, y); }

std::vector<Vec2> circular_arc(Vec2 x, Vec2 y, double sagitta, int pieces) {
  std::vector<Vec2> pts;
  const double chord = distance(x, y);
  if (sagitta == 0.0 || chord == 0.0) {
    for (int k = 0; k <= pieces; ++k) pts.push_back(x + (static_cast<double>(k) / pieces) * (y - x));
    return pts;
  }
  const Vec2 u = (1.0 / chord) * (y - x);
  const Vec2 n{-u.y, u.x};
  const Vec2 mid = 0.5 * (x + y);
  const double s = std::abs(sagitta);
  const double sign = sagitta > 0.0 ? 1.0 : -1.0;
  const double radius = (0.25 * chord * chord + s * s) / (2.0 * s);
  const Vec2 center = mid + (sign * (s - radius)) * n;
  const Vec2 apex_dir = sign * n;
  const double theta = std::atan2(apex_dir.y, apex_dir.x);
  const double alpha = std::atan2(0.5 * chord, radius - s);
  for (int k = 0; k <= pieces; ++k) {
    const double tau = -alpha + 2.0 * alpha * k / pieces;
    pts.push_back(center + radius * Vec2{std::cos(theta + tau), std::sin(theta + tau)});
  }
  if (distance(pts.front(), x) > distance(pts.front(), y)) std::reverse(pts.begin(), pts.end());
  pts.front() = x;
  pts.back() = y;
  return pts;
}

namespace {

std::vector<Vec2> densify(const std::vector<Vec2>& curve, double max_piece) {
  std::vector<Vec2> out;
  if (curve.empty()) return out;
  out.push_back(curve.front());
  for (size_t i = 1; i < curve.size(); ++i) {
    const double len = distance(curve[i - 1], curve[i]);
    const int k = std::max(1, static_cast<int>(std::ceil(len / max_piece)));
    for (int j = 1; j <= k; ++j) out.push_back(curve[i - 1] + (static_cast<double>(j) / k) * (curve[i] - curve[i - 1]));
  }
  return out;
}

}  // namespace

CurveScore score_curve(const std::vector<Vec2>& curve_in, const SegmentSet& gamma) {
  CurveScore sc;
  if (curve_in.size() < 2) return sc;
  const Vec2 x = curve_in.front();
  const Vec2 y = curve_in.back();
  const double chord = distance(x, y);
  const auto curve = densify(curve_in, chord / 256.0);
  for (size_t i = 1; i < curve.size(); ++i) {
    sc.length += distance(curve[i - 1], curve[i]);
    if (!gamma.empty() && gamma.crosses({curve[i - 1], curve[i]})) return sc;
  }
  sc.valid = true;
  sc.eps_length = sc.length > 0.0 ? chord / sc.length : 1.0;
  sc.eps_cigar = kInf;
  if (!gamma.empty()) {
    for (size_t i = 1; i + 1 < curve.size(); ++i) {
      const Vec2 z = curve[i];
      const double denom = distance(x, z) * distance(y, z);
      if (denom == 0.0) continue;
      sc.eps_cigar = std::min(sc.eps_cigar, gamma.dist(z) * chord / denom);
    }
  }
  sc.eps = std::min({1.0, sc.eps_length, sc.eps_cigar});
  return sc;
}

CigarReport check_cigar(const DomainModel& domain, const std::vector<std::pair<Vec2, Vec2>>& pairs, double eps_target,
                        double k_target, int depth) {
  CigarReport rep;
  rep.eps_target = eps_target;
  rep.k_target = k_target;
  rep.depth = depth;
  for (const auto& [x, y] : pairs) {
    if (!domain.contains(x) || !domain.contains(y))
      throw Error(ErrorCode::PairOutsideDomain, "geometry", "check_cigar", "pair point outside Omega");
    if (!(distance(x, y) < domain.delta()))
      throw Error(ErrorCode::InvalidParameters, "geometry", "check_cigar", "pair separation must be below delta");
  }
  const SegmentSet& gamma = domain.gamma_set();
  std::unique_ptr<QuasihyperbolicGraph> graph;
  std::vector<double> to_omega;
  if (!gamma.empty()) {
    const ClosedSet f = ClosedSet::gamma_closure(domain);
    auto dec = std::make_shared<const WhitneyDecomposition>(whitney_decompose(f, domain.window(), depth));
    graph = std::make_unique<QuasihyperbolicGraph>(dec, f);
    std::vector<int> sources;
    const auto& cubes = dec->cubes();
    for (size_t i = 0; i < cubes.size(); ++i) {
      const auto& c = cubes[i];
      bool meets = false;
      for (int a = 0; a <= 4 && !meets; ++a)
        for (int b = 0; b <= 4 && !meets; ++b) meets = domain.contains({c.lo.x + 0.25 * a * c.side, c.lo.y + 0.25 * b * c.side});
      if (meets) sources.push_back(static_cast<int>(i));
    }
    to_omega = graph->distances_from(sources);
  }

  auto excursion = [&](const std::vector<Vec2>& curve) {
    if (!graph) return 0.0;
    double worst = 0.0;
    const auto pts = densify(curve, distance(curve.front(), curve.back()) / 256.0);
    for (const Vec2& z : pts) {
      if (domain.contains(z)) continue;
      const int c = graph->decomposition().locate(z);
      if (c < 0) return kInf;
      worst = std::max(worst, to_omega[static_cast<size_t>(c)] + graph->hop_weight(z, c));
    }
    return worst;
  };

  rep.status = CigarStatus::Pass;
  for (const auto& [x, y] : pairs) {
    struct Candidate {
      std::string name;
      std::vector<Vec2> curve;
    };
    std::vector<Candidate> cands;
    const double chord = distance(x, y);
    cands.push_back({"segment", circular_arc(x, y, 0.0)});
    for (double b : {0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0})
      for (double sgn : {1.0, -1.0}) cands.push_back({"arc:" + std::to_string(sgn * b), circular_arc(x, y, sgn * b * chord)});
    if (graph) {
      try {
        std::vector<Vec2> path{x};
        for (int c : graph->cube_path(x, y)) path.push_back(graph->decomposition().cubes()[static_cast<size_t>(c)].center());
        path.push_back(y);
        cands.push_back({"whitney-path", path});
      } catch (const Error&) {
      }
    }
    CigarPairResult res;
    res.x = x;
    res.y = y;
    res.best_eps = 0.0;
    res.excursion = kInf;
    double best_admissible = -1.0;
    for (const auto& c : cands) {
      const CurveScore sc = score_curve(c.curve, gamma);
      if (!sc.valid) continue;
      const double k = excursion(c.curve);
      const bool admissible = k <= k_target;
      // Prefer curves meeting the excursion budget, then the largest epsilon.
      if ((admissible && sc.eps > best_admissible) || (best_admissible < 0.0 && !admissible && sc.eps > res.best_eps)) {
        res.best_eps = sc.eps;
        res.excursion = k;
        res.curve = c.name;
        if (admissible) best_admissible = sc.eps;
      }
    }
    res.status = (best_admissible >= eps_target) ? CigarStatus::Pass : CigarStatus::Inconclusive;
    if (res.status != CigarStatus::Pass) rep.status = CigarStatus::Inconclusive;
    rep.pairs.push_back(res);
  }
  return rep;
}

}  // namespace fracsob
