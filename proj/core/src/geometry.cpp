#include "fracsob/geometry.hpp"

#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fracsob/error.hpp"

namespace fracsob {

namespace {

[[noreturn]] void geometry_error(ErrorCode code, const std::string& op, const std::string& detail) {
  throw Error(code, "geometry", op, detail);
}

std::vector<Segment> ring_edges(const Ring& ring) {
  std::vector<Segment> edges;
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) edges.push_back({ring[i], ring[(i + 1) % n]});
  return edges;
}

struct Interval {
  double lo;
  double hi;
};

}  // namespace

bool point_in_rings(const std::vector<Ring>& rings, Vec2 p) {
  bool inside = false;
  for (const auto& ring : rings) {
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2 a = ring[i];
      const Vec2 b = ring[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x) inside = !inside;
      }
    }
  }
  return inside;
}

DomainModel::DomainModel(std::string name, std::vector<Ring> rings, std::vector<Polyline> d_arcs,
                         std::vector<Polyline> gamma_arcs, Box window, std::optional<EpsDelta> eps_delta)
    : name_(std::move(name)),
      rings_(std::move(rings)),
      d_arcs_(std::move(d_arcs)),
      gamma_arcs_(std::move(gamma_arcs)),
      window_(window),
      eps_delta_(eps_delta) {
  if (rings_.empty()) geometry_error(ErrorCode::InvalidGeometry, "load_domain", "no rings");
  for (auto& ring : rings_) {
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    if (ring.size() < 3) geometry_error(ErrorCode::InvalidGeometry, "load_domain", "ring with fewer than 3 vertices");
  }
  for (const auto* arcs : {&d_arcs_, &gamma_arcs_})
    for (const auto& arc : *arcs)
      if (arc.size() < 2) geometry_error(ErrorCode::InvalidGeometry, "load_domain", "arc with fewer than 2 points");
  if (eps_delta_ && (eps_delta_->eps <= 0.0 || eps_delta_->delta <= 0.0))
    geometry_error(ErrorCode::InvalidGeometry, "load_domain", "eps and delta must be positive");

  std::vector<Segment> boundary;
  bbox_ = {rings_[0][0], rings_[0][0]};
  for (const auto& ring : rings_) {
    for (const auto& e : ring_edges(ring)) boundary.push_back(e);
    for (const Vec2& v : ring) {
      bbox_.lo = {std::min(bbox_.lo.x, v.x), std::min(bbox_.lo.y, v.y)};
      bbox_.hi = {std::max(bbox_.hi.x, v.x), std::max(bbox_.hi.y, v.y)};
    }
  }
  boundary_set_ = SegmentSet(std::move(boundary));
  d_set_ = SegmentSet::from_polylines(d_arcs_);
  gamma_set_ = SegmentSet::from_polylines(gamma_arcs_);
  for (const auto& ring : rings_)
    for (const Vec2& a : ring)
      for (const auto& r2 : rings_)
        for (const Vec2& b : r2) diameter_ = std::max(diameter_, distance(a, b));

  check_rings();
  normalize_orientation();
  area_ = 0.0;
  for (const auto& ring : rings_) area_ += signed_area(ring);
  if (area_ <= 0.0) geometry_error(ErrorCode::InvalidGeometry, "load_domain", "domain has no area");
  check_arcs();
  check_window();
  check_connected();
}

void DomainModel::check_rings() const {
  std::vector<Segment> edges;
  for (const auto& ring : rings_)
    for (const auto& e : ring_edges(ring)) {
      if (e.length() == 0.0) geometry_error(ErrorCode::InvalidGeometry, "load_domain", "zero-length ring edge");
      edges.push_back(e);
    }
  for (size_t i = 0; i < edges.size(); ++i)
    for (size_t j = i + 1; j < edges.size(); ++j)
      if (segments_cross_properly(edges[i], edges[j]))
        geometry_error(ErrorCode::InvalidGeometry, "load_domain", "self-intersecting ring");
}

void DomainModel::normalize_orientation() {
  size_t outer = 0;
  for (size_t i = 1; i < rings_.size(); ++i)
    if (std::abs(signed_area(rings_[i])) > std::abs(signed_area(rings_[outer]))) outer = i;
  for (size_t i = 0; i < rings_.size(); ++i) {
    const double a = signed_area(rings_[i]);
    const bool want_ccw = (i == outer);
    if ((a > 0.0) != want_ccw) std::reverse(rings_[i].begin(), rings_[i].end());
  }
}

void DomainModel::check_arcs() const {
  const double tol = 1e-9 * std::max(diameter_, 1.0);
  std::vector<Segment> edges;
  for (const auto& ring : rings_)
    for (const auto& e : ring_edges(ring)) edges.push_back(e);
  std::vector<std::vector<Interval>> d_cover(edges.size()), g_cover(edges.size());

  auto register_arcs = [&](const std::vector<Polyline>& arcs, std::vector<std::vector<Interval>>& cover) {
    for (const auto& arc : arcs) {
      for (size_t k = 1; k < arc.size(); ++k) {
        const Segment s{arc[k - 1], arc[k]};
        const double len = s.length();
        if (len == 0.0) continue;
        double covered = 0.0;
        for (size_t e = 0; e < edges.size(); ++e) {
          const Vec2 d = edges[e].b - edges[e].a;
          const double elen = norm(d);
          const double off_a = std::abs(cross(d, s.a - edges[e].a)) / elen;
          const double off_b = std::abs(cross(d, s.b - edges[e].a)) / elen;
          if (off_a > tol || off_b > tol) continue;
          const double ta = dot(s.a - edges[e].a, d) / (elen * elen);
          const double tb = dot(s.b - edges[e].a, d) / (elen * elen);
          const double lo = std::max(0.0, std::min(ta, tb));
          const double hi = std::min(1.0, std::max(ta, tb));
          if (hi - lo <= tol / elen) continue;
          cover[e].push_back({lo, hi});
          covered += (hi - lo) * elen;
        }
        if (covered < len - tol)
          geometry_error(ErrorCode::InvalidGeometry, "load_domain", "boundary arc leaves the polygon boundary");
      }
    }
  };
  register_arcs(d_arcs_, d_cover);
  register_arcs(gamma_arcs_, g_cover);

  for (size_t e = 0; e < edges.size(); ++e) {
    const double etol = tol / edges[e].length();
    for (const auto& a : d_cover[e])
      for (const auto& b : g_cover[e])
        if (std::min(a.hi, b.hi) - std::max(a.lo, b.lo) > etol)
          geometry_error(ErrorCode::InvalidGeometry, "load_domain", "D and Gamma arcs overlap");
    std::vector<Interval> all = d_cover[e];
    all.insert(all.end(), g_cover[e].begin(), g_cover[e].end());
    std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double reach = 0.0;
    for (const auto& iv : all) {
      if (iv.lo > reach + etol) break;
      reach = std::max(reach, iv.hi);
    }
    if (reach < 1.0 - etol)
      geometry_error(ErrorCode::InvalidGeometry, "load_domain", "boundary not covered by D and Gamma arcs");
  }
}

void DomainModel::check_window() const {
  const double w = window_.width();
  const double h = window_.height();
  if (!(w > 0.0) || std::abs(w - h) > 1e-12 * w)
    geometry_error(ErrorCode::InvalidGeometry, "load_domain", "window must be a square");
  const double margin = std::min({bbox_.lo.x - window_.lo.x, bbox_.lo.y - window_.lo.y, window_.hi.x - bbox_.hi.x,
                                  window_.hi.y - bbox_.hi.y});
  if (margin < 0.5 * diameter_ * (1.0 - 1e-12))
    geometry_error(ErrorCode::InvalidGeometry, "load_domain", "window margin below diam(Omega)/2");
}

void DomainModel::check_connected() const {
  constexpr int n = 128;
  const double sx = bbox_.width() / n;
  const double sy = bbox_.height() / n;
  auto center = [&](int i, int j) { return Vec2{bbox_.lo.x + (i + 0.5) * sx, bbox_.lo.y + (j + 0.5) * sy}; };
  std::vector<int> label(n * n, -1);
  std::vector<char> inside(n * n, 0);
  int count = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) inside[j * n + i] = contains(center(i, j)) ? 1 : 0;
  int components = 0;
  for (int start = 0; start < n * n; ++start) {
    if (!inside[start] || label[start] >= 0) continue;
    ++components;
    std::queue<int> q;
    q.push(start);
    label[start] = components;
    while (!q.empty()) {
      const int c = q.front();
      q.pop();
      ++count;
      const int ci = c % n, cj = c / n;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int ni = ci + di[k], nj = cj + dj[k];
        if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;
        const int nb = nj * n + ni;
        if (!inside[nb] || label[nb] >= 0) continue;
        if (boundary_set_.crosses({center(ci, cj), center(ni, nj)})) continue;
        label[nb] = components;
        q.push(nb);
      }
    }
  }
  if (components == 0) geometry_error(ErrorCode::InvalidGeometry, "load_domain", "domain contains no grid cells");
  if (components > 1) geometry_error(ErrorCode::DisconnectedDomain, "load_domain", "flood fill found several components");
}

bool DomainModel::contains(Vec2 p) const {
  if (!bbox_.contains_open(p)) return false;
  if (boundary_set_.dist(p) <= 1e-14 * diameter_) return false;
  return point_in_rings(rings_, p);
}

double DomainModel::dist_to(Vec2 p, DistTarget target) const {
  switch (target) {
    case DistTarget::D: return d_set_.dist(p);
    case DistTarget::Gamma: return gamma_set_.dist(p);
    case DistTarget::Boundary: return boundary_set_.dist(p);
    case DistTarget::Complement: return contains(p) ? boundary_set_.dist(p) : 0.0;
  }
  return kInf;
}

double DomainModel::area_in_disk(Vec2 c, double r) const {
  const Ring disk = disk_polygon(c, r, 256);
  double a = 0.0;
  for (const auto& ring : rings_) a += signed_area(clip_ring_convex(ring, disk));
  return a;
}

namespace {

Polyline parse_points(const nlohmann::json& arr, const char* what) {
  if (!arr.is_array()) throw std::runtime_error(std::string(what) + " must be a list of points");
  Polyline pts;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw std::runtime_error(std::string(what) + " point must be [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

std::vector<Polyline> parse_lines(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw std::runtime_error(std::string("missing field ") + key);
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw std::runtime_error(std::string(key) + " must be a list");
  std::vector<Polyline> out;
  for (const auto& line : arr) out.push_back(parse_points(line, key));
  return out;
}

}  // namespace

DomainModel load_domain(std::string_view spec_text) {
  std::string name;
  std::vector<Ring> rings;
  std::vector<Polyline> d_arcs, gamma_arcs;
  Box window;
  std::optional<EpsDelta> ed;
  try {
    const auto doc = nlohmann::json::parse(spec_text);
    if (!doc.is_object()) throw std::runtime_error("top level must be an object");
    name = doc.value("name", std::string("domain"));
    rings = parse_lines(doc, "rings");
    d_arcs = parse_lines(doc, "d_arcs");
    gamma_arcs = parse_lines(doc, "gamma_arcs");
    if (!doc.contains("window")) throw std::runtime_error("missing field window");
    const auto& w = doc.at("window");
    if (!w.is_array() || w.size() != 4) throw std::runtime_error("window must be [xmin, ymin, xmax, ymax]");
    window = {{w[0].get<double>(), w[1].get<double>()}, {w[2].get<double>(), w[3].get<double>()}};
    if (doc.contains("eps_delta") && !doc.at("eps_delta").is_null()) {
      const auto& e = doc.at("eps_delta");
      ed = EpsDelta{e.at("eps").get<double>(), e.at("delta").get<double>()};
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    geometry_error(ErrorCode::MalformedSpec, "load_domain", ex.what());
  }
  return DomainModel(std::move(name), std::move(rings), std::move(d_arcs), std::move(gamma_arcs), window, ed);
}

DomainModel load_domain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) geometry_error(ErrorCode::IoError, "load_domain", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_domain(ss.str());
}

std::vector<Vec2> sample_by_arclength(const std::vector<Polyline>& lines, int count) {
  std::vector<Vec2> out;
  double total = 0.0;
  for (const auto& l : lines) total += polyline_length(l);
  if (count <= 0 || total == 0.0) return out;
  const double step = total / count;
  for (int i = 0; i < count; ++i) {
    double t = (i + 0.5) * step;
    for (const auto& l : lines) {
      const double len = polyline_length(l);
      if (t <= len) {
        out.push_back(polyline_point_at(l, t));
        break;
      }
      t -= len;
    }
  }
  return out;
}

namespace {

void finish_report(RegularityReport& rep) {
  rep.c_lower = kInf;
  rep.c_upper = 0.0;
  for (const auto& s : rep.samples) {
    rep.c_lower = std::min(rep.c_lower, s.value);
    rep.c_upper = std::max(rep.c_upper, s.value);
  }
  rep.pass = !rep.samples.empty() && rep.c_lower >= 1.0 / rep.budget && rep.c_upper <= rep.budget;
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) geometry_error(ErrorCode::InvalidParameters, "check_d_set", "no radii");
  for (double r : radii)
    if (!(r > 0.0 && r <= 1.0)) geometry_error(ErrorCode::InvalidParameters, "check_d_set", "radius outside (0, 1]");
}

}  // namespace

RegularityReport check_d_set_polylines(const SegmentSet& set, const std::vector<double>& radii, int centers,
                                       double budget) {
  if (set.empty() || set.total_length() == 0.0) geometry_error(ErrorCode::EmptySet, "check_d_set", "set has no points");
  check_radii(radii);
  std::vector<Polyline> lines;
  for (const auto& s : set.segments()) lines.push_back({s.a, s.b});
  RegularityReport rep;
  rep.d = 1;
  rep.budget = budget;
  for (const Vec2& x : sample_by_arclength(lines, centers))
    for (double r : radii) {
      double len = 0.0;
      for (const auto& s : set.segments()) len += segment_length_in_disk(s, x, r);
      rep.samples.push_back({x, r, len / r});
    }
  finish_report(rep);
  return rep;
}

RegularityReport check_d_set(const DomainModel& domain, SetId set_id, int d, const std::vector<double>& radii,
                             int centers, double budget) {
  if (set_id == SetId::D) {
    if (d != 1) geometry_error(ErrorCode::InvalidParameters, "check_d_set", "D is checked as a 1-set");
    return check_d_set_polylines(domain.d_set(), radii, centers, budget);
  }
  if (d != 2) geometry_error(ErrorCode::InvalidParameters, "check_d_set", "Omega is checked as a 2-set");
  check_radii(radii);
  RegularityReport rep;
  rep.d = 2;
  rep.budget = budget;
  const Box bb = domain.bounding_box();
  const int k = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(centers)))));
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) {
      const Vec2 x{bb.lo.x + (i + 0.5) * bb.width() / k, bb.lo.y + (j + 0.5) * bb.height() / k};
      if (!domain.contains(x)) continue;
      for (double r : radii) rep.samples.push_back({x, r, domain.area_in_disk(x, r) / (r * r)});
    }
  if (rep.samples.empty()) geometry_error(ErrorCode::EmptySet, "check_d_set", "no sample centres inside Omega");
  finish_report(rep);
  return rep;
}

double thickness_ratio(const DomainModel& domain, Vec2 x, double r) {
  return domain.area_in_disk(x, r) / (std::numbers::pi * r * r);
}

ThicknessReport interior_thickness(const DomainModel& domain, const std::vector<double>& radii, int boundary_samples) {
  if (domain.gamma_set().empty()) geometry_error(ErrorCode::EmptyGamma, "interior_thickness", "Gamma is empty");
  for (double r : radii)
    if (!(r > 0.0 && r <= 1.0))
      geometry_error(ErrorCode::InvalidParameters, "interior_thickness", "radius outside (0, 1]");
  ThicknessReport rep;
  rep.min_ratio = kInf;
  for (const Vec2& x : sample_by_arclength(domain.gamma_arcs(), boundary_samples))
    for (double r : radii) {
      const double v = thickness_ratio(domain, x, r);
      rep.samples.push_back({x, r, v});
      if (v < rep.min_ratio) {
        rep.min_ratio = v;
        rep.argmin_center = x;
        rep.argmin_radius = r;
      }
    }
  return rep;
}

}  // namespace fracsob
