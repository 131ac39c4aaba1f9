#include "fracsob/planar.hpp"

#include <numbers>

namespace fracsob {

double dist_point_segment(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  double t = dot(p - s.a, d) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

double dist_point_box(Vec2 p, const Box& b) {
  const double dx = std::max({b.lo.x - p.x, 0.0, p.x - b.hi.x});
  const double dy = std::max({b.lo.y - p.y, 0.0, p.y - b.hi.y});
  return std::hypot(dx, dy);
}

double dist_box_box(const Box& a, const Box& b) {
  const double dx = std::max({a.lo.x - b.hi.x, 0.0, b.lo.x - a.hi.x});
  const double dy = std::max({a.lo.y - b.hi.y, 0.0, b.lo.y - a.hi.y});
  return std::hypot(dx, dy);
}

bool segment_intersects_box(const Segment& s, const Box& b) {
  // Liang-Barsky parametric clipping.
  double t0 = 0.0, t1 = 1.0;
  const Vec2 d = s.b - s.a;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {s.a.x - b.lo.x, b.hi.x - s.a.x, s.a.y - b.lo.y, b.hi.y - s.a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
  }
  return t0 <= t1;
}

double dist_box_segment(const Box& b, const Segment& s) {
  if (segment_intersects_box(s, b)) return 0.0;
  double best = std::min(dist_point_box(s.a, b), dist_point_box(s.b, b));
  const Vec2 corners[4] = {b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}};
  for (const Vec2& c : corners) best = std::min(best, dist_point_segment(c, s));
  return best;
}

namespace {

int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment_collinear(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_cross_properly(const Segment& s, const Segment& t) {
  const int o1 = orientation_sign(s.a, s.b, t.a);
  const int o2 = orientation_sign(s.a, s.b, t.b);
  const int o3 = orientation_sign(t.a, t.b, s.a);
  const int o4 = orientation_sign(t.a, t.b, s.b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation_sign(s.a, s.b, t.a);
  const int o2 = orientation_sign(s.a, s.b, t.b);
  const int o3 = orientation_sign(t.a, t.b, s.a);
  const int o4 = orientation_sign(t.a, t.b, s.b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment_collinear(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment_collinear(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment_collinear(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment_collinear(t.a, t.b, s.b)) return true;
  return false;
}

double dist_segment_segment(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({dist_point_segment(s.a, t), dist_point_segment(s.b, t), dist_point_segment(t.a, s),
                   dist_point_segment(t.b, s)});
}

double polyline_length(const Polyline& line) {
  double len = 0.0;
  for (size_t i = 1; i < line.size(); ++i) len += distance(line[i - 1], line[i]);
  return len;
}

double signed_area(const Ring& ring) {
  double a = 0.0;
  const size_t n = ring.size();
  for (size_t i = 0; i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 polyline_point_at(const Polyline& line, double t) {
  if (line.empty()) return {};
  if (t <= 0.0) return line.front();
  for (size_t i = 1; i < line.size(); ++i) {
    const double len = distance(line[i - 1], line[i]);
    if (t <= len && len > 0.0) return line[i - 1] + (t / len) * (line[i] - line[i - 1]);
    t -= len;
  }
  return line.back();
}

Ring clip_ring_convex(const Ring& subject, const Ring& convex_ccw) {
  Ring out = subject;
  const size_t m = convex_ccw.size();
  for (size_t e = 0; e < m && !out.empty(); ++e) {
    const Vec2 c0 = convex_ccw[e];
    const Vec2 c1 = convex_ccw[(e + 1) % m];
    const Vec2 dir = c1 - c0;
    auto side = [&](Vec2 p) { return cross(dir, p - c0); };
    Ring in = std::move(out);
    out.clear();
    const size_t n = in.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec2 p = in[i];
      const Vec2 q = in[(i + 1) % n];
      const double sp = side(p);
      const double sq = side(q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

Ring disk_polygon(Vec2 c, double r, int sides) {
  const double pi = std::numbers::pi;
  const double scale = std::sqrt(pi / (0.5 * sides * std::sin(2.0 * pi / sides)));
  const double rr = r * scale;
  Ring ring(static_cast<size_t>(sides));
  for (int k = 0; k < sides; ++k) {
    const double a = 2.0 * pi * k / sides;
    ring[static_cast<size_t>(k)] = {c.x + rr * std::cos(a), c.y + rr * std::sin(a)};
  }
  return ring;
}

double segment_length_in_disk(const Segment& s, Vec2 c, double r) {
  const double len = s.length();
  if (len == 0.0) return 0.0;
  // Foot of the perpendicular from c, in arclength from s.a, and the half chord around it.
  const Vec2 u = (1.0 / len) * (s.b - s.a);
  const Vec2 f = c - s.a;
  const double foot = dot(f, u);
  const double perp = std::abs(cross(u, f));
  if (perp >= r) return 0.0;
  const double half = std::sqrt((r - perp) * (r + perp));
  const double lo = std::max(foot - half, 0.0);
  const double hi = std::min(foot + half, len);
  return hi > lo ? hi - lo : 0.0;
}

SegmentSet::SegmentSet(std::vector<Segment> segments) : segments_(std::move(segments)) {}

SegmentSet SegmentSet::from_polylines(const std::vector<Polyline>& lines) {
  std::vector<Segment> segs;
  for (const auto& line : lines) {
    if (line.size() == 1) segs.push_back({line[0], line[0]});
    for (size_t i = 1; i < line.size(); ++i) segs.push_back({line[i - 1], line[i]});
  }
  return SegmentSet(std::move(segs));
}

double SegmentSet::dist(Vec2 p) const {
  double best = kInf;
  for (const auto& s : segments_) best = std::min(best, dist_point_segment(p, s));
  return best;
}

double SegmentSet::dist(const Box& b) const {
  double best = kInf;
  for (const auto& s : segments_) {
    best = std::min(best, dist_box_segment(b, s));
    if (best == 0.0) break;
  }
  return best;
}

double SegmentSet::dist(const Segment& t) const {
  double best = kInf;
  for (const auto& s : segments_) best = std::min(best, dist_segment_segment(s, t));
  return best;
}

bool SegmentSet::crosses(const Segment& t) const {
  for (const auto& s : segments_)
    if (segments_intersect(s, t)) return true;
  return false;
}

double SegmentSet::total_length() const {
  double len = 0.0;
  for (const auto& s : segments_) len += s.length();
  return len;
}

}  // namespace fracsob
