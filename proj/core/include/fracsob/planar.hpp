#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fracsob {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Segment {
  Vec2 a;
  Vec2 b;
  double length() const { return distance(a, b); }
};

// Closed axis-aligned box.
struct Box {
  Vec2 lo;
  Vec2 hi;
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  Vec2 center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }
  bool contains(Vec2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool contains_open(Vec2 p) const { return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y; }
};

double dist_point_segment(Vec2 p, const Segment& s);
double dist_point_box(Vec2 p, const Box& b);
double dist_box_box(const Box& a, const Box& b);
bool segment_intersects_box(const Segment& s, const Box& b);
double dist_box_segment(const Box& b, const Segment& s);
// True when the open interiors of both segments cross transversally.
bool segments_cross_properly(const Segment& s, const Segment& t);
bool segments_intersect(const Segment& s, const Segment& t);
double dist_segment_segment(const Segment& s, const Segment& t);

using Polyline = std::vector<Vec2>;
using Ring = std::vector<Vec2>;

double polyline_length(const Polyline& line);
double signed_area(const Ring& ring);
// Point at arclength `t` along the polyline (clamped to its ends).
Vec2 polyline_point_at(const Polyline& line, double t);

// Sutherland-Hodgman clip of an arbitrary ring against a convex ccw polygon.
// The result may contain degenerate zero-area bridges; its shoelace area is exact.
Ring clip_ring_convex(const Ring& subject, const Ring& convex_ccw);

// Regular N-gon centred at c whose area equals pi r^2.
Ring disk_polygon(Vec2 c, double r, int sides = 256);

// Exact length of the part of a segment inside the closed disk B(c, r).
double segment_length_in_disk(const Segment& s, Vec2 c, double r);

// Finite collection of segments with exact distance queries; the empty set is at distance +inf.
class SegmentSet {
 public:
  SegmentSet() = default;
  explicit SegmentSet(std::vector<Segment> segments);
  static SegmentSet from_polylines(const std::vector<Polyline>& lines);

  bool empty() const { return segments_.empty(); }
  const std::vector<Segment>& segments() const { return segments_; }
  double dist(Vec2 p) const;
  double dist(const Box& b) const;
  double dist(const Segment& s) const;
  bool crosses(const Segment& s) const;
  double total_length() const;

 private:
  std::vector<Segment> segments_;
};

}  // namespace fracsob
