#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fracsob/geometry.hpp"

namespace fracsob {

struct DyadicCube {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  double side = 0.0;
  Vec2 lo;

  Box box() const { return {lo, {lo.x + side, lo.y + side}}; }
  Vec2 center() const { return {lo.x + 0.5 * side, lo.y + 0.5 * side}; }
  double diam() const { return side * std::sqrt(2.0); }
  // Box of the concentric cube scaled by `factor`.
  Box scaled_box(double factor) const;
};

// diam P + diam Q + dist(P, Q).
double long_distance(const DyadicCube& p, const DyadicCube& q);
bool cubes_touch(const DyadicCube& p, const DyadicCube& q);

// Closed set F: a finite union of segments, optionally together with the closure of a polygonal region.
class ClosedSet {
 public:
  ClosedSet(std::string id, SegmentSet segments, std::vector<Ring> filled = {});
  static ClosedSet gamma_closure(const DomainModel& d);
  static ClosedSet d_closure(const DomainModel& d);
  static ClosedSet omega_closure(const DomainModel& d);

  const std::string& id() const { return id_; }
  bool empty() const { return segments_.empty() && filled_.empty(); }
  double dist(Vec2 p) const;
  double dist(const Box& b) const;
  // True when the closed box lies inside the filled region (so it meets no Whitney cube).
  bool box_inside(const Box& b) const;

 private:
  std::string id_;
  SegmentSet segments_;
  std::vector<Ring> filled_;
};

enum class LeafKind : std::uint8_t { Accepted, Collar, InsideSet };

struct LeafRef {
  LeafKind kind;
  int index;  // into cubes() for Accepted, into collar() for Collar, -1 otherwise
  int level;
  std::int64_t ix;
  std::int64_t iy;
};

class WhitneyDecomposition {
 public:
  const std::string& closed_set_id() const { return closed_set_id_; }
  const Box& window() const { return window_; }
  double base_scale() const { return window_.width(); }
  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }
  bool truncated() const { return truncated_; }

  // Accepted cubes in canonical (level, ix, iy) order.
  const std::vector<DyadicCube>& cubes() const { return cubes_; }
  // Max-level cubes that failed the acceptance test (the uncovered collar around F).
  const std::vector<DyadicCube>& collar() const { return collar_; }
  // dist(Q, F) per accepted cube.
  const std::vector<double>& dist_to_set() const { return dist_; }
  std::span<const int> neighbors(int i) const {
    return {nbr_index_.data() + nbr_offset_[i], nbr_index_.data() + nbr_offset_[i + 1]};
  }
  double collar_area() const;

  std::optional<LeafRef> leaf_at(Vec2 p) const;
  // Accepted cube containing p, or -1.
  int locate(Vec2 p) const;
  int find(int level, std::int64_t ix, std::int64_t iy) const;
  std::optional<LeafRef> find_leaf(int level, std::int64_t ix, std::int64_t iy) const;
  // Accepted cubes whose closure meets the closure of the dyadic cube (level, ix, iy), excluding itself.
  std::vector<int> touching_accepted(int level, std::int64_t ix, std::int64_t iy) const;
  DyadicCube make_cube(int level, std::int64_t ix, std::int64_t iy) const;
  // Fingerprint of the cube list, used to detect mismatched inputs downstream.
  std::uint64_t fingerprint() const { return fingerprint_; }

  // Every leaf (all kinds) in canonical order; they tile the window.
  std::vector<LeafRef> leaves() const;

 private:
  friend WhitneyDecomposition whitney_decompose(const ClosedSet& f, const Box& window, int max_level);
  static std::uint64_t key(int level, std::int64_t ix, std::int64_t iy) {
    return (static_cast<std::uint64_t>(level) << 58) | (static_cast<std::uint64_t>(ix) << 29) |
           static_cast<std::uint64_t>(iy);
  }
  std::optional<LeafRef> leaf_at_fine(std::int64_t fx, std::int64_t fy) const;

  std::string closed_set_id_;
  Box window_;
  int min_level_ = 0;
  int max_level_ = 0;
  bool truncated_ = false;
  std::vector<DyadicCube> cubes_;
  std::vector<DyadicCube> collar_;
  std::vector<DyadicCube> inside_;
  std::vector<double> dist_;
  std::vector<int> nbr_offset_;
  std::vector<int> nbr_index_;
  std::unordered_map<std::uint64_t, LeafRef> leaf_map_;
  std::uint64_t fingerprint_ = 0;
};

inline constexpr int kDefaultMaxLevel = 12;

WhitneyDecomposition whitney_decompose(const ClosedSet& f, const Box& window, int max_level = kDefaultMaxLevel);

struct WhitneyAudit {
  std::size_t cube_count = 0;
  std::size_t collar_count = 0;
  bool disjoint = false;
  bool coverage = false;
  bool sandwich = false;
  bool dyadic = false;
  bool neighbor_ratio = false;
  bool neighbor_count = false;
  double coverage_fraction = 0.0;  // sampled points far from F that land in accepted cubes
  double collar_area_fraction = 0.0;
  std::size_t sandwich_violations = 0;
  double max_neighbor_ratio = 0.0;
  int max_neighbors = 0;
  bool all() const { return disjoint && coverage && sandwich && dyadic && neighbor_ratio && neighbor_count; }
};

WhitneyAudit audit_whitney(const WhitneyDecomposition& dec, const ClosedSet& f, int coverage_samples = 256);

// ---- cube classes ----

struct ClassParams {
  double A = 1.0;
  double B = 16.0;
};

enum CubeFlag : std::uint8_t {
  kFlagWe = 1,
  kFlagWePrime = 2,
  kFlagWeDoublePrime = 4,
  kFlagWi = 8,
};

struct CubeClasses {
  std::shared_ptr<const WhitneyDecomposition> dec_gamma;  // null when Gamma is empty
  std::shared_ptr<const WhitneyDecomposition> dec_omega;
  std::vector<int> w_i;         // indices into dec_gamma
  std::vector<int> w_e;         // indices into dec_omega
  std::vector<int> w_e_prime;
  std::vector<int> w_e_dprime;
  std::vector<std::uint8_t> omega_flags;
  std::vector<std::uint8_t> gamma_flags;
  std::vector<double> omega_dist_d;      // dist(Q, D) per dec_omega cube
  std::vector<double> omega_dist_gamma;  // dist(Q, Gamma) per dec_omega cube
  double A = 1.0;
  double B = 16.0;
  double delta = kInf;
  std::uint64_t fingerprint = 0;
};

CubeClasses classify_cubes(std::shared_ptr<const WhitneyDecomposition> dec_gamma,
                           std::shared_ptr<const WhitneyDecomposition> dec_omega, const DomainModel& domain,
                           ClassParams params = {});

// Flat CSV: decomposition, level, ix, iy, side, flags.
std::string classes_csv(const CubeClasses& classes);

// ---- replays of the distance lemmas ----

struct LemmaReplay {
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // largest measured lhs/rhs
};

// dist(x, D) <= 2|x - y| for x in Omega samples, y grid points of Q \ Omega, Q in w_i.
LemmaReplay replay_lemma_interior_shadow(const CubeClasses& classes, const DomainModel& domain, int x_samples = 24,
                                         int y_lattice = 5);
// For Q in w_e \ w_e' with l(Q) <= A delta / 4: B^-1 dist(Q,Gamma) < dist(Q,D) <= 21 dist(Q,Gamma).
LemmaReplay replay_lemma_band(const CubeClasses& classes);

struct SeparationReplay {
  std::size_t pairs = 0;
  double best_constant = 0.0;  // C_e
};
// Best C_e with |x-y| >= C_e or |x-y| >= C_e dist(x, D) for x in Omega, y outside Omega and the w_e' union.
SeparationReplay replay_lemma_separation(const CubeClasses& classes, const DomainModel& domain, int lattice = 96);

// ---- touching chains ----

struct Chain {
  std::vector<int> cubes;  // indices into dec_gamma
  bool found = false;
};

struct ReflectionMap;

// Case (i): P, Q in w_e touching; chain in w_i from P* to Q*.
Chain touching_chain(int p, int q, const CubeClasses& classes, const ReflectionMap& map);
// Case (ii): Q in w_e \ w_e'; chain from Q* to a w_i cube S with S ∩ Q dyadic and comparable to Q.
Chain boundary_chain(int q, const CubeClasses& classes, const ReflectionMap& map, double comparability = 16.0);

}  // namespace fracsob
