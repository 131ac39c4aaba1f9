#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fracsob/whitney.hpp"

namespace fracsob {

// Shortest paths over the touching graph of a Whitney decomposition of Xi = plane \ F.
// Edge weight: |c_P - c_Q| / dist(edge midpoint, F).
class QuasihyperbolicGraph {
 public:
  QuasihyperbolicGraph(std::shared_ptr<const WhitneyDecomposition> dec, ClosedSet excluded);

  const WhitneyDecomposition& decomposition() const { return *dec_; }
  // Upper approximation of k_Xi(x, y). Throws UnreachablePoints.
  double distance(Vec2 x, Vec2 y) const;
  // Cube path (indices) of a shortest route between the cubes containing x and y.
  std::vector<int> cube_path(Vec2 x, Vec2 y) const;
  // Multi-source Dijkstra: graph distance from every cube to the nearest source cube.
  std::vector<double> distances_from(const std::vector<int>& sources) const;
  // Weight of the straight hop from a point to the centre of its cube.
  double hop_weight(Vec2 x, int cube) const;

 private:
  int cube_of(Vec2 p, const char* op) const;
  std::vector<double> dijkstra(const std::vector<int>& sources, std::vector<int>* parent) const;

  std::shared_ptr<const WhitneyDecomposition> dec_;
  ClosedSet excluded_;
  std::vector<double> edge_weight_;  // aligned with the decomposition's CSR neighbour list
};

double quasihyperbolic_distance(Vec2 x, Vec2 y, const QuasihyperbolicGraph& graph);

enum class CigarStatus { Pass, Inconclusive };

struct CigarPairResult {
  Vec2 x;
  Vec2 y;
  double best_eps = 0.0;
  double excursion = 0.0;
  std::string curve;
  CigarStatus status = CigarStatus::Inconclusive;
};

struct CigarReport {
  double eps_target = 0.0;
  double k_target = 0.0;
  int depth = 0;
  std::vector<CigarPairResult> pairs;
  CigarStatus status = CigarStatus::Inconclusive;
};

struct CurveScore {
  bool valid = false;
  double eps = 0.0;        // min(1, eps_i, eps_ii)
  double eps_length = 0.0;  // |x - y| / length
  double eps_cigar = 0.0;   // min dist(z, Gamma) |x - y| / (|x - z||y - z|)
  double length = 0.0;
};

// Conditions (i) and (ii) for an explicit polygonal curve from x to y.
CurveScore score_curve(const std::vector<Vec2>& curve, const SegmentSet& gamma);
// Polygonal circular arc from x to y with signed sagitta (0 gives the segment).
std::vector<Vec2> circular_arc(Vec2 x, Vec2 y, double sagitta, int pieces = 256);

CigarReport check_cigar(const DomainModel& domain, const std::vector<std::pair<Vec2, Vec2>>& pairs, double eps_target,
                        double k_target, int depth = 10);

}  // namespace fracsob
