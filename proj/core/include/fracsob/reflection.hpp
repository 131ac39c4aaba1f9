#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracsob/whitney.hpp"

namespace fracsob {

struct ReflectionConstants {
  double c_size = 0.0;      // max of diam Q* / diam Q and its inverse
  double c_dist = 0.0;      // max dist(Q, Q*) / diam Q
  int multiplicity = 0;     // max number of preimages of one interior cube
  double c_neighbor = 0.0;  // max dist(P*, Q*) / diam P over touching P, Q in w_e
};

struct ReflectionMap {
  std::vector<int> partner;  // per dec_omega cube: dec_gamma index of Q*, or -1
  std::vector<int> unpaired;  // w_e cubes without an admissible partner
  ReflectionConstants diag;
  double size_band = 8.0;
  std::uint64_t classes_fingerprint = 0;

  int star(int q) const { return partner[static_cast<std::size_t>(q)]; }
};

inline constexpr double kDefaultSizeBand = 8.0;

// Q* = the w_i cube with diameter ratio in [1/C0, C0] nearest to Q; ties by |log ratio|, then index.
ReflectionMap build_reflection(const CubeClasses& classes, double size_band = kDefaultSizeBand);

struct ReflectionDiagnostics {
  ReflectionConstants diag;
  // histogram[m] = number of w_e cubes whose partner has m preimages; histogram[0] counts unpaired cubes.
  std::vector<std::size_t> multiplicity_histogram;
  double long_distance_constant = 0.0;  // measured C in D(P*, S*) <= C |x - y|
  std::size_t long_distance_checks = 0;
  double anchor_constant = 0.0;  // measured C in dist(x, D) <= C diam Q
  double anchor_budget = 0.0;
  std::size_t anchor_checks = 0;
  std::size_t anchor_violations = 0;
};

ReflectionDiagnostics verify_reflection(const ReflectionMap& map, const CubeClasses& classes, const DomainModel& domain,
                                        double anchor_budget = 64.0);

// Columns: cube, level, ix, iy, partner, partner_level, dist, diam_ratio.
std::string reflection_csv(const ReflectionMap& map, const CubeClasses& classes);

}  // namespace fracsob
