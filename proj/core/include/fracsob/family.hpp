#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fracsob/grid.hpp"

namespace fracsob {

enum class FamilyKind { Bumps, BumpsAwayFromD, PolynomialTimesCutoff };

FamilyKind parse_family_kind(const std::string& name);
std::string family_kind_name(FamilyKind kind);

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct BumpTerm {
  Vec2 center;
  double radius = 0.0;
  double amplitude = 0.0;
};

// Resolution-independent description of one family member.
struct FamilyMember {
  FamilyKind kind = FamilyKind::Bumps;
  std::vector<BumpTerm> bumps;
  double poly[6] = {0, 0, 0, 0, 0, 0};  // 1, x, y, x^2, xy, y^2
  int cutoff_m = 0;

  double evaluate(const DomainModel& domain, Vec2 x) const;
};

// Members are fixed by (kind, count, seed, domain, gap); bumps-away-from-D keeps every support at
// least `gap` from D.
std::vector<FamilyMember> describe_family(FamilyKind kind, int count, std::uint64_t seed, const DomainModel& domain,
                                          double gap);

// Samples of describe_family(kind, count, seed, domain, gap) on the grid of cell side h; gap defaults to 4h.
std::vector<GridFunction> generate_family(FamilyKind kind, int count, std::uint64_t seed, const DomainModel& domain,
                                          double h, double gap = 0.0);

}  // namespace fracsob
