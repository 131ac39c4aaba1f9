#include "fracsob/family.hpp"

#include <algorithm>
#include <cmath>

#include "fracsob/error.hpp"
#include "fracsob/extension.hpp"

namespace fracsob {

FamilyKind parse_family_kind(const std::string& name) {
  if (name == "bumps") return FamilyKind::Bumps;
  if (name == "bumps-away-from-D") return FamilyKind::BumpsAwayFromD;
  if (name == "polynomial-times-cutoff") return FamilyKind::PolynomialTimesCutoff;
  throw Error(ErrorCode::ConfigError, "cli", "generate_family", "unknown family kind " + name);
}

std::string family_kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Bumps: return "bumps";
    case FamilyKind::BumpsAwayFromD: return "bumps-away-from-D";
    default: return "polynomial-times-cutoff";
  }
}

double FamilyMember::evaluate(const DomainModel& domain, Vec2 x) const {
  switch (kind) {
    case FamilyKind::Bumps: {
      double v = 0.0;
      for (const auto& b : bumps) {
        const Vec2 d = x - b.center;
        v += b.amplitude * std::exp(-0.5 * dot(d, d) / (b.radius * b.radius));
      }
      return v;
    }
    case FamilyKind::BumpsAwayFromD: {
      double v = 0.0;
      for (const auto& b : bumps) v += b.amplitude * ramp(distance(x, b.center) / b.radius);
      return v;
    }
    default: {
      const double p = poly[0] + poly[1] * x.x + poly[2] * x.y + poly[3] * x.x * x.x + poly[4] * x.x * x.y +
                       poly[5] * x.y * x.y;
      const double v = domain.d_set().empty() ? 0.0 : cutoff_value(cutoff_m, domain.dist_to(x, DistTarget::D));
      return p * (1.0 - v);
    }
  }
}

std::vector<FamilyMember> describe_family(FamilyKind kind, int count, std::uint64_t seed, const DomainModel& domain,
                                          double gap) {
  if (count < 1) throw Error(ErrorCode::InvalidParameters, "cli", "generate_family", "count must be at least 1");
  std::mt19937_64 rng(seed);
  const Box bb = domain.bounding_box();
  const double scale = std::min(bb.width(), bb.height());
  auto point_in = [&]() {
    for (int tries = 0; tries < 100000; ++tries) {
      const Vec2 c{bb.lo.x + uniform01(rng) * bb.width(), bb.lo.y + uniform01(rng) * bb.height()};
      if (domain.contains(c)) return c;
    }
    throw Error(ErrorCode::InvalidParameters, "cli", "generate_family", "could not sample a point of Omega");
  };
  std::vector<FamilyMember> out;
  for (int m = 0; m < count; ++m) {
    FamilyMember f;
    f.kind = kind;
    const int terms = 1 + static_cast<int>(rng() % 2);
    switch (kind) {
      case FamilyKind::Bumps:
        for (int t = 0; t < terms; ++t) {
          BumpTerm b;
          b.center = point_in();
          b.radius = scale * (0.08 + 0.17 * uniform01(rng));
          b.amplitude = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + uniform01(rng));
          f.bumps.push_back(b);
        }
        break;
      case FamilyKind::BumpsAwayFromD:
        for (int t = 0; t < terms; ++t) {
          BumpTerm b;
          bool placed = false;
          for (int tries = 0; tries < 100000 && !placed; ++tries) {
            b.center = point_in();
            b.radius = scale * (0.08 + 0.17 * uniform01(rng));
            placed = domain.dist_to(b.center, DistTarget::D) >= b.radius + gap;
          }
          if (!placed)
            throw Error(ErrorCode::InvalidParameters, "cli", "generate_family", "no room for a bump away from D");
          b.amplitude = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + uniform01(rng));
          f.bumps.push_back(b);
        }
        break;
      default:
        for (double& c : f.poly) c = 2.0 * uniform01(rng) - 1.0;
        f.poly[0] += 1.5;
        f.cutoff_m = 4 + static_cast<int>(rng() % 5);
        break;
    }
    out.push_back(f);
  }
  return out;
}

std::vector<GridFunction> generate_family(FamilyKind kind, int count, std::uint64_t seed, const DomainModel& domain,
                                          double h, double gap) {
  const auto members = describe_family(kind, count, seed, domain, gap > 0.0 ? gap : 4.0 * h);
  std::vector<GridFunction> out;
  out.reserve(members.size());
  for (const auto& m : members)
    out.push_back(sample_on_omega(domain, h, [&](Vec2 x) { return m.evaluate(domain, x); }));
  return out;
}

}  // namespace fracsob
