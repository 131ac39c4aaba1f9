#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fracsob/extension.hpp"
#include "fracsob/family.hpp"
#include "support.hpp"

namespace fracsob {
namespace {

using test::fixture;

struct Pipeline {
  DomainModel domain;
  CubeClasses classes;
  ReflectionMap map;
  std::unique_ptr<PartitionOfUnity> pu;

  Pipeline(DomainModel d, int depth) : domain(std::move(d)) {
    std::shared_ptr<const WhitneyDecomposition> g;
    if (!domain.gamma_set().empty())
      g = std::make_shared<const WhitneyDecomposition>(
          whitney_decompose(ClosedSet::gamma_closure(domain), domain.window(), depth));
    auto o = std::make_shared<const WhitneyDecomposition>(
        whitney_decompose(ClosedSet::omega_closure(domain), domain.window(), depth));
    classes = classify_cubes(g, o, domain);
    map = build_reflection(classes);
    pu = std::make_unique<PartitionOfUnity>(build_partition(classes));
  }
};

TEST(Ramp, ProfileValues) {
  EXPECT_DOUBLE_EQ(ramp(0.0), 1.0);
  EXPECT_DOUBLE_EQ(ramp(1.0), 0.0);
  EXPECT_DOUBLE_EQ(ramp(1.5), 0.0);
  EXPECT_NEAR(ramp(0.5), std::exp(1.0 - 1.0 / 0.75), 1e-15);
  const double t = 0.3, e = 1e-6;
  EXPECT_NEAR(ramp_derivative(t), (ramp(t + e) - ramp(t - e)) / (2 * e), 1e-8);
  EXPECT_DOUBLE_EQ(overlap_constant(), 1.0 + 1.0 / (16.0 * std::sqrt(2.0)));
}

TEST(Cutoff, ThreeBranches) {
  for (int m : {1, 2, 4, 16}) {
    EXPECT_EQ(cutoff_value(m, 0.5 / m), 1.0);
    EXPECT_NEAR(cutoff_value(m, 1.5 / m), 0.5, 1e-15);
    EXPECT_EQ(cutoff_value(m, 3.0 / m), 0.0);
  }
}

TEST(Cutoff, GridSamplesFollowDistanceToD) {
  const DomainModel d = fixture("square_bottom_d");
  const GridFunction v = cutoff_vm(4, d, GridSpec::make(d.window(), 1.0 / 16));
  for (std::size_t k = 0; k < v.values.size(); ++k)
    EXPECT_EQ(v.values[k], cutoff_value(4, d.dist_to(v.spec.center(k), DistTarget::D)));
  EXPECT_FRACSOB_ERROR(cutoff_vm(4, fixture("half_plane"), GridSpec::make(fixture("half_plane").window(), 0.5)), EmptyD);
}

TEST(ZeroExtendCube, InsideStraddlingAndZero) {
  const DomainModel d = fixture("half_plane");
  const GridFunction one = sample_on_omega(d, 1.0 / 32, [](Vec2) { return 1.0; });
  const GridFunction zero = sample_on_omega(d, 1.0 / 32, [](Vec2) { return 0.0; });
  const Box inside{{0.5, 0.5}, {1.0, 1.0}};
  const Box straddle{{-0.25, -0.25}, {0.25, 0.25}};
  EXPECT_NEAR(zero_extend_cube(one, inside), 1.0, 1e-14);
  EXPECT_NEAR(zero_extend_cube(one, straddle), 0.5, 1.0 / 32 / 0.5);
  EXPECT_EQ(zero_extend_cube(zero, inside), 0.0);
}

class MixedSquare : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { p_ = new Pipeline(fixture("small_square_bottom_d"), 9); }
  static void TearDownTestSuite() {
    delete p_;
    p_ = nullptr;
  }
  static Pipeline* p_;
};
Pipeline* MixedSquare::p_ = nullptr;

TEST_F(MixedSquare, PartitionSumsToOneWithinSupports) {
  const GridSpec spec = GridSpec::make(p_->domain.window(), 1.0 / 64);
  const PartitionAudit a = audit_partition(*p_->pu, spec, classify_cells(p_->domain, spec));
  EXPECT_GT(a.covered_cells, 0u);
  EXPECT_LE(a.max_sum_error, 1e-12);
  EXPECT_EQ(a.support_violations, 0u);
}

TEST_F(MixedSquare, CubeCentreHasSingleFullTerm) {
  const auto& cubes = p_->pu->decomposition().cubes();
  for (std::size_t j = 0; j < cubes.size(); j += 7) {
    const auto terms = p_->pu->evaluate(cubes[j].center());
    ASSERT_EQ(terms.size(), 1u) << j;
    EXPECT_EQ(terms.front().cube, static_cast<int>(j));
    EXPECT_DOUBLE_EQ(terms.front().psi, 1.0);
  }
}

TEST_F(MixedSquare, SharedEdgesSumToOne) {
  const auto& dec = p_->pu->decomposition();
  const auto& cubes = dec.cubes();
  std::size_t checked = 0;
  for (std::size_t j = 0; j < cubes.size(); ++j) {
    for (int k : dec.neighbors(static_cast<int>(j))) {
      const DyadicCube& a = cubes[j];
      const DyadicCube& b = cubes[static_cast<std::size_t>(k)];
      if (a.side != b.side || b.lo.x != a.lo.x + a.side || b.lo.y != a.lo.y) continue;
      for (double t : {0.1, 0.5, 0.9}) {
        const auto terms = p_->pu->evaluate({b.lo.x, a.lo.y + t * a.side});
        double sum = 0.0;
        for (const auto& term : terms) {
          sum += term.psi;
          EXPECT_TRUE(p_->pu->support(term.cube).contains_open({b.lo.x, a.lo.y + t * a.side}));
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST_F(MixedSquare, GradientMatchesFiniteDifferences) {
  const auto& cubes = p_->pu->decomposition().cubes();
  const double c = p_->pu->c_n();
  for (std::size_t j = 0; j < cubes.size(); j += 11) {
    // A point inside the ramp strip of cube j.
    const Vec2 x = cubes[j].center() + Vec2{0.5 * cubes[j].side * (1.0 - 0.3 * (c - 1.0)), 0.1 * cubes[j].side};
    const auto terms = p_->pu->evaluate(x, true);
    const double e = 1e-7 * cubes[j].side;
    const auto psi_at = [&](Vec2 y, int cube) {
      for (const auto& t : p_->pu->evaluate(y))
        if (t.cube == cube) return t.psi;
      return 0.0;
    };
    for (const auto& t : terms) {
      const double gx = (psi_at(x + Vec2{e, 0}, t.cube) - psi_at(x - Vec2{e, 0}, t.cube)) / (2 * e);
      const double gy = (psi_at(x + Vec2{0, e}, t.cube) - psi_at(x - Vec2{0, e}, t.cube)) / (2 * e);
      const double scale = 1.0 / cubes[j].side;
      EXPECT_NEAR(t.grad.x, gx, 1e-5 * scale);
      EXPECT_NEAR(t.grad.y, gy, 1e-5 * scale);
    }
  }
}

TEST_F(MixedSquare, GradientConstantStableUnderRefinement) {
  std::vector<int> cubes;
  for (int j = 0; j < static_cast<int>(p_->pu->decomposition().cubes().size()); j += 13) cubes.push_back(j);
  const GradientConstant coarse = measure_gradient_constant(*p_->pu, cubes, 1);
  const GradientConstant fine = measure_gradient_constant(*p_->pu, cubes, 2);
  ASSERT_GT(coarse.value, 0.0);
  EXPECT_LE(std::abs(fine.value / coarse.value - 1.0), 0.10);
}

TEST_F(MixedSquare, RestrictionLinearityAndZero) {
  const double h = 1.0 / 32;
  const auto fam = generate_family(FamilyKind::Bumps, 4, 7, p_->domain, h);
  const ExtensionOperator op = build_extension(fam[0].spec, fam[0].mask, p_->classes, p_->map, *p_->pu);
  const GridFunction e0 = op.apply(fam[0]), e1 = op.apply(fam[1]);
  GridFunction combo = fam[0];
  for (std::size_t k = 0; k < combo.values.size(); ++k) combo.values[k] = 0.7 * fam[0].values[k] - 1.3 * fam[1].values[k];
  const GridFunction ec = op.apply(combo);
  double scale = 0.0;
  for (double v : ec.values) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < e0.values.size(); ++k) {
    if (fam[0].interior(k)) EXPECT_EQ(e0.values[k], fam[0].values[k]);
    if (fam[0].mask[k] == CellMask::DCollar) EXPECT_EQ(e0.values[k], 0.0);
    EXPECT_NEAR(ec.values[k], 0.7 * e0.values[k] - 1.3 * e1.values[k], 1e-12 * scale);
  }
  GridFunction zero = fam[0];
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  for (double v : op.apply(zero).values) EXPECT_EQ(v, 0.0);
  // extend() builds the same operator.
  EXPECT_EQ(extend(fam[2], p_->classes, p_->map, *p_->pu).values, op.apply(fam[2]).values);
}

TEST_F(MixedSquare, SupportStaysAwayFromD) {
  const double h = 1.0 / 32;
  const auto fam = generate_family(FamilyKind::BumpsAwayFromD, 6, 3, p_->domain, h);
  const ExtensionOperator op = build_extension(fam[0].spec, fam[0].mask, p_->classes, p_->map, *p_->pu);
  for (const auto& f : fam) {
    double rho = INFINITY, sep = INFINITY;
    const GridFunction ef = op.apply(f);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      const double dk = p_->domain.d_set().dist(f.spec.cell_box(k));
      if (f.values[k] != 0.0) rho = std::min(rho, dk);
      if (ef.values[k] != 0.0) sep = std::min(sep, dk);
    }
    ASSERT_GE(rho, 4 * h - 1e-12);
    EXPECT_GT(sep, 0.0);
  }
}

TEST_F(MixedSquare, MismatchedInputsAreRejected) {
  const Pipeline other(fixture("small_square_bottom_d"), 8);
  const GridSpec spec = GridSpec::make(p_->domain.window(), 1.0 / 32);
  EXPECT_FRACSOB_ERROR(build_extension(spec, classify_cells(p_->domain, spec), p_->classes, other.map, *p_->pu),
                       InconsistentInputs);
}

TEST(Extension, ConstantOnHalfPlaneWhereAllPartnersAreInside) {
  const Pipeline p(fixture("half_plane"), 9);
  const double h = 1.0 / 16;
  const GridFunction one = sample_on_omega(p.domain, h, [](Vec2) { return 1.0; });
  const GridFunction e = extend(one, p.classes, p.map, *p.pu);
  const auto& gamma = p.classes.dec_gamma->cubes();
  const Box omega{{-2, 0}, {2, 2}};
  std::size_t checked = 0;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    if (e.mask[k] != CellMask::Exterior) continue;
    const auto terms = p.pu->evaluate(e.spec.center(k));
    if (terms.empty()) continue;
    bool all_inside = true;
    for (const auto& t : terms) {
      const int star = (p.classes.omega_flags[static_cast<std::size_t>(t.cube)] & kFlagWe) ? p.map.star(t.cube) : -1;
      if (star < 0) {
        all_inside = false;
        break;
      }
      const Box b = gamma[static_cast<std::size_t>(star)].box();
      all_inside = all_inside && b.lo.x >= omega.lo.x && b.lo.y >= omega.lo.y && b.hi.x <= omega.hi.x && b.hi.y <= omega.hi.y;
    }
    if (!all_inside) continue;
    EXPECT_NEAR(e.values[k], 1.0, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 1000u);
}

TEST(OmegaD, ZeroExtensionOfConstant) {
  const DomainModel d = fixture("square_bottom_d");
  const double h = 1.0 / 32;
  const GridFunction one = sample_on_omega(d, h, [](Vec2) { return 1.0; });
  const OmegaDSamples s = zero_extend_omega_d(one, d, 0.5);
  double mass = 0.0, weights = 0.0;
  for (std::size_t k = 0; k < s.omega.values.size(); ++k) {
    if (s.omega.interior(k)) EXPECT_EQ(s.omega.values[k], 1.0);
    mass += std::pow(std::abs(s.omega.values[k]), 2) * h * h;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
  for (const auto& w : s.wing) {
    weights += w.weight;
    EXPECT_DOUBLE_EQ(w.weight, s.wing.front().weight);
    EXPECT_LE(std::abs(w.z), 0.5);
  }
  EXPECT_NEAR(weights, 1.0 * 2 * 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(s.d_length, 1.0);
  EXPECT_FRACSOB_ERROR(zero_extend_omega_d(sample_on_omega(fixture("half_plane"), 0.25, [](Vec2) { return 1.0; }),
                                           fixture("half_plane"), 0.5),
                       EmptyD);
}

}  // namespace
}  // namespace fracsob
