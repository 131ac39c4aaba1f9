#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "fracsob/reflection.hpp"
#include "support.hpp"

namespace fracsob {
namespace {

using test::fixture;

CubeClasses classes_for(const DomainModel& d, int depth) {
  std::shared_ptr<const WhitneyDecomposition> g;
  if (!d.gamma_set().empty())
    g = std::make_shared<const WhitneyDecomposition>(whitney_decompose(ClosedSet::gamma_closure(d), d.window(), depth));
  auto o = std::make_shared<const WhitneyDecomposition>(whitney_decompose(ClosedSet::omega_closure(d), d.window(), depth));
  return classify_cubes(g, o, d);
}

class HalfPlaneReflection : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    domain_ = new DomainModel(fixture("half_plane"));
    classes_ = new CubeClasses(classes_for(*domain_, 10));
    map_ = new ReflectionMap(build_reflection(*classes_));
  }
  static void TearDownTestSuite() {
    delete map_;
    delete classes_;
    delete domain_;
  }
  static DomainModel* domain_;
  static CubeClasses* classes_;
  static ReflectionMap* map_;
};
DomainModel* HalfPlaneReflection::domain_ = nullptr;
CubeClasses* HalfPlaneReflection::classes_ = nullptr;
ReflectionMap* HalfPlaneReflection::map_ = nullptr;

// Exhaustive nearest-comparable search over every interior cube.
TEST_F(HalfPlaneReflection, PartnersMatchExhaustiveSearch) {
  const auto& ext = classes_->dec_omega->cubes();
  const auto& in = classes_->dec_gamma->cubes();
  for (int q : classes_->w_e) {
    const DyadicCube& cq = ext[static_cast<std::size_t>(q)];
    int best = -1;
    double best_dist = INFINITY, best_log = INFINITY;
    for (int s : classes_->w_i) {
      const DyadicCube& cs = in[static_cast<std::size_t>(s)];
      const double ratio = cs.diam() / cq.diam();
      if (ratio < 1.0 / map_->size_band || ratio > map_->size_band) continue;
      const double dist = dist_box_box(cq.box(), cs.box());
      const double lg = std::abs(std::log(ratio));
      if (dist < best_dist || (dist == best_dist && lg < best_log)) {
        best = s;
        best_dist = dist;
        best_log = lg;
      }
    }
    ASSERT_EQ(map_->star(q), best) << "cube " << q;
  }
}

TEST_F(HalfPlaneReflection, DistanceConstantIsSmall) {
  EXPECT_TRUE(map_->unpaired.empty());
  EXPECT_GT(map_->diag.c_dist, 0.0);
  EXPECT_LE(map_->diag.c_dist, 6.0);
  EXPECT_LE(map_->diag.c_size, map_->size_band);
  EXPECT_TRUE(std::isfinite(map_->diag.c_neighbor));
}

TEST_F(HalfPlaneReflection, VerifyReproducesBuildConstants) {
  const ReflectionDiagnostics v = verify_reflection(*map_, *classes_, *domain_);
  EXPECT_NEAR(v.diag.c_size, map_->diag.c_size, 1e-12);
  EXPECT_NEAR(v.diag.c_dist, map_->diag.c_dist, 1e-12);
  EXPECT_NEAR(v.diag.c_neighbor, map_->diag.c_neighbor, 1e-12);
  EXPECT_EQ(v.diag.multiplicity, map_->diag.multiplicity);
  const std::size_t total = std::accumulate(v.multiplicity_histogram.begin(), v.multiplicity_histogram.end(), std::size_t{0});
  EXPECT_EQ(total, classes_->w_e.size());
  EXPECT_GT(v.long_distance_checks, 0u);
  EXPECT_TRUE(std::isfinite(v.long_distance_constant));
}

TEST_F(HalfPlaneReflection, RebuildIsIdentical) {
  const ReflectionMap again = build_reflection(*classes_);
  EXPECT_EQ(again.partner, map_->partner);
  EXPECT_EQ(reflection_csv(again, *classes_), reflection_csv(*map_, *classes_));
}

TEST(Reflection, EmptyExteriorClassGivesEmptyMap) {
  const DomainModel d = fixture("square_dirichlet");
  const CubeClasses c = classes_for(d, 8);
  const ReflectionMap m = build_reflection(c);
  EXPECT_TRUE(m.unpaired.empty());
  for (int p : m.partner) EXPECT_EQ(p, -1);
}

TEST(Reflection, MixedSquareIsFullyPaired) {
  const DomainModel d = fixture("square_bottom_d");
  const CubeClasses c = classes_for(d, 10);
  const ReflectionMap m = build_reflection(c);
  EXPECT_TRUE(m.unpaired.empty());
  const ReflectionDiagnostics v = verify_reflection(m, c, d);
  EXPECT_EQ(v.anchor_violations, 0u);
  EXPECT_GT(v.diag.multiplicity, 0);
}

}  // namespace
}  // namespace fracsob
