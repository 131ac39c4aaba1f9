#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracsob/geometry.hpp"
#include "fracsob/metric.hpp"
#include "support.hpp"

namespace fracsob {
namespace {

using test::fixture;

// Length of the axis-parallel segment {y = y0, a <= x <= b} inside B(c, r), by direct chord formula.
double horizontal_chord(double a, double b, double y0, Vec2 c, double r) {
  const double dy = y0 - c.y;
  if (std::abs(dy) >= r) return 0.0;
  const double half = std::sqrt(r * r - dy * dy);
  return std::max(0.0, std::min(b, c.x + half) - std::max(a, c.x - half));
}

double unit_square_boundary_in_disk(Vec2 c, double r) {
  const Vec2 mirrored{c.y, c.x};
  return horizontal_chord(0, 1, 0, c, r) + horizontal_chord(0, 1, 1, c, r) + horizontal_chord(0, 1, 0, mirrored, r) +
         horizontal_chord(0, 1, 1, mirrored, r);
}

TEST(Geometry, LoadsSquareWithBottomEdgeAsD) {
  const DomainModel d = fixture("square_bottom_d");
  EXPECT_EQ(d.rings().size(), 1u);
  EXPECT_DOUBLE_EQ(d.d_set().total_length(), 1.0);
  EXPECT_DOUBLE_EQ(d.gamma_set().total_length(), 3.0);
  EXPECT_DOUBLE_EQ(d.area(), 1.0);
}

TEST(Geometry, DirichletEverywhereLeavesGammaEmpty) {
  const DomainModel d = fixture("square_dirichlet");
  EXPECT_TRUE(d.gamma_set().empty());
  EXPECT_DOUBLE_EQ(d.d_set().total_length(), 4.0);
}

TEST(Geometry, SelfCrossingRingIsRejected) {
  EXPECT_FRACSOB_ERROR(load_domain(R"({"name": "bowtie", "rings": [[[0,0],[1,1],[1,0],[0,1]]], "d_arcs": [],
    "gamma_arcs": [[[0,0],[1,1],[1,0],[0,1],[0,0]]], "window": [-2,-2,3,3]})"),
                       InvalidGeometry);
}

TEST(Geometry, MalformedJsonIsRejected) {
  EXPECT_FRACSOB_ERROR(load_domain("{\"name\": "), MalformedSpec);
  EXPECT_FRACSOB_ERROR(load_domain(R"({"name": "x", "rings": []})"), MalformedSpec);
}

TEST(Geometry, NonSquareWindowIsRejected) {
  EXPECT_FRACSOB_ERROR(load_domain(R"({"name": "w", "rings": [[[0,0],[1,0],[1,1],[0,1]]], "d_arcs": [],
    "gamma_arcs": [[[0,0],[1,0],[1,1],[0,1],[0,0]]], "window": [-1,-1,2,3]})"),
                       InvalidGeometry);
}

TEST(Geometry, DistanceToBottomEdge) {
  const DomainModel d = fixture("square_bottom_d");
  EXPECT_NEAR(d.dist_to({0.5, 0.3}, DistTarget::D), 0.3, 1e-15);
  EXPECT_NEAR(d.dist_to({0.5, 0.3}, DistTarget::Gamma), 0.5, 1e-15);
}

TEST(Geometry, DistanceToEmptyDIsInfinite) {
  const DomainModel d = fixture("half_plane");
  EXPECT_TRUE(std::isinf(d.dist_to({0.0, 1.0}, DistTarget::D)));
}

TEST(Geometry, DistanceToTwoEdges) {
  const DomainModel d = load_domain(R"({"name": "two-edges", "rings": [[[0,0],[1,0],[1,1],[0,1]]],
    "d_arcs": [[[0,1],[0,0],[1,0]]], "gamma_arcs": [[[1,0],[1,1],[0,1]]], "window": [-1,-1,2,2]})");
  EXPECT_NEAR(d.dist_to({0.5, 0.5}, DistTarget::D), 0.5, 1e-15);
  EXPECT_NEAR(d.dist_to({0.2, 0.7}, DistTarget::D), 0.2, 1e-15);
}

TEST(Geometry, SegmentIsOneSetWithUpperConstantTwo) {
  const SegmentSet seg({Segment{{0, 0}, {1, 0}}});
  const RegularityReport rep = check_d_set_polylines(seg, {0.25}, 64);
  EXPECT_NEAR(rep.c_upper, 2.0, 1e-12);
  EXPECT_TRUE(rep.pass);
  for (const auto& s : rep.samples) EXPECT_NEAR(s.value * s.radius, horizontal_chord(0, 1, 0, s.center, s.radius), 1e-12);
}

TEST(Geometry, SquareBoundaryIsOneSet) {
  const DomainModel d = fixture("square_dirichlet");
  const std::vector<double> radii{1.0, 0.5, 0.25, 0.125, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  const RegularityReport rep = check_d_set(d, SetId::D, 1, radii, 40, 4.0);
  EXPECT_TRUE(rep.pass);
  ASSERT_EQ(rep.samples.size(), 40u * radii.size());
  for (const auto& s : rep.samples)
    EXPECT_NEAR(s.value * s.radius, unit_square_boundary_in_disk(s.center, s.radius), 1e-12);
}

TEST(Geometry, InteriorDiskAreaRatioIsPi) {
  const DomainModel d = fixture("square_bottom_d");
  EXPECT_NEAR(d.area_in_disk({0.5, 0.5}, 0.1) / 0.01, std::numbers::pi, 1e-12);
}

TEST(Geometry, OmegaIsTwoSet) {
  const DomainModel d = fixture("lshape");
  const RegularityReport rep = check_d_set(d, SetId::Omega, 2, {0.5, 0.25, 0.125}, 64, 4.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.c_upper, std::numbers::pi + 1e-12);
}

TEST(Geometry, DSetRejectsWrongDimension) {
  const DomainModel d = fixture("square_bottom_d");
  EXPECT_FRACSOB_ERROR(check_d_set(d, SetId::D, 2, {0.5}, 8), InvalidParameters);
  EXPECT_FRACSOB_ERROR(check_d_set(fixture("half_plane"), SetId::D, 1, {0.5}, 8), EmptySet);
}

TEST(Geometry, ThicknessOnEdgeCornerAndSlit) {
  EXPECT_NEAR(thickness_ratio(fixture("half_plane"), {0.0, 0.0}, 0.5), 0.5, 1e-12);
  EXPECT_NEAR(thickness_ratio(fixture("square_bottom_d"), {0.0, 0.0}, 0.25), 0.25, 1e-12);
  const DomainModel slit = fixture("slit_square");
  const ThicknessReport rep = interior_thickness(slit, {0.25, 0.125}, 64);
  EXPECT_GT(rep.min_ratio, 0.0);
  EXPECT_LE(rep.min_ratio, 0.5);
}

TEST(Geometry, ThicknessNeedsGamma) {
  EXPECT_FRACSOB_ERROR(interior_thickness(fixture("square_dirichlet"), {0.25}, 8), EmptyGamma);
}

class UpperHalfPlane : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const Box window{{-8, -8}, {8, 8}};
    ClosedSet line("axis", SegmentSet({Segment{{-8, 0}, {8, 0}}}));
    auto dec = std::make_shared<const WhitneyDecomposition>(whitney_decompose(line, window, 11));
    graph_ = new QuasihyperbolicGraph(dec, line);
  }
  static void TearDownTestSuite() {
    delete graph_;
    graph_ = nullptr;
  }
  static QuasihyperbolicGraph* graph_;
};
QuasihyperbolicGraph* UpperHalfPlane::graph_ = nullptr;

// In the upper half-plane k((0,a), (0,b)) = |log(b/a)|. The centre graph zig-zags through cubes
// of side dist/2 near this geodesic and overshoots by about 23%.
TEST_F(UpperHalfPlane, VerticalDistanceIsLogRatio) {
  const double k = quasihyperbolic_distance({0, 1}, {0, std::exp(1.0)}, *graph_);
  EXPECT_GE(k, 1.0);
  EXPECT_LE(k, 1.25);
}

TEST_F(UpperHalfPlane, TriangleInequalityOnSampledTriples) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({-3.0 + 0.5 * i, 0.05 + 0.3 * ((i * 7) % 11)});
  const std::size_t n = pts.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i * n + j] = quasihyperbolic_distance(pts[i], pts[j], *graph_);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) EXPECT_LE(k[a * n + c], k[a * n + b] + k[b * n + c] + 1e-12);
}

TEST_F(UpperHalfPlane, SymmetricAndZeroOnDiagonal) {
  const Vec2 x{0.3, 0.7}, y{-1.1, 2.5};
  EXPECT_EQ(quasihyperbolic_distance(x, y, *graph_), quasihyperbolic_distance(y, x, *graph_));
  EXPECT_EQ(quasihyperbolic_distance(x, x, *graph_), 0.0);
}

TEST_F(UpperHalfPlane, PointsOnTheSetAreUnreachable) {
  EXPECT_FRACSOB_ERROR(quasihyperbolic_distance({0, 0}, {0, 1}, *graph_), UnreachablePoints);
}

TEST(Cigar, SquareWithoutGammaPassesEveryPair) {
  const DomainModel d = fixture("square_dirichlet");
  const CigarReport rep = check_cigar(d, {{{0.2, 0.2}, {0.4, 0.3}}, {{0.1, 0.9}, {0.3, 0.7}}}, 0.5, 12.0, 8);
  for (const auto& pr : rep.pairs) {
    EXPECT_EQ(pr.status, CigarStatus::Pass);
    EXPECT_NEAR(pr.best_eps, 1.0, 1e-12);
  }
}

TEST(Cigar, SegmentHuggingTheBoundaryScoresPoorly) {
  const DomainModel d = fixture("half_plane");
  const Vec2 x{-0.5, 0.01}, y{0.5, 0.01};
  const CurveScore straight = score_curve({x, y}, d.gamma_set());
  ASSERT_TRUE(straight.valid);
  EXPECT_LT(straight.eps_cigar, 0.05);
  const CurveScore arc = score_curve(circular_arc(x, y, 0.4), d.gamma_set());
  EXPECT_GT(arc.eps, 10 * straight.eps);
}

TEST(Cigar, RejectsPairsOutsideTheDomain) {
  const DomainModel d = fixture("square_bottom_d");
  EXPECT_FRACSOB_ERROR(check_cigar(d, {{{0.9, 0.5}, {1.1, 0.5}}}, 0.5, 12.0, 6), PairOutsideDomain);
}

}  // namespace
}  // namespace fracsob
