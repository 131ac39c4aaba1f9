#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fracsob/family.hpp"
#include "fracsob/interpolation.hpp"
#include "support.hpp"

namespace fracsob {
namespace {

using test::fixture;

class MixedSquareK : public ::testing::Test {
 protected:
  static constexpr double kH = 1.0 / 16;

  static void SetUpTestSuite() {
    domain_ = new DomainModel(fixture("square_bottom_d"));
    auto op = std::make_shared<const OperatorMatrix>(assemble_dirichlet_form(*domain_, CoefficientField::identity(), kH));
    spectrum_ = std::make_shared<const Spectrum>(spectral_decompose(op));
    solver_ = new KSolver(spectrum_);
    mask_ = classify_cells(*domain_, op->spec);
  }
  static void TearDownTestSuite() {
    delete solver_;
    spectrum_.reset();
    delete domain_;
  }

  static GridFunction mode(int k) { return spectrum_->op->to_grid(spectrum_->vectors.col(k), mask_); }
  static GridFunction bump() {
    return sample_on_omega(*domain_, kH, [](Vec2 x) {
      const double r2 = (x.x - 0.5) * (x.x - 0.5) + (x.y - 0.45) * (x.y - 0.45);
      return r2 < 0.09 ? std::exp(1.0 - 1.0 / (1.0 - r2 / 0.09)) : 0.0;
    });
  }

  // K restricted to the resolvent path g = (I + lambda L)^{-1} f, minimised over log lambda by golden section.
  static double resolvent_path_k(const GridFunction& f, double t) {
    const auto& op = *spectrum_->op;
    const Eigen::VectorXd c = spectrum_->vectors.transpose() * op.to_nodes(f);
    const auto cost = [&](double log_lambda) {
      const double lambda = std::exp(log_lambda);
      double rest = 0.0, g2 = 0.0, grad2 = 0.0;
      for (Eigen::Index k = 0; k < c.size(); ++k) {
        const double nu = std::max(spectrum_->values[k], 0.0);
        const double gk = c[k] / (1.0 + lambda * nu);
        rest += (c[k] - gk) * (c[k] - gk);
        g2 += gk * gk;
        grad2 += nu * gk * gk;
      }
      return kH * (std::sqrt(rest) + t * (std::sqrt(g2) + std::sqrt(grad2)));
    };
    double a = -20.0, b = 20.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a), f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 200; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - r * (b - a);
        f1 = cost(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + r * (b - a);
        f2 = cost(x2);
      }
    }
    return std::min({cost(0.5 * (a + b)), cost(-40.0), cost(40.0)});
  }

  static DomainModel* domain_;
  static std::shared_ptr<const Spectrum> spectrum_;
  static KSolver* solver_;
  static std::vector<CellMask> mask_;
};
DomainModel* MixedSquareK::domain_ = nullptr;
std::shared_ptr<const Spectrum> MixedSquareK::spectrum_;
KSolver* MixedSquareK::solver_ = nullptr;
std::vector<CellMask> MixedSquareK::mask_;

// For an eigenmode with eigenvalue nu, K(t) = ||f|| min(1, t (1 + sqrt(nu))).
TEST_F(MixedSquareK, EigenmodeMatchesClosedForm) {
  for (int k : {0, 3, 10}) {
    const GridFunction f = mode(k);
    const double nu = spectrum_->values[k];
    const double norm = kH;  // unit Euclidean vector, cell weight h^2
    for (double t : {0.01, 0.1, 1.0 / (1.0 + std::sqrt(nu)), 1.0, 4.0}) {
      const double expected = norm * std::min(1.0, t * (1.0 + std::sqrt(nu)));
      EXPECT_NEAR(solver_->k_functional(f, t, 2.0), expected, 1e-6 * norm) << "mode " << k << " t " << t;
    }
  }
}

TEST_F(MixedSquareK, NotWorseThanResolventPath) {
  const GridFunction f = bump();
  for (double t : {0.003, 0.03, 0.1, 0.3}) {
    const double oracle = resolvent_path_k(f, t);
    EXPECT_LE(solver_->k_functional(f, t, 2.0), oracle * (1 + 1e-3)) << t;
  }
}

TEST_F(MixedSquareK, ProfileRespectsTrivialBoundsAndShape) {
  const KProfile pr = solver_->profile(bump(), 2.0, 8, "bump");
  ASSERT_EQ(pr.t_grid.size(), 17u);
  for (size_t j = 0; j < pr.t_grid.size(); ++j) {
    EXPECT_DOUBLE_EQ(pr.t_grid[j], std::ldexp(1.0, static_cast<int>(j) - 8));
    EXPECT_LE(pr.k_values[j], pr.f_norm * (1 + 1e-12));
    EXPECT_LE(pr.k_values[j], pr.t_grid[j] * pr.f_norm1 * (1 + 1e-12));
    EXPECT_GT(pr.k_values[j], 0.0);
    if (j == 0) continue;
    EXPECT_GE(pr.k_values[j], pr.k_values[j - 1]);
    EXPECT_LE(pr.k_values[j] / pr.t_grid[j], pr.k_values[j - 1] / pr.t_grid[j - 1] * (1 + 1e-12));
  }
}

TEST_F(MixedSquareK, HomogeneousAndSubadditive) {
  const GridFunction f = bump();
  GridFunction twice = f, g = mode(2), sum = f;
  for (double& v : twice.values) v *= 2.0;
  for (size_t k = 0; k < sum.values.size(); ++k) sum.values[k] += g.values[k];
  for (double t : {0.01, 0.1, 1.0}) {
    const double kf = solver_->k_functional(f, t, 2.0);
    EXPECT_NEAR(solver_->k_functional(twice, t, 2.0), 2.0 * kf, 1e-9 * kf);
    EXPECT_LE(solver_->k_functional(sum, t, 2.0), (kf + solver_->k_functional(g, t, 2.0)) * 1.01);
  }
}

TEST_F(MixedSquareK, GeneralExponentIsHomogeneous) {
  const GridFunction f = bump();
  GridFunction twice = f;
  for (double& v : twice.values) v *= 2.0;
  const double kf = solver_->k_functional(f, 0.05, 3.0);
  EXPECT_GT(kf, 0.0);
  EXPECT_NEAR(solver_->k_functional(twice, 0.05, 3.0), 2.0 * kf, 1e-3 * kf);
  EXPECT_LE(kf, solver_->norm_p(spectrum_->op->to_nodes(f), 3.0) * (1 + 1e-9));
}

TEST_F(MixedSquareK, RejectsBadArguments) {
  EXPECT_FRACSOB_ERROR(solver_->k_functional(bump(), 0.0, 2.0), InvalidParameters);
  EXPECT_FRACSOB_ERROR(equivalence_report({make_grid(*domain_, kH)}, 0.3, 2.0, *domain_, *solver_, 4),
                       DegenerateFamilyMember);
}

TEST_F(MixedSquareK, EquivalenceRatiosAreFinite) {
  const auto family = generate_family(FamilyKind::Bumps, 4, 7, *domain_, kH);
  const EquivalenceReport r = equivalence_report(family, 0.4, 2.0, *domain_, *solver_, 6);
  ASSERT_EQ(r.ratios.size(), 4u);
  for (double v : r.ratios) EXPECT_TRUE(std::isfinite(v) && v > 0.0);
  EXPECT_DOUBLE_EQ(r.spread, r.max_ratio / r.min_ratio);
  EXPECT_EQ(r.pass, r.spread <= r.budget);
}

TEST(InterpolationNorm, DyadicSumFromProfile) {
  KProfile pr;
  pr.f_norm = 0.7;
  for (int j = -3; j <= 3; ++j) {
    const double t = std::ldexp(1.0, j);
    pr.t_grid.push_back(t);
    pr.k_values.push_back(std::min(pr.f_norm, 2.0 * t));
  }
  const double s = 0.4, p = 2.5;
  double sum = 0.0;
  for (int j = -3; j <= 3; ++j) {
    const double t = std::ldexp(1.0, j);
    sum += std::pow(std::pow(t, -s) * std::min(0.7, 2.0 * t), p) * std::log(2.0);
  }
  EXPECT_NEAR(interpolation_norm_from_profile(pr, s, p), std::pow(sum, 1.0 / p) + 0.7, 1e-12);
}

}  // namespace
}  // namespace fracsob
