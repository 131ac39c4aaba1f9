#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "fracsob/elliptic.hpp"
#include "fracsob/family.hpp"
#include "support.hpp"

namespace fracsob {
namespace {

using test::fixture;
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

std::shared_ptr<const Spectrum> spectrum_of(const DomainModel& d, double h,
                                            const CoefficientField& field = CoefficientField::identity()) {
  auto op = std::make_shared<const OperatorMatrix>(assemble_dirichlet_form(d, field, h));
  return std::make_shared<const Spectrum>(spectral_decompose(op));
}

TEST(Spectrum, DirichletSquareGroundState) {
  const auto s = spectrum_of(fixture("square_dirichlet"), 1.0 / 32);
  EXPECT_NEAR(s->values[0] / (2 * kPi2), 1.0, 0.01);
  EXPECT_NEAR(s->values[1] / (5 * kPi2), 1.0, 0.02);
  EXPECT_LT(s->residuals.maxCoeff(), 1e-8 * s->operator_norm);
}

// D on the bottom edge, Neumann on the others: pi^2 ((k + 1/2)^2 + m^2).
TEST(Spectrum, MixedSquareLowModes) {
  const auto s = spectrum_of(fixture("square_bottom_d"), 1.0 / 32);
  std::vector<double> exact;
  for (int k = 0; k < 5; ++k)
    for (int m = 0; m < 5; ++m) exact.push_back(kPi2 * ((k + 0.5) * (k + 0.5) + m * m));
  std::sort(exact.begin(), exact.end());
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s->values[i] / exact[static_cast<size_t>(i)], 1.0, 0.02) << i;
}

TEST(Spectrum, ExplicitMatrix) {
  const Spectrum id = spectral_decompose_matrix(Eigen::MatrixXd::Identity(5, 5));
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(id.values[i], 1.0, 1e-14);
  Eigen::MatrixXd m(3, 3);
  m << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  const Spectrum s = spectral_decompose_matrix(m);
  EXPECT_NEAR(s.values[0], 2 - std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.values[2], 2 + std::sqrt(2.0), 1e-12);
  EXPECT_LT((s.vectors * s.values.asDiagonal() * s.vectors.transpose() - m).norm(), 1e-12);
}

class MixedSquareOperator : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    domain_ = new DomainModel(fixture("square_bottom_d"));
    spectrum_ = spectrum_of(*domain_, 1.0 / 16);
  }
  static void TearDownTestSuite() {
    spectrum_.reset();
    delete domain_;
  }
  static Eigen::VectorXd smooth() {
    const auto& op = *spectrum_->op;
    Eigen::VectorXd u(op.dimension);
    for (int v = 0; v < op.dimension; ++v) {
      const Vec2 c = op.spec.center(op.cell_of_node[static_cast<size_t>(v)]);
      u[v] = std::sin(c.x * 3.0) + c.y * c.y;
    }
    return u;
  }
  static DomainModel* domain_;
  static std::shared_ptr<const Spectrum> spectrum_;
};
DomainModel* MixedSquareOperator::domain_ = nullptr;
std::shared_ptr<const Spectrum> MixedSquareOperator::spectrum_;

TEST_F(MixedSquareOperator, ReconstructsOperatorAndRayleighQuotients) {
  const auto& op = *spectrum_->op;
  const Eigen::MatrixXd l(op.operator_l());
  const auto& v = spectrum_->vectors;
  EXPECT_LT((v * spectrum_->values.asDiagonal() * v.transpose() - l).norm(), 1e-9 * spectrum_->operator_norm);
  EXPECT_LT((v.transpose() * v - Eigen::MatrixXd::Identity(op.dimension, op.dimension)).norm(), 1e-10);
  for (int k : {0, 7, 50}) {
    const Eigen::VectorXd x = v.col(k);
    EXPECT_NEAR(x.dot(l * x), spectrum_->values[k], 1e-9 * spectrum_->operator_norm);
  }
  EXPECT_GT(spectrum_->values[0], 0.0);
  EXPECT_TRUE(std::is_sorted(spectrum_->values.begin(), spectrum_->values.end()));
}

TEST_F(MixedSquareOperator, FractionalPowersComposeAndMatchTheForm) {
  const auto& op = *spectrum_->op;
  const Eigen::VectorXd u = smooth();
  const Eigen::VectorXd a = fractional_power_apply(*spectrum_, 0.25, fractional_power_apply(*spectrum_, 0.25, u));
  EXPECT_LT((a - fractional_power_apply(*spectrum_, 0.5, u)).norm(), 1e-9 * u.norm() * std::sqrt(spectrum_->operator_norm));
  EXPECT_LT((fractional_power_apply(*spectrum_, 0.0, u) - u).norm(), 1e-12 * u.norm());
  const Eigen::VectorXd half = fractional_power_apply(*spectrum_, 0.5, u);
  const Eigen::SparseMatrix<double> k = op.stiffness;
  EXPECT_NEAR(op.inner(half, half), u.dot(k * u), 1e-9 * u.dot(k * u));
  EXPECT_FRACSOB_ERROR(fractional_power_apply(*spectrum_, -0.1, u), InvalidParameters);
}

TEST_F(MixedSquareOperator, HeatSemigroupProperty) {
  const Eigen::VectorXd u = smooth();
  const Eigen::VectorXd a = heat_apply(*spectrum_, 0.01, heat_apply(*spectrum_, 0.02, u));
  EXPECT_LT((a - heat_apply(*spectrum_, 0.03, u)).norm(), 1e-12 * u.norm());
  // Mass leaks through D, so the L1 mass of a positive start decreases.
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(spectrum_->op->dimension);
  EXPECT_LT(heat_apply(*spectrum_, 0.05, one).sum(), one.sum());
}

TEST_F(MixedSquareOperator, HeatKernelIsSymmetricAndPositive) {
  const Eigen::MatrixXd p = heat_kernel(*spectrum_, 0.02);
  EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12 * p.cwiseAbs().maxCoeff());
  EXPECT_GT(p.minCoeff(), 0.0);
  const double h2 = std::pow(spectrum_->op->spec.h, 2);
  EXPECT_LE((p.rowwise().sum() * h2).maxCoeff(), 1.0 + 1e-9);
  const HeatKernelReport r = heat_kernel_report(*spectrum_, {0.01, 0.05});
  EXPECT_TRUE(r.symmetric);
  EXPECT_GT(r.min_relative, 0.0);
  EXPECT_LE(r.max_row_mass, 1.0 + 1e-9);
  EXPECT_FRACSOB_ERROR(heat_kernel(*spectrum_, 0.0), InvalidParameters);
}

// Constant forcing along an eigenvector: u(t) = (1 - exp(-nu t)) / nu v.
TEST_F(MixedSquareOperator, MildSolutionOfEigenmodeForcing) {
  const int k = 4;
  const double nu = spectrum_->values[k], T = 0.2;
  const int steps = 10;
  const Eigen::VectorXd v = spectrum_->vectors.col(k);
  const std::vector<Eigen::VectorXd> forcing(steps, v);
  const auto traj = mild_solution(*spectrum_, forcing, T);
  ASSERT_EQ(traj.size(), static_cast<size_t>(steps + 1));
  EXPECT_EQ(traj[0].norm(), 0.0);
  for (int i = 1; i <= steps; ++i) {
    const double t = T * i / steps;
    EXPECT_LT((traj[static_cast<size_t>(i)] - v * (-std::expm1(-nu * t) / nu)).norm(), 1e-12) << i;
  }
  EXPECT_FRACSOB_ERROR(mild_solution(*spectrum_, {}, T), InvalidParameters);
}

TEST_F(MixedSquareOperator, MaximalRegularityEigenmodeOracle) {
  const int k = 2, steps = 20;
  const double nu = spectrum_->values[k], T = 0.5, p = 3.0;
  const std::vector<Eigen::VectorXd> forcing(steps, spectrum_->vectors.col(k));
  double ut = 0.0, lu = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double e = std::exp(-nu * T * i / steps);
    ut += std::pow(e, p);
    lu += std::pow(1.0 - e, p);
  }
  const double expected = (std::pow(ut, 1.0 / p) + std::pow(lu, 1.0 / p)) / std::pow(steps, 1.0 / p);
  const MaxRegularity r = max_regularity_ratio(*spectrum_, forcing, p, T);
  EXPECT_NEAR(r.ratio, expected, 1e-10);

  std::vector<Eigen::VectorXd> scaled = forcing;
  for (auto& f : scaled) f *= -3.0;
  EXPECT_NEAR(max_regularity_ratio(*spectrum_, scaled, p, T).ratio, r.ratio, 1e-12);
  const std::vector<Eigen::VectorXd> zero(steps, Eigen::VectorXd::Zero(spectrum_->op->dimension));
  EXPECT_FRACSOB_ERROR(max_regularity_ratio(*spectrum_, zero, p, T), ZeroForcing);
}

TEST_F(MixedSquareOperator, DomainCharacterizationIsFinite) {
  const auto family = generate_family(FamilyKind::Bumps, 5, 3, *domain_, 1.0 / 16);
  for (double s : {0.4, 1.0}) {
    const DomainCharacterization r = domain_characterization_report(*spectrum_, family, s, *domain_);
    ASSERT_EQ(r.ratios.size(), 5u);
    for (double v : r.ratios) EXPECT_TRUE(std::isfinite(v) && v > 0.0);
    EXPECT_EQ(r.pass, r.spread <= r.budget);
  }
  EXPECT_FRACSOB_ERROR(domain_characterization_report(*spectrum_, family, 1.5, *domain_), InvalidParameters);
}

TEST(NeumannSquare, ConstantsAreInTheKernelAndMassIsConserved) {
  const auto s = spectrum_of(test::neumann_square(), 1.0 / 16);
  const auto& op = *s->op;
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(op.dimension);
  EXPECT_LT((op.operator_l() * one).norm(), 1e-10);
  EXPECT_NEAR(s->values[0], 0.0, 1e-9);
  Eigen::VectorXd u(op.dimension);
  for (int v = 0; v < op.dimension; ++v) u[v] = op.spec.center(op.cell_of_node[static_cast<size_t>(v)]).x;
  EXPECT_NEAR(heat_apply(*s, 0.1, u).sum(), u.sum(), 1e-9 * u.sum());
}

TEST(Assembly, CoefficientFieldsAndErrors) {
  const DomainModel d = fixture("square_bottom_d");
  const OperatorMatrix a = assemble_dirichlet_form(d, CoefficientField::anisotropic(), 1.0 / 16);
  EXPECT_DOUBLE_EQ(a.ellipticity, 1.0);
  EXPECT_EQ(a.dimension, 256);
  const OperatorMatrix c = assemble_dirichlet_form(d, CoefficientField::by_name("checkerboard"), 1.0 / 16);
  EXPECT_DOUBLE_EQ(c.ellipticity, 1.0);
  const Eigen::SparseMatrix<double> diff = c.stiffness - Eigen::SparseMatrix<double>(c.stiffness.transpose());
  EXPECT_EQ(diff.norm(), 0.0);

  EXPECT_FRACSOB_ERROR(assemble_dirichlet_form(d, {"shear", [](Vec2) { return Mat2{1.0, 0.2, 1.0}; }}, 1.0 / 16),
                       InvalidParameters);
  EXPECT_FRACSOB_ERROR(assemble_dirichlet_form(d, {"negative", [](Vec2) { return Mat2{-1.0, 0.0, 1.0}; }}, 1.0 / 16),
                       EllipticityViolated);
  EXPECT_FRACSOB_ERROR(assemble_dirichlet_form(d, CoefficientField::identity(), 0.5), ResolutionTooCoarse);
  EXPECT_FRACSOB_ERROR(CoefficientField::by_name("marble"), ConfigError);
  auto big = std::make_shared<const OperatorMatrix>(assemble_dirichlet_form(d, CoefficientField::identity(), 1.0 / 128));
  EXPECT_EQ(big->dimension, 128 * 128);
  EXPECT_FRACSOB_ERROR(spectral_decompose(big), DimensionBudgetExceeded);
}

}  // namespace
}  // namespace fracsob
