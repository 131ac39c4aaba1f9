#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fracsob/grid.hpp"

namespace fracsob {

struct Mat2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;
};

// Bounded symmetric coefficient field A(x). Shipped kinds: identity, diag(1, 4), and a
// checkerboard of 1 and 10 with period 1/4.
struct CoefficientField {
  std::string name = "identity";
  std::function<Mat2(Vec2)> at = [](Vec2) { return Mat2{}; };

  static CoefficientField identity();
  static CoefficientField anisotropic();
  static CoefficientField checkerboard();
  static CoefficientField by_name(const std::string& name);
};

enum class NodeTag : std::uint8_t { Free, DirichletFace, NeumannFace };

struct Face {
  int i = -1;
  int j = -1;  // -1 for a Dirichlet face on D
  double a = 0.0;
};

// a(u, v) = sum over faces of a_f (du)(dv) with h^2 area scaling; D faces use a ghost value -u_i at
// distance h/2, Gamma faces carry no term.
struct OperatorMatrix {
  GridSpec spec;
  int dimension = 0;
  std::vector<int> node_of_cell;  // -1 for cells outside Omega
  std::vector<std::size_t> cell_of_node;
  std::vector<NodeTag> tags;
  std::vector<Face> faces;
  Eigen::SparseMatrix<double> stiffness;  // K with a(u, u) = u^T K u
  double ellipticity = 0.0;
  std::string coefficient;

  // L = K / h^2, the operator in L^2(Omega) with cell weight h^2.
  Eigen::SparseMatrix<double> operator_l() const;
  Eigen::VectorXd to_nodes(const GridFunction& f) const;
  GridFunction to_grid(const Eigen::VectorXd& u, const std::vector<CellMask>& mask) const;
  // h^2 u^T v.
  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  // (sum_faces w_f |du/dx_f|^p)^{1/p}, the face-based gradient norm; for p = 2 equals sqrt(u^T K u) when A = I.
  double gradient_norm(const Eigen::VectorXd& u, double p) const;
};

// Throws EllipticityViolated, ResolutionTooCoarse, InvalidParameters (off-diagonal coefficients).
OperatorMatrix assemble_dirichlet_form(const DomainModel& domain, const CoefficientField& field, double h);

struct Spectrum {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns in the Euclidean inner product
  Eigen::VectorXd residuals;
  double operator_norm = 0.0;  // max |lambda|
  std::shared_ptr<const OperatorMatrix> op;
};

inline constexpr int kDenseBudget = 8192;

// Dense symmetric eigensolve of L. Throws DimensionBudgetExceeded.
Spectrum spectral_decompose(std::shared_ptr<const OperatorMatrix> op);
// Same routine for an explicit symmetric matrix.
Spectrum spectral_decompose_matrix(const Eigen::MatrixXd& m);

// V Lambda^order V^T f for order in (0, 1/2]; any order >= 0 is accepted.
Eigen::VectorXd fractional_power_apply(const Spectrum& spec, double order, const Eigen::VectorXd& f);
// e^{-tL} f.
Eigen::VectorXd heat_apply(const Spectrum& spec, double t, const Eigen::VectorXd& f);

struct GaussianFit {
  double c = 0.0;
  double b = 0.0;
  double w0 = 0.0;
  bool feasible = false;  // b > 0 and c <= kGaussianBudget
};
inline constexpr double kGaussianBudget = 100.0;

struct HeatKernelReport {
  std::vector<double> times;
  double min_relative = 0.0;  // min entry / max entry over all times
  double max_row_mass = 0.0;  // max_x sum_y p_t(x, y) h^2
  double min_row_mass = 0.0;
  bool symmetric = true;
  GaussianFit fit;
};

// p_t(x, y) = sum_k e^{-t lambda_k} v_k(x) v_k(y) / h^2, upper triangle computed and mirrored.
Eigen::MatrixXd heat_kernel(const Spectrum& spec, double t);
// Kernel diagnostics over several times plus a (c, b, w0) feasibility search for
// p_t <= c t^{-n/2} exp(w0 t - b |x - y|^2 / t).
HeatKernelReport heat_kernel_report(const Spectrum& spec, const std::vector<double>& times);

// Piecewise-constant forcing: forcing[i] acts on [i dt, (i+1) dt). Returns u at i dt, i = 0..steps.
std::vector<Eigen::VectorXd> mild_solution(const Spectrum& spec, const std::vector<Eigen::VectorXd>& forcing, double T);

struct MaxRegularity {
  double ratio = 0.0;
  double ut_norm = 0.0;
  double lu_norm = 0.0;
  double f_norm = 0.0;
};

// (||u_t|| + ||Lu||) / ||f|| in L^p(0, T; L^p(Omega)), sampled at the right end of each step with
// u_t = f - Lu. Throws ZeroForcing.
MaxRegularity max_regularity_ratio(const Spectrum& spec, const std::vector<Eigen::VectorXd>& forcing, double p, double T);

struct DomainCharacterization {
  std::vector<double> ratios;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;
  double budget = 400.0;
  bool pass = false;
};

// (||L^{s/2} f||_2 + ||f||_2) / (||f||_2 + [f]_{s,2} + ||f d_D^{-s}||_2) per member; for s = 1 the
// denominator uses the discrete W^{1,2} norm. Throws DegenerateFamilyMember.
DomainCharacterization domain_characterization_report(const Spectrum& spec, const std::vector<GridFunction>& family,
                                                      double s, const DomainModel& domain, double budget = 400.0);

// First `modes` eigenpairs as CSV rows: mode, eigenvalue, residual.
std::string spectrum_csv(const Spectrum& spec, int modes = 64);

}  // namespace fracsob
