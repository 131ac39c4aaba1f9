#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracsob/elliptic.hpp"

namespace fracsob {

// Competitor space: grid functions on Omega nodes, with the vanishing condition on D imposed
// through the ghost faces of the identity-coefficient Dirichlet form.
//   ||g||_{1,p} = ||g||_p + ||grad g||_p
//   K(t, f)     = inf_g ||f - g||_p + t ||g||_{1,p}
struct KProfile {
  std::string f_id;
  std::vector<double> t_grid;
  std::vector<double> k_values;
  std::vector<double> solver_residuals;
  double f_norm = 0.0;   // ||f||_p
  double f_norm1 = 0.0;  // ||f||_{1,p}
};

struct KSolverOptions {
  int grid_points = 41;       // per axis of the (alpha, beta) scan used for p = 2
  double smoothing = 1e-8;    // for p != 2
  double tolerance = 1e-6;    // relative, for p != 2
  int max_iterations = 4000;  // for p != 2
};

class KSolver {
 public:
  // The spectrum must come from assemble_dirichlet_form with the identity field.
  explicit KSolver(std::shared_ptr<const Spectrum> spectrum, KSolverOptions options = {});

  const OperatorMatrix& op() const { return *spectrum_->op; }
  const KSolverOptions& options() const { return options_; }

  // One t. Throws InvalidParameters, SolverDiverged.
  double k_functional(const GridFunction& f, double t, double p) const;
  // Dyadic grid 2^-J .. 2^J. Every candidate found at any t is pooled and K is their lower
  // envelope, so the profile is concave and nondecreasing by construction.
  KProfile profile(const GridFunction& f, double p, int J, const std::string& f_id = {}) const;

  double norm_p(const Eigen::VectorXd& u, double p) const;
  double norm_1p(const Eigen::VectorXd& u, double p) const;

 private:
  struct Candidate {
    double a = 0.0;  // ||f - g||_p
    double b = 0.0;  // ||g||_{1,p}
  };
  std::vector<Candidate> spectral_candidates(const Eigen::VectorXd& c, const std::vector<double>& ts,
                                             std::vector<double>* residuals,
                                             std::vector<Eigen::VectorXd>* best) const;
  Candidate general_candidate(const Eigen::VectorXd& u, const Eigen::VectorXd& start, double t, double p,
                              double* residual) const;

  std::shared_ptr<const Spectrum> spectrum_;
  KSolverOptions options_;
};

double k_functional(const GridFunction& f, double t, double p, const KSolver& solver);

struct InterpolationNorm {
  double value = 0.0;  // dyadic sum plus ||f||_p
  double tail_estimate = 0.0;  // envelope bound for the omitted |j| > J terms, in the p-th root scale
  KProfile profile;
};

// (sum_{|j| <= J} (t_j^{-s} K(t_j, f))^p ln 2)^{1/p} + ||f||_p with t_j = 2^j.
double interpolation_norm_from_profile(const KProfile& profile, double s, double p);
InterpolationNorm interpolation_norm(const GridFunction& f, double s, double p, int J, const KSolver& solver);

struct EquivalenceReport {
  double s = 0.0;
  double p = 0.0;
  std::vector<double> ratios;
  std::vector<double> interpolation;
  std::vector<double> weighted;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;
  double budget = 400.0;
  bool pass = false;
};

// Ratio interpolation norm / (||f||_p + [f]_{s,p} + ||f d_D^{-s}||_p) per member. Throws DegenerateFamilyMember.
EquivalenceReport equivalence_report(const std::vector<GridFunction>& family, double s, double p,
                                     const DomainModel& domain, const KSolver& solver, int J = 12,
                                     double budget = 400.0);

std::string profile_csv(const std::vector<KProfile>& profiles);
std::string equivalence_csv(const EquivalenceReport& report);

}  // namespace fracsob
