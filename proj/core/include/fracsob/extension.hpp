#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fracsob/grid.hpp"
#include "fracsob/reflection.hpp"

namespace fracsob {

// c_n = 1 + 1/(16 sqrt(n)).
double overlap_constant();
// exp(1 - 1/(1 - t^2)) on [0, 1), 0 from t = 1 on.
double ramp(double t);
double ramp_derivative(double t);

struct PsiTerm {
  int cube = -1;
  double psi = 0.0;
  Vec2 grad;
};

// Plateau bumps phi_j (1 on (2 - c_n)Q_j, 0 off c_n Q_j) over every cube of the exterior
// decomposition, normalised pointwise: psi_j = phi_j / sum_k phi_k.
class PartitionOfUnity {
 public:
  PartitionOfUnity(std::shared_ptr<const WhitneyDecomposition> dec, std::uint64_t classes_fingerprint);

  const WhitneyDecomposition& decomposition() const { return *dec_; }
  double c_n() const { return c_n_; }
  std::uint64_t classes_fingerprint() const { return classes_fingerprint_; }

  double phi(int j, Vec2 x) const;
  Vec2 grad_phi(int j, Vec2 x) const;
  // Cubes whose enlarged cube may contain x, in ascending order.
  std::vector<int> candidates(Vec2 x) const;
  // psi_j(x) (and optionally its gradient) for every j with phi_j(x) > 0. Empty when x is uncovered.
  std::vector<PsiTerm> evaluate(Vec2 x, bool with_gradient = false) const;
  // Open box c_n Q_j.
  Box support(int j) const;

 private:
  std::shared_ptr<const WhitneyDecomposition> dec_;
  std::uint64_t classes_fingerprint_ = 0;
  double c_n_ = 0.0;
};

PartitionOfUnity build_partition(const CubeClasses& classes);

struct PartitionAudit {
  std::size_t exterior_cells = 0;
  std::size_t covered_cells = 0;
  std::size_t uncovered_cells = 0;  // exterior cells in the truncation collar
  double max_sum_error = 0.0;       // max |sum_j psi_j - 1| over covered cells
  std::size_t support_violations = 0;
};

// Checks the sum identity and the support inclusion at every exterior cell centre of the grid.
// Throws UncoveredExteriorCell if a cell inside an accepted cube has no positive bump.
PartitionAudit audit_partition(const PartitionOfUnity& pu, const GridSpec& spec, const std::vector<CellMask>& mask);

struct GradientConstant {
  double value = 0.0;  // max over samples of l(Q_j) |grad psi_j|
  int cube = -1;
  Vec2 where;
  std::size_t samples = 0;
};

// Measures l(Q_j) |grad psi_j| on lattices over the ramp strips of each listed cube; `refinement`
// multiplies the lattice density (use 2 for the h/2 run).
GradientConstant measure_gradient_constant(const PartitionOfUnity& pu, const std::vector<int>& cubes, int refinement);

// (1/|Q|) * integral of f over Q ∩ Omega, using the exact overlap area of each interior cell with Q.
double zero_extend_cube(const GridFunction& f, const Box& q);

// E_D as a fixed linear map on one grid: per-cube mean weights, then per-cell partition weights.
class ExtensionOperator {
 public:
  const GridSpec& spec() const { return spec_; }
  std::uint64_t classes_fingerprint() const { return classes_fingerprint_; }
  std::size_t unpaired_terms() const { return unpaired_terms_; }
  std::size_t uncovered_cells() const { return uncovered_cells_; }
  GridFunction apply(const GridFunction& f) const;

 private:
  friend ExtensionOperator build_extension(const GridSpec&, const std::vector<CellMask>&, const CubeClasses&,
                                           const ReflectionMap&, const PartitionOfUnity&);
  GridSpec spec_;
  std::vector<CellMask> mask_;
  std::uint64_t classes_fingerprint_ = 0;
  std::size_t unpaired_terms_ = 0;
  std::size_t uncovered_cells_ = 0;
  // Means: slot m averages cells mean_cell[mean_offset[m] .. mean_offset[m+1]).
  std::vector<std::size_t> mean_offset_;
  std::vector<std::size_t> mean_cell_;
  std::vector<double> mean_weight_;
  // Cell terms: cell k sums term_slot/term_psi over [term_offset[k], term_offset[k+1]).
  std::vector<std::size_t> term_offset_;
  std::vector<int> term_slot_;
  std::vector<double> term_psi_;
};

// Throws InconsistentInputs when map and pu come from different classifications.
ExtensionOperator build_extension(const GridSpec& spec, const std::vector<CellMask>& mask, const CubeClasses& classes,
                                  const ReflectionMap& map, const PartitionOfUnity& pu);
GridFunction extend(const GridFunction& f, const CubeClasses& classes, const ReflectionMap& map,
                    const PartitionOfUnity& pu);

// v_m(x) = 1, 2 - m dist(x, D) or 0 by the distance bands 1/m and 2/m. Throws EmptyD.
double cutoff_value(int m, double dist_to_d);
GridFunction cutoff_vm(int m, const DomainModel& domain, const GridSpec& spec);

struct WingPoint {
  Vec2 foot;  // point of D
  double z = 0.0;
  double weight = 0.0;
};

// Zero extension to (Omega x {0}) ∪ (D x R): the Omega slice keeps f, the wing carries 0.
struct OmegaDSamples {
  GridFunction omega;
  std::vector<WingPoint> wing;
  double wing_radius = 0.0;
  double d_length = 0.0;
};

// Wing lattice of D x [-R_w, R_w] with equal-length arclength pieces and equal height steps near h.
OmegaDSamples zero_extend_omega_d(const GridFunction& f, const DomainModel& domain, double wing_radius);

}  // namespace fracsob
