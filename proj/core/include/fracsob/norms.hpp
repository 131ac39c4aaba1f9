#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracsob/extension.hpp"
#include "fracsob/grid.hpp"

namespace fracsob {

enum class Region { Omega, Window };

struct NormParams {
  double s = 0.5;
  double p = 2.0;
  Region region = Region::Omega;
  // |sp - 1| < 0.05.
  bool critical() const { return std::abs(s * p - 1.0) < 0.05; }
};

struct NormReport {
  std::string op;
  double s = 0.0;
  double p = 0.0;
  double value = 0.0;
  double diagonal_band_excluded = 0.0;  // estimated share of pair mass in |x - y| < h
  double band_exponent = 0.0;           // the excluded mass scales like h^band_exponent
  double resolution = 0.0;
  double estimated_bias = std::numeric_limits<double>::quiet_NaN();  // relative h vs h/2 change
  bool critical = false;
};

// Fills estimated_bias of `coarse` from the same norm at half the cell side.
void attach_bias(NormReport& coarse, const NormReport& fine);

struct DistanceWeight {
  const DomainModel* domain = nullptr;
  double s = 0.0;  // weight dist(x, D)^(-s p)
};

// (sum |f|^p w h^2)^(1/p); with a weight and D empty the value is 0. Throws NonpositiveP.
NormReport lp_norm(const GridFunction& f, double p, Region region = Region::Omega,
                   std::optional<DistanceWeight> weight = std::nullopt);

// Per-cell dist(., D)^(-sp), averaged over a 4x4 sub-lattice for cells with centre closer than h/2.
std::vector<double> distance_weights(const GridSpec& spec, const DomainModel& domain, double sp);

struct SeminormRequest {
  double s = 0.5;
  double p = 2.0;
};

// Gagliardo seminorms for several (s, p) from one sweep over cell offsets. Throws RegionTooSmall.
std::vector<NormReport> gagliardo_batch(const GridFunction& f, const std::vector<SeminormRequest>& requests,
                                        Region region = Region::Omega);
NormReport gagliardo_seminorm(const GridFunction& f, const NormParams& params);

// ||f||_p + ||grad f||_p over Omega cells, central differences inside and one-sided at the boundary.
NormReport sobolev1_norm(const GridFunction& f, double p);

// ||f d_D^{-s}||_p / (||f||_p + [f]_{s,p}). Zero when D is empty; throws ZeroDenominator for f = 0.
double hardy_ratio(const GridFunction& f, const DomainModel& domain, const NormParams& params);

// ||f||_p + [f]_{s,p} + ||f d_D^{-s}||_p over Omega, for each request.
struct CompositeNorm {
  double s = 0.0;
  double p = 0.0;
  double lp = 0.0;
  double seminorm = 0.0;
  double weighted = 0.0;
  double total() const { return lp + seminorm + weighted; }
};
std::vector<CompositeNorm> weighted_sobolev_norms(const GridFunction& f, const DomainModel& domain,
                                                  const std::vector<SeminormRequest>& requests);

struct OmegaDNorm {
  NormReport report;
  double lp_part = 0.0;     // integral of |F|^p over Omega_D
  double omega_pairs = 0.0;  // Omega x Omega double integral
  double cross = 0.0;        // 2 x (Omega x wing)
  double wing_pairs = 0.0;   // wing x wing, 0 for zero extensions
  double tail_estimate = 0.0;
};

// Norm on Omega_D with kernel |X - Y|^-(kernel_exponent); the default exponent is n + sp.
// Throws WingTruncationTooSmall when the truncated tail exceeds 1% of the cross term.
OmegaDNorm omega_d_norm(const OmegaDSamples& F, double s, double p, std::optional<double> kernel_exponent = std::nullopt);

// CSV row: fixture, op, s, p, h, value, bias, flags.
std::string norm_csv_header();
std::string norm_csv_row(const std::string& fixture, const NormReport& r);

}  // namespace fracsob
