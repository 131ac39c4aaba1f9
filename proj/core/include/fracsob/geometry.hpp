#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracsob/planar.hpp"

namespace fracsob {

inline constexpr int kDim = 2;

struct EpsDelta {
  double eps = 0.0;
  double delta = 0.0;
};

enum class DistTarget { D, Gamma, Boundary, Complement };

// Polygonal open set with its boundary split into a closed part D and the rest Gamma.
class DomainModel {
 public:
  // Validates every invariant; throws InvalidGeometry / DisconnectedDomain.
  DomainModel(std::string name, std::vector<Ring> rings, std::vector<Polyline> d_arcs,
              std::vector<Polyline> gamma_arcs, Box window, std::optional<EpsDelta> eps_delta);

  const std::string& name() const { return name_; }
  const std::vector<Ring>& rings() const { return rings_; }
  const std::vector<Polyline>& d_arcs() const { return d_arcs_; }
  const std::vector<Polyline>& gamma_arcs() const { return gamma_arcs_; }
  const Box& window() const { return window_; }
  const std::optional<EpsDelta>& eps_delta() const { return eps_delta_; }
  // Declared delta, or +inf when none was declared.
  double delta() const { return eps_delta_ ? eps_delta_->delta : kInf; }

  const SegmentSet& d_set() const { return d_set_; }
  const SegmentSet& gamma_set() const { return gamma_set_; }
  const SegmentSet& boundary_set() const { return boundary_set_; }

  // Strictly inside the open set.
  bool contains(Vec2 p) const;
  double dist_to(Vec2 p, DistTarget target) const;
  double area() const { return area_; }
  double diameter() const { return diameter_; }
  Box bounding_box() const { return bbox_; }
  // |B(c, r) ∩ Omega| with the disk replaced by its area-matched 256-gon.
  double area_in_disk(Vec2 c, double r) const;

 private:
  void normalize_orientation();
  void check_rings() const;
  void check_arcs() const;
  void check_window() const;
  void check_connected() const;

  std::string name_;
  std::vector<Ring> rings_;
  std::vector<Polyline> d_arcs_;
  std::vector<Polyline> gamma_arcs_;
  Box window_;
  std::optional<EpsDelta> eps_delta_;
  SegmentSet d_set_;
  SegmentSet gamma_set_;
  SegmentSet boundary_set_;
  Box bbox_;
  double area_ = 0.0;
  double diameter_ = 0.0;
};

DomainModel load_domain(std::string_view spec_text);
DomainModel load_domain_file(const std::string& path);

bool point_in_rings(const std::vector<Ring>& rings, Vec2 p);

struct RegularitySample {
  Vec2 center;
  double radius = 0.0;
  double value = 0.0;
};

struct RegularityReport {
  int d = 1;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double budget = 0.0;
  std::vector<RegularitySample> samples;
  bool pass = false;
};

enum class SetId { D, Omega };

RegularityReport check_d_set(const DomainModel& domain, SetId set_id, int d, const std::vector<double>& radii,
                             int centers, double budget = 4.0);
// d = 1 check on an explicit polyline family.
RegularityReport check_d_set_polylines(const SegmentSet& set, const std::vector<double>& radii, int centers,
                                       double budget = 4.0);

struct ThicknessReport {
  double min_ratio = 0.0;
  Vec2 argmin_center;
  double argmin_radius = 0.0;
  std::vector<RegularitySample> samples;
};

// |B(x,r) ∩ Omega| / |B(x,r)|.
double thickness_ratio(const DomainModel& domain, Vec2 x, double r);
ThicknessReport interior_thickness(const DomainModel& domain, const std::vector<double>& radii,
                                   int boundary_samples);

// Points spread uniformly by arclength over a polyline family, at the midpoints of `count` equal pieces.
std::vector<Vec2> sample_by_arclength(const std::vector<Polyline>& lines, int count);

}  // namespace fracsob
