#include "fracsob/extension.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "fracsob/error.hpp"
#include "fracsob/parallel.hpp"

namespace fracsob {

double overlap_constant() { return 1.0 + 1.0 / (16.0 * std::sqrt(static_cast<double>(kDim))); }

double ramp(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

double ramp_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double q = 1.0 - t * t;
  return ramp(t) * (-2.0 * t / (q * q));
}

PartitionOfUnity::PartitionOfUnity(std::shared_ptr<const WhitneyDecomposition> dec, std::uint64_t classes_fingerprint)
    : dec_(std::move(dec)), classes_fingerprint_(classes_fingerprint), c_n_(overlap_constant()) {}

namespace {

struct AxisProfile {
  double value;
  double slope;  // d/du of the factor, u = |x - c|
};

AxisProfile axis_profile(double u, double half, double c_n) {
  const double inner = (2.0 - c_n) * half;
  const double outer = c_n * half;
  if (u <= inner) return {1.0, 0.0};
  if (u >= outer) return {0.0, 0.0};
  const double w = outer - inner;
  const double t = (u - inner) / w;
  return {ramp(t), ramp_derivative(t) / w};
}

}  // namespace

double PartitionOfUnity::phi(int j, Vec2 x) const {
  const auto& q = dec_->cubes()[static_cast<size_t>(j)];
  const Vec2 c = q.center();
  const double half = 0.5 * q.side;
  return axis_profile(std::abs(x.x - c.x), half, c_n_).value * axis_profile(std::abs(x.y - c.y), half, c_n_).value;
}

Vec2 PartitionOfUnity::grad_phi(int j, Vec2 x) const {
  const auto& q = dec_->cubes()[static_cast<size_t>(j)];
  const Vec2 c = q.center();
  const double half = 0.5 * q.side;
  const AxisProfile px = axis_profile(std::abs(x.x - c.x), half, c_n_);
  const AxisProfile py = axis_profile(std::abs(x.y - c.y), half, c_n_);
  const double sx = x.x >= c.x ? 1.0 : -1.0;
  const double sy = x.y >= c.y ? 1.0 : -1.0;
  return {sx * px.slope * py.value, sy * py.slope * px.value};
}

Box PartitionOfUnity::support(int j) const { return dec_->cubes()[static_cast<size_t>(j)].scaled_box(c_n_); }

std::vector<int> PartitionOfUnity::candidates(Vec2 x) const {
  std::vector<int> out;
  const auto leaf = dec_->leaf_at(x);
  if (!leaf) return out;
  if (leaf->kind == LeafKind::Accepted) {
    out.push_back(leaf->index);
    for (int k : dec_->neighbors(leaf->index)) out.push_back(k);
  } else if (leaf->kind == LeafKind::Collar) {
    out = dec_->touching_accepted(leaf->level, leaf->ix, leaf->iy);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PsiTerm> PartitionOfUnity::evaluate(Vec2 x, bool with_gradient) const {
  std::vector<PsiTerm> terms;
  double sum = 0.0;
  Vec2 grad_sum;
  for (int k : candidates(x)) {
    const double v = phi(k, x);
    if (v <= 0.0) continue;
    PsiTerm t;
    t.cube = k;
    t.psi = v;
    if (with_gradient) {
      t.grad = grad_phi(k, x);
      grad_sum = grad_sum + t.grad;
    }
    sum += v;
    terms.push_back(t);
  }
  for (auto& t : terms) {
    if (with_gradient) t.grad = (1.0 / (sum * sum)) * (sum * t.grad - t.psi * grad_sum);
    t.psi /= sum;
  }
  return terms;
}

PartitionOfUnity build_partition(const CubeClasses& classes) {
  return PartitionOfUnity(classes.dec_omega, classes.fingerprint);
}

PartitionAudit audit_partition(const PartitionOfUnity& pu, const GridSpec& spec, const std::vector<CellMask>& mask) {
  PartitionAudit a;
  const auto& dec = pu.decomposition();
  for (size_t k = 0; k < spec.size(); ++k) {
    if (mask[k] == CellMask::Interior) continue;
    const Vec2 x = spec.center(k);
    const auto leaf = dec.leaf_at(x);
    if (!leaf || leaf->kind == LeafKind::InsideSet) continue;
    ++a.exterior_cells;
    const auto terms = pu.evaluate(x);
    if (terms.empty()) {
      if (leaf->kind == LeafKind::Accepted)
        throw Error(ErrorCode::UncoveredExteriorCell, "extension", "build_partition",
                    "exterior cell inside an accepted cube has no positive bump");
      ++a.uncovered_cells;
      continue;
    }
    ++a.covered_cells;
    double sum = 0.0;
    for (const auto& t : terms) {
      sum += t.psi;
      if (!pu.support(t.cube).contains_open(x)) ++a.support_violations;
    }
    a.max_sum_error = std::max(a.max_sum_error, std::abs(sum - 1.0));
  }
  return a;
}

namespace {

// Neighbour layout of cube j relative to its own position and side; l(Q)|grad psi_j| only depends on it.
std::vector<std::array<double, 3>> configuration_key(const WhitneyDecomposition& dec, int j) {
  const auto& q = dec.cubes()[static_cast<size_t>(j)];
  std::vector<std::array<double, 3>> key;
  for (int k : dec.neighbors(j)) {
    const auto& c = dec.cubes()[static_cast<size_t>(k)];
    const double scale = std::ldexp(1.0, q.level - c.level);
    key.push_back({static_cast<double>(c.ix) * scale - static_cast<double>(q.ix),
                   static_cast<double>(c.iy) * scale - static_cast<double>(q.iy), scale});
  }
  std::sort(key.begin(), key.end());
  return key;
}

// Sample abscissae over [lo, hi]: `dense` points in every ramp interval, `sparse` points elsewhere.
std::vector<double> adapted_axis(double lo, double hi, std::vector<std::pair<double, double>> ramps, int dense,
                                 int sparse) {
  std::vector<double> cuts{lo, hi};
  for (auto& [a, b] : ramps) {
    a = std::clamp(a, lo, hi);
    b = std::clamp(b, lo, hi);
    cuts.push_back(a);
    cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> xs;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    bool in_ramp = false;
    for (const auto& [ra, rb] : ramps) in_ramp = in_ramp || (mid > ra && mid < rb);
    const int n = in_ramp ? dense : sparse;
    for (int m = 0; m < n; ++m) xs.push_back(a + (m + 0.5) * (b - a) / n);
  }
  return xs;
}

}  // namespace

GradientConstant measure_gradient_constant(const PartitionOfUnity& pu, const std::vector<int>& cubes, int refinement) {
  const int r = std::max(1, refinement);
  const auto& dec = pu.decomposition();
  const double c_n = pu.c_n();
  std::map<std::vector<std::array<double, 3>>, int> representatives;
  for (int j : cubes) representatives.emplace(configuration_key(dec, j), j);
  std::vector<int> reps;
  for (const auto& [key, j] : representatives) reps.push_back(j);
  std::sort(reps.begin(), reps.end());

  std::vector<GradientConstant> per_cube(reps.size());
  parallel_for(reps.size(), [&](size_t idx) {
    const int j = reps[idx];
    const auto& q = dec.cubes()[static_cast<size_t>(j)];
    const Box sup = pu.support(j);
    std::vector<std::pair<double, double>> rx, ry;
    auto add_ramps = [&](const DyadicCube& c) {
      const Vec2 m = c.center();
      const double half = 0.5 * c.side;
      const double in = (2.0 - c_n) * half, out = c_n * half;
      rx.push_back({m.x - out, m.x - in});
      rx.push_back({m.x + in, m.x + out});
      ry.push_back({m.y - out, m.y - in});
      ry.push_back({m.y + in, m.y + out});
    };
    add_ramps(q);
    for (int k : dec.neighbors(j)) add_ramps(dec.cubes()[static_cast<size_t>(k)]);
    const auto xs = adapted_axis(sup.lo.x, sup.hi.x, rx, 16 * r, 4 * r);
    const auto ys = adapted_axis(sup.lo.y, sup.hi.y, ry, 16 * r, 4 * r);
    GradientConstant g;
    for (double y : ys)
      for (double x : xs) {
        // Points of the truncation collar carry only ramp tails; the bound concerns the covered set.
        const auto leaf = dec.leaf_at({x, y});
        if (!leaf || leaf->kind != LeafKind::Accepted) continue;
        ++g.samples;
        for (const auto& t : pu.evaluate({x, y}, true)) {
          if (t.cube != j) continue;
          const double val = norm(t.grad) * q.side;
          if (val > g.value) {
            g.value = val;
            g.cube = j;
            g.where = {x, y};
          }
        }
      }
    per_cube[idx] = g;
  });
  GradientConstant out;
  for (const auto& g : per_cube) {
    out.samples += g.samples;
    if (g.value > out.value) {
      out.value = g.value;
      out.cube = g.cube;
      out.where = g.where;
    }
  }
  return out;
}

namespace {

struct CellWeights {
  std::vector<size_t> cells;
  std::vector<double> weights;
};

// Interior cells overlapping q, weighted by overlap area / |q|.
CellWeights overlap_weights(const GridSpec& spec, const std::vector<CellMask>& mask, const Box& q) {
  CellWeights out;
  const double area = q.width() * q.height();
  const int i0 = std::max(0, static_cast<int>(std::floor((q.lo.x - spec.window.lo.x) / spec.h)));
  const int i1 = std::min(spec.n - 1, static_cast<int>(std::ceil((q.hi.x - spec.window.lo.x) / spec.h)) - 1);
  const int j0 = std::max(0, static_cast<int>(std::floor((q.lo.y - spec.window.lo.y) / spec.h)));
  const int j1 = std::min(spec.n - 1, static_cast<int>(std::ceil((q.hi.y - spec.window.lo.y) / spec.h)) - 1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const size_t k = spec.index(i, j);
      if (mask[k] != CellMask::Interior) continue;
      const Box c = spec.cell_box(i, j);
      const double wx = std::min(c.hi.x, q.hi.x) - std::max(c.lo.x, q.lo.x);
      const double wy = std::min(c.hi.y, q.hi.y) - std::max(c.lo.y, q.lo.y);
      if (wx <= 0.0 || wy <= 0.0) continue;
      out.cells.push_back(k);
      out.weights.push_back(wx * wy / area);
    }
  return out;
}

}  // namespace

double zero_extend_cube(const GridFunction& f, const Box& q) {
  const CellWeights w = overlap_weights(f.spec, f.mask, q);
  double sum = 0.0;
  for (size_t m = 0; m < w.cells.size(); ++m) sum += w.weights[m] * f.values[w.cells[m]];
  return sum;
}

ExtensionOperator build_extension(const GridSpec& spec, const std::vector<CellMask>& mask, const CubeClasses& classes,
                                  const ReflectionMap& map, const PartitionOfUnity& pu) {
  if (map.classes_fingerprint != classes.fingerprint || pu.classes_fingerprint() != classes.fingerprint)
    throw Error(ErrorCode::InconsistentInputs, "extension", "extend", "map and partition come from different classifications");
  if (!(spec.window.lo == classes.dec_omega->window().lo && spec.window.hi == classes.dec_omega->window().hi))
    throw Error(ErrorCode::InconsistentInputs, "extension", "extend", "grid window differs from the decomposition window");
  ExtensionOperator op;
  op.spec_ = spec;
  op.mask_ = mask;
  op.classes_fingerprint_ = classes.fingerprint;

  const size_t n_cubes = classes.dec_omega->cubes().size();
  std::vector<int> slot(n_cubes, -1);
  op.mean_offset_.push_back(0);
  int n_slots = 0;
  for (int q : classes.w_e) {
    const int s = map.star(q);
    if (s < 0) continue;
    slot[static_cast<size_t>(q)] = n_slots++;
    const CellWeights w = overlap_weights(spec, mask, classes.dec_gamma->cubes()[static_cast<size_t>(s)].box());
    op.mean_cell_.insert(op.mean_cell_.end(), w.cells.begin(), w.cells.end());
    op.mean_weight_.insert(op.mean_weight_.end(), w.weights.begin(), w.weights.end());
    op.mean_offset_.push_back(op.mean_cell_.size());
  }

  std::vector<std::vector<std::pair<int, double>>> per_cell(spec.size());
  std::vector<char> uncovered(spec.size(), 0);
  std::vector<size_t> unpaired(spec.size(), 0);
  parallel_for(spec.size(), [&](size_t k) {
    if (mask[k] != CellMask::Exterior) return;
    const auto terms = pu.evaluate(spec.center(k));
    if (terms.empty()) {
      uncovered[k] = 1;
      return;
    }
    for (const auto& t : terms) {
      if (!(classes.omega_flags[static_cast<size_t>(t.cube)] & kFlagWe)) continue;
      const int sl = slot[static_cast<size_t>(t.cube)];
      if (sl < 0) {
        ++unpaired[k];
        continue;
      }
      per_cell[k].push_back({sl, t.psi});
    }
  });
  op.term_offset_.assign(spec.size() + 1, 0);
  for (size_t k = 0; k < spec.size(); ++k) {
    for (const auto& [sl, psi] : per_cell[k]) {
      op.term_slot_.push_back(sl);
      op.term_psi_.push_back(psi);
    }
    op.term_offset_[k + 1] = op.term_slot_.size();
    op.uncovered_cells_ += static_cast<size_t>(uncovered[k]);
    op.unpaired_terms_ += unpaired[k];
  }
  return op;
}

GridFunction ExtensionOperator::apply(const GridFunction& f) const {
  if (!(f.spec == spec_))
    throw Error(ErrorCode::InconsistentInputs, "extension", "extend", "function grid differs from the operator grid");
  const size_t n_slots = mean_offset_.size() - 1;
  std::vector<double> means(n_slots, 0.0);
  for (size_t m = 0; m < n_slots; ++m) {
    double s = 0.0;
    for (size_t e = mean_offset_[m]; e < mean_offset_[m + 1]; ++e) s += mean_weight_[e] * f.values[mean_cell_[e]];
    means[m] = s;
  }
  GridFunction out;
  out.spec = spec_;
  out.mask = mask_;
  out.values.assign(spec_.size(), 0.0);
  for (size_t k = 0; k < spec_.size(); ++k) {
    if (mask_[k] == CellMask::Interior) {
      out.values[k] = f.values[k];
      continue;
    }
    double s = 0.0;
    for (size_t e = term_offset_[k]; e < term_offset_[k + 1]; ++e)
      s += means[static_cast<size_t>(term_slot_[e])] * term_psi_[e];
    out.values[k] = s;
  }
  return out;
}

GridFunction extend(const GridFunction& f, const CubeClasses& classes, const ReflectionMap& map,
                    const PartitionOfUnity& pu) {
  return build_extension(f.spec, f.mask, classes, map, pu).apply(f);
}

double cutoff_value(int m, double dist_to_d) {
  const double md = m * dist_to_d;
  if (md <= 1.0) return 1.0;
  if (md <= 2.0) return 2.0 - md;
  return 0.0;
}

GridFunction cutoff_vm(int m, const DomainModel& domain, const GridSpec& spec) {
  if (domain.d_set().empty()) throw Error(ErrorCode::EmptyD, "extension", "cutoff_vm", "D is empty");
  if (m < 1) throw Error(ErrorCode::InvalidParameters, "extension", "cutoff_vm", "m must be a positive integer");
  GridFunction v;
  v.spec = spec;
  v.mask = classify_cells(domain, spec);
  v.values.resize(spec.size());
  for (size_t k = 0; k < spec.size(); ++k) v.values[k] = cutoff_value(m, domain.dist_to(spec.center(k), DistTarget::D));
  return v;
}

OmegaDSamples zero_extend_omega_d(const GridFunction& f, const DomainModel& domain, double wing_radius) {
  if (domain.d_set().empty()) throw Error(ErrorCode::EmptyD, "extension", "zero_extend_omega_d", "D is empty");
  if (!(wing_radius > 0.0))
    throw Error(ErrorCode::InvalidParameters, "extension", "zero_extend_omega_d", "wing radius must be positive");
  OmegaDSamples out;
  out.omega = restrict_to_omega(f);
  out.wing_radius = wing_radius;
  out.d_length = domain.d_set().total_length();
  const double h = f.spec.h;
  const int pieces = std::max(1, static_cast<int>(std::ceil(out.d_length / h)));
  const int heights = std::max(1, static_cast<int>(std::ceil(wing_radius / h)));
  const double dz = wing_radius / heights;
  const double weight = (out.d_length / pieces) * dz;
  const auto feet = sample_by_arclength(domain.d_arcs(), pieces);
  out.wing.reserve(feet.size() * static_cast<size_t>(2 * heights));
  for (const Vec2& foot : feet)
    for (int k = -heights; k < heights; ++k) out.wing.push_back({foot, (k + 0.5) * dz, weight});
  return out;
}

}  // namespace fracsob
