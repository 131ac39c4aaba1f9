#include "pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include "fracsob/elliptic.hpp"
#include "fracsob/error.hpp"
#include "fracsob/extension.hpp"
#include "fracsob/family.hpp"
#include "fracsob/interpolation.hpp"
#include "fracsob/metric.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/parallel.hpp"

namespace fracsob::detail {

namespace {

class Csv {
 public:
  Csv(std::string name, const std::string& header) : name_(std::move(name)) {
    out_.precision(12);
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    int i = 0;
    ((out_ << (i++ ? "," : "") << v), ...);
    out_ << '\n';
  }
  Table table() const { return {name_, out_.str()}; }

 private:
  std::string name_;
  std::ostringstream out_;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

double relative_change(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

struct Geometry {
  std::shared_ptr<const WhitneyDecomposition> dec_gamma;
  std::shared_ptr<const WhitneyDecomposition> dec_omega;
  CubeClasses classes;
};

Geometry build_geometry(const DomainModel& d, int depth) {
  Geometry g;
  if (!d.gamma_set().empty())
    g.dec_gamma = std::make_shared<const WhitneyDecomposition>(
        whitney_decompose(ClosedSet::gamma_closure(d), d.window(), depth));
  g.dec_omega =
      std::make_shared<const WhitneyDecomposition>(whitney_decompose(ClosedSet::omega_closure(d), d.window(), depth));
  g.classes = classify_cubes(g.dec_gamma, g.dec_omega, d);
  return g;
}

double coarse_gap(const ExperimentConfig& c, const std::vector<double>& hs) {
  if (c.gap > 0.0) return c.gap;
  return 4.0 * *std::max_element(hs.begin(), hs.end());
}

std::vector<double> require_h(const ExperimentConfig& c, std::size_t n) {
  if (c.h_list.size() < n)
    throw Error(ErrorCode::ConfigError, "cli", "run_experiment",
                "experiment needs at least " + std::to_string(n) + " h values");
  return c.h_list;
}

GridFunction multiply(const GridFunction& f, const GridFunction& g) {
  GridFunction out = f;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = f.values[k] * g.values[k];
  return out;
}

// Dense spectra are reused across experiments run in one process.
std::shared_ptr<const Spectrum> cached_spectrum(const DomainModel& d, const std::string& fixture,
                                                const std::string& coefficient, double h) {
  static std::mutex mu;
  static std::map<std::tuple<std::string, std::string, double>, std::shared_ptr<const Spectrum>> cache;
  const auto key = std::make_tuple(fixture, coefficient, h);
  {
    std::lock_guard<std::mutex> lock(mu);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto op = std::make_shared<const OperatorMatrix>(assemble_dirichlet_form(d, CoefficientField::by_name(coefficient), h));
  auto sp = std::make_shared<const Spectrum>(spectral_decompose(op));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, sp);
  return sp;
}

}  // namespace

void run_whitney_audit(const ExperimentConfig& c, ResultBundle& b) {
  const DomainModel d = load_domain_file(c.fixture);
  const Geometry g = build_geometry(d, c.depth);

  Csv audits("whitney_audit.csv",
             "decomposition,cubes,collar,disjoint,coverage,sandwich,dyadic,neighbor_ratio,neighbor_count,"
             "coverage_fraction,collar_area_fraction,sandwich_violations,max_neighbor_ratio,max_neighbors");
  bool axioms = true;
  std::string axiom_detail;
  auto audit = [&](const char* name, const WhitneyDecomposition& dec, const ClosedSet& f) {
    const WhitneyAudit a = audit_whitney(dec, f);
    audits.row(name, a.cube_count, a.collar_count, a.disjoint, a.coverage, a.sandwich, a.dyadic, a.neighbor_ratio,
               a.neighbor_count, a.coverage_fraction, a.collar_area_fraction, a.sandwich_violations,
               a.max_neighbor_ratio, a.max_neighbors);
    axioms = axioms && a.all();
    axiom_detail += std::string(axiom_detail.empty() ? "" : "; ") + name + " " + std::to_string(a.cube_count) +
                    " cubes " + (a.all() ? "ok" : "FAILED");
  };
  if (g.dec_gamma) audit("gamma", *g.dec_gamma, ClosedSet::gamma_closure(d));
  audit("omega", *g.dec_omega, ClosedSet::omega_closure(d));
  b.summary.push_back({1, "whitney-axioms", axioms, axiom_detail});

  const LemmaReplay interior = replay_lemma_interior_shadow(g.classes, d);
  const LemmaReplay band = replay_lemma_band(g.classes);
  const SeparationReplay sep = replay_lemma_separation(g.classes, d);
  const ReflectionMap map = build_reflection(g.classes);
  const ReflectionDiagnostics diag = verify_reflection(map, g.classes, d);

  Csv lemmas("lemma_replays.csv", "lemma,checks,violations,worst");
  lemmas.row("interior-shadow", interior.checks, interior.violations, interior.worst_ratio);
  lemmas.row("band", band.checks, band.violations, band.worst_ratio);
  lemmas.row("separation", sep.pairs, 0, sep.best_constant);
  lemmas.row("anchor", diag.anchor_checks, diag.anchor_violations, diag.anchor_constant);
  lemmas.row("long-distance", diag.long_distance_checks, 0, diag.long_distance_constant);

  Csv refl("reflection_constants.csv",
           "w_i,w_e,w_e_prime,w_e_dprime,unpaired,c_size,c_dist,multiplicity,c_neighbor");
  refl.row(g.classes.w_i.size(), g.classes.w_e.size(), g.classes.w_e_prime.size(), g.classes.w_e_dprime.size(),
           map.unpaired.size(), diag.diag.c_size, diag.diag.c_dist, diag.diag.multiplicity, diag.diag.c_neighbor);
  Csv hist("multiplicity_histogram.csv", "preimages,cubes");
  for (std::size_t m = 0; m < diag.multiplicity_histogram.size(); ++m)
    if (diag.multiplicity_histogram[m] > 0) hist.row(m, diag.multiplicity_histogram[m]);

  const bool lemmas_ok = interior.violations == 0 && band.violations == 0 && diag.anchor_violations == 0 &&
                         (sep.pairs == 0 || sep.best_constant > 0.0);
  std::ostringstream det;
  det << "interior-shadow " << interior.violations << "/" << interior.checks << ", band " << band.violations << "/"
      << band.checks << ", anchor " << diag.anchor_violations << "/" << diag.anchor_checks << ", separation C_e "
      << fmt(sep.best_constant);
  b.summary.push_back({2, "distance-lemmas", lemmas_ok, det.str()});

  b.tables = {audits.table(), lemmas.table(), refl.table(), hist.table(),
              {"reflection_map.csv", reflection_csv(map, g.classes)}};
}

void run_extension_bound(const ExperimentConfig& c, ResultBundle& b) {
  const DomainModel d = load_domain_file(c.fixture);
  const auto hs = require_h(c, 1);
  const double gap = coarse_gap(c, hs);
  const Geometry g = build_geometry(d, c.depth);
  const ReflectionMap map = build_reflection(g.classes);
  const PartitionOfUnity pu = build_partition(g.classes);
  const auto pairs = c.pairs();
  std::vector<SeminormRequest> req;
  for (const auto& [s, p] : pairs) req.push_back({s, p});
  const std::uint64_t seed = c.seeds.front();

  Csv part("partition_audit.csv",
           "h,exterior_cells,covered_cells,uncovered_cells,max_sum_error,support_violations,gradient_constant,"
           "gradient_samples");
  Csv checks("extension_checks.csv", "h,member,restriction_exact,linearity_error,min_dist_support_d");
  Csv ratios("extension_ratios.csv", "h,member,s,p,extended_norm,weighted_norm,ratio");

  const double sum_tol = c.budget("psi_sum", 1e-12);
  bool pu_ok = true, ext_ok = true;
  std::vector<double> grad, max_ratio;
  double worst_sum = 0.0, worst_lin = 0.0, min_sep = kInf;
  std::size_t restriction_failures = 0, supp_violations = 0;
  for (double h : hs) {
    const GridFunction g0 = make_grid(d, h);
    const PartitionAudit au = audit_partition(pu, g0.spec, g0.mask);
    const int refinement = std::max(1, static_cast<int>(std::lround(hs.front() / h)));
    const GradientConstant gc = measure_gradient_constant(pu, g.classes.w_e, refinement);
    part.row(h, au.exterior_cells, au.covered_cells, au.uncovered_cells, au.max_sum_error, au.support_violations,
             gc.value, gc.samples);
    worst_sum = std::max(worst_sum, au.max_sum_error);
    supp_violations += au.support_violations;
    pu_ok = pu_ok && au.max_sum_error <= sum_tol && au.support_violations == 0;
    grad.push_back(gc.value);

    const ExtensionOperator op = build_extension(g0.spec, g0.mask, g.classes, map, pu);
    const auto fam = generate_family(FamilyKind::BumpsAwayFromD, c.family_count, seed, d, h, gap);
    const ClosedSet dset = ClosedSet::d_closure(d);
    std::vector<GridFunction> ext(fam.size());
    for (std::size_t m = 0; m < fam.size(); ++m) ext[m] = op.apply(fam[m]);

    double mr = 0.0;
    for (std::size_t m = 0; m < fam.size(); ++m) {
      const GridFunction& f = fam[m];
      const GridFunction& e = ext[m];
      bool exact = true;
      for (std::size_t k = 0; k < f.values.size(); ++k)
        if (f.mask[k] == CellMask::Interior && e.values[k] != f.values[k]) exact = false;
      double lin = 0.0;
      if (m + 1 < fam.size() && m < 5) {
        GridFunction comb = f;
        for (std::size_t k = 0; k < comb.values.size(); ++k)
          comb.values[k] = 0.7 * f.values[k] - 1.3 * fam[m + 1].values[k];
        const GridFunction ec = op.apply(comb);
        double scale = 0.0, err = 0.0;
        for (std::size_t k = 0; k < ec.values.size(); ++k) {
          const double lhs = 0.7 * e.values[k] - 1.3 * ext[m + 1].values[k];
          err = std::max(err, std::abs(ec.values[k] - lhs));
          scale = std::max(scale, std::abs(lhs));
        }
        lin = scale > 0.0 ? err / scale : err;
      }
      double sep = kInf;
      if (!dset.empty())
        for (std::size_t k = 0; k < e.values.size(); ++k)
          if (e.values[k] != 0.0) sep = std::min(sep, dset.dist(e.spec.cell_box(k)));
      checks.row(h, m, exact, lin, sep);
      if (!exact) ++restriction_failures;
      worst_lin = std::max(worst_lin, lin);
      min_sep = std::min(min_sep, sep);

      const auto num = gagliardo_batch(e, req, Region::Window);
      const auto den = weighted_sobolev_norms(f, d, req);
      for (std::size_t i = 0; i < req.size(); ++i) {
        const double top = num[i].value + lp_norm(e, req[i].p, Region::Window).value;
        const double r = top / den[i].total();
        ratios.row(h, m, req[i].s, req[i].p, top, den[i].total(), r);
        mr = std::max(mr, r);
      }
    }
    max_ratio.push_back(mr);
  }

  double grad_change = 0.0, ratio_change = 0.0;
  for (std::size_t i = 1; i < hs.size(); ++i) {
    grad_change = std::max(grad_change, relative_change(grad[i - 1], grad[i]));
    ratio_change = std::max(ratio_change, relative_change(max_ratio[i - 1], max_ratio[i]));
  }
  const double grad_tol = c.budget("gradient_stability", 0.10);
  pu_ok = pu_ok && grad_change <= grad_tol;
  {
    std::ostringstream det;
    det << "max |sum psi - 1| " << fmt(worst_sum) << ", support violations " << supp_violations
        << ", gradient constant";
    for (double v : grad) det << " " << fmt(v, 5);
    det << " (change " << fmt(100.0 * grad_change, 3) << "%)";
    b.summary.push_back({3, "partition-of-unity", pu_ok, det.str()});
  }
  const double lin_tol = c.budget("linearity", 1e-12);
  ext_ok = restriction_failures == 0 && worst_lin <= lin_tol && min_sep > 0.0;
  {
    std::ostringstream det;
    det << "restriction failures " << restriction_failures << ", linearity error " << fmt(worst_lin)
        << ", min dist(supp Ef, D) " << fmt(min_sep);
    b.summary.push_back({4, "extension-operator", ext_ok, det.str()});
  }
  {
    const double bound = c.budget("ratio_bound", 100.0);
    const double stab = c.budget("ratio_stability", 0.25);
    bool ok = ratio_change < stab;
    for (double v : max_ratio) ok = ok && std::isfinite(v) && v <= bound;
    std::ostringstream det;
    det << "max ratio";
    for (double v : max_ratio) det << " " << fmt(v, 5);
    det << " (change " << fmt(100.0 * ratio_change, 3) << "%, bound " << bound << ")";
    b.summary.push_back({5, "extension-boundedness", ok, det.str()});
  }
  b.tables = {part.table(), checks.table(), ratios.table()};
}

void run_hardy_sweep(const ExperimentConfig& c, ResultBundle& b) {
  const DomainModel d = load_domain_file(c.fixture);
  if (d.d_set().empty())
    throw Error(ErrorCode::EmptyD, "cli", "run_experiment", "hardy-sweep needs a fixture with nonempty D");
  const auto hs = require_h(c, 2);
  const double family_h_min = c.budget("family_h_min", 1.0 / 64);
  std::vector<double> fam_hs;
  for (double h : hs)
    if (h >= family_h_min * (1.0 - 1e-12)) fam_hs.push_back(h);
  if (fam_hs.empty()) fam_hs.push_back(hs.front());
  const double gap = coarse_gap(c, fam_hs);
  const auto pairs = c.pairs();
  std::vector<SeminormRequest> req;
  for (const auto& [s, p] : pairs) req.push_back({s, p});
  const std::uint64_t seed = c.seeds.front();

  // Ratios grouped by sp.
  Csv ratios("hardy_ratios.csv", "h,member,s,p,sp,weighted,lp,seminorm,ratio");
  std::map<double, std::vector<double>> max_by_sp;
  for (double h : fam_hs) {
    const auto fam = generate_family(FamilyKind::BumpsAwayFromD, c.family_count, seed, d, h, gap);
    std::map<double, double> mx;
    for (std::size_t m = 0; m < fam.size(); ++m) {
      const auto norms = weighted_sobolev_norms(fam[m], d, req);
      for (const auto& n : norms) {
        const double sp = std::round(n.s * n.p * 1e9) / 1e9;
        const double r = n.weighted / (n.lp + n.seminorm);
        ratios.row(h, m, n.s, n.p, sp, n.weighted, n.lp, n.seminorm, r);
        mx[sp] = std::max(mx[sp], r);
      }
    }
    for (const auto& [sp, v] : mx) max_by_sp[sp].push_back(v);
  }
  {
    const double bound = c.budget("hardy_bound", 1000.0);
    const double stab = c.budget("hardy_stability", 0.30);
    bool ok = true;
    std::ostringstream det;
    for (const auto& [sp, v] : max_by_sp) {
      double change = 0.0;
      for (std::size_t i = 1; i < v.size(); ++i) change = std::max(change, relative_change(v[i - 1], v[i]));
      det << "sp=" << sp << " max ratio";
      for (double x : v) det << " " << fmt(x, 5);
      det << " (change " << fmt(100.0 * change, 3) << "%); ";
      ok = ok && change <= stab;
      for (double x : v) ok = ok && std::isfinite(x) && x <= bound;
    }
    // Critical exponent: the weighted integral of a function not vanishing at D grows like |log h|.
    const double s = c.budget("critical_s", 0.5), p = c.budget("critical_p", 2.0);
    Csv crit("hardy_critical.csv", "h,log_inv_h,weighted_integral");
    std::vector<double> xs, ys;
    for (double h : hs) {
      const GridFunction one = sample_on_omega(d, h, [](Vec2) { return 1.0; });
      const double w = std::pow(lp_norm(one, p, Region::Omega, DistanceWeight{&d, s}).value, p);
      xs.push_back(std::log(1.0 / h));
      ys.push_back(w);
      crit.row(h, xs.back(), w);
    }
    const double xm = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - xm) * (ys[i] - ym);
      sxx += (xs[i] - xm) * (xs[i] - xm);
    }
    const double slope = sxy / sxx;
    const double min_slope = c.budget("critical_slope", 0.5);
    det << "sp=1 weighted integral slope " << fmt(slope, 5) << " (threshold " << min_slope << ")";
    ok = ok && slope > min_slope;
    b.summary.push_back({6, "hardy-dichotomy", ok, det.str()});
    b.tables.push_back(ratios.table());
    b.tables.push_back(crit.table());
  }

  // Cutoff density mechanism.
  {
    const double h = c.budget("cutoff_h", 1.0 / 64);
    const double s = c.budget("cutoff_s", 0.3), p = c.budget("cutoff_p", 2.0);
    const int count = static_cast<int>(c.budget("cutoff_count", c.family_count));
    const std::vector<int> ms{2, 4, 8, 16};
    const auto fam = generate_family(FamilyKind::Bumps, count, seed, d, h);
    const GridSpec spec = fam.front().spec;
    std::vector<GridFunction> vm;
    for (int m : ms) vm.push_back(cutoff_vm(m, d, spec));
    Csv norms("cutoff_norms.csv", "member,m,norm");
    std::size_t nonmonotone = 0, net_decrease = 0;
    double worst_rise = 0.0;
    std::vector<std::vector<double>> vals(fam.size(), std::vector<double>(ms.size()));
    for (std::size_t k = 0; k < fam.size(); ++k)
      for (std::size_t i = 0; i < ms.size(); ++i)
        vals[k][i] = weighted_sobolev_norms(multiply(fam[k], vm[i]), d, {{s, p}}).front().total();
    for (std::size_t k = 0; k < fam.size(); ++k) {
      for (std::size_t i = 0; i < ms.size(); ++i) {
        norms.row(k, ms[i], vals[k][i]);
        if (i > 0 && !(vals[k][i] < vals[k][i - 1])) {
          ++nonmonotone;
          worst_rise = std::max(worst_rise, vals[k][i] / vals[k][i - 1] - 1.0);
        }
      }
      if (vals[k].back() < vals[k].front()) ++net_decrease;
    }
    // Lipschitz bound |v_m(x) - v_m(y)| <= min{1, m |x - y|} on a lattice around Omega.
    const double step = c.budget("lipschitz_step", 1.0 / 64);
    const Box bb = d.bounding_box();
    const double pad = 0.25;
    const int nx = static_cast<int>(std::ceil((bb.width() + 2 * pad) / step)) + 1;
    const int ny = static_cast<int>(std::ceil((bb.height() + 2 * pad) / step)) + 1;
    std::vector<double> dist(static_cast<std::size_t>(nx * ny));
    auto pt = [&](int i, int j) { return Vec2{bb.lo.x - pad + i * step, bb.lo.y - pad + j * step}; };
    parallel_for(dist.size(), [&](std::size_t k) {
      dist[k] = d.dist_to(pt(static_cast<int>(k) % nx, static_cast<int>(k) / nx), DistTarget::D);
    });
    Csv lip("cutoff_lipschitz.csv", "m,checks,violations,worst_excess");
    std::size_t violations = 0;
    for (int m : ms) {
      std::size_t checks = 0, bad = 0;
      double worst = -kInf;
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          for (int dj = 0; dj <= 3; ++dj)
            for (int di = -3; di <= 3; ++di) {
              if (dj == 0 && di <= 0) continue;
              const int i2 = i + di, j2 = j + dj;
              if (i2 < 0 || i2 >= nx || j2 >= ny) continue;
              const double a = cutoff_value(m, dist[static_cast<std::size_t>(j * nx + i)]);
              const double bv = cutoff_value(m, dist[static_cast<std::size_t>(j2 * nx + i2)]);
              const double excess = std::abs(a - bv) - std::min(1.0, m * distance(pt(i, j), pt(i2, j2)));
              worst = std::max(worst, excess);
              ++checks;
              if (excess > 1e-12) ++bad;
            }
      lip.row(m, checks, bad, worst);
      violations += bad;
    }
    std::ostringstream det;
    det << "non-decreasing steps " << nonmonotone << " over " << fam.size() << " members (largest rise "
        << fmt(100.0 * worst_rise, 3) << "%), m=16 below m=2 for " << net_decrease << "/" << fam.size()
        << " members, Lipschitz violations " << violations;
    b.summary.push_back({7, "cutoff-density", nonmonotone == 0 && violations == 0, det.str()});
    b.tables.push_back(norms.table());
    b.tables.push_back(lip.table());
  }
}

void run_interpolation_equivalence(const ExperimentConfig& c, ResultBundle& b) {
  const DomainModel d = load_domain_file(c.fixture);
  const auto hs = require_h(c, 1);
  const double gap = coarse_gap(c, hs);
  const int J = static_cast<int>(c.budget("J", 12));
  const double budget = c.budget("spread", 400.0);
  const double stab = c.budget("stability", 0.30);
  const std::uint64_t seed = c.seeds.front();
  const double tol = 1e-9;

  Csv prof_csv("k_profiles.csv", "h,member,p,t,k,residual,f_norm,f_norm1");
  Csv eq("equivalence.csv", "h,member,s,p,interpolation,weighted,ratio");
  std::size_t shape_violations = 0, profiles = 0;
  std::map<std::pair<double, double>, std::vector<EquivalenceReport>> reports;
  for (double h : hs) {
    const auto spectrum = cached_spectrum(d, c.fixture, "identity", h);
    const KSolver solver(spectrum);
    const auto fam = generate_family(FamilyKind::BumpsAwayFromD, c.family_count, seed, d, h, gap);
    for (double p : c.p_list) {
      std::vector<KProfile> prof(fam.size());
      for (std::size_t m = 0; m < fam.size(); ++m) prof[m] = solver.profile(fam[m], p, J, std::to_string(m));
      for (std::size_t m = 0; m < fam.size(); ++m) {
        const KProfile& pr = prof[m];
        ++profiles;
        const auto& k = pr.k_values;
        for (std::size_t j = 0; j < k.size(); ++j) {
          prof_csv.row(h, m, p, pr.t_grid[j], k[j], pr.solver_residuals[j], pr.f_norm, pr.f_norm1);
          if (k[j] < 0.0 || k[j] > std::min(pr.f_norm, pr.t_grid[j] * pr.f_norm1)) ++shape_violations;
          if (j > 0 && k[j] < k[j - 1] - tol) ++shape_violations;
          if (j > 0 && j + 1 < k.size() && k[j] < (2.0 / 3.0) * k[j - 1] + (1.0 / 3.0) * k[j + 1] - tol)
            ++shape_violations;
        }
      }
      for (double s : c.s_list) {
        if (!(s < 1.0)) continue;
        EquivalenceReport rep;
        rep.s = s;
        rep.p = p;
        rep.budget = budget;
        for (std::size_t m = 0; m < fam.size(); ++m) {
          const double w = weighted_sobolev_norms(fam[m], d, {{s, p}}).front().total();
          if (!(w > 0.0) || !std::isfinite(w))
            throw Error(ErrorCode::DegenerateFamilyMember, "interpolation", "equivalence_report",
                        "member " + std::to_string(m) + " has zero or infinite weighted norm");
          const double in = interpolation_norm_from_profile(prof[m], s, p);
          rep.interpolation.push_back(in);
          rep.weighted.push_back(w);
          rep.ratios.push_back(in / w);
          eq.row(h, m, s, p, in, w, in / w);
        }
        rep.min_ratio = *std::min_element(rep.ratios.begin(), rep.ratios.end());
        rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
        rep.spread = rep.max_ratio / rep.min_ratio;
        rep.pass = rep.spread <= budget;
        reports[{s, p}].push_back(rep);
      }
    }
  }
  bool ok = shape_violations == 0;
  std::ostringstream det;
  det << "profile violations " << shape_violations << " over " << profiles << " profiles";
  for (const auto& [sp, reps] : reports) {
    det << "; (s,p)=(" << sp.first << "," << sp.second << ") spread";
    double change = 0.0;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      det << " " << fmt(reps[i].spread, 4);
      ok = ok && reps[i].pass;
      if (i > 0)
        change = std::max({change, relative_change(reps[i - 1].max_ratio, reps[i].max_ratio),
                           relative_change(reps[i - 1].min_ratio, reps[i].min_ratio)});
    }
    det << " ratio change " << fmt(100.0 * change, 3) << "%";
    ok = ok && change <= stab;
  }
  b.summary.push_back({8, "interpolation-identity", ok, det.str()});
  b.tables = {prof_csv.table(), eq.table()};
}

void run_elliptic_suite(const ExperimentConfig& c, ResultBundle& b) {
  const DomainModel d = load_domain_file(c.fixture);
  const auto hs = require_h(c, 2);
  const double h_eig = hs[0], h_heat = hs[1];
  const std::uint64_t seed = c.seeds.front();
  const auto sp = cached_spectrum(d, c.fixture, c.coefficient, h_eig);
  const OperatorMatrix& op = *sp->op;
  bool ok = true;
  std::ostringstream det;

  // Eigenvalues against the mixed-square oracle when requested.
  Csv eig("eigenvalues.csv", "mode,eigenvalue,oracle,relative_error");
  const bool oracle = c.budget("mixed_square_oracle", 0.0) != 0.0;
  std::vector<double> ref;
  for (int k = 0; k < 12; ++k)
    for (int m = 0; m < 12; ++m) ref.push_back(std::numbers::pi * std::numbers::pi * ((k + 0.5) * (k + 0.5) + m * m));
  std::sort(ref.begin(), ref.end());
  double eig_err = 0.0;
  for (int i = 0; i < 5 && i < sp->values.size(); ++i) {
    const double rel = oracle ? std::abs(sp->values[i] - ref[static_cast<std::size_t>(i)]) / ref[static_cast<std::size_t>(i)] : 0.0;
    eig.row(i, sp->values[i], oracle ? ref[static_cast<std::size_t>(i)] : 0.0, rel);
    eig_err = std::max(eig_err, rel);
  }
  if (oracle) {
    ok = ok && eig_err <= c.budget("eigen_tolerance", 0.02);
    det << "eigen error " << fmt(100.0 * eig_err, 3) << "%; ";
  }

  // Heat kernel.
  const auto sp_heat = cached_spectrum(d, c.fixture, c.coefficient, h_heat);
  const HeatKernelReport hk = heat_kernel_report(*sp_heat, {0.01, 0.1, 1.0});
  Csv heat("heat_kernel.csv", "min_relative,min_row_mass,max_row_mass,symmetric,fit_c,fit_b,fit_w0,feasible");
  heat.row(hk.min_relative, hk.min_row_mass, hk.max_row_mass, hk.symmetric, hk.fit.c, hk.fit.b, hk.fit.w0,
           hk.fit.feasible);
  const bool heat_ok = hk.min_relative >= -1e-8 && hk.max_row_mass <= 1.0 + 1e-8 && hk.symmetric && hk.fit.feasible &&
                       hk.fit.b > 0.0;
  ok = ok && heat_ok;
  det << "heat min " << fmt(hk.min_relative, 3) << " mass " << fmt(hk.max_row_mass, 10) << " fit (c,b)=("
      << fmt(hk.fit.c, 4) << "," << hk.fit.b << "); ";

  // Square-root domain identity and domain characterization.
  const double gap = coarse_gap(c, hs);
  const auto fam = generate_family(FamilyKind::BumpsAwayFromD, c.family_count, seed, d, h_eig, gap);
  Csv sq("sqrt_domain.csv", "member,sqrt_norm_sq,form,relative_error");
  double sq_err = 0.0;
  for (std::size_t m = 0; m < fam.size(); ++m) {
    const Eigen::VectorXd u = op.to_nodes(fam[m]);
    const Eigen::VectorXd r = fractional_power_apply(*sp, 0.5, u);
    const double lhs = op.inner(r, r);
    const double rhs = u.dot(op.stiffness * u);
    const double rel = std::abs(lhs - rhs) / std::max(rhs, 1e-300);
    sq.row(m, lhs, rhs, rel);
    sq_err = std::max(sq_err, rel);
  }
  ok = ok && sq_err <= 1e-9;
  det << "sqrt identity " << fmt(sq_err, 3) << "; ";
  Csv dom("dom_characterization.csv", "s,member,ratio");
  for (double s : c.s_list) {
    const DomainCharacterization rep = domain_characterization_report(*sp, fam, s, d, c.budget("spread", 400.0));
    for (std::size_t m = 0; m < rep.ratios.size(); ++m) dom.row(s, m, rep.ratios[m]);
    ok = ok && rep.pass;
    det << "dom s=" << s << " spread " << fmt(rep.spread, 4) << "; ";
  }

  // Maximal regularity.
  const int steps = static_cast<int>(c.budget("steps", 64));
  const double T = c.budget("T", 1.0);
  const double dt = T / steps;
  Csv mr("max_regularity.csv", "forcing,p,ratio,oracle,ut_norm,lu_norm,f_norm");
  double mode_err = 0.0, random_max = 0.0;
  const int n = sp_heat->op->dimension;
  for (int k : {0, 1, 4, 9}) {
    if (k >= n) continue;
    const std::vector<Eigen::VectorXd> forcing(static_cast<std::size_t>(steps), sp_heat->vectors.col(k));
    const double lam = sp_heat->values[k];
    for (double p : c.p_list) {
      const MaxRegularity r = max_regularity_ratio(*sp_heat, forcing, p, T);
      double a = 0.0, bsum = 0.0;
      for (int i = 1; i <= steps; ++i) {
        const double e = std::exp(-lam * i * dt);
        a += dt * std::pow(e, p);
        bsum += dt * std::pow(1.0 - e, p);
      }
      const double oracle_ratio = (std::pow(a, 1.0 / p) + std::pow(bsum, 1.0 / p)) / std::pow(T, 1.0 / p);
      const double rel = std::abs(r.ratio - oracle_ratio) / oracle_ratio;
      mode_err = std::max(mode_err, rel);
      mr.row("mode" + std::to_string(k), p, r.ratio, oracle_ratio, r.ut_norm, r.lu_norm, r.f_norm);
    }
  }
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < static_cast<int>(c.budget("random_trials", 4)); ++trial) {
    std::vector<Eigen::VectorXd> forcing(static_cast<std::size_t>(steps), Eigen::VectorXd(n));
    for (auto& f : forcing)
      for (int i = 0; i < n; ++i) f[i] = uniform01(rng) - 0.5;
    for (double p : c.p_list) {
      const MaxRegularity r = max_regularity_ratio(*sp_heat, forcing, p, T);
      mr.row("random" + std::to_string(trial), p, r.ratio, "", r.ut_norm, r.lu_norm, r.f_norm);
      if (p == 2.0) random_max = std::max(random_max, r.ratio);
    }
  }
  ok = ok && mode_err <= 1e-6 && random_max <= c.budget("max_regularity_bound", 2.5);
  det << "mode oracle error " << fmt(mode_err, 3) << ", random p=2 max ratio " << fmt(random_max, 5);
  b.summary.push_back({9, "elliptic-suite", ok, det.str()});
  b.tables = {eig.table(),
              heat.table(),
              sq.table(),
              dom.table(),
              mr.table(),
              {"spectrum.csv", spectrum_csv(*sp, 64)}};
}

void run_cigar_check(const ExperimentConfig& c, ResultBundle& b) {
  const DomainModel d = load_domain_file(c.fixture);
  const double eps = c.budget("eps", d.eps_delta() ? d.eps_delta()->eps : 0.1);
  const double k_target = c.budget("k_target", 12.0);
  const int count = static_cast<int>(c.budget("pairs", 16));
  const double reach = std::min(d.delta(), d.diameter());
  std::mt19937_64 rng(c.seeds.front());
  const Box bb = d.bounding_box();
  std::vector<std::pair<Vec2, Vec2>> pairs;
  while (static_cast<int>(pairs.size()) < count) {
    const Vec2 x{bb.lo.x + uniform01(rng) * bb.width(), bb.lo.y + uniform01(rng) * bb.height()};
    const double r = 0.9 * reach * uniform01(rng);
    const double th = 2.0 * std::numbers::pi * uniform01(rng);
    const Vec2 y{x.x + r * std::cos(th), x.y + r * std::sin(th)};
    if (r > 0.0 && d.contains(x) && d.contains(y)) pairs.emplace_back(x, y);
  }
  const CigarReport rep = check_cigar(d, pairs, eps, k_target, c.depth);
  Csv out("cigar.csv", "x0,x1,y0,y1,best_eps,excursion,curve,pass");
  std::size_t passed = 0;
  for (const auto& pr : rep.pairs) {
    out.row(pr.x.x, pr.x.y, pr.y.x, pr.y.y, pr.best_eps, pr.excursion, pr.curve, pr.status == CigarStatus::Pass);
    if (pr.status == CigarStatus::Pass) ++passed;
  }
  std::ostringstream det;
  det << passed << "/" << rep.pairs.size() << " pairs certified at eps " << eps << " with excursion <= " << k_target;
  b.summary.push_back({0, "cigar-condition", rep.status == CigarStatus::Pass, det.str()});
  b.tables = {out.table()};
}

}  // namespace fracsob::detail
