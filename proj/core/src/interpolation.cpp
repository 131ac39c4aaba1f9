#include "fracsob/interpolation.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracsob/error.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/parallel.hpp"

namespace fracsob {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::vector<double> dyadic_grid(int J) {
  std::vector<double> t;
  for (int j = -J; j <= J; ++j) t.push_back(std::ldexp(1.0, j));
  return t;
}

void check_p(double p, const char* op) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw Error(ErrorCode::InvalidParameters, "interpolation", op, "p must lie in (1, inf)");
}

// Smoothed ||f - g||_p + t (||g||_p + ||grad g||_p) on Omega nodes.
class SmoothedObjective final : public ceres::FirstOrderFunction {
 public:
  SmoothedObjective(const OperatorMatrix& op, const Eigen::VectorXd& f, double t, double p, double eps)
      : op_(op), f_(f), t_(t), p_(p), eps2_(eps * eps) {}

  int NumParameters() const override { return op_.dimension; }

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    const int n = op_.dimension;
    const double h = op_.spec.h;
    const double h2 = h * h;
    double s_r = 0.0, s_g = 0.0, s_d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = f_[i] - x[i];
      s_r += std::pow(r * r + eps2_, 0.5 * p_);
      s_g += std::pow(x[i] * x[i] + eps2_, 0.5 * p_);
    }
    for (const Face& fc : op_.faces) {
      const double d = fc.j >= 0 ? (x[fc.i] - x[fc.j]) / h : 2.0 * x[fc.i] / h;
      const double w = fc.j >= 0 ? fc.a * h2 : 0.5 * fc.a * h2;
      s_d += w * std::pow(d * d + eps2_, 0.5 * p_);
    }
    s_r *= h2;
    s_g *= h2;
    const double nr = std::pow(s_r, 1.0 / p_);
    const double ng = std::pow(s_g, 1.0 / p_);
    const double nd = std::pow(s_d, 1.0 / p_);
    *cost = nr + t_ * (ng + nd);
    if (!std::isfinite(*cost)) return false;
    if (gradient) {
      const double cr = std::pow(nr, 1.0 - p_) * h2;
      const double cg = t_ * std::pow(ng, 1.0 - p_) * h2;
      for (int i = 0; i < n; ++i) {
        const double r = f_[i] - x[i];
        gradient[i] = -cr * std::pow(r * r + eps2_, 0.5 * p_ - 1.0) * r +
                      cg * std::pow(x[i] * x[i] + eps2_, 0.5 * p_ - 1.0) * x[i];
      }
      const double cd = t_ * std::pow(nd, 1.0 - p_);
      for (const Face& fc : op_.faces) {
        const double w = fc.j >= 0 ? fc.a * h2 : 0.5 * fc.a * h2;
        if (fc.j >= 0) {
          const double d = (x[fc.i] - x[fc.j]) / h;
          const double g = cd * w * std::pow(d * d + eps2_, 0.5 * p_ - 1.0) * d / h;
          gradient[fc.i] += g;
          gradient[fc.j] -= g;
        } else {
          const double d = 2.0 * x[fc.i] / h;
          gradient[fc.i] += cd * w * std::pow(d * d + eps2_, 0.5 * p_ - 1.0) * d * 2.0 / h;
        }
      }
    }
    return true;
  }

 private:
  const OperatorMatrix& op_;
  const Eigen::VectorXd& f_;
  double t_;
  double p_;
  double eps2_;
};

}  // namespace

KSolver::KSolver(std::shared_ptr<const Spectrum> spectrum, KSolverOptions options)
    : spectrum_(std::move(spectrum)), options_(options) {
  if (!spectrum_ || !spectrum_->op)
    throw Error(ErrorCode::InconsistentInputs, "interpolation", "k_functional", "spectrum without operator");
}

double KSolver::norm_p(const Eigen::VectorXd& u, double p) const {
  const double h2 = op().spec.h * op().spec.h;
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), p);
  return std::pow(s * h2, 1.0 / p);
}

double KSolver::norm_1p(const Eigen::VectorXd& u, double p) const { return norm_p(u, p) + op().gradient_norm(u, p); }

// Stationarity of ||c - g|| + t ||g|| + t ||nu^{1/2} g|| forces g_k = c_k / (1 + alpha + beta nu_k)
// with alpha, beta >= 0, so a 2-parameter search is exact up to the search resolution.
std::vector<KSolver::Candidate> KSolver::spectral_candidates(const Eigen::VectorXd& c, const std::vector<double>& ts,
                                                             std::vector<double>* residuals,
                                                             std::vector<Eigen::VectorXd>* best) const {
  const Spectrum& sp = *spectrum_;
  const double h = op().spec.h;
  const Eigen::Index n = c.size();
  Eigen::VectorXd nu = sp.values.cwiseMax(0.0);
  Eigen::VectorXd c2 = c.cwiseAbs2();

  auto eval = [&](double la, double lb) {
    const double alpha = std::pow(10.0, la), beta = std::pow(10.0, lb);
    double ra = 0.0, rg = 0.0, rd = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double q = alpha + beta * nu[k];
      const double den = 1.0 + q;
      const double g2 = c2[k] / (den * den);
      ra += c2[k] * (q / den) * (q / den);
      rg += g2;
      rd += nu[k] * g2;
    }
    return Candidate{h * std::sqrt(ra), h * (std::sqrt(rg) + std::sqrt(rd))};
  };

  const int m = std::max(3, options_.grid_points);
  const double a_lo = -10.0, a_hi = 10.0, b_lo = -14.0, b_hi = 8.0;
  const double da = (a_hi - a_lo) / (m - 1), db = (b_hi - b_lo) / (m - 1);
  std::vector<Candidate> grid(static_cast<size_t>(m * m));
  parallel_for(grid.size(), [&](size_t k) {
    grid[k] = eval(a_lo + da * static_cast<double>(k / static_cast<size_t>(m)),
                   b_lo + db * static_cast<double>(k % static_cast<size_t>(m)));
  });

  std::vector<std::vector<Candidate>> found(ts.size());
  std::vector<double> res(ts.size(), 0.0);
  std::vector<std::pair<double, double>> arg(ts.size());
  parallel_for(ts.size(), [&](size_t ti) {
    const double t = ts[ti];
    size_t bi = 0;
    for (size_t k = 1; k < grid.size(); ++k)
      if (grid[k].a + t * grid[k].b < grid[bi].a + t * grid[bi].b) bi = k;
    double x = a_lo + da * static_cast<double>(bi / static_cast<size_t>(m));
    double y = b_lo + db * static_cast<double>(bi % static_cast<size_t>(m));
    Candidate cur = grid[bi];
    double val = cur.a + t * cur.b;
    double sx = da, sy = db;
    double spread = 0.0;
    while (sx > 1e-9) {
      bool moved = false;
      double worst = val;
      for (int ix = -1; ix <= 1; ++ix)
        for (int iy = -1; iy <= 1; ++iy) {
          if (ix == 0 && iy == 0) continue;
          const double nx = std::clamp(x + ix * sx, 2.0 * a_lo, 2.0 * a_hi);
          const double ny = std::clamp(y + iy * sy, 2.0 * b_lo, 2.0 * b_hi);
          const Candidate cand = eval(nx, ny);
          const double v = cand.a + t * cand.b;
          worst = std::max(worst, v);
          if (v < val) {
            val = v;
            cur = cand;
            x = nx;
            y = ny;
            moved = true;
          }
        }
      spread = (worst - val) / std::max(val, 1e-300);
      if (!moved) {
        sx *= 0.5;
        sy *= 0.5;
      } else {
        found[ti].push_back(cur);
      }
    }
    found[ti].push_back(cur);
    res[ti] = spread;
    arg[ti] = {x, y};
  });

  std::vector<Candidate> pool = grid;
  for (const auto& f : found) pool.insert(pool.end(), f.begin(), f.end());
  if (residuals) *residuals = res;
  if (best) {
    best->clear();
    for (const auto& [x, y] : arg) {
      const double alpha = std::pow(10.0, x), beta = std::pow(10.0, y);
      Eigen::VectorXd g(n);
      for (Eigen::Index k = 0; k < n; ++k) g[k] = c[k] / (1.0 + alpha + beta * nu[k]);
      best->push_back(sp.vectors * g);
    }
  }
  return pool;
}

KSolver::Candidate KSolver::general_candidate(const Eigen::VectorXd& u, const Eigen::VectorXd& start, double t,
                                              double p, double* residual) const {
  Eigen::VectorXd x = start;
  ceres::GradientProblem problem(new SmoothedObjective(op(), u, t, p, options_.smoothing));
  ceres::GradientProblemSolver::Options opts;
  opts.line_search_direction_type = ceres::LBFGS;
  opts.max_num_iterations = options_.max_iterations;
  opts.function_tolerance = 1e-12;
  opts.gradient_tolerance = 1e-14;
  opts.parameter_tolerance = 1e-14;
  opts.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opts, problem, x.data(), &summary);
  if (summary.termination_type == ceres::FAILURE || !std::isfinite(summary.final_cost))
    throw Error(ErrorCode::SolverDiverged, "interpolation", "k_functional", summary.message);
  double rel = 0.0;
  const auto& it = summary.iterations;
  if (it.size() >= 2) {
    const double last = it.back().cost, prev = it[it.size() - 2].cost;
    rel = std::abs(prev - last) / std::max(std::abs(last), 1e-300);
  }
  if (summary.termination_type == ceres::NO_CONVERGENCE && rel > options_.tolerance)
    throw Error(ErrorCode::SolverDiverged, "interpolation", "k_functional", "relative tolerance not met");
  if (residual) *residual = rel;
  return {norm_p(u - x, p), norm_1p(x, p)};
}

KProfile KSolver::profile(const GridFunction& f, double p, int J, const std::string& f_id) const {
  check_p(p, "k_functional");
  if (J < 0) throw Error(ErrorCode::InvalidParameters, "interpolation", "k_functional", "J must be nonnegative");
  if (!(f.spec == op().spec))
    throw Error(ErrorCode::InconsistentInputs, "interpolation", "k_functional", "grid does not match the operator");
  KProfile prof;
  prof.f_id = f_id;
  prof.t_grid = dyadic_grid(J);
  const Eigen::VectorXd u = op().to_nodes(f);
  prof.f_norm = norm_p(u, p);
  prof.f_norm1 = norm_1p(u, p);
  const Eigen::VectorXd c = spectrum_->vectors.transpose() * u;

  std::vector<Candidate> pool;
  std::vector<Eigen::VectorXd> warm;
  if (p == 2.0) {
    pool = spectral_candidates(c, prof.t_grid, &prof.solver_residuals, nullptr);
  } else {
    spectral_candidates(c, prof.t_grid, nullptr, &warm);
    const size_t nt = prof.t_grid.size();
    std::vector<Candidate> solved(nt), warm_eval(nt);
    prof.solver_residuals.assign(nt, 0.0);
    parallel_for(nt, [&](size_t k) {
      warm_eval[k] = {norm_p(u - warm[k], p), norm_1p(warm[k], p)};
      solved[k] = general_candidate(u, warm[k], prof.t_grid[k], p, &prof.solver_residuals[k]);
    });
    pool.insert(pool.end(), warm_eval.begin(), warm_eval.end());
    pool.insert(pool.end(), solved.begin(), solved.end());
  }
  pool.push_back({prof.f_norm, 0.0});
  pool.push_back({0.0, prof.f_norm1});
  for (double t : prof.t_grid) {
    double k = kInf;
    for (const Candidate& cd : pool) k = std::min(k, cd.a + t * cd.b);
    prof.k_values.push_back(k);
  }
  return prof;
}

double KSolver::k_functional(const GridFunction& f, double t, double p) const {
  check_p(p, "k_functional");
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidParameters, "interpolation", "k_functional", "t must be positive");
  if (!(f.spec == op().spec))
    throw Error(ErrorCode::InconsistentInputs, "interpolation", "k_functional", "grid does not match the operator");
  const Eigen::VectorXd u = op().to_nodes(f);
  const Eigen::VectorXd c = spectrum_->vectors.transpose() * u;
  std::vector<Candidate> pool;
  if (p == 2.0) {
    pool = spectral_candidates(c, {t}, nullptr, nullptr);
  } else {
    std::vector<Eigen::VectorXd> warm;
    spectral_candidates(c, {t}, nullptr, &warm);
    pool.push_back({norm_p(u - warm[0], p), norm_1p(warm[0], p)});
    pool.push_back(general_candidate(u, warm[0], t, p, nullptr));
  }
  pool.push_back({norm_p(u, p), 0.0});
  pool.push_back({0.0, norm_1p(u, p)});
  double k = kInf;
  for (const Candidate& cd : pool) k = std::min(k, cd.a + t * cd.b);
  return k;
}

double k_functional(const GridFunction& f, double t, double p, const KSolver& solver) {
  return solver.k_functional(f, t, p);
}

double interpolation_norm_from_profile(const KProfile& pr, double s, double p) {
  double sum = 0.0;
  for (size_t j = 0; j < pr.t_grid.size(); ++j) sum += std::pow(std::pow(pr.t_grid[j], -s) * pr.k_values[j], p);
  return std::pow(sum * kLn2, 1.0 / p) + pr.f_norm;
}

InterpolationNorm interpolation_norm(const GridFunction& f, double s, double p, int J, const KSolver& solver) {
  if (!(s > 0.0 && s < 1.0))
    throw Error(ErrorCode::InvalidParameters, "interpolation", "interpolation_norm", "s must lie in (0, 1)");
  InterpolationNorm out;
  out.profile = solver.profile(f, p, J);
  const auto& pr = out.profile;
  out.value = interpolation_norm_from_profile(pr, s, p);
  // Envelope tails: K <= ||f||_p for j > J and K <= t ||f||_{1,p} for j < -J, both geometric.
  const double q_hi = std::pow(2.0, -s * p), q_lo = std::pow(2.0, -(1.0 - s) * p);
  const double hi = std::pow(pr.f_norm, p) * std::pow(q_hi, J + 1) / (1.0 - q_hi);
  const double lo = std::pow(pr.f_norm1, p) * std::pow(q_lo, J + 1) / (1.0 - q_lo);
  out.tail_estimate = std::pow((hi + lo) * kLn2, 1.0 / p);
  return out;
}

EquivalenceReport equivalence_report(const std::vector<GridFunction>& family, double s, double p,
                                     const DomainModel& domain, const KSolver& solver, int J, double budget) {
  if (family.empty())
    throw Error(ErrorCode::InvalidParameters, "interpolation", "equivalence_report", "empty family");
  EquivalenceReport rep;
  rep.s = s;
  rep.p = p;
  rep.budget = budget;
  const size_t m = family.size();
  rep.ratios.resize(m);
  rep.interpolation.resize(m);
  rep.weighted.resize(m);
  for (size_t k = 0; k < m; ++k) {
    const double w = weighted_sobolev_norms(family[k], domain, {{s, p}}).front().total();
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::DegenerateFamilyMember, "interpolation", "equivalence_report",
                  "member " + std::to_string(k) + " has zero or infinite weighted norm");
    rep.weighted[k] = w;
    rep.interpolation[k] = interpolation_norm(family[k], s, p, J, solver).value;
    rep.ratios[k] = rep.interpolation[k] / w;
  }
  rep.min_ratio = *std::min_element(rep.ratios.begin(), rep.ratios.end());
  rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.spread = rep.max_ratio / rep.min_ratio;
  rep.pass = rep.spread <= budget;
  return rep;
}

std::string profile_csv(const std::vector<KProfile>& profiles) {
  std::ostringstream out;
  out.precision(15);
  out << "f_id,t,k,residual,f_norm,f_norm1\n";
  for (const auto& pr : profiles)
    for (size_t j = 0; j < pr.t_grid.size(); ++j)
      out << pr.f_id << ',' << pr.t_grid[j] << ',' << pr.k_values[j] << ','
          << (j < pr.solver_residuals.size() ? pr.solver_residuals[j] : 0.0) << ',' << pr.f_norm << ',' << pr.f_norm1
          << '\n';
  return out.str();
}

std::string equivalence_csv(const EquivalenceReport& report) {
  std::ostringstream out;
  out.precision(15);
  out << "member,s,p,interpolation,weighted,ratio\n";
  for (size_t k = 0; k < report.ratios.size(); ++k)
    out << k << ',' << report.s << ',' << report.p << ',' << report.interpolation[k] << ',' << report.weighted[k] << ','
        << report.ratios[k] << '\n';
  return out.str();
}

}  // namespace fracsob
