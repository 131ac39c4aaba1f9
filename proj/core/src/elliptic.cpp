#include "fracsob/elliptic.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracsob/error.hpp"
#include "fracsob/norms.hpp"
#include "fracsob/parallel.hpp"

namespace fracsob {

CoefficientField CoefficientField::identity() { return {}; }

CoefficientField CoefficientField::anisotropic() {
  return {"anisotropic", [](Vec2) { return Mat2{1.0, 0.0, 4.0}; }};
}

CoefficientField CoefficientField::checkerboard() {
  return {"checkerboard", [](Vec2 x) {
            const long a = static_cast<long>(std::floor(4.0 * x.x));
            const long b = static_cast<long>(std::floor(4.0 * x.y));
            const double v = ((a + b) % 2 == 0) ? 1.0 : 10.0;
            return Mat2{v, 0.0, v};
          }};
}

CoefficientField CoefficientField::by_name(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "anisotropic") return anisotropic();
  if (name == "checkerboard") return checkerboard();
  throw Error(ErrorCode::ConfigError, "elliptic", "assemble_dirichlet_form", "unknown coefficient field " + name);
}

Eigen::SparseMatrix<double> OperatorMatrix::operator_l() const {
  return stiffness / (spec.h * spec.h);
}

Eigen::VectorXd OperatorMatrix::to_nodes(const GridFunction& f) const {
  Eigen::VectorXd u(dimension);
  for (int k = 0; k < dimension; ++k) u[k] = f.values[cell_of_node[static_cast<size_t>(k)]];
  return u;
}

GridFunction OperatorMatrix::to_grid(const Eigen::VectorXd& u, const std::vector<CellMask>& mask) const {
  GridFunction f;
  f.spec = spec;
  f.mask = mask;
  f.values.assign(spec.size(), 0.0);
  for (int k = 0; k < dimension; ++k) f.values[cell_of_node[static_cast<size_t>(k)]] = u[k];
  return f;
}

double OperatorMatrix::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return spec.h * spec.h * u.dot(v);
}

double OperatorMatrix::gradient_norm(const Eigen::VectorXd& u, double p) const {
  const double h = spec.h;
  double sum = 0.0;
  for (const Face& f : faces) {
    if (f.j >= 0) {
      sum += f.a * std::pow(std::abs(u[f.i] - u[f.j]) / h, p) * h * h;
    } else {
      sum += f.a * std::pow(2.0 * std::abs(u[f.i]) / h, p) * 0.5 * h * h;
    }
  }
  return std::pow(sum, 1.0 / p);
}

OperatorMatrix assemble_dirichlet_form(const DomainModel& domain, const CoefficientField& field, double h) {
  OperatorMatrix op;
  op.spec = GridSpec::make(domain.window(), h);
  op.coefficient = field.name;
  double min_edge = kInf;
  for (const auto& ring : domain.rings())
    for (size_t i = 0; i < ring.size(); ++i) min_edge = std::min(min_edge, distance(ring[i], ring[(i + 1) % ring.size()]));
  if (min_edge < 4.0 * h)
    throw Error(ErrorCode::ResolutionTooCoarse, "elliptic", "assemble_dirichlet_form",
                "fewer than 4 cells across the shortest boundary edge");

  const auto mask = classify_cells(domain, op.spec);
  op.node_of_cell.assign(op.spec.size(), -1);
  for (size_t k = 0; k < op.spec.size(); ++k)
    if (mask[k] == CellMask::Interior) {
      op.node_of_cell[k] = static_cast<int>(op.cell_of_node.size());
      op.cell_of_node.push_back(k);
    }
  op.dimension = static_cast<int>(op.cell_of_node.size());
  op.tags.assign(op.cell_of_node.size(), NodeTag::Free);

  std::vector<Mat2> coef(op.cell_of_node.size());
  op.ellipticity = kInf;
  for (size_t v = 0; v < coef.size(); ++v) {
    const Mat2 a = field.at(op.spec.center(op.cell_of_node[v]));
    if (a.xy != 0.0)
      throw Error(ErrorCode::InvalidParameters, "elliptic", "assemble_dirichlet_form",
                  "off-diagonal coefficients are not supported by the five-point stencil");
    const double lam = std::min(a.xx, a.yy);
    if (!(lam > 0.0) || !std::isfinite(a.xx) || !std::isfinite(a.yy))
      throw Error(ErrorCode::EllipticityViolated, "elliptic", "assemble_dirichlet_form", "coefficient not elliptic");
    op.ellipticity = std::min(op.ellipticity, lam);
    coef[v] = a;
  }

  const SegmentSet& bnd = domain.boundary_set();
  const SegmentSet& dset = domain.d_set();
  const double tol = 1e-12 * std::max(1.0, domain.diameter());
  std::vector<Eigen::Triplet<double>> trip;
  const int n = op.spec.n;
  for (int v = 0; v < op.dimension; ++v) {
    const size_t k = op.cell_of_node[static_cast<size_t>(v)];
    const int ci = static_cast<int>(k % static_cast<size_t>(n));
    const int cj = static_cast<int>(k / static_cast<size_t>(n));
    const Vec2 c = op.spec.center(ci, cj);
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int dir = 0; dir < 4; ++dir) {
      const int ni = ci + di[dir], nj = cj + dj[dir];
      const bool x_face = dir < 2;
      const double a_self = x_face ? coef[static_cast<size_t>(v)].xx : coef[static_cast<size_t>(v)].yy;
      const Segment seg{c, op.spec.center(ni, nj)};
      const bool crosses = bnd.dist(seg) <= tol;
      int w = -1;
      if (ni >= 0 && nj >= 0 && ni < n && nj < n) w = op.node_of_cell[op.spec.index(ni, nj)];
      if (w >= 0 && !crosses) {
        if (w < v) continue;  // each interior face once
        const double a_other = x_face ? coef[static_cast<size_t>(w)].xx : coef[static_cast<size_t>(w)].yy;
        const double a = 0.5 * (a_self + a_other);
        op.faces.push_back({v, w, a});
        trip.emplace_back(v, v, a);
        trip.emplace_back(w, w, a);
        trip.emplace_back(v, w, -a);
        trip.emplace_back(w, v, -a);
      } else if (!dset.empty() && dset.dist(seg) <= tol) {
        op.faces.push_back({v, -1, a_self});
        trip.emplace_back(v, v, 2.0 * a_self);
        op.tags[static_cast<size_t>(v)] = NodeTag::DirichletFace;
      } else if (op.tags[static_cast<size_t>(v)] == NodeTag::Free) {
        op.tags[static_cast<size_t>(v)] = NodeTag::NeumannFace;
      }
    }
  }
  op.stiffness.resize(op.dimension, op.dimension);
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.stiffness.makeCompressed();
  return op;
}

namespace {

Spectrum decompose_dense(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  if (n > kDenseBudget)
    throw Error(ErrorCode::DimensionBudgetExceeded, "elliptic", "spectral_decompose", "dimension above the dense budget");
  // Single-threaded BLAS keeps the factorisation independent of the worker count.
  openblas_set_num_threads(1);
  Spectrum s;
  s.values.resize(n);
  if (n > 0) {
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, s.values.data());
    if (info != 0)
      throw Error(ErrorCode::SolverDiverged, "elliptic", "spectral_decompose", "dsyevd failed, info " + std::to_string(info));
  }
  s.vectors = std::move(a);
  s.operator_norm = n > 0 ? std::max(std::abs(s.values[0]), std::abs(s.values[n - 1])) : 0.0;
  return s;
}

void check_residuals(const Spectrum& s) {
  if (s.residuals.size() == 0) return;
  const double tol = 1e-8 * std::max(1.0, s.operator_norm);
  if (!(s.residuals.maxCoeff() <= tol))
    throw Error(ErrorCode::SolverDiverged, "elliptic", "spectral_decompose",
                "eigenpair residual above tolerance; the BLAS kernels may be faulty on this CPU "
                "(try OPENBLAS_CORETYPE=Haswell)");
}

}  // namespace

Spectrum spectral_decompose(std::shared_ptr<const OperatorMatrix> op) {
  if (op->dimension > kDenseBudget)
    throw Error(ErrorCode::DimensionBudgetExceeded, "elliptic", "spectral_decompose", "dimension above the dense budget");
  const Eigen::SparseMatrix<double> l = op->operator_l();
  Spectrum s = decompose_dense(Eigen::MatrixXd(l));
  const Eigen::MatrixXd lv = l * s.vectors;
  s.residuals = (lv - s.vectors * s.values.asDiagonal()).colwise().norm().transpose();
  check_residuals(s);
  s.op = std::move(op);
  return s;
}

Spectrum spectral_decompose_matrix(const Eigen::MatrixXd& m) {
  Spectrum s = decompose_dense(m);
  s.residuals = ((m * s.vectors) - s.vectors * s.values.asDiagonal()).colwise().norm().transpose();
  check_residuals(s);
  return s;
}

namespace {

Eigen::VectorXd spectral_apply(const Spectrum& spec, const Eigen::VectorXd& f, const std::function<double(double)>& g) {
  Eigen::VectorXd c = spec.vectors.transpose() * f;
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= g(spec.values[k]);
  return spec.vectors * c;
}

}  // namespace

Eigen::VectorXd fractional_power_apply(const Spectrum& spec, double order, const Eigen::VectorXd& f) {
  if (!(order >= 0.0))
    throw Error(ErrorCode::InvalidParameters, "elliptic", "fractional_power_apply", "order must be nonnegative");
  return spectral_apply(spec, f, [order](double lam) {
    const double l = std::max(lam, 0.0);
    return order == 0.0 ? 1.0 : std::pow(l, order);
  });
}

Eigen::VectorXd heat_apply(const Spectrum& spec, double t, const Eigen::VectorXd& f) {
  return spectral_apply(spec, f, [t](double lam) { return std::exp(-t * lam); });
}

Eigen::MatrixXd heat_kernel(const Spectrum& spec, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidParameters, "elliptic", "heat_kernel", "t must be positive");
  const int n = static_cast<int>(spec.values.size());
  const double h2 = spec.op ? spec.op->spec.h * spec.op->spec.h : 1.0;
  Eigen::MatrixXd w = spec.vectors;
  for (int k = 0; k < n; ++k) w.col(k) *= std::exp(-0.5 * t * spec.values[k]);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  openblas_set_num_threads(1);
  if (n > 0) cblas_dsyrk(CblasColMajor, CblasUpper, CblasNoTrans, n, n, 1.0 / h2, w.data(), n, 0.0, p.data(), n);
  for (int j = 0; j < n; ++j)
    for (int i = j + 1; i < n; ++i) p(i, j) = p(j, i);
  return p;
}

HeatKernelReport heat_kernel_report(const Spectrum& spec, const std::vector<double>& times) {
  HeatKernelReport rep;
  rep.times = times;
  rep.min_relative = kInf;
  rep.min_row_mass = kInf;
  const auto& op = *spec.op;
  const int n = op.dimension;
  std::vector<Vec2> pos(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) pos[static_cast<size_t>(k)] = op.spec.center(op.cell_of_node[static_cast<size_t>(k)]);
  const std::vector<double> bs{1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 3.0 / 16, 1.0 / 4};
  const std::vector<double> ws{0.0, 0.5, 1.0, 2.0};
  std::vector<double> cmax(bs.size() * ws.size(), 0.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (double t : times) {
    const Eigen::MatrixXd p = heat_kernel(spec, t);
    for (int j = 0; j < n && rep.symmetric; ++j)
      for (int i = 0; i < n; ++i)
        if (p(i, j) != p(j, i)) {
          rep.symmetric = false;
          break;
        }
    const double mx = p.maxCoeff();
    rep.min_relative = std::min(rep.min_relative, p.minCoeff() / mx);
    const Eigen::VectorXd mass = p * ones * (op.spec.h * op.spec.h);
    rep.max_row_mass = std::max(rep.max_row_mass, mass.maxCoeff());
    rep.min_row_mass = std::min(rep.min_row_mass, mass.minCoeff());
    for (size_t bi = 0; bi < bs.size(); ++bi)
      for (size_t wi = 0; wi < ws.size(); ++wi) {
        double c = 0.0;
        const double shift = -ws[wi] * t;
        for (int j = 0; j < n; ++j)
          for (int i = 0; i <= j; ++i) {
            const double v = p(i, j);
            if (v <= 0.0) continue;
            const Vec2 d = pos[static_cast<size_t>(i)] - pos[static_cast<size_t>(j)];
            c = std::max(c, v * t * std::exp(bs[bi] * dot(d, d) / t + shift));
          }
        double& slot = cmax[bi * ws.size() + wi];
        slot = std::max(slot, c);
      }
  }
  // Largest feasible b; among those the smallest c.
  bool any = false;
  GaussianFit best;
  GaussianFit fallback{kInf, 0.0, 0.0, false};
  for (size_t bi = 0; bi < bs.size(); ++bi)
    for (size_t wi = 0; wi < ws.size(); ++wi) {
      const double c = cmax[bi * ws.size() + wi];
      if (c < fallback.c) fallback = {c, bs[bi], ws[wi], false};
      if (c > kGaussianBudget) continue;
      if (!any || bs[bi] > best.b || (bs[bi] == best.b && c < best.c)) {
        best = {c, bs[bi], ws[wi], true};
        any = true;
      }
    }
  rep.fit = any ? best : fallback;
  return rep;
}

std::vector<Eigen::VectorXd> mild_solution(const Spectrum& spec, const std::vector<Eigen::VectorXd>& forcing, double T) {
  if (forcing.empty() || !(T > 0.0))
    throw Error(ErrorCode::InvalidParameters, "elliptic", "mild_solution", "need a positive horizon and at least one step");
  const double dt = T / static_cast<double>(forcing.size());
  const Eigen::Index n = spec.values.size();
  Eigen::VectorXd decay(n), gain(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = spec.values[k];
    decay[k] = std::exp(-lam * dt);
    gain[k] = std::abs(lam * dt) < 1e-12 ? dt : -std::expm1(-lam * dt) / lam;
  }
  std::vector<Eigen::VectorXd> traj;
  traj.reserve(forcing.size() + 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  traj.push_back(Eigen::VectorXd::Zero(n));
  for (const auto& f : forcing) {
    const Eigen::VectorXd fc = spec.vectors.transpose() * f;
    c = decay.cwiseProduct(c) + gain.cwiseProduct(fc);
    traj.push_back(spec.vectors * c);
  }
  return traj;
}

MaxRegularity max_regularity_ratio(const Spectrum& spec, const std::vector<Eigen::VectorXd>& forcing, double p, double T) {
  if (!(p >= 1.0)) throw Error(ErrorCode::NonpositiveP, "elliptic", "max_regularity_ratio", "p must lie in [1, inf)");
  const double h2 = spec.op ? spec.op->spec.h * spec.op->spec.h : 1.0;
  const double dt = T / static_cast<double>(forcing.size());
  const auto traj = mild_solution(spec, forcing, T);
  double fs = 0.0, us = 0.0, ls = 0.0;
  for (size_t i = 0; i < forcing.size(); ++i) {
    const Eigen::VectorXd c = spec.vectors.transpose() * traj[i + 1];
    const Eigen::VectorXd lu = spec.vectors * spec.values.cwiseProduct(c);
    const Eigen::VectorXd ut = forcing[i] - lu;
    for (Eigen::Index k = 0; k < lu.size(); ++k) {
      fs += std::pow(std::abs(forcing[i][k]), p);
      us += std::pow(std::abs(ut[k]), p);
      ls += std::pow(std::abs(lu[k]), p);
    }
  }
  MaxRegularity r;
  r.f_norm = std::pow(fs * h2 * dt, 1.0 / p);
  if (!(r.f_norm > 0.0)) throw Error(ErrorCode::ZeroForcing, "elliptic", "max_regularity_ratio", "forcing is zero");
  r.ut_norm = std::pow(us * h2 * dt, 1.0 / p);
  r.lu_norm = std::pow(ls * h2 * dt, 1.0 / p);
  r.ratio = (r.ut_norm + r.lu_norm) / r.f_norm;
  return r;
}

DomainCharacterization domain_characterization_report(const Spectrum& spec, const std::vector<GridFunction>& family,
                                                      double s, const DomainModel& domain, double budget) {
  if (!(s > 0.0 && s <= 1.0))
    throw Error(ErrorCode::InvalidParameters, "elliptic", "domain_characterization_report", "s must lie in (0, 1]");
  const auto& op = *spec.op;
  DomainCharacterization rep;
  rep.budget = budget;
  rep.ratios.resize(family.size());
  parallel_for(family.size(), [&](size_t m) {
    const GridFunction& f = family[m];
    const Eigen::VectorXd u = op.to_nodes(f);
    const Eigen::VectorXd lu = fractional_power_apply(spec, 0.5 * s, u);
    const double num = std::sqrt(op.inner(lu, lu)) + std::sqrt(op.inner(u, u));
    double den = 0.0;
    if (s < 1.0) {
      den = weighted_sobolev_norms(f, domain, {{s, 2.0}}).front().total();
    } else {
      den = sobolev1_norm(f, 2.0).value + lp_norm(f, 2.0, Region::Omega, DistanceWeight{&domain, 1.0}).value;
    }
    if (!(den > 0.0) || !std::isfinite(den))
      throw Error(ErrorCode::DegenerateFamilyMember, "elliptic", "domain_characterization_report",
                  "member " + std::to_string(m) + " has zero or infinite norm");
    rep.ratios[m] = num / den;
  });
  if (rep.ratios.empty()) return rep;
  rep.min_ratio = *std::min_element(rep.ratios.begin(), rep.ratios.end());
  rep.max_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.spread = rep.max_ratio / rep.min_ratio;
  rep.pass = rep.spread <= budget;
  return rep;
}

std::string spectrum_csv(const Spectrum& spec, int modes) {
  std::ostringstream out;
  out.precision(15);
  out << "mode,eigenvalue,residual\n";
  const Eigen::Index m = std::min<Eigen::Index>(modes, spec.values.size());
  for (Eigen::Index k = 0; k < m; ++k) out << k << ',' << spec.values[k] << ',' << spec.residuals[k] << '\n';
  return out.str();
}

}  // namespace fracsob
