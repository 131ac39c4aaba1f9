#include "fracsob/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracsob/error.hpp"
#include "fracsob/parallel.hpp"

namespace fracsob {

namespace {

void check_p(double p, const char* op) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::NonpositiveP, "norms", op, "p must lie in [1, inf)");
}

bool in_region(const GridFunction& f, size_t k, Region region) {
  return region == Region::Window || f.mask[k] == CellMask::Interior;
}

enum class PowKind { One, OneHalf, Two, Three, General };

PowKind pow_kind(double p) {
  if (p == 1.0) return PowKind::One;
  if (p == 1.5) return PowKind::OneHalf;
  if (p == 2.0) return PowKind::Two;
  if (p == 3.0) return PowKind::Three;
  return PowKind::General;
}

inline double abs_pow(double a, PowKind kind, double p) {
  switch (kind) {
    case PowKind::One: return a;
    case PowKind::OneHalf: return a * std::sqrt(a);
    case PowKind::Two: return a * a;
    case PowKind::Three: return a * a * a;
    default: return std::pow(a, p);
  }
}

// integral of |cos theta|^p over the circle.
double angular_moment(double p) {
  return 2.0 * std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (p + 1.0)) / std::tgamma(0.5 * p + 1.0);
}

// Region cells copied into their bounding index box.
struct Patch {
  int i0 = 0, j0 = 0, w = 0, hgt = 0;
  std::vector<double> val;
  std::vector<double> in;
  size_t cells = 0;
};

Patch make_patch(const GridFunction& f, Region region) {
  const int n = f.spec.n;
  int i0 = n, i1 = -1, j0 = n, j1 = -1;
  size_t cells = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (in_region(f, f.spec.index(i, j), region)) {
        i0 = std::min(i0, i);
        i1 = std::max(i1, i);
        j0 = std::min(j0, j);
        j1 = std::max(j1, j);
        ++cells;
      }
  Patch pt;
  pt.cells = cells;
  if (cells == 0) return pt;
  pt.i0 = i0;
  pt.j0 = j0;
  pt.w = i1 - i0 + 1;
  pt.hgt = j1 - j0 + 1;
  pt.val.assign(static_cast<size_t>(pt.w) * static_cast<size_t>(pt.hgt), 0.0);
  pt.in.assign(pt.val.size(), 0.0);
  for (int j = 0; j < pt.hgt; ++j)
    for (int i = 0; i < pt.w; ++i) {
      const size_t k = f.spec.index(i0 + i, j0 + j);
      if (!in_region(f, k, region)) continue;
      const size_t l = static_cast<size_t>(j) * static_cast<size_t>(pt.w) + static_cast<size_t>(i);
      pt.val[l] = f.values[k];
      pt.in[l] = 1.0;
    }
  return pt;
}

// For each distinct p: sums of |f(x) - f(x+o)|^p over region pairs, one entry per offset o with
// o.x > 0, or o.x = 0 and o.y > 0. Offsets are enumerated dx-major, dy ascending.
struct OffsetSums {
  int w = 0, hgt = 0;
  std::vector<double> ps;
  std::vector<std::vector<double>> sums;  // [p index][offset index]
  size_t offset_index(int dx, int dy) const {
    return static_cast<size_t>(dx) * static_cast<size_t>(2 * hgt - 1) + static_cast<size_t>(dy + hgt - 1);
  }
};

OffsetSums offset_sums(const Patch& pt, const std::vector<double>& ps) {
  OffsetSums os;
  os.w = pt.w;
  os.hgt = pt.hgt;
  os.ps = ps;
  const size_t n_off = static_cast<size_t>(pt.w) * static_cast<size_t>(2 * pt.hgt - 1);
  os.sums.assign(ps.size(), std::vector<double>(n_off, 0.0));
  std::vector<PowKind> kinds;
  for (double p : ps) kinds.push_back(pow_kind(p));
  const size_t np = ps.size();
  parallel_for(static_cast<size_t>(pt.w), [&](size_t dxs) {
    const int dx = static_cast<int>(dxs);
    std::vector<double> acc(np);
    for (int dy = -(pt.hgt - 1); dy <= pt.hgt - 1; ++dy) {
      if (dx == 0 && dy <= 0) continue;
      std::fill(acc.begin(), acc.end(), 0.0);
      const int ya = std::max(0, -dy);
      const int yb = std::min(pt.hgt, pt.hgt - dy);
      for (int y = ya; y < yb; ++y) {
        const double* va = pt.val.data() + static_cast<size_t>(y) * static_cast<size_t>(pt.w);
        const double* ia = pt.in.data() + static_cast<size_t>(y) * static_cast<size_t>(pt.w);
        const double* vb = pt.val.data() + static_cast<size_t>(y + dy) * static_cast<size_t>(pt.w) + dx;
        const double* ib = pt.in.data() + static_cast<size_t>(y + dy) * static_cast<size_t>(pt.w) + dx;
        const int xe = pt.w - dx;
        for (size_t q = 0; q < np; ++q) {
          const PowKind kind = kinds[q];
          const double p = ps[q];
          double s = 0.0;
          switch (kind) {
            case PowKind::Two:
              for (int x = 0; x < xe; ++x) {
                const double d = va[x] - vb[x];
                s += d * d * ia[x] * ib[x];
              }
              break;
            default:
              for (int x = 0; x < xe; ++x) s += abs_pow(std::abs(va[x] - vb[x]), kind, p) * ia[x] * ib[x];
          }
          acc[q] += s;
        }
      }
      for (size_t q = 0; q < np; ++q) os.sums[q][os.offset_index(dx, dy)] = acc[q];
    }
  });
  return os;
}

// sum over ordered pairs of |f(x)-f(y)|^p |x-y|^-exponent h^4.
double pair_integral(const OffsetSums& os, size_t p_index, double exponent, double h) {
  double total = 0.0;
  for (int dx = 0; dx < os.w; ++dx)
    for (int dy = -(os.hgt - 1); dy <= os.hgt - 1; ++dy) {
      if (dx == 0 && dy <= 0) continue;
      const double s = os.sums[p_index][os.offset_index(dx, dy)];
      if (s == 0.0) continue;
      const double r = h * std::sqrt(static_cast<double>(dx) * dx + static_cast<double>(dy) * dy);
      total += s * std::pow(r, -exponent);
    }
  return 2.0 * total * h * h * h * h;
}

// |grad f| per patch cell, one-sided next to the region boundary.
std::vector<double> patch_gradient(const Patch& pt, double h) {
  std::vector<double> g(pt.val.size(), 0.0);
  auto at = [&](int i, int j) { return static_cast<size_t>(j) * static_cast<size_t>(pt.w) + static_cast<size_t>(i); };
  auto inside = [&](int i, int j) { return i >= 0 && j >= 0 && i < pt.w && j < pt.hgt && pt.in[at(i, j)] > 0.0; };
  auto diff = [&](int i, int j, int di, int dj) {
    const bool fwd = inside(i + di, j + dj);
    const bool bwd = inside(i - di, j - dj);
    if (fwd && bwd) return (pt.val[at(i + di, j + dj)] - pt.val[at(i - di, j - dj)]) / (2.0 * h);
    if (fwd) return (pt.val[at(i + di, j + dj)] - pt.val[at(i, j)]) / h;
    if (bwd) return (pt.val[at(i, j)] - pt.val[at(i - di, j - dj)]) / h;
    return 0.0;
  };
  for (int j = 0; j < pt.hgt; ++j)
    for (int i = 0; i < pt.w; ++i) {
      if (!inside(i, j)) continue;
      const double gx = diff(i, j, 1, 0);
      const double gy = diff(i, j, 0, 1);
      g[at(i, j)] = std::hypot(gx, gy);
    }
  return g;
}

std::vector<double> unique_ps(const std::vector<SeminormRequest>& req) {
  std::vector<double> ps;
  for (const auto& r : req)
    if (std::find(ps.begin(), ps.end(), r.p) == ps.end()) ps.push_back(r.p);
  return ps;
}

std::vector<NormReport> gagliardo_impl(const GridFunction& f, const std::vector<SeminormRequest>& requests,
                                       Region region, const Patch& pt, const OffsetSums& os) {
  const double h = f.spec.h;
  const auto grad = patch_gradient(pt, h);
  std::vector<NormReport> out;
  for (const auto& r : requests) {
    const size_t qi = static_cast<size_t>(std::find(os.ps.begin(), os.ps.end(), r.p) - os.ps.begin());
    NormReport rep;
    rep.op = region == Region::Omega ? "gagliardo_omega" : "gagliardo_window";
    rep.s = r.s;
    rep.p = r.p;
    rep.resolution = h;
    rep.critical = std::abs(r.s * r.p - 1.0) < 0.05;
    const double integral = pair_integral(os, qi, 2.0 + r.s * r.p, h);
    rep.value = std::pow(integral, 1.0 / r.p);
    rep.band_exponent = (1.0 - r.s) * r.p;
    const PowKind kind = pow_kind(r.p);
    double gp = 0.0;
    for (double g : grad) gp += abs_pow(g, kind, r.p);
    const double band = gp * h * h * angular_moment(r.p) * std::pow(h, rep.band_exponent) / rep.band_exponent;
    rep.diagonal_band_excluded = (integral + band) > 0.0 ? band / (integral + band) : 0.0;
    out.push_back(rep);
  }
  return out;
}

void check_requests(const std::vector<SeminormRequest>& requests, const char* op) {
  for (const auto& r : requests) {
    check_p(r.p, op);
    if (!(r.s > 0.0 && r.s < 1.0)) throw Error(ErrorCode::InvalidParameters, "norms", op, "s must lie in (0, 1)");
  }
}

}  // namespace

void attach_bias(NormReport& coarse, const NormReport& fine) {
  const double scale = std::max(std::abs(coarse.value), std::abs(fine.value));
  coarse.estimated_bias = scale > 0.0 ? std::abs(coarse.value - fine.value) / scale : 0.0;
}

std::vector<double> distance_weights(const GridSpec& spec, const DomainModel& domain, double sp) {
  std::vector<double> w(spec.size(), 0.0);
  if (domain.d_set().empty()) return w;
  const double h = spec.h;
  parallel_for(spec.size(), [&](size_t k) {
    const Vec2 c = spec.center(k);
    const double d = domain.dist_to(c, DistTarget::D);
    if (d >= 0.5 * h) {
      w[k] = std::pow(d, -sp);
      return;
    }
    double s = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int a = 0; a < 4; ++a) {
        const Vec2 x{c.x + (a - 1.5) * h / 4.0, c.y + (b - 1.5) * h / 4.0};
        const double dx = domain.dist_to(x, DistTarget::D);
        if (dx > 0.0) s += std::pow(dx, -sp);
      }
    w[k] = s / 16.0;
  });
  return w;
}

NormReport lp_norm(const GridFunction& f, double p, Region region, std::optional<DistanceWeight> weight) {
  check_p(p, "lp_norm");
  NormReport rep;
  rep.op = weight ? "weighted_lp" : (region == Region::Omega ? "lp_omega" : "lp_window");
  rep.p = p;
  rep.resolution = f.spec.h;
  std::vector<double> w;
  if (weight) {
    rep.s = weight->s;
    rep.critical = std::abs(weight->s * p - 1.0) < 0.05;
    w = distance_weights(f.spec, *weight->domain, weight->s * p);
  }
  const PowKind kind = pow_kind(p);
  double sum = 0.0;
  for (size_t k = 0; k < f.values.size(); ++k) {
    if (!in_region(f, k, region)) continue;
    const double a = abs_pow(std::abs(f.values[k]), kind, p);
    sum += weight ? a * w[k] : a;
  }
  rep.value = std::pow(sum * f.spec.h * f.spec.h, 1.0 / p);
  return rep;
}

std::vector<NormReport> gagliardo_batch(const GridFunction& f, const std::vector<SeminormRequest>& requests,
                                        Region region) {
  check_requests(requests, "gagliardo_seminorm");
  const Patch pt = make_patch(f, region);
  if (pt.cells < 2) throw Error(ErrorCode::RegionTooSmall, "norms", "gagliardo_seminorm", "region has fewer than 2 cells");
  const OffsetSums os = offset_sums(pt, unique_ps(requests));
  return gagliardo_impl(f, requests, region, pt, os);
}

NormReport gagliardo_seminorm(const GridFunction& f, const NormParams& params) {
  return gagliardo_batch(f, {{params.s, params.p}}, params.region).front();
}

NormReport sobolev1_norm(const GridFunction& f, double p) {
  check_p(p, "sobolev1_norm");
  const Patch pt = make_patch(f, Region::Omega);
  NormReport rep;
  rep.op = "sobolev1";
  rep.s = 1.0;
  rep.p = p;
  rep.resolution = f.spec.h;
  if (pt.cells == 0) return rep;
  const auto grad = patch_gradient(pt, f.spec.h);
  const PowKind kind = pow_kind(p);
  double fs = 0.0, gs = 0.0;
  for (size_t l = 0; l < pt.val.size(); ++l) {
    if (pt.in[l] == 0.0) continue;
    fs += abs_pow(std::abs(pt.val[l]), kind, p);
    gs += abs_pow(grad[l], kind, p);
  }
  const double h2 = f.spec.h * f.spec.h;
  rep.value = std::pow(fs * h2, 1.0 / p) + std::pow(gs * h2, 1.0 / p);
  return rep;
}

double hardy_ratio(const GridFunction& f, const DomainModel& domain, const NormParams& params) {
  const double lp = lp_norm(f, params.p).value;
  const double sem = gagliardo_seminorm(f, {params.s, params.p, Region::Omega}).value;
  if (!(lp + sem > 0.0))
    throw Error(ErrorCode::ZeroDenominator, "norms", "hardy_ratio", "f has zero W^{s,p} norm");
  if (domain.d_set().empty()) return 0.0;
  const double num = lp_norm(f, params.p, Region::Omega, DistanceWeight{&domain, params.s}).value;
  return num / (lp + sem);
}

std::vector<CompositeNorm> weighted_sobolev_norms(const GridFunction& f, const DomainModel& domain,
                                                  const std::vector<SeminormRequest>& requests) {
  const auto sem = gagliardo_batch(f, requests, Region::Omega);
  std::vector<CompositeNorm> out;
  for (size_t i = 0; i < requests.size(); ++i) {
    CompositeNorm c;
    c.s = requests[i].s;
    c.p = requests[i].p;
    c.lp = lp_norm(f, c.p).value;
    c.seminorm = sem[i].value;
    c.weighted = lp_norm(f, c.p, Region::Omega, DistanceWeight{&domain, c.s}).value;
    out.push_back(c);
  }
  return out;
}

OmegaDNorm omega_d_norm(const OmegaDSamples& F, double s, double p, std::optional<double> kernel_exponent) {
  check_p(p, "omega_d_norm");
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidParameters, "norms", "omega_d_norm", "s must lie in (0, 1)");
  const double e = kernel_exponent.value_or(2.0 + s * p);
  const GridFunction& f = F.omega;
  const double h2 = f.spec.h * f.spec.h;
  const PowKind kind = pow_kind(p);
  OmegaDNorm out;

  std::vector<size_t> cells;
  for (size_t k = 0; k < f.values.size(); ++k)
    if (f.interior(k)) cells.push_back(k);
  std::vector<double> fp(cells.size());
  for (size_t c = 0; c < cells.size(); ++c) fp[c] = abs_pow(std::abs(f.values[cells[c]]), kind, p);
  for (double v : fp) out.lp_part += v * h2;

  const Patch pt = make_patch(f, Region::Omega);
  if (pt.cells >= 2) out.omega_pairs = pair_integral(offset_sums(pt, {p}), 0, e, f.spec.h);

  std::vector<double> cross(cells.size(), 0.0);
  parallel_for(cells.size(), [&](size_t c) {
    if (fp[c] == 0.0) return;
    const Vec2 x = f.spec.center(cells[c]);
    double k = 0.0;
    for (const auto& w : F.wing) {
      const Vec2 d = x - w.foot;
      const double r2 = dot(d, d) + w.z * w.z;
      k += w.weight * std::pow(r2, -0.5 * e);
    }
    cross[c] = fp[c] * h2 * k;
  });
  for (double c : cross) out.cross += c;
  out.cross *= 2.0;
  out.tail_estimate = 2.0 * out.lp_part * 2.0 * F.d_length * std::pow(F.wing_radius, 1.0 - e) / (e - 1.0);
  if (out.tail_estimate > 0.01 * out.cross)
    throw Error(ErrorCode::WingTruncationTooSmall, "norms", "omega_d_norm", "wing tail exceeds 1% of the cross term");

  out.report.op = "omega_d";
  out.report.s = s;
  out.report.p = p;
  out.report.resolution = f.spec.h;
  out.report.critical = std::abs(s * p - 1.0) < 0.05;
  out.report.value = std::pow(out.lp_part + out.omega_pairs + out.cross + out.wing_pairs, 1.0 / p);
  return out;
}

std::string norm_csv_header() { return "fixture,op,s,p,h,value,bias,flags\n"; }

std::string norm_csv_row(const std::string& fixture, const NormReport& r) {
  std::ostringstream out;
  out.precision(15);
  out << fixture << ',' << r.op << ',' << r.s << ',' << r.p << ',' << r.resolution << ',' << r.value << ',';
  if (!std::isnan(r.estimated_bias)) out << r.estimated_bias;
  out << ',';
  std::string flags;
  if (r.critical) flags += "critical-sp";
  if (!std::isnan(r.estimated_bias) && r.estimated_bias > 0.25) flags += flags.empty() ? "bias" : ";bias";
  out << flags << '\n';
  return out.str();
}

}  // namespace fracsob
