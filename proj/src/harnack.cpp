#include "kdg/harnack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kdg/constants.hpp"
#include "kdg/error.hpp"

namespace kdg {

namespace {

KineticPoint time_point(std::size_t d, double t) { return make_point(t, Vec(d, 0.0), Vec(d, 0.0)); }

double limit_time(double r0, double s) {
  return (-2.5 + 0.5 * std::pow(2.0, -2.0 * s)) * std::pow(r0, 2.0 * s);
}

void require_r0(double r0) { require(r0 > 0.0 && r0 < 1.0 / 3.0, "r0 must lie in (0, 1/3)"); }

bool all_inside(const KineticCylinder& inner, const KineticCylinder& outer, double shrink) {
  for (const auto& z : inner.extreme_points(shrink))
    if (!outer.contains(z)) return false;
  return true;
}

std::string describe(const KineticPoint& z) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << z.t;
  for (double c : z.x) os << ", x=" << c;
  for (double c : z.v) os << ", v=" << c;
  os << ")";
  return os.str();
}

struct Extremes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t arg_lo = 0;
  std::size_t count = 0;
};

Extremes extremes(const GridField& f, const KineticCylinder& c) {
  Extremes e;
  for (std::size_t i : nodes_in(f, c)) {
    const double y = f.values[i];
    if (y < e.lo) {
      e.lo = y;
      e.arg_lo = i;
    }
    e.hi = std::max(e.hi, y);
    ++e.count;
  }
  if (e.count == 0) throw NumericalError("no grid nodes inside the cylinder");
  return e;
}

double sup_abs(const GridField* h, const KineticCylinder& c) {
  if (!h) return 0.0;
  double m = 0.0;
  for (std::size_t i : nodes_in(*h, c)) m = std::max(m, std::abs(h->values[i]));
  return m;
}

// ln (∫_c g^ζ)^{1/ζ} with g normalized by its maximum, and ∫ g^ζ.
std::pair<double, double> zeta_lhs(const std::vector<double>& g, double cell, double zeta) {
  double M = 0.0;
  for (double y : g) M = std::max(M, y);
  if (M == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
  double S = 0.0;
  for (double y : g) S += y > 0.0 ? std::pow(y / M, zeta) : 0.0;
  S *= cell;
  return {std::log(M) + std::log(S) / zeta, std::pow(M, zeta) * S};
}

}  // namespace

std::vector<KineticCylinder> covering_sequence(std::size_t d, double r0, double s, int k_max) {
  require_r0(r0);
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(k_max >= 1, "k_max must be at least 1");
  std::vector<KineticCylinder> out;
  for (int k = 1; k <= k_max; ++k) {
    const double rho = r0 / 2.0 + covering_alpha(r0, k);
    const double t = -2.5 * std::pow(r0, 2.0 * s) + 0.5 * std::pow(rho, 2.0 * s);
    out.emplace_back(time_point(d, t), rho, s);
  }
  return out;
}

KineticCylinder covering_limit(std::size_t d, double r0, double s) {
  require_r0(r0);
  return KineticCylinder(time_point(d, limit_time(r0, s)), r0 / 2.0, s);
}

KineticCylinder covering_limit_quarter(std::size_t d, double r0, double s) {
  require_r0(r0);
  return KineticCylinder(time_point(d, limit_time(r0, s)), r0 / 4.0, s);
}

NestingCheck check_nesting(const std::vector<KineticCylinder>& seq, double r0) {
  require(!seq.empty(), "empty covering sequence");
  const std::size_t d = seq.front().dim();
  const double s = seq.front().s();
  const KineticCylinder limit = covering_limit(d, r0, s);
  const KineticCylinder past(origin(d), r0, s, CylinderVariant::past);
  NestingCheck c;
  c.limit_inside = c.strictly_nested = c.inside_past = true;
  const auto& q1 = seq.front();
  c.first_is_past = std::abs(q1.radius() - r0) <= 1e-15 * r0 &&
                    std::abs(q1.anchor().t - past.anchor().t) <= 1e-15 * std::abs(past.anchor().t);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    c.limit_inside = c.limit_inside && all_inside(limit, seq[k], 1e-9);
    c.inside_past = c.inside_past && all_inside(seq[k], past, k == 0 ? 1e-9 : 0.0);
    // Extreme points at the boundary (shrink 0) must sit in the open interior.
    if (k > 0) c.strictly_nested = c.strictly_nested && all_inside(seq[k], seq[k - 1], 0.0);
  }
  return c;
}

double set_measure(const std::vector<KineticPoint>& A, const KineticCylinder& c, double cell_volume) {
  std::size_t n = 0;
  for (const auto& a : A)
    if (c.contains(a)) ++n;
  return static_cast<double>(n) * cell_volume;
}

CoveringFamily vitali_cover(const std::vector<KineticPoint>& A, const CoveringParams& p) {
  require(p.s > 0.0 && p.s < 1.0, "s must lie in (0, 1)");
  require(p.m >= 3.0, "m must be at least 3");
  require(p.delta0 > 0.0 && p.delta0 < 1.0, "delta0 must lie in (0, 1)");
  require(p.alpha_next > 0.0, "alpha_next must be positive");
  require(p.cell_volume > 0.0, "cell_volume must be positive");
  require(p.ladder >= 1, "ladder must be at least 1");
  if (p.enforce_delta0_bound)
    require(std::log(p.delta0) <= delta0_max_log(p.d, p.s, p.m),
            "delta0 exceeds (4/(1225 m^2))^{2d+2s(d+1)}");
  if (!n_cov_admissible(p.n_cov, p.s, p.k_max))
    throw ValidationError("n_cov is not admissible for this s");

  CoveringFamily fam;
  fam.params = p;
  const double dd = static_cast<double>(p.d);
  fam.volume_factor = std::pow(5.0 * p.m, 2.0 * dd * (p.s + 1.0) + 2.0 * p.s);
  if (A.empty()) return fam;

  // Largest admissible radius per point; the ladder stays inside the open interval.
  const double r_max = p.alpha_next / (5.0 * p.m * static_cast<double>(p.n_cov)) * (1.0 - 1e-9);
  std::vector<CoveringMember> cands;
  for (std::size_t i = 0; i < A.size(); ++i) {
    require(A[i].dim() == p.d, "point dimension does not match d");
    bool found = false;
    for (int j = 0; j < p.ladder && !found; ++j) {
      const double r = r_max * std::exp2(-static_cast<double>(j));
      const KineticCylinder small(A[i], r, p.s, CylinderVariant::covering);
      const KineticCylinder big(A[i], 5.0 * p.m * r, p.s, CylinderVariant::covering);
      const bool sparse = set_measure(A, big, p.cell_volume) <= p.delta0 * big.volume();
      const bool dense = set_measure(A, small, p.cell_volume) > p.delta0 * small.volume();
      if (sparse && dense) {
        cands.push_back({A[i], r});
        found = true;
      }
    }
    if (!found) fam.no_candidate.push_back(i);
  }
  fam.candidates = cands.size();

  std::stable_sort(cands.begin(), cands.end(), [](const CoveringMember& a, const CoveringMember& b) {
    if (a.r != b.r) return a.r > b.r;
    if (a.z.t != b.z.t) return a.z.t < b.z.t;
    if (a.z.x != b.z.x) return a.z.x < b.z.x;
    return a.z.v < b.z.v;
  });
  std::vector<KineticCylinder> chosen;
  for (const auto& c : cands) {
    const KineticCylinder cyl(c.z, p.m * c.r, p.s, CylinderVariant::covering);
    bool free = true;
    for (const auto& other : chosen)
      if (cyl.intersects(other)) {
        free = false;
        break;
      }
    if (!free) continue;
    chosen.push_back(cyl);
    fam.members.push_back(c);
  }
  for (const auto& mbr : fam.members) {
    fam.sum_volume_r += KineticCylinder(mbr.z, mbr.r, p.s, CylinderVariant::covering).volume();
    fam.sum_volume_5mr += KineticCylinder(mbr.z, 5.0 * p.m * mbr.r, p.s, CylinderVariant::covering).volume();
  }
  return fam;
}

CoveringAudit audit_cover(const std::vector<KineticPoint>& A, const CoveringFamily& fam) {
  const CoveringParams& p = fam.params;
  CoveringAudit a;
  a.disjoint = a.covers = a.radii_ok = a.density_ok = true;
  const double r_hi = p.alpha_next / (5.0 * p.m * static_cast<double>(p.n_cov));
  std::vector<KineticCylinder> mid, big;
  for (const auto& mbr : fam.members) {
    mid.emplace_back(mbr.z, p.m * mbr.r, p.s, CylinderVariant::covering);
    big.emplace_back(mbr.z, 5.0 * p.m * mbr.r, p.s, CylinderVariant::covering);
    if (!(mbr.r > 0.0 && mbr.r < r_hi)) {
      a.radii_ok = false;
      a.witnesses.push_back("radius out of range at " + describe(mbr.z));
    }
    const KineticCylinder small(mbr.z, mbr.r, p.s, CylinderVariant::covering);
    const bool sparse = set_measure(A, big.back(), p.cell_volume) <= p.delta0 * big.back().volume();
    const bool dense = set_measure(A, small, p.cell_volume) > p.delta0 * small.volume();
    if (!(sparse && dense)) {
      a.density_ok = false;
      a.witnesses.push_back("density condition fails at " + describe(mbr.z));
    }
  }
  for (std::size_t i = 0; i < mid.size(); ++i)
    for (std::size_t j = i + 1; j < mid.size(); ++j)
      if (mid[i].intersects(mid[j])) {
        a.disjoint = false;
        a.witnesses.push_back("overlap between " + describe(fam.members[i].z) + " and " +
                              describe(fam.members[j].z));
      }
  std::vector<char> skipped(A.size(), 0);
  for (std::size_t i : fam.no_candidate) skipped[i] = 1;
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (skipped[i]) continue;
    const bool hit = std::any_of(big.begin(), big.end(), [&](const KineticCylinder& c) { return c.contains(A[i]); });
    if (!hit) {
      a.covers = false;
      a.witnesses.push_back("uncovered point " + describe(A[i]));
    }
  }
  const double lhs = fam.sum_volume_5mr;
  const double rhs = fam.volume_factor * fam.sum_volume_r;
  a.bookkeeping = std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
  return a;
}

HarnackReport weak_harnack_quotient(const GridField& f, const GridField* h, double s, double r0, double zeta_log,
                                    double C) {
  require_r0(r0);
  require(C > 0.0, "C must be positive");
  require(std::isfinite(zeta_log), "zeta_log must be finite");
  for (double y : f.values) require(y >= 0.0, "f must be nonnegative");
  if (h) require(h->phase == f.phase && h->time.n == f.time.n, "h must live on the grid of f");

  const std::size_t d = f.d;
  HarnackReport rep;
  rep.zeta_log = zeta_log;
  rep.zeta = std::exp(zeta_log);
  rep.C = C;
  require(rep.zeta > 0.0 && rep.zeta <= 1.0, "zeta must lie in (0, 1]; use surrogate constants");

  const KineticCylinder tilde = covering_limit(d, r0, s);
  const KineticCylinder half(origin(d), r0 / 2.0, s);
  const auto tilde_nodes = nodes_in(f, tilde);
  if (tilde_nodes.empty()) throw NumericalError("no grid nodes inside the limit cylinder");
  const Extremes e = extremes(f, half);
  rep.infimum = e.lo;
  rep.supremum = e.hi;
  rep.h_sup = sup_abs(h, KineticCylinder(origin(d), 1.0, s));

  std::vector<double> g;
  g.reserve(tilde_nodes.size());
  for (std::size_t i : tilde_nodes) g.push_back(f.values[i]);
  const auto [lhs_log, integral] = zeta_lhs(g, f.cell_volume(), rep.zeta);
  rep.lhs_log = lhs_log;
  rep.integral = integral;
  rep.rhs = C * (rep.infimum + rep.h_sup);
  if (rep.rhs > 0.0) {
    rep.quotient_log = lhs_log - std::log(rep.rhs);
    rep.quotient = std::exp(rep.quotient_log);
  } else if (integral > 0.0) {
    rep.quotient_log = rep.quotient = std::numeric_limits<double>::infinity();
    rep.violation = true;
    rep.witnesses.push_back("zero infimum at " + describe(f.point(e.arg_lo)));
  } else {
    rep.quotient_log = -std::numeric_limits<double>::infinity();
    rep.quotient = 0.0;
  }

  // Same quantity for f + (1 + t)‖h‖ against C inf.
  if (rep.h_sup > 0.0) {
    auto shift = [&](std::size_t i) { return f.values[i] + (1.0 + f.point(i).t) * rep.h_sup; };
    std::vector<double> gs;
    for (std::size_t i : tilde_nodes) gs.push_back(shift(i));
    double inf_s = std::numeric_limits<double>::infinity();
    for (std::size_t i : nodes_in(f, half)) inf_s = std::min(inf_s, shift(i));
    const double lhs_s = zeta_lhs(gs, f.cell_volume(), rep.zeta).first;
    rep.shifted_quotient = inf_s > 0.0 ? std::exp(lhs_s - std::log(C * inf_s)) : std::numeric_limits<double>::infinity();
  } else {
    rep.shifted_quotient = rep.quotient;
  }
  return rep;
}

StrongHarnack strong_harnack_check(const GridField& f, const GridField* h, double s, double r0, double zeta_log,
                                   double p, double C) {
  require_r0(r0);
  require(C > 0.0, "C must be positive");
  require_admissible_p(f.d, s, p);
  const DeGiorgiExponents ex = degiorgi_exponents(p);
  for (double y : f.values) require(y >= 0.0 && y <= 1.0, "f must lie in [0, 1]");
  if (h) require(h->phase == f.phase && h->time.n == f.time.n, "h must live on the grid of f");

  const std::size_t d = f.d;
  StrongHarnack out;
  out.sup_val = extremes(f, covering_limit_quarter(d, r0, s)).hi;
  out.inf_val = extremes(f, KineticCylinder(origin(d), r0 / 4.0, s)).lo;
  out.h_sup = sup_abs(h, KineticCylinder(origin(d), 1.0, s));
  out.beta_log = zeta_log + std::log(ex.beta2);
  out.beta = std::exp(out.beta_log);
  const double base = out.inf_val + out.h_sup;
  out.bound = base > 0.0 ? C * std::exp(out.beta * std::log(base)) : 0.0;
  out.satisfied = out.sup_val <= out.bound;
  return out;
}

LogIntegrability log_integrability(const GridField& f, double s, double r, double M) {
  require(r > 0.0, "r must be positive");
  require(M > 0.0, "M must be positive");
  for (double y : f.values) require(y >= 0.0, "f must be nonnegative");
  const std::size_t d = f.d;
  LogIntegrability out;
  const auto past = nodes_in(f, KineticCylinder(origin(d), r, s, CylinderVariant::past));
  if (past.empty()) throw NumericalError("no grid nodes inside Q^-_r");
  std::size_t above = 0;
  const double power = log_integrability_power(d);
  for (std::size_t i : past) {
    const double y = f.values[i];
    if (y > M) ++above;
    out.log_integral += std::pow(std::log1p(y), power);
  }
  out.log_integral *= f.cell_volume();
  out.lhs_measure_fraction = static_cast<double>(above) / static_cast<double>(past.size());
  out.delta_M = std::pow(1.0 / std::log1p(M), log_integrability_delta_power(d));
  out.inf_half = extremes(f, KineticCylinder(origin(d), r / 2.0, s)).lo;
  out.premise = out.inf_half < 1.0;
  return out;
}

MtpPredicate mtp_predicate(const GridField& f, double s, const KineticPoint& z, double r, double M, double delta) {
  require(r > 0.0, "r must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  MtpPredicate out;
  const auto nodes = nodes_in(f, KineticCylinder(z, r, s));
  if (nodes.empty()) throw NumericalError("no grid nodes inside Q_r(z)");
  std::size_t above = 0;
  for (std::size_t i : nodes)
    if (f.values[i] > M) ++above;
  out.fraction = static_cast<double>(above) / static_cast<double>(nodes.size());
  const Extremes e = extremes(f, KineticCylinder(z, r / 2.0, s, CylinderVariant::future));
  out.inf_future = e.lo;
  out.premise = out.fraction > delta;
  out.conclusion = out.inf_future >= 1.0;
  out.holds = !out.premise || out.conclusion;
  if (!out.holds) out.witness = "f < 1 at " + describe(f.point(e.arg_lo));
  return out;
}

HoelderReport hoelder_exponent(const GridField& f, double s, const KineticPoint& z0, double r0, int n_max,
                               long double theta_log, double h_sup) {
  require(r0 > 0.0 && r0 < 1.0, "r0 must lie in (0, 1)");
  require(n_max >= 2, "need at least three scales");
  require(h_sup >= 0.0, "h_sup must be nonnegative");
  HoelderReport rep;
  rep.theta_log = theta_log;
  const HoelderAlpha pa = hoelder_alpha(theta_log, r0);
  rep.theory_alpha = pa.alpha;
  rep.theory_alpha_log = pa.alpha_log;

  const std::size_t slab = f.slab_size();
  std::vector<char> mask(f.values.size());
  for (int n = 0; n <= n_max; ++n) {
    const double r = std::pow(r0, static_cast<double>(n));
    const auto nodes = nodes_in(f, KineticCylinder(z0, r, s));
    std::fill(mask.begin(), mask.end(), 0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i : nodes) {
      mask[i] = 1;
      lo = std::min(lo, f.values[i]);
      hi = std::max(hi, f.values[i]);
    }
    // One-cell variation along every axis inside the cylinder.
    double band = 0.0;
    for (std::size_t i : nodes) {
      const std::size_t it = i / slab;
      const std::size_t j = i % slab;
      if (it + 1 < f.nt() && mask[i + slab]) band = std::max(band, std::abs(f.values[i + slab] - f.values[i]));
      const auto idx = f.phase.multi(j);
      for (std::size_t k = 0; k < f.phase.rank(); ++k) {
        if (idx[k] + 1 >= f.phase.extent(k)) continue;
        const std::size_t nb = i + f.phase.stride(k);
        if (mask[nb]) band = std::max(band, std::abs(f.values[nb] - f.values[i]));
      }
    }
    rep.radii.push_back(r);
    rep.osc.push_back(nodes.empty() ? 0.0 : hi - lo);
    rep.band.push_back(band);
    rep.nodes.push_back(nodes.size());
  }

  // max{osc_0, e^{2(3+2^{18d+46})} ‖h‖}; the exponential overflows for any h > 0.
  const double source = h_sup > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  const double denom = std::max(rep.osc.front(), source);
  rep.nonincreasing = true;
  for (std::size_t n = 0; n < rep.osc.size(); ++n) {
    rep.normalized.push_back(denom > 0.0 ? rep.osc[n] / denom : 0.0);
    if (n > 0 && rep.normalized[n] > rep.normalized[n - 1]) rep.nonincreasing = false;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t n = 0; n < rep.osc.size(); ++n) {
    if (!(rep.osc[n] > 0.0)) continue;
    const double x = std::log(rep.radii[n]);
    const double y = std::log(rep.osc[n]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++rep.used_scales;
  }
  if (rep.used_scales < 3) throw NumericalError("fewer than 3 usable scales for the Hölder fit");
  const double m = static_cast<double>(rep.used_scales);
  rep.fitted_alpha = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

}  // namespace kdg
