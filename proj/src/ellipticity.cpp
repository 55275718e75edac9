#include "kdg/ellipticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "kdg/error.hpp"
#include "kdg/quadrature.hpp"

namespace kdg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> a) {
  double acc = 0.0;
  for (double c : a) acc += c * c;
  return std::sqrt(acc);
}

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os.precision(6);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

bool within_tolerance(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-6) + 1e-12; }

void finish(ConditionRecord& rec) {
  rec.pass = within_tolerance(rec.lhs, rec.rhs);
  rec.margin = rec.lhs > 0.0 ? rec.rhs / rec.lhs - 1.0 : kInf;
  rec.certified = rec.sampled && rec.pass && rec.margin > 0.1;
}

// ∫_a^b q(rho) rho^p drho with u = rho^{p+1}, exact for constant q.
double power_integral(const std::function<double(double)>& q, double a, double b, double p, std::size_t n) {
  if (!(b > a)) return 0.0;
  const double k = p + 1.0;
  const double ua = a > 0.0 ? std::pow(a, k) : 0.0;
  const double ub = std::pow(b, k);
  const double lo = std::min(ua, ub);
  const double hi = std::max(ua, ub);
  const QuadratureRule rule = gauss_legendre(n, lo, hi);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += rule.weights[i] * q(std::pow(rule.nodes[i], 1.0 / k));
  return acc / std::abs(k);
}

Vec offset(const Vec& v, const Vec& e, double rho) {
  Vec w(v);
  for (std::size_t i = 0; i < v.size(); ++i) w[i] += rho * e[i];
  return w;
}

Vec dyadic_breaks(double lo, double hi) {
  Vec breaks{lo};
  double r = lo;
  while (2.0 * r < hi) {
    r *= 2.0;
    breaks.push_back(r);
  }
  breaks.push_back(hi);
  return breaks;
}

constexpr double kPvInner = 0x1p-30;
constexpr double kPvOuter = 0x1p10;

void check_grid_covers(const Lattice& grid, double R, const char* what) {
  for (std::size_t k = 0; k < grid.rank(); ++k) {
    if (grid.axis(k).lo > -R || grid.axis(k).hi < R)
      throw ValidationError(std::string("velocity box must contain ") + what);
  }
}

void check_support(const VelocityField& phi, double R, const char* what) {
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (phi.values[i] != 0.0 && norm(phi.point(i)) >= R)
      throw ValidationError(std::string("test function support exceeds ") + what);
  }
  require(phi.far_field == 0.0, "test functions must vanish outside the box");
}

std::vector<std::size_t> nodes_in_ball(const Lattice& grid, double R) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (norm(grid.point(i)) < R) out.push_back(i);
  return out;
}

// Σ_{i != j} |phi_i - phi_j|^q w(v_i, v_j) over nodes in B_R, times cell^2.
double pair_sum(const VelocityField& phi, double R, double q,
                const std::function<double(const Vec&, const Vec&)>& weight) {
  const auto nodes = nodes_in_ball(phi.grid, R);
  std::vector<Vec> pts;
  pts.reserve(nodes.size());
  for (std::size_t i : nodes) pts.push_back(phi.point(i));
  double acc = 0.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const double fa = phi.values[nodes[a]];
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      if (a == b) continue;
      const double diff = std::abs(fa - phi.values[nodes[b]]);
      if (diff == 0.0) continue;
      acc += std::pow(diff, q) * weight(pts[a], pts[b]);
    }
  }
  const double cell = phi.grid.cell_volume();
  return acc * cell * cell;
}

}  // namespace

bool ComplianceReport::all_pass() const {
  for (const auto& c : conditions)
    if (c.enforced && !c.pass) return false;
  return true;
}

const ConditionRecord& ComplianceReport::get(const std::string& id) const {
  for (const auto& c : conditions)
    if (c.id == id) return c;
  throw ValidationError("unknown condition id: " + id);
}

std::vector<VelocityField> test_function_library(const Lattice& grid, double radius, std::uint64_t seed,
                                                 std::size_t trig_count) {
  require(radius > 0.0, "support radius must be positive");
  const std::size_t d = grid.rank();
  const double rho = 0.9 * radius;
  auto bump = [rho](const Vec& v, double scale) {
    const double r2 = norm(v) * norm(v) / (scale * scale);
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  };
  std::vector<VelocityField> out;
  out.push_back(sample_velocity_field(grid, [rho](const Vec& v) { return std::max(0.0, 1.0 - norm(v) / rho); }));
  out.push_back(sample_velocity_field(grid, [&](const Vec& v) { return bump(v, rho); }));
  Vec c(d, 0.0);
  c[0] = 0.4 * rho;
  out.push_back(sample_velocity_field(grid, [&](const Vec& v) {
    Vec u(v);
    for (std::size_t i = 0; i < d; ++i) u[i] -= c[i];
    return std::max(0.0, 1.0 - norm(u) / (0.5 * rho));
  }));

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::acos(-1.0));
  for (std::size_t k = 0; k < trig_count; ++k) {
    const std::size_t modes = 3;
    std::vector<Vec> freq(modes, Vec(d));
    Vec a(modes), ph(modes);
    for (std::size_t m = 0; m < modes; ++m) {
      for (double& f : freq[m]) f = std::round(4.0 * amp(gen)) / rho;
      a[m] = amp(gen);
      ph[m] = phase(gen);
    }
    out.push_back(sample_velocity_field(grid, [&](const Vec& v) {
      double acc = 0.0;
      for (std::size_t m = 0; m < modes; ++m) {
        double arg = ph[m];
        for (std::size_t i = 0; i < d; ++i) arg += freq[m][i] * v[i];
        acc += a[m] * std::cos(arg);
      }
      return acc * bump(v, rho);
    }));
  }
  return out;
}

double upperbound2_integral(const KernelSpec& K, const Vec& v, double r, std::size_t directions,
                            std::size_t nodes) {
  require(r > 0.0, "radius must be positive");
  const SphereRule rule = sphere_rule(K.d, directions);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.directions.size(); ++q) {
    const Vec& e = rule.directions[q];
    auto prof = [&](double rho) { return angular_profile(K, v, e, rho); };
    acc += rule.weights[q] * power_integral(prof, 0.0, r, 1.0 - 2.0 * K.s, nodes);
  }
  return acc;
}

double ring_integral(const KernelSpec& K, const Vec& v, double r, std::size_t directions, std::size_t nodes) {
  require(r > 0.0, "radius must be positive");
  const SphereRule rule = sphere_rule(K.d, directions);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.directions.size(); ++q) {
    const Vec& e = rule.directions[q];
    auto prof = [&](double rho) { return angular_profile(K, v, e, rho); };
    acc += rule.weights[q] * power_integral(prof, r, 2.0 * r, -1.0 - 2.0 * K.s, nodes);
  }
  return acc;
}

double ring_integral_adjoint(const KernelSpec& K, const Vec& w, double r, std::size_t directions,
                             std::size_t nodes) {
  require(r > 0.0, "radius must be positive");
  require(norm(w) < K.Rbar, "adjoint ring centre must lie in B_Rbar");
  const SphereRule rule = sphere_rule(K.d, directions);
  const double expo = static_cast<double>(K.d) + 2.0 * K.s;
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.directions.size(); ++q) {
    const Vec& e = rule.directions[q];
    const double top = std::min(2.0 * r, ball_exit_distance(w, e, K.Rbar));
    auto prof = [&](double rho) { return kernel_eval(K, offset(w, e, rho), w) * std::pow(rho, expo); };
    acc += rule.weights[q] * power_integral(prof, r, top, -1.0 - 2.0 * K.s, nodes);
  }
  return acc;
}

double cancellation1_integral(const KernelSpec& K, const Vec& v, std::size_t directions, std::size_t nodes) {
  const SphereRule rule = sphere_rule(K.d, directions);
  const double dm1 = static_cast<double>(K.d) - 1.0;
  auto integrand = [&](double rho) {
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.directions.size(); ++q) {
      const Vec w = offset(v, rule.directions[q], rho);
      acc += rule.weights[q] * (kernel_eval(K, v, w) - kernel_eval(K, w, v));
    }
    return acc * std::pow(rho, dm1);
  };
  return integrate_panels(integrand, dyadic_breaks(kPvInner, kPvOuter), nodes);
}

double cancellation2_integral(const KernelSpec& K, const Vec& v, double r, std::size_t directions,
                              std::size_t nodes) {
  require(r > 0.0, "radius must be positive");
  const SphereRule rule = sphere_rule(K.d, directions);
  const double dm1 = static_cast<double>(K.d) - 1.0;
  const Vec breaks = dyadic_breaks(std::min(kPvInner, 0.5 * r), r);
  double total = 0.0;
  for (std::size_t c = 0; c < K.d; ++c) {
    auto integrand = [&](double rho) {
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.directions.size(); ++q) {
        const Vec& e = rule.directions[q];
        const Vec w = offset(v, e, rho);
        acc += rule.weights[q] * (-rho * e[c]) * (kernel_eval(K, v, w) - kernel_eval(K, w, v));
      }
      return acc * std::pow(rho, dm1);
    };
    const double comp = integrate_panels(integrand, breaks, nodes);
    total += comp * comp;
  }
  return std::sqrt(total);
}

CoercivitySides coercivity_sides(const KernelSpec& K, const VelocityField& phi) {
  const double expo = static_cast<double>(K.d) + 2.0 * K.s;
  CoercivitySides out;
  out.lhs = pair_sum(phi, 0.5 * K.Rbar, 2.0, [&](const Vec& a, const Vec& b) {
    Vec u(a);
    for (std::size_t i = 0; i < a.size(); ++i) u[i] -= b[i];
    return std::pow(norm(u), -expo);
  });
  out.rhs = pair_sum(phi, K.Rbar, 2.0, [&](const Vec& a, const Vec& b) { return kernel_eval(K, a, b); });
  return out;
}

CoercivitySides coercivity_sqrt_sides(const KernelSpec& K, const VelocityField& phi) {
  const double expo = 0.5 * (static_cast<double>(K.d) + 2.0 * K.s);
  CoercivitySides out;
  out.lhs = pair_sum(phi, 0.5 * K.Rbar, 1.0, [&](const Vec& a, const Vec& b) {
    Vec u(a);
    for (std::size_t i = 0; i < a.size(); ++i) u[i] -= b[i];
    return std::pow(norm(u), -expo);
  });
  out.rhs = pair_sum(phi, K.Rbar, 1.0,
                     [&](const Vec& a, const Vec& b) { return std::sqrt(kernel_eval(K, a, b)); });
  return out;
}

CoercivitySides coercivity_full_sides(const KernelSpec& K, const VelocityField& phi) {
  CoercivitySides out;
  out.lhs = gagliardo_seminorm_sq(phi, K.s);
  const double l2 = l2_norm(phi);
  out.rhs = bilinear_form(K, phi, phi) + K.Lambda * l2 * l2;
  return out;
}

ComplianceReport check_ellipticity(const KernelSpec& K, const std::vector<VelocityField>& tests,
                                   const EllipticityOptions& opts) {
  K.validate();
  for (double r : opts.radii) require(r > 0.0, "radii must be positive");
  require(!opts.radii.empty(), "at least one radius is needed");
  for (const auto& phi : tests) {
    require(phi.dim() == K.d, "test function dimension does not match the kernel");
    check_grid_covers(phi.grid, K.Rbar, "B_Rbar");
    check_support(phi, 0.5 * K.Rbar, "B_{Rbar/2}");
  }
  std::vector<Vec> vs = opts.v_samples;
  if (vs.empty()) {
    vs.push_back(Vec(K.d, 0.0));
    Vec a(K.d, 0.0);
    a[0] = 0.5 * K.Rbar;
    vs.push_back(a);
    a[0] = -0.5 * K.Rbar;
    vs.push_back(a);
  }
  for (const Vec& v : vs) require(v.size() == K.d && norm(v) < K.Rbar, "sample velocities must lie in B_Rbar");

  ComplianceReport rep;
  rep.kind = K.kind;
  rep.d = K.d;
  rep.s = K.s;
  rep.lambda = K.lambda;
  rep.Lambda = K.Lambda;
  rep.Rbar = K.Rbar;

  // Coercivity families: worst ratio over the test functions.
  auto sampled = [&](const std::string& id, double weight,
                     const std::function<CoercivitySides(const VelocityField&)>& sides) {
    ConditionRecord rec;
    rec.id = id;
    rec.sampled = true;
    rec.required = K.lambda;
    rec.constant = kInf;
    rec.witness = "none";
    bool any = false;
    for (std::size_t i = 0; i < tests.size(); ++i) {
      const CoercivitySides sd = sides(tests[i]);
      if (sd.lhs <= 0.0) continue;
      const double c = sd.rhs / (weight * sd.lhs);
      if (!any || c < rec.constant) {
        any = true;
        rec.constant = c;
        rec.lhs = weight * K.lambda * sd.lhs;
        rec.rhs = sd.rhs;
        rec.witness = "test_function_" + std::to_string(i);
      }
    }
    if (!any) rec.constant = 0.0;
    finish(rec);
    rep.conditions.push_back(rec);
  };
  sampled("coercivity", 1.0, [&](const VelocityField& phi) { return coercivity_sides(K, phi); });
  sampled("coercivity_sqrt", 1.0, [&](const VelocityField& phi) { return coercivity_sqrt_sides(K, phi); });

  {
    ConditionRecord rec;
    rec.id = "upperbound2";
    rec.required = K.Lambda;
    rec.constant = -1.0;
    for (const Vec& v : vs) {
      for (double r : opts.radii) {
        const double val = upperbound2_integral(K, v, r, opts.directions, opts.radial_nodes);
        const double scale = std::pow(r, 2.0 - 2.0 * K.s);
        if (val / scale > rec.constant) {
          rec.constant = val / scale;
          rec.lhs = val;
          rec.rhs = K.Lambda * scale;
          rec.witness = "v=" + vec_str(v) + ",r=" + std::to_string(r);
        }
      }
    }
    finish(rec);
    rep.conditions.push_back(rec);
  }
  {
    ConditionRecord rec;
    rec.id = "upperbound_rings";
    rec.required = K.Lambda;
    rec.constant = -1.0;
    for (const Vec& v : vs) {
      for (double r : opts.radii) {
        const double scale = std::pow(r, -2.0 * K.s);
        const double a = ring_integral(K, v, r, opts.directions, opts.radial_nodes);
        const double b = ring_integral_adjoint(K, v, r, opts.directions, opts.radial_nodes);
        for (int side = 0; side < 2; ++side) {
          const double val = side == 0 ? a : b;
          if (val / scale > rec.constant) {
            rec.constant = val / scale;
            rec.lhs = val;
            rec.rhs = K.Lambda * scale;
            rec.witness = std::string(side == 0 ? "outer" : "adjoint") + ",v=" + vec_str(v) +
                          ",r=" + std::to_string(r);
          }
        }
      }
    }
    finish(rec);
    rep.conditions.push_back(rec);
  }
  {
    ConditionRecord rec;
    rec.id = "cancellation1";
    rec.required = K.Lambda;
    rec.rhs = K.Lambda;
    rec.constant = -1.0;
    for (const Vec& v : vs) {
      const double val = std::abs(cancellation1_integral(K, v, opts.directions));
      if (val > rec.constant) {
        rec.constant = val;
        rec.lhs = val;
        rec.witness = "v=" + vec_str(v);
      }
    }
    finish(rec);
    rep.conditions.push_back(rec);
  }
  {
    ConditionRecord rec;
    rec.id = "cancellation2";
    rec.required = K.Lambda;
    rec.enforced = K.s >= 0.5;
    rec.constant = -1.0;
    for (const Vec& v : vs) {
      for (double r : opts.radii) {
        const double val = cancellation2_integral(K, v, r, opts.directions);
        const double scale = 1.0 + std::pow(r, 1.0 - 2.0 * K.s);
        if (val / scale > rec.constant) {
          rec.constant = val / scale;
          rec.lhs = val;
          rec.rhs = K.Lambda * scale;
          rec.witness = "v=" + vec_str(v) + ",r=" + std::to_string(r);
        }
      }
    }
    finish(rec);
    rep.conditions.push_back(rec);
  }
  sampled("coercivity_full", 0.5, [&](const VelocityField& phi) { return coercivity_full_sides(K, phi); });
  return rep;
}

double ConeReport::min_measure() const {
  if (points.empty()) return 0.0;
  double m = kInf;
  for (const auto& p : points) m = std::min(m, p.measure);
  return m;
}

ConeReport cone_lower_bound(const KernelSpec& K, const std::vector<Vec>& v_samples, double lambda,
                            const ConeOptions& opts) {
  K.validate();
  require(lambda > 0.0, "lambda must be positive");
  require(!opts.radii.empty(), "cone analysis needs at least one radius");
  if (K.kind == KernelKind::boltzmann) require(K.d >= 2, "cone analysis for Boltzmann kernels needs d >= 2");
  const SphereRule rule = sphere_rule(K.d, opts.directions);
  const double area = unit_sphere_area(K.d);
  const double power = 1.0 + 2.0 * K.s + K.gamma;

  ConeReport rep;
  rep.lambda = lambda;
  rep.sphere_directions = rule.directions.size();
  rep.radii = opts.radii;
  const Vec sep_radius{opts.radii.front()};
  const Vec& radii = is_separable(K) ? sep_radius : opts.radii;
  for (const Vec& v : v_samples) {
    require(v.size() == K.d, "sample velocity dimension mismatch");
    ConePoint pt;
    pt.v = v;
    const double vn = norm(v);
    const double weight = 1.0 + std::pow(vn, power);
    pt.mu_reference = 1.0 / (1.0 + vn);
    std::vector<char> ok(rule.directions.size(), 0);
    double covered = 0.0;
    double achieved = kInf;
    for (std::size_t q = 0; q < rule.directions.size(); ++q) {
      // Directions are (v - v') / |v - v'|, so v' = v - rho e.
      Vec back = rule.directions[q];
      for (double& c : back) c = -c;
      double worst = kInf;
      for (double rho : radii) worst = std::min(worst, angular_profile(K, v, back, rho) / weight);
      if (worst >= lambda) {
        ok[q] = 1;
        covered += rule.weights[q];
        pt.directions.push_back(rule.directions[q]);
        achieved = std::min(achieved, worst);
      }
    }
    // Every sphere rule places the antipode of q at q + n/2.
    const std::size_t n = rule.directions.size();
    for (std::size_t q = 0; q < n; ++q)
      if (ok[q] != ok[(q + n / 2) % n]) pt.symmetric = false;
    pt.measure = covered;
    pt.fraction = covered / area;
    pt.achieved_lambda = pt.directions.empty() ? 0.0 : achieved;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

SqrtCoercivity sqrt_coercivity_check(const KernelSpec& K, const ConeReport& cone, const VelocityField& g,
                                     double R) {
  K.validate();
  require(R > 0.0, "R must be positive");
  require(g.dim() == K.d, "field dimension does not match the kernel");
  check_support(g, R, "B_R");
  check_grid_covers(g.grid, 2.0 * R, "B_2R");
  SqrtCoercivity out;
  out.inconclusive = cone.points.empty() || cone.min_measure() <= 0.0;
  const double expo = 0.5 * static_cast<double>(K.d) + K.s;
  out.lhs = pair_sum(g, R, 1.0, [&](const Vec& a, const Vec& b) {
    Vec u(a);
    for (std::size_t i = 0; i < a.size(); ++i) u[i] -= b[i];
    return std::pow(norm(u), -expo);
  });
  out.rhs = pair_sum(g, 2.0 * R, 1.0, [&](const Vec& a, const Vec& b) { return std::sqrt(kernel_eval(K, a, b)); });
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : (out.lhs > 0.0 ? kInf : 0.0);
  return out;
}

}  // namespace kdg
