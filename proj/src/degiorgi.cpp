#include "kdg/degiorgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kdg/error.hpp"

namespace kdg {

namespace {

// Node coordinates of a grid field, split by factor.
struct Nodes {
  Vec t;
  std::vector<Vec> x;
  std::vector<Vec> v;
};

Nodes nodes_of(const GridField& f) {
  Nodes n;
  n.t.resize(f.nt());
  for (std::size_t i = 0; i < f.nt(); ++i) n.t[i] = f.time.node(i);
  const Lattice xl = f.x_lattice();
  const Lattice vl = f.v_lattice();
  n.x.reserve(xl.size());
  for (std::size_t i = 0; i < xl.size(); ++i) n.x.push_back(xl.point(i));
  n.v.reserve(vl.size());
  for (std::size_t i = 0; i < vl.size(); ++i) n.v.push_back(vl.point(i));
  return n;
}

double dist_sq(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

bool time_in(const SlantedBox& b, double t) {
  if (t > b.t_hi) return false;
  return b.open_lo ? t > b.t_lo : t >= b.t_lo;
}

bool x_in(const SlantedBox& b, double t, std::span<const double> x) {
  double acc = 0.0;
  const double tau = t - b.anchor.t;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = x[i] - b.anchor.x[i] - tau * b.anchor.v[i];
    acc += c * c;
  }
  return std::sqrt(acc) < b.x_radius;
}

bool v_in(const SlantedBox& b, std::span<const double> v) {
  return std::sqrt(dist_sq(v, b.anchor.v)) < b.v_radius;
}

// Calls fn(flat, it, ix, iv) for every node of the box.
template <class Fn>
void for_each_in(const GridField& f, const Nodes& n, const SlantedBox& b, Fn&& fn) {
  require(b.anchor.dim() == f.d, "box dimension does not match the field");
  std::vector<char> vmask(n.v.size());
  for (std::size_t iv = 0; iv < n.v.size(); ++iv) vmask[iv] = v_in(b, n.v[iv]) ? 1 : 0;
  for (std::size_t it = 0; it < n.t.size(); ++it) {
    if (!time_in(b, n.t[it])) continue;
    for (std::size_t ix = 0; ix < n.x.size(); ++ix) {
      if (!x_in(b, n.t[it], n.x[ix])) continue;
      for (std::size_t iv = 0; iv < n.v.size(); ++iv)
        if (vmask[iv]) fn(f.index(it, ix, iv), it, ix, iv);
    }
  }
}

void require_same_grid(const GridField& a, const GridField& b, const char* what) {
  require(a.d == b.d && a.phase == b.phase && a.time.n == b.time.n && a.time.lo == b.time.lo &&
              a.time.hi == b.time.hi,
          std::string(what) + " must live on the grid of f");
}

void require_nested(const KineticCylinder& inner, const KineticCylinder& outer) {
  require(inner.variant() == CylinderVariant::plain && outer.variant() == CylinderVariant::plain,
          "inner and outer must be plain cylinders");
  require(inner.dim() == outer.dim(), "inner and outer must have the same dimension");
  const auto& a = inner.center();
  const auto& b = outer.center();
  require(a.t == b.t && a.x == b.x && a.v == b.v, "inner and outer must share their centre");
  require(inner.radius() > 0.0 && inner.radius() < outer.radius(), "need 0 < r < R");
}

// 0 ≤ f ≤ 1 on (t0 - R^{2s}, t0] × B_{R^{1+2s}}(x0 + (t - t0) v0) × R^d.
void require_unit_slab(const GridField& f, const Nodes& n, const KineticCylinder& outer) {
  const SlantedBox b = box_of(outer);
  for (std::size_t it = 0; it < n.t.size(); ++it) {
    if (n.t[it] > b.t_hi || n.t[it] <= b.t_lo) continue;
    for (std::size_t ix = 0; ix < n.x.size(); ++ix) {
      if (!x_in(b, n.t[it], n.x[ix])) continue;
      for (std::size_t iv = 0; iv < n.v.size(); ++iv) {
        const double y = f.values[f.index(it, ix, iv)];
        if (!(y >= 0.0 && y <= 1.0)) throw ValidationError("f must lie in [0, 1] on the slab");
      }
    }
  }
  require(f.far_field_v >= 0.0 && f.far_field_v <= 1.0, "f must lie in [0, 1] on the slab");
}

double sup_abs_in(const GridField* h, const Nodes& n, const SlantedBox& b) {
  if (!h) return 0.0;
  double m = 0.0;
  for_each_in(*h, n, b, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    m = std::max(m, std::abs(h->values[i]));
  });
  return m;
}

double sq_integral_in(const GridField* g, const Nodes& n, const SlantedBox& b) {
  if (!g) return 0.0;
  double acc = 0.0;
  for_each_in(*g, n, b, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    acc += g->values[i] * g->values[i];
  });
  return acc * g->cell_volume();
}

double positive_measure_in(const GridField& f, const Nodes& n, const SlantedBox& b) {
  std::size_t count = 0;
  for_each_in(f, n, b, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    if (f.values[i] > 0.0) ++count;
  });
  return static_cast<double>(count) * f.cell_volume();
}

// ∫_{Q_R^τ} f^2 at the time node of the cell containing τ.
double slice_mass(const GridField& f, const Nodes& n, const SlantedBox& outer, double tau) {
  const std::size_t it = f.time.cell_of(tau);
  const double t = n.t[it];
  double acc = 0.0;
  for (std::size_t ix = 0; ix < n.x.size(); ++ix) {
    if (!x_in(outer, t, n.x[ix])) continue;
    for (std::size_t iv = 0; iv < n.v.size(); ++iv) {
      if (!v_in(outer, n.v[iv])) continue;
      const double y = f.values[f.index(it, ix, iv)];
      acc += y * y;
    }
  }
  return acc * f.phase.cell_volume();
}

double safe_ratio(double a, double b) {
  if (b > 0.0) return a / b;
  return a > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

// Dense kernel matrix on the velocity nodes, zero on the diagonal.
std::vector<double> kernel_matrix(const KernelSpec& K, const std::vector<Vec>& v) {
  const std::size_t nv = v.size();
  std::vector<double> m(nv * nv, 0.0);
  for (std::size_t i = 0; i < nv; ++i)
    for (std::size_t j = 0; j < nv; ++j)
      if (i != j) m[i * nv + j] = kernel_eval(K, v[i], v[j]);
  return m;
}

}  // namespace

bool SlantedBox::contains(double t, std::span<const double> x, std::span<const double> v) const {
  return time_in(*this, t) && x_in(*this, t, x) && v_in(*this, v);
}

double SlantedBox::volume() const {
  const double wb = unit_ball_volume(anchor.dim());
  const double d = static_cast<double>(anchor.dim());
  return (t_hi - t_lo) * wb * std::pow(x_radius, d) * wb * std::pow(v_radius, d);
}

SlantedBox box_of(const KineticCylinder& c) {
  SlantedBox b;
  b.anchor = c.anchor();
  b.t_lo = c.time_lo();
  b.t_hi = c.time_hi();
  b.x_radius = c.x_radius();
  b.v_radius = c.v_radius();
  return b;
}

double grid_measure(const GridField& f, const SlantedBox& box) {
  const Nodes n = nodes_of(f);
  std::size_t count = 0;
  for_each_in(f, n, box, [&](std::size_t, std::size_t, std::size_t, std::size_t) { ++count; });
  return static_cast<double>(count) * f.cell_volume();
}

Truncation truncate_levels(const GridField& f, double level, const std::optional<SlantedBox>& domain) {
  GridField psi = f;
  std::fill(psi.values.begin(), psi.values.end(), level);
  psi.far_field_v = level;
  return truncate_levels(f, psi, domain);
}

Truncation truncate_levels(const GridField& f, const GridField& psi, const std::optional<SlantedBox>& domain) {
  require_same_grid(f, psi, "the cut-off");
  Truncation tr{f, f, 0.0};
  tr.plus.nonnegative = true;
  tr.minus.nonnegative = false;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double g = f.values[i] - psi.values[i];
    tr.plus.values[i] = std::max(g, 0.0);
    tr.minus.values[i] = std::min(g, 0.0);
  }
  const double far = f.far_field_v - psi.far_field_v;
  tr.plus.far_field_v = std::max(far, 0.0);
  tr.minus.far_field_v = std::min(far, 0.0);

  std::size_t count = 0;
  if (domain) {
    const Nodes n = nodes_of(f);
    for_each_in(f, n, *domain, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
      if (f.values[i] > psi.values[i]) ++count;
    });
  } else {
    for (std::size_t i = 0; i < f.values.size(); ++i)
      if (f.values[i] > psi.values[i]) ++count;
  }
  tr.level_set_measure = static_cast<double>(count) * f.cell_volume();
  return tr;
}

double level_function(double f, double mu, int k) {
  require(mu > 0.0 && mu < 1.0, "mu must lie in (0, 1)");
  require(k >= 0, "k must be nonnegative");
  if (k == 0) return f;
  return std::pow(mu, -2.0 * k) * (f - 1.0) + 1.0;
}

GridField level_function(const GridField& f, double mu, int k) {
  GridField out = f;
  for (double& y : out.values) y = level_function(y, mu, k);
  out.far_field_v = level_function(f.far_field_v, mu, k);
  out.nonnegative = false;
  return out;
}

double cross_term(const KernelSpec& K, const Truncation& tr) {
  require(K.d == tr.plus.d, "kernel dimension does not match the field");
  const Nodes n = nodes_of(tr.plus);
  const std::vector<double> km = kernel_matrix(K, n.v);
  const std::size_t nv = n.v.size();
  const double cell_v = tr.plus.v_lattice().cell_volume();
  double acc = 0.0;
  for (std::size_t it = 0; it < n.t.size(); ++it)
    for (std::size_t ix = 0; ix < n.x.size(); ++ix) {
      const std::size_t base = tr.plus.index(it, ix, 0);
      for (std::size_t i = 0; i < nv; ++i) {
        const double p = tr.plus.values[base + i];
        if (p == 0.0) continue;
        for (std::size_t j = 0; j < nv; ++j) acc += p * tr.minus.values[base + j] * km[i * nv + j];
      }
    }
  return -acc * cell_v * cell_v * tr.plus.time.step() * tr.plus.x_lattice().cell_volume();
}

EnergyBalance energy_balance(const KernelSpec& K, const GridField& f, const GridField* h,
                             const KineticCylinder& inner, const KineticCylinder& outer) {
  require(K.d == f.d, "kernel dimension does not match the field");
  require_nested(inner, outer);
  require(outer.radius() < std::min(1.0, K.Rbar / 2.0), "R must be below min{1, Rbar/2}");
  if (h) require_same_grid(f, *h, "h");
  const Nodes n = nodes_of(f);
  require_unit_slab(f, n, outer);

  const SlantedBox bi = box_of(inner);
  const SlantedBox bo = box_of(outer);
  const double cell = f.cell_volume();
  const double cell_v = f.v_lattice().cell_volume();
  const double r = inner.radius();
  const double R = outer.radius();
  const double expo = 0.5 * (static_cast<double>(f.d) + 2.0 * K.s);

  EnergyBalance e;
  std::vector<double> mass(n.t.size(), 0.0);
  std::vector<std::size_t> ball;
  for (std::size_t iv = 0; iv < n.v.size(); ++iv)
    if (v_in(bi, n.v[iv])) ball.push_back(iv);
  for_each_in(f, n, bi, [&](std::size_t i, std::size_t it, std::size_t ix, std::size_t iv) {
    const double y = f.values[i];
    mass[it] += y * y;
    double g = 0.0;
    for (std::size_t jw : ball) {
      if (jw == iv) continue;
      const double diff = f.values[f.index(it, ix, jw)] - y;
      g += diff * diff / std::pow(dist_sq(n.v[iv], n.v[jw]), expo);
    }
    e.gagliardo += g * cell_v;
  });
  e.gagliardo *= cell;
  for (double m : mass) e.sup_mass = std::max(e.sup_mass, m * f.phase.cell_volume());

  e.initial_mass = slice_mass(f, n, bo, inner.center().t - std::pow(r, 2.0 * K.s));
  e.positive_measure = positive_measure_in(f, n, bo);
  e.source_l2 = sq_integral_in(h, n, bo);
  e.lhs = e.sup_mass + e.gagliardo;
  e.rhs = e.initial_mass + e.positive_measure / ((R - r) * (R - r)) + e.source_l2;
  e.ratio = safe_ratio(e.lhs, e.rhs);
  return e;
}

double w_sigma_1_norm(const GridField& f, const SlantedBox& box, double sigma) {
  require(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0, 1)");
  const Nodes n = nodes_of(f);
  const double cell_x = f.x_lattice().cell_volume();
  const double expo = 0.5 * (static_cast<double>(f.d) + sigma);
  double l1 = 0.0;
  double semi = 0.0;
  std::vector<std::size_t> xs;
  for (std::size_t it = 0; it < n.t.size(); ++it) {
    if (!time_in(box, n.t[it])) continue;
    xs.clear();
    for (std::size_t ix = 0; ix < n.x.size(); ++ix)
      if (x_in(box, n.t[it], n.x[ix])) xs.push_back(ix);
    for (std::size_t iv = 0; iv < n.v.size(); ++iv) {
      if (!v_in(box, n.v[iv])) continue;
      for (std::size_t a : xs) {
        const double fa = f.values[f.index(it, a, iv)];
        l1 += std::abs(fa);
        for (std::size_t b : xs) {
          if (a == b) continue;
          semi += std::abs(fa - f.values[f.index(it, b, iv)]) / std::pow(dist_sq(n.x[a], n.x[b]), expo);
        }
      }
    }
  }
  return (l1 + semi * cell_x) * f.cell_volume();
}

IntegrabilityGain integrability_gain(const KernelSpec& K, const GridField& f, const GridField* h,
                                     const KineticCylinder& inner, const KineticCylinder& outer, double p,
                                     double sigma) {
  require(K.d == f.d, "kernel dimension does not match the field");
  require_admissible_p(f.d, K.s, p);
  require_admissible_sigma(K.s, sigma);
  require(sigma > 0.0, "sigma must be positive");
  require_nested(inner, outer);
  require(outer.radius() <= 1.0, "R must not exceed 1");
  if (h) require_same_grid(f, *h, "h");
  const Nodes n = nodes_of(f);
  require_unit_slab(f, n, outer);

  const SlantedBox bi = box_of(inner);
  const SlantedBox bo = box_of(outer);
  const double gap = outer.radius() - inner.radius();

  IntegrabilityGain g;
  double lp = 0.0;
  for_each_in(f, n, bi, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    lp += std::pow(std::abs(f.values[i]), p);
  });
  g.lp_lhs = std::pow(lp * f.cell_volume(), 2.0 / p);
  const double w = w_sigma_1_norm(f, bi, sigma);
  g.w_sigma_lhs = w * w;

  const double f0 = slice_mass(f, n, bo, inner.center().t - std::pow(inner.radius(), 2.0 * K.s));
  g.initial_term = f0 / (gap * gap);
  g.measure_term = positive_measure_in(f, n, bo) / std::pow(gap, 4.0);
  g.source_term = sq_integral_in(h, n, bo) / (gap * gap);
  g.rhs = g.initial_term + g.measure_term + g.source_term;
  g.lp_ratio = safe_ratio(g.lp_lhs, g.rhs);
  g.w_sigma_ratio = safe_ratio(g.w_sigma_lhs, g.rhs);
  return g;
}

DeGiorgiSchedule make_schedule(const KineticPoint& z0, double r, double R, double s, double L, int k_max) {
  require(r > 0.0 && r < R, "need 0 < r < R");
  require(k_max >= 0, "k_max must be nonnegative");
  require(z0.t < std::pow(r, 2.0 * s), "need t0 < r^{2s}");
  DeGiorgiSchedule sc;
  sc.L = L;
  sc.log_L = L > 0.0 ? std::log(L) : -std::numeric_limits<double>::infinity();
  sc.tau_tilde = std::pow(r, 2.0 * s) - z0.t;
  sc.tau_hat = std::pow(R, 2.0 * s) - z0.t;
  for (int k = 0; k <= k_max; ++k) {
    ScheduleStep st;
    st.k = k;
    const double w = std::exp2(-static_cast<double>(k));
    st.l = L * (1.0 - w);
    st.r = r + w * (R - r);
    st.t = -sc.tau_tilde - w * (sc.tau_hat - sc.tau_tilde);
    st.box.anchor = z0;
    st.box.t_lo = st.t;
    st.box.t_hi = z0.t;
    st.box.open_lo = true;
    st.box.x_radius = std::pow(st.r, 1.0 + 2.0 * s);
    st.box.v_radius = st.r;
    sc.steps.push_back(std::move(st));
  }
  return sc;
}

double first_lemma_log_L(double A0, double R_minus_r, double h_sup, double p) {
  require(R_minus_r > 0.0, "R - r must be positive");
  const DeGiorgiExponents e = degiorgi_exponents(p);
  if (A0 <= 0.0) return -std::numeric_limits<double>::infinity();
  return e.beta2 * std::log(A0) - e.beta1 * std::log(R_minus_r) +
         4.0 * p * p / ((p - 2.0) * (2.0 * p - 2.0)) * std::log(2.0) +
         p / (2.0 * p - 2.0) * std::log1p(R_minus_r * h_sup);
}

FirstLemmaResult first_lemma(const KernelSpec& K, const GridField& f, const GridField* h,
                             const KineticCylinder& inner, const KineticCylinder& outer, double p, double eps,
                             const FirstLemmaOptions& opts) {
  require(K.d == f.d, "kernel dimension does not match the field");
  require_nested(inner, outer);
  require(outer.radius() <= 1.0, "R must not exceed 1");
  require(p > 2.0, "p must exceed 2");
  require_admissible_p(f.d, K.s, p);
  require(eps >= 0.0, "eps must be nonnegative");
  require(opts.k_max >= 0, "k_max must be nonnegative");
  require(!opts.L || *opts.L > 0.0, "L must be positive");
  if (h) require_same_grid(f, *h, "h");
  const Nodes n = nodes_of(f);
  require_unit_slab(f, n, outer);

  const double r = inner.radius();
  const double R = outer.radius();
  const SlantedBox bo = box_of(outer);

  FirstLemmaResult res;
  res.exponents = degiorgi_exponents(p);
  res.h_sup = sup_abs_in(h, n, bo);

  DeGiorgiSchedule sc = make_schedule(inner.center(), r, R, K.s, 1.0, opts.k_max);
  res.A0 = 0.0;
  for_each_in(f, n, sc.steps.front().box, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    res.A0 += f.values[i] * f.values[i];
  });
  res.A0 *= f.cell_volume();
  require(res.A0 <= eps, "the integral of f^2 over the outer cylinder exceeds eps");

  const double L = opts.L ? *opts.L : std::exp(first_lemma_log_L(res.A0, R - r, res.h_sup, p));
  sc = make_schedule(inner.center(), r, R, K.s, L, opts.k_max);

  res.converged = true;
  res.chebyshev_holds = true;
  for (auto& st : sc.steps) {
    const double threshold = std::exp2(-static_cast<double>(st.k) - 2.0) * L;
    double A = 0.0;
    std::size_t above = 0;
    for_each_in(f, n, st.box, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
      const double g = std::max(f.values[i] - st.l, 0.0);
      A += g * g;
      if (g > threshold) ++above;
    });
    st.A = A * f.cell_volume();
    st.A_star = res.A0 * std::exp2(-static_cast<double>(st.k) * res.exponents.log2_Q);
    st.chebyshev_measure = static_cast<double>(above) * f.cell_volume();
    st.chebyshev_bound = st.A > 0.0 ? std::exp2(2.0 * st.k + 4.0) * st.A / (L * L) : 0.0;
    st.chebyshev_holds = st.chebyshev_measure <= st.chebyshev_bound * (1.0 + 1e-12);
    st.decay_holds = st.A <= st.A_star * (1.0 + 1e-12);
    res.converged = res.converged && st.decay_holds;
    res.chebyshev_holds = res.chebyshev_holds && st.chebyshev_holds;
  }
  res.schedule = std::move(sc);

  const DeGiorgiExponents& e = res.exponents;
  if (eps > 0.0) {
    const double log_bound = std::log(opts.C) + 0.5 * e.beta1 * std::log1p((R - r) * res.h_sup) -
                             e.beta1 * std::log(R - r) + e.beta2 * std::log(eps);
    res.bound = std::min(std::exp(log_bound), 0.5);
  }
  for_each_in(f, n, box_of(inner), [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    res.sup_inner = std::max(res.sup_inner, f.values[i]);
  });
  return res;
}

Barriers make_barriers(std::size_t d, double s, double r0, double mu) {
  require(d >= 1, "d must be at least 1");
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(r0 > 0.0, "r0 must be positive");
  require(mu > 0.0 && mu < 1.0, "mu must lie in (0, 1)");
  return Barriers{d, s, r0, mu};
}

double barrier_psi(const Barriers& B, std::span<const double> x) {
  require(x.size() == B.d, "x has the wrong dimension");
  const double a = std::pow(3.0 * B.r0, 1.0 + 2.0 * B.s);
  const double b = std::pow(9.0 * B.r0, 1.0 + 2.0 * B.s);
  const double rho = std::sqrt(dist_sq(x, Vec(B.d, 0.0)));
  if (rho <= a) return 0.0;
  if (rho >= b) return 1.0;
  // C^∞ step e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}).
  const double u = (rho - a) / (b - a);
  const double p = std::exp(-1.0 / u);
  const double q = std::exp(-1.0 / (1.0 - u));
  return p / (p + q);
}

double barrier_F(const Barriers& B, std::span<const double> v, int which) {
  require(which >= 0 && which <= 2, "barrier index must be 0, 1 or 2");
  require(v.size() == B.d, "v has the wrong dimension");
  const double c = 10.0 - static_cast<double>(which);
  const double r2 = B.r0 * B.r0;
  const double q = (dist_sq(v, Vec(B.d, 0.0)) - c * r2) / r2;
  return std::clamp(q, -1.0, 0.0);
}

double barrier_coefficient_term(const Barriers& B, std::span<const double> v, int which) {
  const double F = barrier_F(B, v, which);
  switch (which) {
    case 0: return F;
    case 1: return B.mu * F;
    default: return (B.mu * B.mu) * F;
  }
}

double barrier_eval(const Barriers& B, std::span<const double> x, std::span<const double> v, int which) {
  return (barrier_psi(B, x) + 1.0) + barrier_coefficient_term(B, v, which);
}

double barrier_difference(const Barriers& B, std::span<const double> v, int i, int j) {
  return barrier_coefficient_term(B, v, i) - barrier_coefficient_term(B, v, j);
}

PoincareTerms poincare_terms(const KernelSpec& K, const GridField& f, const GridField* h, double eps,
                             const PoincareOptions& opts) {
  require(K.d == f.d, "kernel dimension does not match the field");
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(opts.scale > 0.0, "scale must be positive");
  require(opts.sigma > 0.0, "sigma must be positive");
  require_admissible_sigma(K.s, opts.sigma);
  if (h) require_same_grid(f, *h, "h");
  for (double y : f.values) require(y >= 0.0, "f must be nonnegative");

  const Nodes n = nodes_of(f);
  const std::size_t d = f.d;
  const double rho = opts.scale;
  const KineticPoint z0 = origin(d);
  const SlantedBox q1 = box_of(make_cylinder(z0, rho, K.s));
  const SlantedBox q1m = box_of(make_cylinder(z0, rho, K.s, CylinderVariant::past));
  const SlantedBox q2 = box_of(make_cylinder(z0, 2.0 * rho, K.s));
  const SlantedBox q3 = box_of(make_cylinder(z0, 3.0 * rho, K.s));
  const double cell = f.cell_volume();

  // Shifted mean: exact for constant fields.
  PoincareTerms out;
  double lo = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for_each_in(f, n, q1m, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    lo = std::min(lo, f.values[i]);
    ++count;
  });
  if (count == 0) throw NumericalError("no grid nodes in Q_1^-");
  double shifted = 0.0;
  for_each_in(f, n, q1m, [&](std::size_t i, std::size_t, std::size_t, std::size_t) { shifted += f.values[i] - lo; });
  out.average = lo + shifted / static_cast<double>(count);
  for_each_in(f, n, q1, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    out.lhs += std::max(f.values[i] - out.average, 0.0);
  });
  out.lhs *= cell;

  // Region (-(3ρ)^{2s}, 0] × B_{(3ρ)^{1+2s}} × R^d: the q3 box without the v ball.
  SlantedBox wide = q3;
  wide.open_lo = true;
  wide.v_radius = std::numeric_limits<double>::infinity();
  const std::vector<double> km = kernel_matrix(K, n.v);
  const std::size_t nv = n.v.size();
  const double cell_v = f.v_lattice().cell_volume();
  std::vector<double> outside(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) outside[iv] = outside_box_mass(K, f.v_lattice(), n.v[iv]);
  double sym = 0.0;
  double skew = 0.0;
  for_each_in(f, n, wide, [&](std::size_t i, std::size_t it, std::size_t ix, std::size_t iv) {
    const std::size_t base = f.index(it, ix, 0);
    const double y = f.values[i];
    double inner = 0.0;
    double asym = 0.0;
    for (std::size_t jw = 0; jw < nv; ++jw) {
      if (jw == iv) continue;
      const double diff = y - f.values[base + jw];
      inner += diff * diff * km[iv * nv + jw];
      asym += km[iv * nv + jw] - km[jw * nv + iv];
    }
    inner *= cell_v;
    const double far = y - f.far_field_v;
    inner += far * far * outside[iv];
    sym += std::sqrt(inner);
    skew += y * asym * cell_v;
  });
  const double dd = static_cast<double>(d);
  out.sym_term = std::pow(eps, -(dd + 2.0)) * sym * cell;
  out.skew_term = std::pow(eps, -dd) * std::abs(skew * cell);
  out.sobolev_term = std::pow(eps, opts.sigma) * w_sigma_1_norm(f, q2, opts.sigma);
  if (h) {
    double acc = 0.0;
    for_each_in(*h, n, q3, [&](std::size_t i, std::size_t, std::size_t, std::size_t) { acc += std::abs(h->values[i]); });
    out.source_term = acc * cell;
  }
  out.rhs = out.sym_term + out.skew_term + out.sobolev_term + out.source_term;
  out.ratio = safe_ratio(out.lhs, out.rhs);
  out.holds = out.lhs <= opts.C * out.rhs;
  return out;
}

IvlCheck ivl_check(const KernelSpec& K, const GridField& f, const GridField* h, double r0, double delta1,
                   double delta2, const IvlOptions& opts) {
  require(K.d == f.d, "kernel dimension does not match the field");
  require(r0 > 0.0 && r0 < 1.0 / 3.0, "r0 must lie in (0, 1/3)");
  if (h) require_same_grid(f, *h, "h");
  const std::size_t d = f.d;
  const double s = K.s;
  const Nodes n = nodes_of(f);
  const KineticPoint z0 = origin(d);

  // 0 ≤ f ≤ 1 on (-3, 0] × B_1 × R^d.
  SlantedBox slab;
  slab.anchor = z0;
  slab.t_lo = -3.0;
  slab.open_lo = true;
  slab.x_radius = 1.0;
  slab.v_radius = std::numeric_limits<double>::infinity();
  for_each_in(f, n, slab, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    if (!(f.values[i] >= 0.0 && f.values[i] <= 1.0)) throw ValidationError("f must lie in [0, 1] on the slab");
  });

  IvlCheck c;
  c.constants = ivl_constants(d, s, r0, delta1, delta2, opts.sigma, opts.knobs);
  c.mu_log = c.constants.mu_log;
  c.nu_log = c.constants.nu_log;
  c.nu_bound_log = c.nu_log + std::log(cylinder_volume(d, s, 0.5));
  const double mu = std::exp(c.mu_log);
  const double mu2 = mu * mu;

  const SlantedBox past = box_of(make_cylinder(z0, r0, s, CylinderVariant::past));
  const SlantedBox plain = box_of(make_cylinder(z0, r0, s));
  std::size_t n_past = 0, n_low = 0, n_plain = 0, n_high = 0;
  for_each_in(f, n, past, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    ++n_past;
    if (f.values[i] <= 0.0) ++n_low;
  });
  for_each_in(f, n, plain, [&](std::size_t i, std::size_t, std::size_t, std::size_t) {
    ++n_plain;
    if (f.values[i] > 1.0 - mu2) ++n_high;
  });
  if (n_past == 0 || n_plain == 0) throw NumericalError("the grid does not resolve Q_{r0}");
  c.low_fraction = static_cast<double>(n_low) / static_cast<double>(n_past);
  c.high_fraction = static_cast<double>(n_high) / static_cast<double>(n_plain);
  c.h_sup = sup_abs_in(h, n, box_of(make_cylinder(z0, 3.0 * r0, s)));
  c.hypothesis_low = c.low_fraction >= delta1;
  c.hypothesis_high = c.high_fraction >= delta2;
  c.hypothesis_source = c.h_sup <= opts.C_h * mu2;
  c.hypotheses_hold = c.hypothesis_low && c.hypothesis_high && c.hypothesis_source;

  SlantedBox region;
  region.anchor = z0;
  region.t_lo = -3.0;
  region.open_lo = true;
  region.x_radius = std::pow(0.5, 1.0 + 2.0 * s);
  region.v_radius = 0.5;
  const Barriers B = make_barriers(d, s, r0, mu);
  std::size_t between = 0;
  for_each_in(f, n, region, [&](std::size_t i, std::size_t, std::size_t ix, std::size_t iv) {
    const double y = f.values[i];
    if (barrier_eval(B, n.x[ix], n.v[iv], 0) < y && y < barrier_eval(B, n.x[ix], n.v[iv], 2)) ++between;
  });
  c.intermediate_measure = static_cast<double>(between) * f.cell_volume();

  c.region_covered = f.time.lo <= -3.0 && f.time.hi >= 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const Axis& ax = f.phase.axis(k);
    const Axis& av = f.phase.axis(d + k);
    c.region_covered = c.region_covered && ax.lo <= -region.x_radius && ax.hi >= region.x_radius &&
                       av.lo <= -0.5 && av.hi >= 0.5;
  }
  c.conclusion_holds = c.intermediate_measure > 0.0 && std::log(c.intermediate_measure) >= c.nu_bound_log;
  return c;
}

}  // namespace kdg
