#include "kdg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kdg/error.hpp"
#include "kdg/quadrature.hpp"

namespace kdg {

namespace {

double dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

void box_bounds(const Lattice& grid, Vec& lo, Vec& hi) {
  lo.resize(grid.rank());
  hi.resize(grid.rank());
  for (std::size_t k = 0; k < grid.rank(); ++k) {
    lo[k] = grid.axis(k).lo;
    hi[k] = grid.axis(k).hi;
  }
}

double min_step(const Lattice& grid) {
  double h = grid.axis(0).step();
  for (std::size_t k = 1; k < grid.rank(); ++k) h = std::min(h, grid.axis(k).step());
  return h;
}

// Largest distance from v to any point of the (cell-edge) box.
double far_corner(const Lattice& grid, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.rank(); ++k) {
    const double a = std::max(std::abs(v[k] - grid.axis(k).lo), std::abs(v[k] - grid.axis(k).hi));
    acc += a * a;
  }
  return std::sqrt(acc);
}

void check_dims(const KernelSpec& K, std::span<const double> v, std::span<const double> w) {
  require(v.size() == K.d && w.size() == K.d, "velocity dimension does not match the kernel");
}

// Interpolated tabulated profile a(rho).
double table_lookup(const Vec& radii, const Vec& values, double rho) {
  if (rho <= radii.front()) return values.front();
  if (rho >= radii.back()) return values.back();
  const auto it = std::upper_bound(radii.begin(), radii.end(), rho);
  const std::size_t j = static_cast<std::size_t>(it - radii.begin());
  const double w = (rho - radii[j - 1]) / (radii[j] - radii[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

bool on_boundary(const Lattice& grid, std::size_t node) {
  const auto idx = grid.multi(node);
  for (std::size_t k = 0; k < grid.rank(); ++k)
    if (idx[k] == 0 || idx[k] + 1 == grid.extent(k)) return true;
  return false;
}

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::fractional_laplacian: return "fractional_laplacian";
    case KernelKind::boltzmann: return "boltzmann";
    case KernelKind::custom: return "custom";
  }
  return "unknown";
}

void KernelSpec::validate() const {
  require(d >= 1, "kernel dimension must be at least 1");
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(lambda > 0.0, "lambda must be positive");
  require(Lambda >= lambda, "Lambda must be at least lambda");
  require(Rbar > 0.0, "Rbar must be positive");
  switch (kind) {
    case KernelKind::fractional_laplacian: break;
    case KernelKind::boltzmann:
      require(d >= 2, "the Boltzmann kernel needs d >= 2 (the hyperplane degenerates in d = 1)");
      require(d <= 3, "the Boltzmann hyperplane quadrature supports d <= 3");
      require(gamma > -static_cast<double>(d) && gamma <= 1.0, "gamma must lie in (-d, 1]");
      require(gamma + 2.0 * s <= 2.0, "gamma + 2s must not exceed 2");
      require(density != nullptr, "the Boltzmann kernel needs a density");
      require(density->dim() == d, "density dimension does not match d");
      for (double x : density->values) require(x >= 0.0, "the Boltzmann density must be nonnegative");
      require(density->far_field == 0.0, "the Boltzmann density must vanish outside its box");
      break;
    case KernelKind::custom:
      require(static_cast<bool>(custom), "custom kernel needs a callable");
      break;
  }
}

KernelSpec fractional_laplacian_kernel(std::size_t d, double s, double lambda, double Lambda, double Rbar) {
  KernelSpec K;
  K.kind = KernelKind::fractional_laplacian;
  K.d = d;
  K.s = s;
  K.lambda = lambda;
  K.Lambda = Lambda;
  K.Rbar = Rbar;
  K.validate();
  return K;
}

KernelSpec boltzmann_kernel(VelocityField density, double s, double gamma, double lambda, double Lambda,
                            double Rbar) {
  KernelSpec K;
  K.kind = KernelKind::boltzmann;
  K.d = density.dim();
  K.s = s;
  K.gamma = gamma;
  K.lambda = lambda;
  K.Lambda = Lambda;
  K.Rbar = Rbar;
  K.density = std::make_shared<const VelocityField>(std::move(density));
  K.validate();
  return K;
}

KernelSpec custom_kernel(std::size_t d, double s, KernelFunction fn, double lambda, double Lambda,
                         double Rbar) {
  KernelSpec K;
  K.kind = KernelKind::custom;
  K.d = d;
  K.s = s;
  K.custom = std::move(fn);
  K.lambda = lambda;
  K.Lambda = Lambda;
  K.Rbar = Rbar;
  K.validate();
  return K;
}

KernelSpec tabulated_radial_kernel(std::size_t d, double s, Vec radii, Vec values, double lambda,
                                   double Lambda, double Rbar) {
  require(!radii.empty() && radii.size() == values.size(), "table radii and values must match");
  for (std::size_t i = 1; i < radii.size(); ++i)
    require(radii[i] > radii[i - 1], "table radii must be increasing");
  for (double a : values) require(a >= 0.0 && std::isfinite(a), "table values must be nonnegative");
  const double expo = static_cast<double>(d) + 2.0 * s;
  auto fn = [radii = std::move(radii), values = std::move(values), expo](std::span<const double> v,
                                                                         std::span<const double> w) {
    const double rho = dist(v, w);
    return table_lookup(radii, values, rho) * std::pow(rho, -expo);
  };
  return custom_kernel(d, s, fn, lambda, Lambda, Rbar);
}

double hyperplane_integral(const VelocityField& f, std::span<const double> v, std::span<const double> e,
                           double beta) {
  const std::size_t d = f.dim();
  require(v.size() == d && e.size() == d, "hyperplane integral dimension mismatch");
  const double reach = far_corner(f.grid, v) + min_step(f.grid);
  const double h = 0.25 * min_step(f.grid);
  const std::size_t n = static_cast<std::size_t>(std::ceil(reach / h));
  Vec p(d);
  double acc = 0.0;
  if (d == 2) {
    const double u0 = -e[1];
    const double u1 = e[0];
    for (std::size_t j = 0; j < 2 * n; ++j) {
      const double tau = -static_cast<double>(n) * h + (static_cast<double>(j) + 0.5) * h;
      p[0] = v[0] + tau * u0;
      p[1] = v[1] + tau * u1;
      const double fv = interpolate(f, p);
      if (fv != 0.0) acc += fv * std::pow(std::abs(tau), beta);
    }
    return acc * h;
  }
  if (d == 3) {
    // Orthonormal frame (u, w) of the plane orthogonal to e.
    Vec a{1.0, 0.0, 0.0};
    if (std::abs(e[0]) > 0.9) a = {0.0, 1.0, 0.0};
    const double ae = a[0] * e[0] + a[1] * e[1] + a[2] * e[2];
    Vec u(3);
    for (int i = 0; i < 3; ++i) u[i] = a[i] - ae * e[i];
    const double un = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    for (double& c : u) c /= un;
    const Vec w{e[1] * u[2] - e[2] * u[1], e[2] * u[0] - e[0] * u[2], e[0] * u[1] - e[1] * u[0]};
    const std::size_t n_theta = 64;
    const double dth = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
    for (std::size_t j = 0; j < n; ++j) {
      const double rho = (static_cast<double>(j) + 0.5) * h;
      double ring = 0.0;
      for (std::size_t q = 0; q < n_theta; ++q) {
        const double th = (static_cast<double>(q) + 0.5) * dth;
        const double c = std::cos(th);
        const double sn = std::sin(th);
        for (int i = 0; i < 3; ++i) p[i] = v[i] + rho * (c * u[i] + sn * w[i]);
        ring += interpolate(f, p);
      }
      acc += ring * dth * std::pow(rho, beta + 1.0);
    }
    return acc * h;
  }
  throw ValidationError("hyperplane integral supports d = 2 and d = 3");
}

double kernel_eval(const KernelSpec& K, std::span<const double> v, std::span<const double> w) {
  check_dims(K, v, w);
  const double r = dist(v, w);
  if (r == 0.0) throw NumericalError("kernel evaluated on the diagonal v = w");
  const double expo = static_cast<double>(K.d) + 2.0 * K.s;
  switch (K.kind) {
    case KernelKind::fractional_laplacian: return std::pow(r, -expo);
    case KernelKind::boltzmann: {
      Vec e(K.d);
      for (std::size_t i = 0; i < K.d; ++i) e[i] = (w[i] - v[i]) / r;
      return hyperplane_integral(*K.density, v, e, K.gamma + 1.0 + 2.0 * K.s) * std::pow(r, -expo);
    }
    case KernelKind::custom: {
      const double k = K.custom(v, w);
      if (!(k >= 0.0) || !std::isfinite(k)) throw NumericalError("custom kernel returned a negative or non-finite value");
      return k;
    }
  }
  return 0.0;
}

bool is_separable(const KernelSpec& K) { return K.kind != KernelKind::custom; }

double angular_profile(const KernelSpec& K, std::span<const double> v, std::span<const double> e,
                       double rho) {
  require(e.size() == K.d && v.size() == K.d, "direction dimension does not match the kernel");
  switch (K.kind) {
    case KernelKind::fractional_laplacian: return 1.0;
    case KernelKind::boltzmann: return hyperplane_integral(*K.density, v, e, K.gamma + 1.0 + 2.0 * K.s);
    case KernelKind::custom: {
      Vec w(K.d);
      for (std::size_t i = 0; i < K.d; ++i) w[i] = v[i] + rho * e[i];
      return kernel_eval(K, v, w) * std::pow(rho, static_cast<double>(K.d) + 2.0 * K.s);
    }
  }
  return 0.0;
}

namespace {

struct AngularData {
  double tail = 0.0;  // ∫_S b(v,e) rho_exit^{-2s} / (2s) dS
  Vec second;         // ∫_S b(v,e) e_a e_b dS, row-major d x d
};

AngularData angular_data(const KernelSpec& K, const Lattice& grid, std::span<const double> v,
                         std::size_t directions, bool want_tail, bool want_second) {
  const std::size_t d = K.d;
  AngularData out;
  out.second.assign(d * d, 0.0);
  if (!want_tail && !want_second) return out;
  Vec lo, hi;
  box_bounds(grid, lo, hi);
  const bool radial = K.kind == KernelKind::fractional_laplacian;
  if (radial && want_second && !want_tail) {
    for (std::size_t a = 0; a < d; ++a) out.second[a * d + a] = unit_sphere_area(d) / static_cast<double>(d);
    return out;
  }
  const SphereRule rule = sphere_rule(d, d == 1 ? 2 : directions);
  for (std::size_t q = 0; q < rule.directions.size(); ++q) {
    const Vec& e = rule.directions[q];
    const double wq = rule.weights[q];
    const double rexit = exit_distance(v, e, lo, hi);
    const double b = angular_profile(K, v, e, rexit);
    if (want_tail) out.tail += wq * b * std::pow(rexit, -2.0 * K.s) / (2.0 * K.s);
    if (want_second && is_separable(K))
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t c = 0; c < d; ++c) out.second[a * d + c] += wq * b * e[a] * e[c];
  }
  if (radial && want_second) {
    std::fill(out.second.begin(), out.second.end(), 0.0);
    for (std::size_t a = 0; a < d; ++a) out.second[a * d + a] = unit_sphere_area(d) / static_cast<double>(d);
  }
  return out;
}

}  // namespace

double outside_box_mass(const KernelSpec& K, const Lattice& grid, std::span<const double> v,
                        std::size_t directions) {
  return angular_data(K, grid, v, directions, true, false).tail;
}

OperatorTerms nonlocal_operator_terms(const KernelSpec& K, const VelocityField& f, std::size_t node,
                                      const OperatorOptions& opts) {
  K.validate();
  require(f.dim() == K.d, "field dimension does not match the kernel");
  require(node < f.size(), "node index out of range");
  for (std::size_t k = 0; k < f.dim(); ++k)
    require(f.grid.extent(k) >= 3, "velocity grid too coarse to puncture (need 3 nodes per axis)");

  const std::size_t d = K.d;
  const Vec v = f.point(node);
  const double fv = f.values[node];
  const double cell = f.grid.cell_volume();
  OperatorTerms out;

  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (j == node) continue;
    const double df = f.values[j] - fv;
    if (df == 0.0) continue;
    const Vec w = f.point(j);
    acc += kernel_eval(K, v, w) * df;
  }
  out.grid_sum = acc * cell;

  const bool want_near = opts.near_field && is_separable(K) && !on_boundary(f.grid, node);
  const bool want_far = opts.far_field && f.far_field != fv;
  const AngularData ang = angular_data(K, f.grid, v, opts.directions, want_far, want_near);

  if (want_near) {
    const auto idx = f.grid.multi(node);
    auto at = [&](std::size_t a, int da, std::size_t b, int db) {
      auto m = idx;
      m[a] = static_cast<std::size_t>(static_cast<long>(m[a]) + da);
      m[b] = static_cast<std::size_t>(static_cast<long>(m[b]) + db);
      return f.values[f.grid.flat(m)];
    };
    double quad = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double ha = f.grid.axis(a).step();
      for (std::size_t b = 0; b < d; ++b) {
        const double m = ang.second[a * d + b];
        if (m == 0.0) continue;
        double d2;
        if (a == b) {
          d2 = (at(a, 1, a, 0) - 2.0 * fv + at(a, -1, a, 0)) / (ha * ha);
        } else {
          const double hb = f.grid.axis(b).step();
          d2 = (at(a, 1, b, 1) - at(a, 1, b, -1) - at(a, -1, b, 1) + at(a, -1, b, -1)) / (4.0 * ha * hb);
        }
        quad += d2 * m;
      }
    }
    const double rc = std::pow(cell / unit_ball_volume(d), 1.0 / static_cast<double>(d));
    out.near_field = 0.5 * quad * std::pow(rc, 2.0 - 2.0 * K.s) / (2.0 - 2.0 * K.s);
  }
  if (want_far) out.far_field = (f.far_field - fv) * ang.tail;
  return out;
}

std::vector<double> apply_operator_slice(const KernelSpec& K, const VelocityField& f,
                                         const OperatorOptions& opts) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = nonlocal_operator_terms(K, f, i, opts).value();
  return out;
}

double apply_nonlocal_operator(const KernelSpec& K, const GridField& f, const KineticPoint& z,
                               const OperatorOptions& opts) {
  const std::size_t flat = locate_node(f, z);
  const std::size_t nv = f.v_size();
  const std::size_t iv = flat % nv;
  const std::size_t ix = (flat / nv) % f.x_size();
  const std::size_t it = flat / (nv * f.x_size());
  return nonlocal_operator_terms(K, f.velocity_slice(it, ix), iv, opts).value();
}

double bilinear_form(const KernelSpec& K, const VelocityField& phi, const VelocityField& g,
                     const OperatorOptions& opts) {
  require(phi.grid == g.grid, "bilinear form needs both slices on the same grid");
  double scale = 0.0;
  for (double x : phi.values) scale = std::max(scale, std::abs(x));
  for (double x : g.values) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!on_boundary(phi.grid, i)) continue;
    if (std::abs(phi.values[i]) > 1e-14 * scale || std::abs(g.values[i]) > 1e-14 * scale)
      throw ValidationError("unsupported support: test function is nonzero on the velocity box boundary");
  }
  require(phi.far_field == 0.0 && g.far_field == 0.0, "test functions must vanish outside the box");
  double acc = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (g.values[i] == 0.0) continue;
    acc += g.values[i] * nonlocal_operator_terms(K, phi, i, opts).value();
  }
  return -acc * phi.grid.cell_volume();
}

double gagliardo_seminorm_sq(const VelocityField& phi, double s, const OperatorOptions& opts) {
  const KernelSpec K = fractional_laplacian_kernel(phi.dim(), s);
  return 2.0 * bilinear_form(K, phi, phi, opts);
}

double l2_norm(const VelocityField& phi) {
  double acc = 0.0;
  for (double x : phi.values) acc += x * x;
  return std::sqrt(acc * phi.grid.cell_volume());
}

double hs_norm(const VelocityField& phi, double s) {
  const double l2 = l2_norm(phi);
  return std::sqrt(l2 * l2 + std::max(0.0, gagliardo_seminorm_sq(phi, s)));
}

BilinearBound bilinear_bound(const KernelSpec& K, const VelocityField& phi, const VelocityField& g) {
  BilinearBound out;
  out.value = bilinear_form(K, phi, g);
  out.phi_hs = hs_norm(phi, K.s);
  out.g_hs = hs_norm(g, K.s);
  const double denom = out.phi_hs * out.g_hs;
  out.ratio = denom > 0.0 ? std::abs(out.value) / denom : 0.0;
  return out;
}

Macroscopics compute_macroscopics(const GridField& f, bool entropy) {
  f.validate();
  Macroscopics out;
  out.nt = f.nt();
  out.nx = f.x_size();
  const std::size_t nv = f.v_size();
  const Lattice vl = f.v_lattice();
  const double cell = vl.cell_volume();
  std::vector<double> vsq(nv);
  for (std::size_t iv = 0; iv < nv; ++iv) {
    const Vec v = vl.point(iv);
    double acc = 0.0;
    for (double c : v) acc += c * c;
    vsq[iv] = acc;
  }
  const std::size_t n = out.nt * out.nx;
  out.M.assign(n, 0.0);
  out.E.assign(n, 0.0);
  out.H.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double* row = f.values.data() + k * nv;
    double m = 0.0, e = 0.0, h = 0.0;
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const double x = row[iv];
      m += x;
      e += x * vsq[iv];
      if (entropy) {
        if (x < 0.0) throw ValidationError("entropy requested for a field with negative values");
        if (x > 0.0) h += x * std::log(x);
      }
    }
    out.M[k] = m * cell;
    out.E[k] = e * cell;
    out.H[k] = h * cell;
  }
  return out;
}

}  // namespace kdg
