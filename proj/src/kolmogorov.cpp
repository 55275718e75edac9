#include "kdg/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "kdg/constants.hpp"
#include "kdg/error.hpp"
#include "kdg/quadrature.hpp"
#include "kdg/spectral.hpp"

namespace kdg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double symbol_exponent(double s, std::span<const double> phi, std::span<const double> xi, std::size_t n_tau) {
  if (phi.size() == 1) return symbol_exponent_1d(s, phi[0], xi[0]);
  double pp = 0.0, px = 0.0, xx = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    pp += phi[i] * phi[i];
    px += phi[i] * xi[i];
    xx += xi[i] * xi[i];
  }
  if (pp == 0.0) return std::pow(xx, s);
  // |ξ - τφ|^2 = a + pp (τ - τ*)^2 with τ* = px / pp.
  const double star = px / pp;
  const double a = std::max(0.0, xx - px * star);
  const double u0 = -star, u1 = 1.0 - star;
  const double q = 2.0 * s + 1.0;
  if (a <= 1e-13 * xx) {
    // Collinear: pp^s ∫ |u|^{2s} du.
    auto prim = [q](double u) { return std::copysign(std::pow(std::abs(u), q), u) / q; };
    return std::pow(pp, s) * (prim(u1) - prim(u0));
  }
  // u = c sinh w with c = sqrt(a / pp) turns the kink into a smooth integrand.
  const double c = std::sqrt(a / pp);
  const double w0 = std::asinh(u0 / c), w1 = std::asinh(u1 / c);
  const auto panels = static_cast<std::size_t>(std::ceil(w1 - w0)) + 1;
  Vec breaks(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) breaks[i] = w0 + (w1 - w0) * static_cast<double>(i) / static_cast<double>(panels);
  breaks.back() = w1;
  const double scale = std::pow(a, s) * c;
  return scale * integrate_panels([q](double w) { return std::pow(std::cosh(w), q); }, breaks, n_tau);
}

// Shape, per-axis frequencies and node coordinates of a phase lattice.
struct PhaseLayout {
  std::size_t d = 1;
  std::vector<std::size_t> shape;
  std::vector<Vec> freq;
  std::vector<Vec> nodes;
  std::size_t size = 0;
  std::size_t x_size = 0;
  std::size_t v_size = 0;

  explicit PhaseLayout(const PhaseField& f) : d(f.d) {
    const Lattice& g = f.grid;
    require(g.rank() == 2 * d, "phase field must have 2d axes");
    size = g.size();
    for (std::size_t k = 0; k < g.rank(); ++k) {
      shape.push_back(g.extent(k));
      freq.push_back(fft_frequencies(g.axis(k)));
      Vec nd(g.extent(k));
      for (std::size_t i = 0; i < nd.size(); ++i) nd[i] = g.axis(k).node(i);
      nodes.push_back(std::move(nd));
    }
    x_size = 1;
    v_size = 1;
    for (std::size_t k = 0; k < d; ++k) {
      x_size *= shape[k];
      v_size *= shape[d + k];
    }
  }

  // Multi-index of a flat position along each axis.
  void unflatten(std::size_t flat, std::vector<std::size_t>& idx) const {
    idx.resize(shape.size());
    for (std::size_t k = shape.size(); k-- > 0;) {
      idx[k] = flat % shape[k];
      flat /= shape[k];
    }
  }

  std::vector<std::size_t> x_axes() const {
    std::vector<std::size_t> a(d);
    for (std::size_t k = 0; k < d; ++k) a[k] = k;
    return a;
  }
  std::vector<std::size_t> v_axes() const {
    std::vector<std::size_t> a(d);
    for (std::size_t k = 0; k < d; ++k) a[k] = d + k;
    return a;
  }
  std::vector<std::size_t> all_axes() const {
    std::vector<std::size_t> a(2 * d);
    for (std::size_t k = 0; k < 2 * d; ++k) a[k] = k;
    return a;
  }
};

// Spectral propagator with a cache of symbol tables keyed by t.
class Propagator {
 public:
  Propagator(const PhaseField& proto, double s, std::size_t n_tau) : layout_(proto), s_(s), n_tau_(n_tau) {
    require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  }

  // F[f(x - t v, v)] in place: x-transform, shear phase, v-transform.
  void sheared_transform(std::vector<Complex>& data, double t) const {
    fft_axes(data, layout_.shape, layout_.x_axes(), false);
    if (t != 0.0) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < layout_.size; ++i) {
        layout_.unflatten(i, idx);
        double arg = 0.0;
        for (std::size_t k = 0; k < layout_.d; ++k)
          arg += layout_.freq[k][idx[k]] * layout_.nodes[layout_.d + k][idx[layout_.d + k]];
        data[i] *= std::polar(1.0, -kTwoPi * t * arg);
      }
    }
    fft_axes(data, layout_.shape, layout_.v_axes(), false);
  }

  const std::vector<double>& table(double t) {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    std::vector<double> m(layout_.size);
    const std::size_t d = layout_.d;
    const double tx = std::pow(t, 1.0 + 1.0 / (2.0 * s_));
    const double tv = std::pow(t, 1.0 / (2.0 * s_));
    std::vector<std::size_t> idx;
    Vec phi(d), xi(d);
    for (std::size_t i = 0; i < layout_.size; ++i) {
      layout_.unflatten(i, idx);
      for (std::size_t k = 0; k < d; ++k) {
        phi[k] = -tx * kTwoPi * layout_.freq[k][idx[k]];
        xi[k] = tv * kTwoPi * layout_.freq[d + k][idx[d + k]];
      }
      m[i] = std::exp(-symbol_exponent(s_, phi, xi, n_tau_));
    }
    if (cache_.size() > 64) cache_.clear();
    return cache_.emplace(t, std::move(m)).first->second;
  }

  PhaseField apply(const PhaseField& f, double t) {
    if (t == 0.0) return f;
    std::vector<Complex> data(f.values.begin(), f.values.end());
    sheared_transform(data, t);
    const auto& m = table(t);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] *= m[i];
    fft_axes(data, layout_.shape, layout_.all_axes(), true);
    PhaseField out = f;
    const double inv = 1.0 / static_cast<double>(layout_.size);
    for (std::size_t i = 0; i < data.size(); ++i) out.values[i] = data[i].real() * inv;
    return out;
  }

  const PhaseLayout& layout() const { return layout_; }

 private:
  PhaseLayout layout_;
  double s_;
  std::size_t n_tau_;
  std::map<double, std::vector<double>> cache_;
};

PhaseField as_phase(const GridField& g, std::size_t it) { return g.slice(it); }

}  // namespace

double symbol_eval(double s, std::span<const double> phi, std::span<const double> xi, std::size_t n_tau) {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(n_tau >= 1, "n_tau must be at least 1");
  require(phi.size() == xi.size() && !phi.empty(), "phi and xi must have the same dimension");
  return std::exp(-symbol_exponent(s, phi, xi, n_tau));
}

double symbol_exponent_1d(double s, double phi, double xi) {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  if (phi == 0.0) return std::pow(std::abs(xi), 2.0 * s);
  const double q = 2.0 * s + 1.0;
  if (xi != 0.0 && (xi - phi) / xi > 0.0) {
    // Same sign at both ends: avoid the cancellation in ξ^q - (ξ - φ)^q.
    const double r = phi / xi;
    return std::pow(std::abs(xi), 2.0 * s) * -std::expm1(q * std::log1p(-r)) / (r * q);
  }
  auto signed_pow = [q](double u) { return std::copysign(std::pow(std::abs(u), q), u); };
  return (signed_pow(xi) - signed_pow(xi - phi)) / (phi * q);
}

FundamentalSolution fundamental_solution(double s, double t, const std::vector<Axis>& x_axes,
                                         const std::vector<Axis>& v_axes, std::size_t n_tau) {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(t > 0.0 && std::isfinite(t), "t must be positive");
  require(x_axes.size() == v_axes.size() && !x_axes.empty(), "x and v axes must have the same dimension");
  const double wx = std::pow(t, 1.0 + 1.0 / (2.0 * s));
  const double wv = std::pow(t, 1.0 / (2.0 * s));
  for (const Axis& a : x_axes)
    if (a.length() < 4.0 * wx || a.step() > 0.5 * wx)
      throw NumericalError("x grid too small for the self-similar width at time t");
  for (const Axis& a : v_axes)
    if (a.length() < 4.0 * wv || a.step() > 0.5 * wv)
      throw NumericalError("v grid too small for the self-similar width at time t");

  FundamentalSolution out;
  out.s = s;
  out.t = t;
  out.J = make_phase_field(x_axes, v_axes);
  Propagator prop(out.J, s, n_tau);
  const PhaseLayout& L = prop.layout();
  const auto& m = prop.table(t);

  // Nodes sit at lo + h/2 + j h: the continuous inverse transform picks up the
  // phase e^{2πiκ(lo + h/2)} on each axis.
  std::vector<Complex> data(L.size);
  std::vector<std::size_t> idx;
  double volume = 1.0;
  for (std::size_t k = 0; k < 2 * L.d; ++k) volume *= out.J.grid.axis(k).length();
  for (std::size_t i = 0; i < L.size; ++i) {
    L.unflatten(i, idx);
    double arg = 0.0;
    for (std::size_t k = 0; k < 2 * L.d; ++k) arg += L.freq[k][idx[k]] * L.nodes[k][0];
    data[i] = m[i] * std::polar(1.0, kTwoPi * arg);
  }
  fft_axes(data, L.shape, L.all_axes(), true);
  const double cell = out.J.grid.cell_volume();
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  double mass = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < L.size; ++i) {
    const double v = data[i].real() / volume;
    out.J.values[i] = v;
    mass += v;
    sq += v * v;
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
  }
  out.mass = mass * cell;
  out.l2 = std::sqrt(sq * cell);
  return out;
}

double lr_norm(const PhaseField& f, double r) {
  require(r >= 1.0, "r must be at least 1");
  double acc = 0.0;
  for (double v : f.values) acc += std::pow(std::abs(v), r);
  return std::pow(acc * f.grid.cell_volume(), 1.0 / r);
}

ConvolutionResult modified_convolve(const PhaseField& f, const PhaseField& g, double t) {
  require(f.grid == g.grid && f.d == g.d, "modified convolution needs matching grids");
  require(std::isfinite(t), "t must be finite");
  for (std::size_t k = 0; k < f.d; ++k)
    require(f.grid.axis(k).periodic, "modified convolution needs a periodic x grid");
  Propagator prop(f, 0.5, 1);
  const PhaseLayout& L = prop.layout();

  ConvolutionResult out;
  double vmax = 0.0;
  for (std::size_t k = 0; k < f.d; ++k)
    for (double v : L.nodes[f.d + k]) vmax = std::max(vmax, std::abs(v));
  for (std::size_t k = 0; k < f.d; ++k)
    if (std::abs(t) * vmax > 0.5 * f.grid.axis(k).length()) out.aliasing = true;

  std::vector<Complex> a(f.values.begin(), f.values.end());
  prop.sheared_transform(a, t);
  std::vector<Complex> b(g.values.begin(), g.values.end());
  fft_axes(b, L.shape, L.all_axes(), false);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < L.size; ++i) {
    L.unflatten(i, idx);
    double arg = 0.0;
    for (std::size_t k = 0; k < 2 * L.d; ++k) arg += L.freq[k][idx[k]] * L.nodes[k][0];
    a[i] *= b[i] * std::polar(1.0, -kTwoPi * arg);
  }
  fft_axes(a, L.shape, L.all_axes(), true);
  out.value = f;
  const double scale = f.grid.cell_volume() / static_cast<double>(L.size);
  for (std::size_t i = 0; i < L.size; ++i) out.value.values[i] = a[i].real() * scale;
  return out;
}

PhaseField propagate(const PhaseField& f, double s, double t, std::size_t n_tau) {
  require(t >= 0.0, "propagation time must be nonnegative");
  Propagator prop(f, s, n_tau);
  return prop.apply(f, t);
}

PhaseField fractional_velocity_power(const PhaseField& g, double s) {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  const PhaseLayout L(g);
  std::vector<Complex> data(g.values.begin(), g.values.end());
  fft_axes(data, L.shape, L.v_axes(), false);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < L.size; ++i) {
    L.unflatten(i, idx);
    double k2 = 0.0;
    for (std::size_t k = 0; k < L.d; ++k) {
      const double w = kTwoPi * L.freq[L.d + k][idx[L.d + k]];
      k2 += w * w;
    }
    data[i] *= std::pow(k2, 0.5 * s);
  }
  fft_axes(data, L.shape, L.v_axes(), true);
  PhaseField out = g;
  const double inv = 1.0 / static_cast<double>(L.v_size);
  for (std::size_t i = 0; i < L.size; ++i) out.values[i] = data[i].real() * inv;
  return out;
}

GridField KolmogorovSolution::to_grid_field(double far_field_v) const {
  require(!times.empty(), "solution has no time slices");
  double dt = 1.0;
  if (times.size() > 1) {
    dt = times[1] - times[0];
    for (std::size_t i = 2; i < times.size(); ++i)
      require(std::abs((times[i] - times[i - 1]) - dt) <= 1e-9 * dt,
              "output times must be equally spaced to form a grid field");
  }
  const Axis time = make_axis(times.front() - 0.5 * dt, times.back() + 0.5 * dt, times.size());
  return stack_slices(time, slices, far_field_v);
}

KolmogorovSolution solve_kolmogorov(const PhaseField& f0, const SourceDecomposition& src, const Vec& times,
                                    const SolverOptions& opts) {
  require(opts.dt_max > 0.0, "dt_max must be positive");
  require(!times.empty(), "at least one output time is needed");
  double prev = opts.t_start;
  for (double t : times) {
    require(std::isfinite(t), "output times must be finite");
    require(t >= prev, "times must be increasing (negative time step)");
    prev = t;
  }
  for (std::size_t k = 0; k < f0.d; ++k) require(f0.grid.axis(k).periodic, "the solver needs a periodic x grid");
  auto check_source = [&](const std::optional<GridField>& g, const char* name, bool nonneg) {
    if (!g) return;
    g->validate();
    require(g->phase == f0.grid, std::string("source ") + name + " is on a different phase grid");
    if (nonneg)
      for (double v : g->values) require(v >= 0.0, std::string("source ") + name + " must be nonnegative");
  };
  check_source(src.h1, "h1", false);
  check_source(src.h2, "h2", false);
  check_source(src.m, "m", true);

  Propagator prop(f0, opts.s, opts.n_tau);

  // Time cells of all sources, merged.
  Vec edges;
  for (const auto* g : {&src.h1, &src.h2, &src.m}) {
    if (!*g) continue;
    const Axis& ax = (*g)->time;
    for (std::size_t i = 0; i <= ax.n; ++i) edges.push_back(ax.lo + static_cast<double>(i) * ax.step());
  }
  std::sort(edges.begin(), edges.end());

  auto source_cell = [](const GridField& g, double t) -> long {
    const Axis& ax = g.time;
    if (t < ax.lo || t >= ax.hi) return -1;
    return static_cast<long>(std::min(ax.n - 1, static_cast<std::size_t>((t - ax.lo) / ax.step())));
  };

  std::vector<long> cached_key;
  PhaseField cached = f0;
  bool cached_zero = true;
  auto source_at = [&](double t, bool& zero) -> const PhaseField& {
    std::vector<long> key{src.h1 ? source_cell(*src.h1, t) : -1, src.h2 ? source_cell(*src.h2, t) : -1,
                          src.m ? source_cell(*src.m, t) : -1};
    if (key == cached_key) {
      zero = cached_zero;
      return cached;
    }
    cached_key = key;
    std::fill(cached.values.begin(), cached.values.end(), 0.0);
    cached_zero = true;
    if (key[0] >= 0) {
      const PhaseField h = as_phase(*src.h1, static_cast<std::size_t>(key[0]));
      for (std::size_t i = 0; i < h.values.size(); ++i) cached.values[i] += h.values[i];
      cached_zero = false;
    }
    if (key[1] >= 0) {
      const PhaseField h = fractional_velocity_power(as_phase(*src.h2, static_cast<std::size_t>(key[1])), opts.s);
      for (std::size_t i = 0; i < h.values.size(); ++i) cached.values[i] += h.values[i];
      cached_zero = false;
    }
    if (key[2] >= 0) {
      const PhaseField h = as_phase(*src.m, static_cast<std::size_t>(key[2]));
      for (std::size_t i = 0; i < h.values.size(); ++i) cached.values[i] -= h.values[i];
      cached_zero = false;
    }
    zero = cached_zero;
    return cached;
  };

  auto accumulate = [](PhaseField& acc, const PhaseField& add, double w) {
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += w * add.values[i];
  };

  KolmogorovSolution out;
  PhaseField f = f0;
  double t = opts.t_start;
  for (double target : times) {
    const double len = target - t;
    if (len > 0.0) {
      const auto steps =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / opts.dt_max - 1e-12)));
      const double dt = len / static_cast<double>(steps);
      for (std::size_t k = 0; k < steps; ++k) {
        const double a = t + static_cast<double>(k) * dt;
        const double b = (k + 1 == steps) ? target : a + dt;
        PhaseField next = prop.apply(f, b - a);
        if (!src.empty()) {
          Vec cuts{a};
          for (double e : edges)
            if (e > a && e < b) cuts.push_back(e);
          cuts.push_back(b);
          for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double lo = cuts[p];
            const double hi = cuts[p + 1];
            bool zero = true;
            const PhaseField& g = source_at(0.5 * (lo + hi), zero);
            if (zero) continue;
            // τ = b - t' ranges over [b - hi, b - lo]; left endpoints in t'.
            const double tau_hi = b - lo;
            const double tau_lo = b - hi;
            if (tau_lo > 0.0) {
              accumulate(next, prop.apply(g, tau_hi), hi - lo);
              continue;
            }
            double upper = tau_hi;
            for (std::size_t r = 0; r < opts.refine_levels; ++r) {
              const double lower = 0.5 * upper;
              accumulate(next, prop.apply(g, upper), upper - lower);
              upper = lower;
            }
            accumulate(next, prop.apply(g, upper), upper);
          }
        }
        f = std::move(next);
        ++out.steps;
      }
      t = target;
    }
    out.times.push_back(target);
    out.slices.push_back(f);
  }
  return out;
}

NormSuite norm_suite(const GridField& f, double s, double p, double sigma) {
  f.validate();
  const std::size_t d = f.d;
  require_admissible_p(d, s, p);
  require_admissible_sigma(s, sigma);
  NormSuite out;
  out.p_crit = p_critical(d, s);
  out.p_star = p_star(d, s);
  out.sigma_max = sigma_max(s);
  const double cell = f.cell_volume();
  double lp = 0.0, l1 = 0.0;
  for (double v : f.values) {
    lp += std::pow(std::abs(v), p);
    l1 += std::abs(v);
  }
  out.lp = std::pow(lp * cell, 1.0 / p);
  out.l1 = l1 * cell;

  const Lattice xl = f.x_lattice();
  const std::size_t nx = xl.size();
  const std::size_t nv = f.v_size();
  std::vector<Vec> xs(nx);
  for (std::size_t i = 0; i < nx; ++i) xs[i] = xl.point(i);
  std::vector<double> w(nx * nx, 0.0);
  const double expo = static_cast<double>(d) + sigma;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < nx; ++j) {
      if (i == j) continue;
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) r2 += (xs[i][k] - xs[j][k]) * (xs[i][k] - xs[j][k]);
      w[i * nx + j] = std::pow(r2, -0.5 * expo);
    }
  const double xcell = xl.cell_volume();
  double semi = 0.0;
  for (std::size_t it = 0; it < f.nt(); ++it)
    for (std::size_t iv = 0; iv < nv; ++iv) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nx; ++i) {
        const double fi = f.values[f.index(it, i, iv)];
        for (std::size_t j = 0; j < nx; ++j)
          if (i != j) acc += std::abs(fi - f.values[f.index(it, j, iv)]) * w[i * nx + j];
      }
      semi += acc;
    }
  out.w_sigma_seminorm = semi * xcell * xcell * f.time.step() * f.v_lattice().cell_volume();
  out.w_sigma_1_x = out.l1 + out.w_sigma_seminorm;
  return out;
}

}  // namespace kdg
