#include <doctest.h>

#include <cmath>

#include "kdg/constants.hpp"
#include "kdg/error.hpp"
#include "kdg/kolmogorov.hpp"
#include "kdg/quadrature.hpp"
#include "kdg/sampling.hpp"

using namespace kdg;

namespace {

double mass(const PhaseField& f) {
  double m = 0.0;
  for (double y : f.values) m += y;
  return m * f.grid.cell_volume();
}

double rel_l2(const PhaseField& a, const PhaseField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    den += b.values[i] * b.values[i];
  }
  return std::sqrt(num / den);
}

PhaseField gaussian(std::size_t n, double xh, double vh) {
  return sample_phase_field({centered_axis(xh, n, true)}, {centered_axis(vh, n)}, [](const Vec& x, const Vec& v) {
    return std::exp(-(x[0] * x[0] + v[0] * v[0]) / 0.5);
  });
}

}  // namespace

TEST_CASE("symbol values") {
  CHECK(symbol_eval(0.5, Vec{0.0}, Vec{0.0}) == 1.0);
  CHECK(symbol_eval(0.5, Vec{0.0}, Vec{1.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(symbol_eval(0.5, Vec{1.0}, Vec{1.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  for (double xi : {0.1, 0.7, 3.0}) CHECK(std::abs(symbol_eval(0.3, Vec{0.0}, Vec{xi}) - std::exp(-std::pow(xi, 0.6))) < 1e-10);
}

TEST_CASE("symbol in two dimensions") {
  ScrambledSobol q(4, 2);
  for (int i = 0; i < 30; ++i) {
    const Vec u = q.next();
    const double s = 0.1 + 0.8 * u[0], phi = 6 * u[1] - 3, xi = 6 * u[2] - 3;
    const double c = std::cos(6 * u[3]), sn = std::sin(6 * u[3]);
    // Collinear pair rotated into the plane.
    const double rotated = symbol_eval(s, Vec{c * phi, sn * phi}, Vec{c * xi, sn * xi});
    CHECK(std::abs(rotated - std::exp(-symbol_exponent_1d(s, phi, xi))) < 1e-10);
    // Generic pair against a brute-force panel sum.
    const Vec P{phi, 0.3 * xi}, X{xi, -0.2 * phi + 0.05};
    auto f = [&](double t) { return std::pow(std::hypot(X[0] - t * P[0], X[1] - t * P[1]), 2 * s); };
    Vec breaks;
    for (int k = 0; k <= 4000; ++k) breaks.push_back(k / 4000.0);
    CHECK(std::abs(symbol_eval(s, P, X) - std::exp(-integrate_panels(f, breaks, 16))) < 1e-9);
  }
}

TEST_CASE("closed form without cancellation") {
  // Tiny φ relative to ξ: the exponent tends to |ξ|^{2s}.
  CHECK(symbol_exponent_1d(0.5, 1e-12, 2.0) == doctest::Approx(2.0 - 0.5e-12).epsilon(1e-14));
  CHECK(symbol_exponent_1d(0.25, -1e-9, -3.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("fundamental solution at t = 1") {
  const auto J = fundamental_solution(0.5, 1.0, {centered_axis(8, 256, true)}, {centered_axis(12, 256, true)});
  CHECK(std::abs(J.mass - 1.0) < 1e-3);
  CHECK(J.min >= -1e-4 * J.max);
}

TEST_CASE("L2 scaling on self-similar grids") {
  Vec logs;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto J = fundamental_solution(0.5, t, {centered_axis(8 * t * t, 128, true)}, {centered_axis(12 * t, 128, true)});
    logs.push_back(std::log(J.l2));
  }
  CHECK((logs[2] - logs[0]) / std::log(4.0) == doctest::Approx(-1.5).epsilon(1e-3));
}

TEST_CASE("modified convolution at t = 0 is the periodic convolution") {
  const std::size_t n = 9;
  const auto f = sample_phase_field({centered_axis(1, n, true)}, {centered_axis(1, n, true)},
                                    [](const Vec& x, const Vec& v) { return 1 + x[0] + 0.5 * v[0] * v[0]; });
  const auto g = sample_phase_field({centered_axis(1, n, true)}, {centered_axis(1, n, true)},
                                    [](const Vec& x, const Vec& v) { return std::exp(-x[0] * x[0] - 2 * v[0] * v[0]); });
  const auto r = modified_convolve(f, g, 0.0);
  const double cell = f.grid.cell_volume();
  const std::size_t c = n / 2;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t b = 0; b < n; ++b) {
          const std::size_t gi = (i + c + n - j) % n, gb = (a + c + n - b) % n;
          acc += f.values[j * n + b] * g.values[gi * n + gb];
        }
      CHECK(r.value.values[i * n + a] == doctest::Approx(acc * cell).epsilon(1e-10));
    }
}

TEST_CASE("modified convolution of a point mass shifts along the transport") {
  const std::size_t n = 15;
  const Axis ax = centered_axis(1.5, n, true), av = centered_axis(1.5, n, true);
  const double h = ax.step();
  PhaseField f = make_phase_field({ax}, {av});
  const std::size_t x0 = 9, v0 = 10;  // x0 = 2h, v0 = 3h
  f.values[x0 * n + v0] = 1.0 / f.grid.cell_volume();
  const auto g = sample_phase_field({ax}, {av}, [](const Vec& x, const Vec& v) { return std::exp(-4 * x[0] * x[0] - v[0] * v[0]); });
  const double t = 1.0 / 3.0;  // t v0 = h
  const auto r = modified_convolve(f, g, t);
  const double xs = ax.node(x0) + t * av.node(v0), vs = av.node(v0);
  CHECK(t * av.node(v0) == doctest::Approx(h));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a) {
      double dx = ax.node(i) - xs;
      dx -= ax.length() * std::round(dx / ax.length());
      double dv = av.node(a) - vs;
      dv -= av.length() * std::round(dv / av.length());
      CHECK(r.value.values[i * n + a] == doctest::Approx(std::exp(-4 * dx * dx - dv * dv)).epsilon(1e-9));
    }
}

TEST_CASE("Young equality for nonnegative data") {
  ScrambledSobol q(1, 17);
  const std::size_t n = 16;
  PhaseField f = make_phase_field({centered_axis(1, n, true)}, {centered_axis(2, n, true)});
  PhaseField g = f;
  for (double& y : f.values) y = q.next()[0];
  for (double& y : g.values) y = q.next()[0];
  const auto r = modified_convolve(f, g, 0.37);
  CHECK(mass(r.value) == doctest::Approx(mass(f) * mass(g)).epsilon(1e-6));
}

TEST_CASE("solver conserves mass and stays nonnegative") {
  const auto f0 = gaussian(128, 2, 4);
  Vec times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.05 * k);
  const auto sol = solve_kolmogorov(f0, {}, times);
  const double m0 = mass(f0);
  double peak = 0.0;
  for (double y : f0.values) peak = std::max(peak, y);
  for (const auto& p : sol.slices) {
    CHECK(std::abs(mass(p) - m0) / m0 < 1e-6);
    for (double y : p.values) CHECK(y >= -1e-4 * peak);
  }
}

TEST_CASE("constant source bookkeeping") {
  const std::vector<Axis> xa{centered_axis(1, 16, true)}, va{centered_axis(2, 16)};
  const PhaseField f0 = make_phase_field(xa, va);
  const double c = 0.3, T = 0.5;
  SourceDecomposition src;
  src.h1 = sample_grid_field(make_axis(0, T, 5), xa, va, [c](const KineticPoint&) { return c; });
  const auto sol = solve_kolmogorov(f0, src, {T});
  CHECK(mass(sol.slices.back()) == doctest::Approx(c * T * 2 * 4).epsilon(1e-6));
}

TEST_CASE("restart consistency") {
  const auto f0 = gaussian(64, 2, 4);
  const auto direct = solve_kolmogorov(f0, {}, {0.4});
  const auto half = solve_kolmogorov(f0, {}, {0.2});
  SolverOptions o;
  o.t_start = 0.2;
  const auto rest = solve_kolmogorov(half.slices.back(), {}, {0.4}, o);
  CHECK(rel_l2(rest.slices.back(), direct.slices.back()) < 1e-4);
}

TEST_CASE("critical exponents") {
  CHECK(p_critical(1, 0.5) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  CHECK(p_star(1, 0.5) == doctest::Approx(8.0 / 7.0).epsilon(1e-12));
  CHECK(sigma_max(0.5) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("solver input validation") {
  const auto f0 = gaussian(16, 1, 2);
  CHECK_THROWS_AS(solve_kolmogorov(f0, {}, {0.1, 0.05}), ValidationError);
  CHECK_THROWS_AS(fundamental_solution(0.5, -1.0, {centered_axis(8, 64, true)}, {centered_axis(8, 64, true)}), ValidationError);
}
