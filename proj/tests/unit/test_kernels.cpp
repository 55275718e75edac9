#include <doctest.h>

#include <cmath>

#include "kdg/error.hpp"
#include "kdg/kernels.hpp"
#include "kdg/sampling.hpp"

using namespace kdg;

namespace {

VelocityField field_1d(double half, std::size_t n, const std::function<double(double)>& fn, double far = 0.0) {
  return sample_velocity_field(Lattice({centered_axis(half, n)}), [&](const Vec& v) { return fn(v[0]); }, 1, far);
}

double hat(double v) { return std::max(0.0, 1.0 - std::abs(v)); }

}  // namespace

TEST_CASE("fractional Laplacian values") {
  const auto K = fractional_laplacian_kernel(1, 0.5);
  CHECK(kernel_eval(K, Vec{0.0}, Vec{2.0}) == doctest::Approx(0.25).epsilon(1e-15));
  ScrambledSobol q(4, 11);
  const auto K2 = fractional_laplacian_kernel(2, 0.3);
  for (int i = 0; i < 20; ++i) {
    const Vec u = q.next();
    const Vec v{u[0] - 0.5, u[1] - 0.5}, w{u[2] - 0.5, u[3] - 0.5};
    CHECK(kernel_eval(K2, v, w) == kernel_eval(K2, w, v));
  }
}

TEST_CASE("Boltzmann kernel of the unit-ball density") {
  const Lattice grid({centered_axis(1.25, 32), centered_axis(1.25, 32)});
  const auto ball = sample_velocity_field(grid, [](const Vec& v) { return v[0] * v[0] + v[1] * v[1] < 1 ? 1.0 : 0.0; }, 8);
  const auto K = boltzmann_kernel(ball, 0.5, 0.0);
  for (const Vec& w : {Vec{0.5, 0.0}, Vec{0.3, 0.4}, Vec{-0.2, 0.7}}) {
    const double r = std::hypot(w[0], w[1]);
    CHECK(kernel_eval(K, Vec{0.0, 0.0}, w) * r * r * r == doctest::Approx(2.0 / 3.0).epsilon(0.02));
  }
}

TEST_CASE("Boltzmann kernel of a Maxwellian is nonnegative") {
  const Lattice grid({centered_axis(3, 24), centered_axis(3, 24)});
  const auto M = sample_velocity_field(grid, [](const Vec& v) { return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1])) / (2 * M_PI); });
  const auto K = boltzmann_kernel(M, 0.5, 0.0);
  ScrambledSobol q(4, 5);
  for (int i = 0; i < 40; ++i) {
    const Vec u = q.next();
    CHECK(kernel_eval(K, Vec{2 * u[0] - 1, 2 * u[1] - 1}, Vec{2 * u[2] - 1, 2 * u[3] - 1}) >= 0.0);
  }
}

TEST_CASE("operator on simple profiles") {
  const auto K = fractional_laplacian_kernel(1, 0.5);
  const auto c = field_1d(2, 21, [](double) { return 0.7; }, 0.7);
  for (double y : apply_operator_slice(K, c)) CHECK(y == 0.0);

  const auto lin = field_1d(2, 21, [](double v) { return v; });
  OperatorOptions no_far;
  no_far.far_field = false;
  CHECK(nonlocal_operator_terms(K, lin, 10, no_far).value() == doctest::Approx(0.0).epsilon(1e-14));

  // PV of w^2 |w|^{-2} over [-V, V] is 2V.
  double prev = HUGE_VAL;
  for (std::size_t n : {33, 65, 129}) {
    const auto sq = field_1d(1.5, n, [](double v) { return v * v; });
    const double err = std::abs(nonlocal_operator_terms(K, sq, n / 2).value() - 3.0);
    CHECK(err <= prev);
    CHECK(err < 1e-3);
    prev = err;
  }
}

TEST_CASE("bilinear form") {
  const auto K = fractional_laplacian_kernel(1, 0.5);
  const auto zero = field_1d(3, 31, [](double) { return 0.0; });
  const auto phi = field_1d(3, 31, hat);
  CHECK(bilinear_form(K, zero, phi) == 0.0);
  CHECK(bilinear_form(K, phi, phi) >= 0.0);

  // Symmetrized brute-force double sum, with the same outside-box tail.
  OperatorOptions opts;
  opts.near_field = false;
  const double h = phi.grid.cell_volume();
  double brute = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    for (std::size_t j = 0; j < phi.size(); ++j) {
      if (i == j) continue;
      const double dv = phi.point(i)[0] - phi.point(j)[0];
      const double df = phi.values[i] - phi.values[j];
      brute += 0.5 * df * df / (dv * dv) * h * h;
    }
    brute += phi.values[i] * phi.values[i] * outside_box_mass(K, phi.grid, phi.point(i)) * h;
  }
  CHECK(bilinear_form(K, phi, phi, opts) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("test functions must vanish on the box boundary") {
  const auto K = fractional_laplacian_kernel(1, 0.5);
  const auto bad = field_1d(1, 11, [](double) { return 1.0; });
  CHECK_THROWS_AS(bilinear_form(K, bad, bad), ValidationError);
}

TEST_CASE("macroscopic quantities of a Gaussian") {
  const auto gauss = [](double a) {
    return sample_grid_field(make_axis(0, 1, 1), {centered_axis(1, 1, true)}, {centered_axis(12, 2401)},
                             [a](const KineticPoint& z) { return a * std::exp(-0.5 * z.v[0] * z.v[0]) / std::sqrt(2 * M_PI); });
  };
  const auto m = compute_macroscopics(gauss(1.0));
  CHECK(m.M[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.E[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.H[0] == doctest::Approx(-0.5 * std::log(2 * M_PI) - 0.5).epsilon(1e-9));
  CHECK(compute_macroscopics(gauss(2.0)).M[0] == doctest::Approx(2.0).epsilon(1e-9));
  const auto z = compute_macroscopics(gauss(0.0));
  CHECK(z.M[0] == 0.0);
  CHECK(z.E[0] == 0.0);
  CHECK(z.H[0] == 0.0);
}

TEST_CASE("kernel parameter validation") {
  CHECK_THROWS_AS(fractional_laplacian_kernel(1, 1.2), ValidationError);
  CHECK_THROWS_AS(fractional_laplacian_kernel(1, 0.5, 2.0, 1.0), ValidationError);
  CHECK_THROWS_AS(kernel_eval(fractional_laplacian_kernel(1, 0.5), Vec{0.0}, Vec{0.0}), NumericalError);
}
