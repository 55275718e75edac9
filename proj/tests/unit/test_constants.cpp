#include <doctest.h>

#include <cmath>

#include "kdg/constants.hpp"
#include "kdg/error.hpp"
#include "kdg/geometry.hpp"

using namespace kdg;

namespace {

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("integrability exponents") {
  CHECK(close(p_critical(1, 0.5), 8.0 / 3.0));
  CHECK(close(p_star(1, 0.5), 8.0 / 7.0));
  CHECK(close(sigma_max(0.5), 0.25));
  CHECK_NOTHROW(require_admissible_p(1, 0.5, 8.0 / 3.0 - 0.01));
  CHECK_THROWS_AS(require_admissible_p(1, 0.5, 8.0 / 3.0), ValidationError);
  CHECK_THROWS_AS(require_admissible_sigma(0.5, 0.25), ValidationError);
}

TEST_CASE("De Giorgi exponents at p = 2.5") {
  const auto e = degiorgi_exponents(2.5);
  CHECK(close(e.beta1, 5.0 / 3.0));
  CHECK(close(e.beta2, 1.0 / 12.0));
  CHECK(close(e.log2_Q, 40.0));
  CHECK(close(e.Q, std::ldexp(1.0, 40)));
  CHECK_THROWS_AS(degiorgi_exponents(2.0), ValidationError);
}

TEST_CASE("intermediate value exponents") {
  const auto c = ivl_constants(1, 0.5, 0.1, 0.5, 0.5, 0.2);
  CHECK(c.mu_exponent_delta1 == 22);
  CHECK(c.mu_exponent_delta2 == 20);
  CHECK(c.nu_exponent == 64);
  CHECK(std::isfinite(c.nu_log));
  CHECK(c.nu_log < 0.0);
  // ε = (δ1δ2/4)^{1/σ}
  CHECK(close(c.eps_log, std::log(0.0625) / 0.2));
}

TEST_CASE("measure-to-pointwise theta") {
  const auto m = mtp_constants(0.5, 1);
  CHECK(m.exponent == 64);
  const long double expected = -2.0L * (1.0L + std::ldexp(1.0L, 64)) * std::log(2.0L);
  CHECK(std::abs(m.theta_log / expected - 1.0L) < 1e-12L);
  CHECK(mtp_constants(1.0 - 1e-9, 1).theta_log < 0.0L);
  CHECK(mtp_constants(1.0 - 1e-9, 1).theta_log > -1e-6L);
  long double prev = -INFINITY;
  for (double delta = 0.05; delta < 1.0; delta += 0.05) {
    const long double th = mtp_constants(delta, 1).theta_log;
    CHECK(th > prev);
    prev = th;
  }
}

TEST_CASE("zeta and log-integrability exponents") {
  CHECK(zeta_exponent(1) == 65);
  CHECK(close(zeta_log(0.5, 1), 65 * std::log(0.5)));
  CHECK(close(log_integrability_delta_power(1), 1.0 / 65.0));
  CHECK(close(log_integrability_power(1), 1.0 / 66.0));
}

TEST_CASE("covering constants") {
  CHECK(close(m_threshold(0.5), 5.0));
  CHECK(close(covering_alpha(0.3, 1), 0.15));
  CHECK(close(covering_alpha(0.3, 2), 0.15 / 7.0));
  CHECK(close(covering_alpha(0.3, 3), 0.15 / 49.0));
  CHECK(n_cov_admissible(1, 0.5, 30));
  CHECK(n_cov_minimal(0.5, 30) == 1);
  CHECK(close(delta0_max_log(1, 0.5, 5), 4 * std::log(4.0 / (1225.0 * 25.0))));
  CHECK(close(covering_delta_log(1, 0.5, 5, 0.01), std::log(0.01) + 4 * std::log(1.0 / 175.0)));
  CHECK(total_dimension(1, 0.5) == 4.0);
}

TEST_CASE("Hoelder exponent wiring") {
  const auto a = hoelder_alpha_from_factor(0.09, 0.3);
  CHECK(close(a.alpha, 2.0));
  CHECK(a.at_least_one);
  const auto tiny = hoelder_alpha(mtp_constants(0.5, 1).theta_log, 0.3);
  CHECK(tiny.alpha == 0.0);
  CHECK(std::isfinite(tiny.alpha_log));
}

TEST_CASE("theory constants bundle") {
  ConstantsInput in;
  const auto c = theory_constants(in);
  CHECK(c.n == 4.0);
  CHECK(close(c.p_crit, 8.0 / 3.0));
  CHECK(close(c.dg.beta1, 5.0 / 3.0));
  CHECK(close(c.m_threshold, 5.0));
  CHECK(std::isfinite(c.zeta_log));
}
