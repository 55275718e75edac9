#include "kdg/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kdg/error.hpp"
#include "kdg/geometry.hpp"

namespace kdg {

namespace {

double logsumexp(std::initializer_list<double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

void require_unit_open(double x, const char* name) {
  require(x > 0.0 && x < 1.0, std::string(name) + " must lie in (0, 1)");
}

void require_s(double s) { require(s > 0.0 && s < 1.0, "s must lie in (0, 1)"); }

}  // namespace

double p_critical(std::size_t d, double s) {
  require_s(s);
  return 2.0 + 2.0 * s / (static_cast<double>(d) * (1.0 + s));
}

double p_star(std::size_t d, double s) {
  require_s(s);
  const double a = 2.0 * static_cast<double>(d) * (1.0 + s);
  return (a + 2.0 * s) / (a + s);
}

double sigma_max(double s) {
  require_s(s);
  return s / (1.0 + 2.0 * s);
}

void require_admissible_p(std::size_t d, double s, double p) {
  require(p >= 2.0 && p < p_critical(d, s), "p must lie in [2, 2 + 2s/(d(1+s)))");
}

void require_admissible_sigma(double s, double sigma) {
  require(sigma >= 0.0 && sigma < sigma_max(s), "sigma must lie in [0, s/(1+2s))");
}

DeGiorgiExponents degiorgi_exponents(double p) {
  require(p > 2.0 && std::isfinite(p), "the De Giorgi exponents need p > 2");
  DeGiorgiExponents e;
  e.p = p;
  e.beta1 = 2.0 * p / (2.0 * p - 2.0);
  e.beta2 = (p - 2.0) / (2.0 * (2.0 * p - 2.0));
  e.log2_Q = 8.0 * p / (p - 2.0);
  e.Q = std::exp2(e.log2_Q);
  return e;
}

IvlConstants ivl_constants(std::size_t d, double s, double r0, double delta1, double delta2, double sigma,
                           const ConstantKnobs& knobs) {
  require_unit_open(delta1, "delta1");
  require_unit_open(delta2, "delta2");
  require(sigma > 0.0, "sigma must be positive");
  require(r0 > 0.0, "r0 must be positive");
  require(knobs.C_eps > 0.0 && knobs.C_mu > 0.0, "constants must be positive");
  const double dd = static_cast<double>(d);
  const double l1 = std::log(delta1);
  const double l2 = std::log(delta2);
  IvlConstants c;
  c.delta1 = delta1;
  c.delta2 = delta2;
  c.sigma = sigma;
  c.eps_log = (l1 + l2 - std::log(4.0 * knobs.C_eps)) / sigma;
  const double denom = logsumexp({l2, -l1, -(dd + 2.0) * c.eps_log - l1});
  c.mu_log = 2.0 * (l1 + l2 - std::log(4.0 * knobs.C_mu) - denom);
  c.measure_log =
      2.0 * (l1 + l2 - std::log(4.0) + (dd + 2.0) * c.eps_log + c.mu_log) + total_dimension(d, s) * std::log(r0);
  c.nu_log = c.measure_log - std::log(cylinder_volume(d, s, 0.5));
  c.mu_exponent_delta1 = static_cast<int>(6 * d + 16);
  c.mu_exponent_delta2 = static_cast<int>(6 * d + 14);
  c.nu_exponent = static_cast<int>(18 * d + 46);
  return c;
}

MtpConstants mtp_constants(double delta, std::size_t d, const ConstantKnobs& knobs) {
  require_unit_open(delta, "delta");
  require(knobs.C_theta > 0.0, "C_theta must be positive");
  MtpConstants m;
  m.delta = delta;
  m.exponent = static_cast<int>(18 * d + 46);
  const long double ld = std::log(static_cast<long double>(delta));
  const long double power = std::exp(-static_cast<long double>(m.exponent) * ld);
  m.theta_log = 2.0L * (1.0L + power) * ld + std::log(static_cast<long double>(knobs.C_theta));
  // ln(-ln θ) without forming δ^{-e} (C_theta = 1 form).
  const double e = static_cast<double>(m.exponent);
  const double lnd = std::log(delta);
  const double log1p_term = -e * lnd + std::log1p(std::exp(e * lnd));
  m.theta_loglog = std::log(2.0) + log1p_term + std::log(-lnd);
  return m;
}

double theta_log_from_mu_nu(double mu_log, double nu_log) {
  // (2 + 2ν)/ν = 2/ν + 2.
  const double nu = std::exp(nu_log);
  const double factor = nu > 0.0 ? 2.0 / nu + 2.0 : std::numeric_limits<double>::infinity();
  return factor * mu_log - std::log(2.0);
}

int zeta_exponent(std::size_t d) { return static_cast<int>(18 * d + 47); }

double zeta_log(double delta0, std::size_t d, const ConstantKnobs& knobs) {
  require_unit_open(delta0, "delta0");
  return static_cast<double>(zeta_exponent(d)) * std::log(delta0) + std::log(knobs.C_zeta);
}

double log_integrability_delta_power(std::size_t d) { return 1.0 / static_cast<double>(18 * d + 47); }

double log_integrability_power(std::size_t d) { return 1.0 / static_cast<double>(18 * d + 48); }

double m_threshold(double s) {
  require_s(s);
  return std::pow(5.0, 1.0 / (2.0 * s));
}

double delta0_max_log(std::size_t d, double s, double m) {
  require(m > 0.0, "m must be positive");
  const double dd = static_cast<double>(d);
  return (2.0 * dd + 2.0 * s * (dd + 1.0)) * std::log(4.0 / (1225.0 * m * m));
}

double covering_delta_log(std::size_t d, double s, double m, double delta0) {
  const double dd = static_cast<double>(d);
  return std::log(delta0) - (2.0 * dd + 2.0 * s * (dd + 1.0)) * std::log(35.0 * m);
}

long double level_M_log(double delta_log, std::size_t d) {
  require(delta_log < 0.0, "delta must lie in (0, 1)");
  const long double e = static_cast<long double>(18 * d + 46);
  const long double ld = static_cast<long double>(delta_log);
  return -2.0L * (1.0L + std::exp(-e * ld)) * ld;
}

bool n_cov_admissible(int n_cov, double s, int k_max) {
  require(n_cov >= 1, "n_cov must be at least 1");
  require(k_max >= 1, "k_max must be at least 1");
  const double rhs = std::pow(2.0 / static_cast<double>(n_cov), 2.0 * s);
  for (int k = 1; k <= k_max; ++k) {
    // (a+6)^{2s} - a^{2s} with a = 7^k + 1, written to avoid cancellation.
    const double a = std::pow(7.0, static_cast<double>(k)) + 1.0;
    const double lhs = std::pow(a, 2.0 * s) * std::expm1(2.0 * s * std::log1p(6.0 / a));
    if (lhs < rhs) return false;
  }
  return true;
}

int n_cov_minimal(double s, int k_max) {
  require_s(s);
  for (int n = 1; n <= 1000000; n = n < 16 ? n + 1 : n * 2)
    if (n_cov_admissible(n, s, k_max)) {
      int lo = n < 16 ? n : n / 2;
      int hi = n;
      while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (n_cov_admissible(mid, s, k_max)) hi = mid; else lo = mid + 1;
      }
      return hi;
    }
  throw NumericalError("no admissible n_cov below 10^6");
}

double oscillation_exponent_log(std::size_t d) {
  // ln(2(3 + 2^e)) = ln 2 + e ln 2 + log1p(3 / 2^e).
  const double e = static_cast<double>(18 * d + 46);
  return std::log(2.0) + e * std::log(2.0) + std::log1p(3.0 * std::exp2(-e));
}

HoelderAlpha hoelder_alpha(long double theta_log, double r0) {
  require(r0 > 0.0 && r0 < 1.0, "r0 must lie in (0, 1)");
  require(theta_log <= std::log(2.0L), "theta must not exceed 2");
  HoelderAlpha out;
  const double lr = std::log(r0);
  const double half_theta_log = static_cast<double>(theta_log) - std::log(2.0);
  if (half_theta_log > -30.0) {
    const double factor_log = std::log1p(-std::exp(half_theta_log));
    out.alpha = factor_log / lr;
    out.alpha_log = std::log(out.alpha);
  } else {
    // ln(1 - x) = -x (1 + x/2 + ...) with x = θ/2 tiny.
    out.alpha_log = half_theta_log - std::log(-lr);
    out.alpha = std::exp(out.alpha_log);
  }
  out.at_least_one = out.alpha >= 1.0;
  return out;
}

HoelderAlpha hoelder_alpha_from_factor(double factor, double r0) {
  require(r0 > 0.0 && r0 < 1.0, "r0 must lie in (0, 1)");
  require(factor > 0.0 && factor < 1.0, "the oscillation factor must lie in (0, 1)");
  HoelderAlpha out;
  out.alpha = std::log(factor) / std::log(r0);
  out.alpha_log = std::log(out.alpha);
  out.at_least_one = out.alpha >= 1.0;
  return out;
}

TheoryConstants theory_constants(const ConstantsInput& in) {
  require(in.d >= 1, "d must be at least 1");
  require_s(in.s);
  TheoryConstants c;
  c.d = in.d;
  c.s = in.s;
  c.n = total_dimension(in.d, in.s);
  c.p = in.p;
  c.p_crit = p_critical(in.d, in.s);
  c.p_star = p_star(in.d, in.s);
  c.sigma_max = sigma_max(in.s);
  require_admissible_p(in.d, in.s, in.p);
  c.dg = degiorgi_exponents(in.p);
  require_admissible_sigma(in.s, in.sigma);
  require(in.sigma > 0.0, "sigma must be positive for the IVL constants");
  c.ivl = ivl_constants(in.d, in.s, in.r0, in.delta1, in.delta2, in.sigma, in.knobs);
  c.mtp = mtp_constants(in.delta, in.d, in.knobs);
  c.zeta_log = zeta_log(in.delta0, in.d, in.knobs);
  c.m_threshold = m_threshold(in.s);
  c.delta0_max_log = delta0_max_log(in.d, in.s, in.m);
  c.M_log = level_M_log(covering_delta_log(in.d, in.s, in.m, in.delta0), in.d);
  const HoelderAlpha a = hoelder_alpha(c.mtp.theta_log, in.r0);
  c.alpha = a.alpha;
  c.alpha_log = a.alpha_log;
  return c;
}

}  // namespace kdg
