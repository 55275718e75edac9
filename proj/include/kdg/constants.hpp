#pragma once

// Closed-form constants and exponents of the De Giorgi / Harnack chain. The
// tiny ones (theta, zeta, M, mu, nu) are carried as natural logarithms since
// their direct values underflow for any realistic delta. Unspecified
// multiplicative constants are knobs defaulting to 1.

#include <cstddef>

namespace kdg {

/// Upper end of the admissible L^p range: 2 + 2s/(d(1+s)).
double p_critical(std::size_t d, double s);
/// p* = (2d(1+s) + 2s) / (2d(1+s) + s).
double p_star(std::size_t d, double s);
/// Upper end of the admissible W^{σ,1}_x range: s/(1+2s).
double sigma_max(double s);

void require_admissible_p(std::size_t d, double s, double p);
void require_admissible_sigma(double s, double sigma);

struct DeGiorgiExponents {
  double p = 0.0;
  double beta1 = 0.0;  ///< 2p/(2p-2)
  double beta2 = 0.0;  ///< (p-2)/(2(2p-2))
  double log2_Q = 0.0; ///< 8p/(p-2)
  double Q = 0.0;      ///< 2^{8p/(p-2)} (inf when it overflows)
};

/// p must lie in (2, inf); the admissible range is checked by the callers that
/// know d and s.
DeGiorgiExponents degiorgi_exponents(double p);

struct ConstantKnobs {
  double C_eps = 1.0;    ///< C in ε = (δ1δ2/(4C))^{1/σ}
  double C_mu = 1.0;     ///< C in the μ formula
  double C_zeta = 1.0;   ///< implicit constant in ζ ≳ δ0^{18d+47}
  double C_theta = 1.0;  ///< implicit constant in θ ~ δ^{...}
};

struct IvlConstants {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double sigma = 0.0;
  double eps_log = 0.0;
  double mu_log = 0.0;
  /// log of the measure lower bound ((δ1δ2/4) ε^{d+2} μ)^2 r0^n.
  double measure_log = 0.0;
  /// log ν with ν |Q_{1/2}| equal to the measure bound.
  double nu_log = 0.0;
  int mu_exponent_delta1 = 0;  ///< 6d + 16
  int mu_exponent_delta2 = 0;  ///< 6d + 14
  int nu_exponent = 0;         ///< 18d + 46
};

IvlConstants ivl_constants(std::size_t d, double s, double r0, double delta1, double delta2, double sigma,
                           const ConstantKnobs& knobs = {});

struct MtpConstants {
  double delta = 0.0;
  long double theta_log = 0.0L;  ///< 2(1 + δ^{-(18d+46)}) ln δ
  double theta_loglog = 0.0;     ///< ln(-theta_log)
  int exponent = 0;              ///< 18d + 46
};

MtpConstants mtp_constants(double delta, std::size_t d, const ConstantKnobs& knobs = {});

/// ln θ from the proof form θ = μ^{(2+2ν)/ν} / 2.
double theta_log_from_mu_nu(double mu_log, double nu_log);

/// ln ζ = (18d+47) ln δ0 + ln C_zeta.
double zeta_log(double delta0, std::size_t d, const ConstantKnobs& knobs = {});
int zeta_exponent(std::size_t d);
/// Exponent 1/(18d+47) in δ(M).
double log_integrability_delta_power(std::size_t d);
/// Exponent 1/(18d+48) of the logarithm integrand.
double log_integrability_power(std::size_t d);

/// 5^{1/(2s)}.
double m_threshold(double s);
/// ln of the largest admissible δ0: (2d + 2s(d+1)) ln(4/(1225 m^2)).
double delta0_max_log(std::size_t d, double s, double m);
/// δ = δ0 (1/(35m))^{2d+2s(d+1)}, as a log.
double covering_delta_log(std::size_t d, double s, double m, double delta0);
/// ln M for M ~ δ^{-2(1+δ^{-(18d+46)})}.
long double level_M_log(double delta_log, std::size_t d);

/// (7^k+7)^{2s} - (7^k+1)^{2s} >= (2/n)^{2s} for k = 1..k_max.
bool n_cov_admissible(int n_cov, double s, int k_max);
/// Smallest admissible n_cov up to k_max (search capped at 10^6).
int n_cov_minimal(double s, int k_max);

/// 2(3 + 2^{18d+46}) as a log: ln of the exponent of e in the oscillation bound.
double oscillation_exponent_log(std::size_t d);

struct HoelderAlpha {
  double alpha = 0.0;      ///< ln(1 - θ/2) / ln r0 (0 when θ underflows)
  double alpha_log = 0.0;  ///< ln α, finite even when α underflows
  bool at_least_one = false;
};

HoelderAlpha hoelder_alpha(long double theta_log, double r0);
/// Same from the factor 1 - θ/2 directly.
HoelderAlpha hoelder_alpha_from_factor(double factor, double r0);

/// All constants for one parameter set, as reported by the CLI.
struct TheoryConstants {
  std::size_t d = 1;
  double s = 0.5;
  double n = 0.0;
  double p = 2.5;
  double p_crit = 0.0;
  double p_star = 0.0;
  double sigma_max = 0.0;
  DeGiorgiExponents dg;
  IvlConstants ivl;
  MtpConstants mtp;
  double zeta_log = 0.0;
  double m_threshold = 0.0;
  double delta0_max_log = 0.0;
  long double M_log = 0.0L;
  double alpha_log = 0.0;
  double alpha = 0.0;
};

struct ConstantsInput {
  std::size_t d = 1;
  double s = 0.5;
  double p = 2.5;
  double sigma = 0.2;
  double r0 = 0.3;
  double delta1 = 0.5;
  double delta2 = 0.5;
  double delta = 0.5;
  double delta0 = 0.01;
  double m = 5.0;
  ConstantKnobs knobs;
};

TheoryConstants theory_constants(const ConstantsInput& in);

}  // namespace kdg
