#pragma once

// Fractional Kolmogorov equation ∂t f + v·∇x f + (-Δ_v)^s f = h - m on a
// periodic phase-space box. With the forward transform kernel e^{-2πi(κ·x+ϑ·v)},
// the solution operator is
//   S(t) f = F^{-1}[ m_t(κ, ϑ) F[f(x - t v, v)] ],
//   m_t(κ, ϑ) = exp(-∫_0^t |2π(ϑ + σκ)|^{2s} dσ) = Ĵ(φ, ξ)
// with φ = -t^{1+1/(2s)} 2πκ and ξ = t^{1/(2s)} 2πϑ. The constant in front of
// J is fixed by ∫ J = 1.

#include <cstddef>
#include <optional>
#include <vector>

#include "kdg/grid.hpp"

namespace kdg {

/// Ĵ(φ, ξ) = exp(-∫_0^1 |ξ - τφ|^{2s} dτ). Closed form for d = 1 and for
/// collinear φ, ξ; otherwise Gauss–Legendre with n_tau nodes per unit panel
/// after the substitution τ - τ* = c sinh w that removes the near-kink.
double symbol_eval(double s, std::span<const double> phi, std::span<const double> xi, std::size_t n_tau = 16);
/// Closed form of the exponent ∫_0^1 |ξ - τφ|^{2s} dτ for d = 1.
double symbol_exponent_1d(double s, double phi, double xi);

struct FundamentalSolution {
  double s = 0.5;
  double t = 1.0;
  PhaseField J;
  double mass = 0.0;
  double min = 0.0;
  double max = 0.0;
  double l2 = 0.0;
};

/// J(t, ·, ·) on the phase grid by inverse FFT of the symbol.
FundamentalSolution fundamental_solution(double s, double t, const std::vector<Axis>& x_axes,
                                         const std::vector<Axis>& v_axes, std::size_t n_tau = 16);

/// L^r norm of a phase field by cell quadrature.
double lr_norm(const PhaseField& f, double r);

struct ConvolutionResult {
  PhaseField value;
  bool aliasing = false;  ///< t max|v| exceeds half the x period
};

/// (f *_t g)(x, v) = ∫ f(x', v') g(x - x' - t v', v - v') dx' dv'.
ConvolutionResult modified_convolve(const PhaseField& f, const PhaseField& g, double t);

/// Sources of the Duhamel formula, piecewise constant on the time cells of
/// their own time axis and zero outside it.
struct SourceDecomposition {
  std::optional<GridField> h1;
  std::optional<GridField> h2;  ///< enters as (-Δ_v)^{s/2} h2
  std::optional<GridField> m;   ///< nonnegative

  bool empty() const { return !h1 && !h2 && !m; }
};

struct SolverOptions {
  double s = 0.5;
  double dt_max = 0.05;
  double t_start = 0.0;            ///< absolute time of f0 (sources use absolute time)
  std::size_t n_tau = 16;
  std::size_t refine_levels = 6;   ///< geometric refinement of the Duhamel quadrature near t' = t
};

struct KolmogorovSolution {
  Vec times;
  std::vector<PhaseField> slices;
  std::size_t steps = 0;

  /// Stacks the slices on a time axis whose nodes are the output times; the
  /// times must be equally spaced.
  GridField to_grid_field(double far_field_v = 0.0) const;
};

KolmogorovSolution solve_kolmogorov(const PhaseField& f0, const SourceDecomposition& src, const Vec& times,
                                    const SolverOptions& opts = {});

/// Applies S(t) once.
PhaseField propagate(const PhaseField& f, double s, double t, std::size_t n_tau = 16);

/// (-Δ_v)^{s/2} g, spectrally with multiplier |2πϑ|^s.
PhaseField fractional_velocity_power(const PhaseField& g, double s);

struct NormSuite {
  double lp = 0.0;
  double l1 = 0.0;
  double w_sigma_seminorm = 0.0;  ///< ∫∫ |f(x) - f(x')| / |x - x'|^{d+σ} per (t, v), integrated
  double w_sigma_1_x = 0.0;       ///< l1 + w_sigma_seminorm
  double p_crit = 0.0;
  double p_star = 0.0;
  double sigma_max = 0.0;
};

NormSuite norm_suite(const GridField& f, double s, double p, double sigma);

}  // namespace kdg
