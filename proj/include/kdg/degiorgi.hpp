#pragma once

// De Giorgi machinery on grid fields: truncations, level functions, the local
// energy and integrability balances, the first-lemma iteration, barriers, the
// weak Poincaré terms and the intermediate value check. Set measures are cell
// counts times the cell volume; integrals are node sums times the cell volume.

#include <cstddef>
#include <optional>
#include <vector>

#include "kdg/constants.hpp"
#include "kdg/geometry.hpp"
#include "kdg/grid.hpp"
#include "kdg/kernels.hpp"

namespace kdg {

/// t_lo < t ≤ t_hi (or t_lo ≤ t when closed), |v - v0| < rv,
/// |x - x0 - (t - t0) v0| < rx, where (t0, x0, v0) is the anchor.
struct SlantedBox {
  KineticPoint anchor;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double x_radius = 0.0;
  double v_radius = 0.0;
  bool open_lo = false;

  bool contains(double t, std::span<const double> x, std::span<const double> v) const;
  bool contains(const KineticPoint& z) const { return contains(z.t, z.x, z.v); }
  /// Exact volume (t_hi - t_lo) |B_rx| |B_rv|.
  double volume() const;
};

SlantedBox box_of(const KineticCylinder& c);
/// Sum of cell volumes of the nodes inside the box.
double grid_measure(const GridField& f, const SlantedBox& box);

// Truncations.

struct Truncation {
  GridField plus;   ///< (f - ψ)_+
  GridField minus;  ///< (f - ψ)_- = min(f - ψ, 0), so that f = plus + minus + ψ
  double level_set_measure = 0.0;  ///< |{f > ψ} ∩ domain|
};

Truncation truncate_levels(const GridField& f, double level, const std::optional<SlantedBox>& domain = {});
Truncation truncate_levels(const GridField& f, const GridField& psi, const std::optional<SlantedBox>& domain = {});

/// f_k = μ^{-2k} [f - (1 - μ^{2k})], evaluated as μ^{-2k}(f - 1) + 1.
double level_function(double f, double mu, int k);
GridField level_function(const GridField& f, double mu, int k);

/// -∬ (f - ψ)_+(v) (f - ψ)_-(w) K(v, w) dw dv integrated over (t, x); the sum
/// runs over pairs of velocity nodes of each slice.
double cross_term(const KernelSpec& K, const Truncation& tr);

// Energy and integrability.

struct EnergyBalance {
  double sup_mass = 0.0;       ///< sup_τ ∫_{Q_r^τ} f^2
  double gagliardo = 0.0;      ///< ∫_{Q_r} ∫_{B_r} |f(w) - f(v)|^2 |v - w|^{-(d+2s)}
  double initial_mass = 0.0;   ///< ∫_{Q_R^{t0 - r^{2s}}} f^2
  double positive_measure = 0.0;  ///< |{f > 0} ∩ Q_R|
  double source_l2 = 0.0;      ///< ∫_{Q_R} h^2
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;          ///< lhs / rhs (inf when rhs = 0 < lhs)
};

/// inner = Q_r(z0), outer = Q_R(z0), plain cylinders with a common centre and
/// r < R < min{1, R̄/2}. Requires 0 ≤ f ≤ 1 on the outer slab.
EnergyBalance energy_balance(const KernelSpec& K, const GridField& f, const GridField* h,
                             const KineticCylinder& inner, const KineticCylinder& outer);

struct IntegrabilityGain {
  double lp_lhs = 0.0;       ///< ‖f‖^2_{L^p(Q_r)}
  double w_sigma_lhs = 0.0;  ///< ‖f‖^2_{L^1_{t,v} W^{σ,1}_x(Q_r)}
  double initial_term = 0.0;  ///< (R-r)^{-2} ∫ f_0^2
  double measure_term = 0.0;  ///< (R-r)^{-4} |{f > 0} ∩ Q_R|
  double source_term = 0.0;   ///< (R-r)^{-2} ∫ h^2
  double rhs = 0.0;
  double lp_ratio = 0.0;
  double w_sigma_ratio = 0.0;
};

IntegrabilityGain integrability_gain(const KernelSpec& K, const GridField& f, const GridField* h,
                                     const KineticCylinder& inner, const KineticCylinder& outer, double p,
                                     double sigma);

/// ‖f‖_{L^1_{t,v} W^{σ,1}_x} restricted to the box: L^1 norm plus
/// ∫∫ |f(x) - f(x')| |x - x'|^{-(d+σ)} over pairs of x nodes in the box.
double w_sigma_1_norm(const GridField& f, const SlantedBox& box, double sigma);

// First lemma.

struct ScheduleStep {
  int k = 0;
  double l = 0.0;
  double r = 0.0;
  double t = 0.0;
  SlantedBox box;
  double A = 0.0;                  ///< ∫_{Q_k} (f - l_k)_+^2
  double A_star = 0.0;             ///< A_0 Q^{-k}
  double chebyshev_measure = 0.0;  ///< |{(f - l_k)_+ > 2^{-k-2} L} ∩ Q_k|
  double chebyshev_bound = 0.0;    ///< 2^{2k+4} L^{-2} A_k
  bool chebyshev_holds = false;
  bool decay_holds = false;        ///< A_k ≤ A_k^*
};

struct DeGiorgiSchedule {
  double L = 0.0;
  double log_L = 0.0;
  double tau_tilde = 0.0;  ///< r^{2s} - t0
  double tau_hat = 0.0;    ///< R^{2s} - t0
  std::vector<ScheduleStep> steps;
};

/// l_k, r_k, t_k and the boxes Q_k for k = 0..k_max (A entries left at 0).
DeGiorgiSchedule make_schedule(const KineticPoint& z0, double r, double R, double s, double L, int k_max);

struct FirstLemmaOptions {
  int k_max = 8;
  double C = 1.0;                 ///< constant in the pointwise bound
  std::optional<double> L;        ///< replaces the formula for L when set
};

struct FirstLemmaResult {
  bool converged = false;   ///< A_k ≤ A_0 Q^{-k} for all k ≤ k_max
  bool chebyshev_holds = false;
  double bound = 0.0;       ///< min{C [1 + (R-r)‖h‖]^{β1/2} (R-r)^{-β1} ε^{β2}, 1/2}
  double sup_inner = 0.0;   ///< max of f over the nodes of Q_r
  double h_sup = 0.0;
  double A0 = 0.0;
  DeGiorgiExponents exponents;
  DeGiorgiSchedule schedule;
};

/// L = A_0^{β2} (R-r)^{-β1} 2^{4p^2/((p-2)(2p-2))} [1 + (R-r)‖h‖]^{p/(2p-2)}, as a log.
double first_lemma_log_L(double A0, double R_minus_r, double h_sup, double p);

FirstLemmaResult first_lemma(const KernelSpec& K, const GridField& f, const GridField* h,
                             const KineticCylinder& inner, const KineticCylinder& outer, double p, double eps,
                             const FirstLemmaOptions& opts = {});

// Barriers.

struct Barriers {
  std::size_t d = 1;
  double s = 0.5;
  double r0 = 0.1;
  double mu = 0.1;
};

Barriers make_barriers(std::size_t d, double s, double r0, double mu);

/// Smooth cut-off in x: 0 on B_{(3r0)^{1+2s}}, 1 outside B_{(9r0)^{1+2s}}.
double barrier_psi(const Barriers& B, std::span<const double> x);
/// F_i(v) = clamp((|v|^2 - c_i r0^2) / r0^2, -1, 0) with c = 10, 9, 8.
double barrier_F(const Barriers& B, std::span<const double> v, int which);
/// μ^i F_i(v).
double barrier_coefficient_term(const Barriers& B, std::span<const double> v, int which);
/// φ_i = (ψ + 1) + μ^i F_i.
double barrier_eval(const Barriers& B, std::span<const double> x, std::span<const double> v, int which);
/// φ_i - φ_j without forming the ψ + 1 part: μ^i F_i - μ^j F_j.
double barrier_difference(const Barriers& B, std::span<const double> v, int i, int j);

// Weak Poincaré.

struct PoincareOptions {
  double sigma = 0.2;
  double scale = 1.0;   ///< kinetic scaling of the unit geometry (Q_1 -> Q_scale)
  double C = 1.0;       ///< recorded constant in lhs ≤ C rhs
};

struct PoincareTerms {
  double average = 0.0;       ///< ⟨f⟩ over Q_1^-
  double lhs = 0.0;           ///< ‖(f - ⟨f⟩)_+‖_{L^1(Q_1)}
  double sym_term = 0.0;      ///< ε^{-(d+2)} ∫ (∫ |f(v) - f(w)|^2 K dw)^{1/2} dz
  double skew_term = 0.0;     ///< ε^{-d} |∫∫ f(v) (K(v,w) - K(w,v))|
  double sobolev_term = 0.0;  ///< ε^σ ‖f‖_{L^1 W^{σ,1}(Q_2)}
  double source_term = 0.0;   ///< ‖h‖_{L^1(Q_3)}
  double rhs = 0.0;
  double ratio = 0.0;
  bool holds = false;         ///< lhs ≤ C rhs
};

PoincareTerms poincare_terms(const KernelSpec& K, const GridField& f, const GridField* h, double eps,
                             const PoincareOptions& opts = {});

// Intermediate value lemma.

struct IvlOptions {
  double sigma = 0.2;
  double C_h = 1.0;  ///< ‖h‖_{L^∞(Q_{3r0})} ≤ C_h μ^2
  ConstantKnobs knobs;
};

struct IvlCheck {
  double low_fraction = 0.0;   ///< |{f ≤ 0} ∩ Q^-_{r0}| / |Q^-_{r0}|
  double high_fraction = 0.0;  ///< |{f > 1 - μ^2} ∩ Q_{r0}| / |Q_{r0}|
  double h_sup = 0.0;
  bool hypothesis_low = false;
  bool hypothesis_high = false;
  bool hypothesis_source = false;
  bool hypotheses_hold = false;
  double intermediate_measure = 0.0;  ///< |{φ0 < f < φ2} ∩ (-3,0] × B_{2^{-1-2s}} × B_{1/2}|
  bool region_covered = false;        ///< the grid spans the conclusion region
  double mu_log = 0.0;
  double nu_log = 0.0;
  double nu_bound_log = 0.0;          ///< ln(ν |Q_{1/2}|)
  bool conclusion_holds = false;
  IvlConstants constants;
};

IvlCheck ivl_check(const KernelSpec& K, const GridField& f, const GridField* h, double r0, double delta1,
                   double delta2, const IvlOptions& opts = {});

}  // namespace kdg
