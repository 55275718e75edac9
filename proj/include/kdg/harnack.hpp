#pragma once

// Covering construction, Vitali selection, weak and not-so-strong Harnack
// checks, logarithmic integrability and oscillation decay on grid fields.
// Infima and suprema are min/max over the grid nodes inside a cylinder.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kdg/geometry.hpp"
#include "kdg/grid.hpp"

namespace kdg {

/// 𝒬^k = Q_{r0/2 + α_k}((-5/2 r0^{2s} + ½ (r0/2 + α_k)^{2s}, 0, 0)) for k = 1..k_max.
std::vector<KineticCylinder> covering_sequence(std::size_t d, double r0, double s, int k_max);
/// Q̃⁻_{r0/2} = Q_{r0/2}(((-5/2 + 1/(2·2^{2s})) r0^{2s}, 0, 0)).
KineticCylinder covering_limit(std::size_t d, double r0, double s);
/// Q̃⁻_{r0/4}: same centre as Q̃⁻_{r0/2}, radius r0/4.
KineticCylinder covering_limit_quarter(std::size_t d, double r0, double s);

struct NestingCheck {
  bool limit_inside = false;    ///< Q̃⁻_{r0/2} ⊂ 𝒬^k for every k
  bool strictly_nested = false; ///< closure(𝒬^k) ⊂ interior(𝒬^{k-1})
  bool inside_past = false;     ///< 𝒬^k ⊂ Q⁻_{r0}
  bool first_is_past = false;   ///< 𝒬^1 = Q⁻_{r0}
  bool ok() const { return limit_inside && strictly_nested && inside_past && first_is_past; }
};

/// Corner-point membership checks on the extreme points of each cylinder.
NestingCheck check_nesting(const std::vector<KineticCylinder>& seq, double r0);

struct CoveringParams {
  std::size_t d = 1;
  double s = 0.5;
  double m = 5.0;
  int n_cov = 1;
  double delta0 = 1e-3;
  double alpha_next = 0.0;    ///< α_{k+1}; radii lie in (0, α_{k+1}/(5m n_cov))
  double cell_volume = 0.0;   ///< measure carried by each point of A
  int ladder = 40;            ///< number of dyadic candidate radii
  int k_max = 32;             ///< n_cov admissibility is verified up to k_max
  bool enforce_delta0_bound = true;  ///< require δ0 ≤ (4/(1225 m^2))^{2d+2s(d+1)}
};

struct CoveringMember {
  KineticPoint z;
  double r = 0.0;
};

struct CoveringFamily {
  CoveringParams params;
  std::vector<CoveringMember> members;
  std::size_t candidates = 0;          ///< points of A with an admissible radius
  std::vector<std::size_t> no_candidate;  ///< indices of points of A without one
  double sum_volume_r = 0.0;           ///< Σ |𝔠_{r_l}|
  double sum_volume_5mr = 0.0;         ///< Σ |𝔠_{5m r_l}|
  double volume_factor = 0.0;          ///< (5m)^{2d(s+1)+2s}
};

/// |A ∩ 𝔠_r[z]|: number of points of A in the cylinder times the cell volume.
double set_measure(const std::vector<KineticPoint>& A, const KineticCylinder& c, double cell_volume);

CoveringFamily vitali_cover(const std::vector<KineticPoint>& A, const CoveringParams& params);

struct CoveringAudit {
  bool disjoint = false;  ///< 𝔠_{m r_l}[z_l] pairwise disjoint
  bool covers = false;    ///< every point with a candidate lies in some 𝔠_{5m r_l}[z_l]
  bool radii_ok = false;  ///< r_l ∈ (0, α_{k+1}/(5m n_cov))
  bool density_ok = false;  ///< both density conditions for every member
  bool bookkeeping = false; ///< Σ|𝔠_{5m r_l}| = (5m)^{n} Σ|𝔠_{r_l}|
  std::vector<std::string> witnesses;
  bool ok() const { return disjoint && covers && radii_ok && density_ok && bookkeeping; }
};

/// Brute-force pairwise and membership verification of a family.
CoveringAudit audit_cover(const std::vector<KineticPoint>& A, const CoveringFamily& family);

struct HarnackReport {
  double zeta_log = 0.0;
  double zeta = 0.0;
  double integral = 0.0;       ///< ∫_{Q̃⁻_{r0/2}} f^ζ
  double lhs_log = 0.0;        ///< ln (∫ f^ζ)^{1/ζ}
  double infimum = 0.0;        ///< inf_{Q_{r0/2}} f
  double supremum = 0.0;       ///< sup over the same nodes
  double h_sup = 0.0;          ///< ‖h‖_{L^∞(Q_1)}
  double C = 1.0;
  double rhs = 0.0;            ///< C (inf + ‖h‖)
  double quotient = 0.0;       ///< lhs / rhs (inf when rhs = 0 < lhs)
  double quotient_log = 0.0;
  double shifted_quotient = 0.0;  ///< same for f + (1 + t)‖h‖ against C inf
  bool violation = false;      ///< rhs = 0 while lhs > 0
  std::vector<std::string> witnesses;
};

HarnackReport weak_harnack_quotient(const GridField& f, const GridField* h, double s, double r0, double zeta_log,
                                    double C = 1.0);

struct StrongHarnack {
  double sup_val = 0.0;   ///< sup_{Q̃⁻_{r0/4}} f
  double inf_val = 0.0;   ///< inf_{Q_{r0/4}} f
  double h_sup = 0.0;
  double beta = 0.0;      ///< ζ β2
  double beta_log = 0.0;
  double bound = 0.0;     ///< C (inf + ‖h‖)^β
  bool satisfied = false;
};

StrongHarnack strong_harnack_check(const GridField& f, const GridField* h, double s, double r0, double zeta_log,
                                   double p, double C = 1.0);

struct LogIntegrability {
  double lhs_measure_fraction = 0.0;  ///< |{f > M} ∩ Q⁻_r| / |Q⁻_r|
  double delta_M = 0.0;               ///< (1/ln(1+M))^{1/(18d+47)}
  double log_integral = 0.0;          ///< ∫_{Q⁻_r} (ln(1+f))^{1/(18d+48)}
  double inf_half = 0.0;              ///< inf_{Q_{r/2}} f
  bool premise = false;               ///< inf_{Q_{r/2}} f < 1
};

LogIntegrability log_integrability(const GridField& f, double s, double r, double M);

struct MtpPredicate {
  double fraction = 0.0;     ///< |{f > M} ∩ Q_r(z)| / |Q_r(z)|
  double inf_future = 0.0;   ///< inf_{Q⁺_{r/2}(z)} f
  bool premise = false;      ///< fraction > δ
  bool conclusion = false;   ///< inf ≥ 1
  bool holds = false;        ///< premise ⟹ conclusion
  std::string witness;
};

/// The measure-to-pointwise implication |{f > M} ∩ Q_r(z)| > δ |Q_r(z)| ⟹ inf_{Q⁺_{r/2}(z)} f ≥ 1.
MtpPredicate mtp_predicate(const GridField& f, double s, const KineticPoint& z, double r, double M, double delta);

struct HoelderReport {
  long double theta_log = 0.0L;
  double theory_alpha = 0.0;
  double theory_alpha_log = 0.0;
  Vec radii;
  Vec osc;
  Vec band;                       ///< largest one-cell variation inside each cylinder
  std::vector<std::size_t> nodes;  ///< grid nodes inside each cylinder
  Vec normalized;                 ///< osc_n / max{osc_0, e^{2(3+2^{18d+46})} ‖h‖}
  bool nonincreasing = false;
  double fitted_alpha = 0.0;
  std::size_t used_scales = 0;
};

/// Oscillations over Q_{r0^n}(z0), n = 0..n_max, and the least-squares slope
/// of ln osc against ln r. Scales with zero oscillation are skipped.
HoelderReport hoelder_exponent(const GridField& f, double s, const KineticPoint& z0, double r0, int n_max,
                               long double theta_log, double h_sup = 0.0);

}  // namespace kdg
