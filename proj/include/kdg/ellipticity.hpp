#pragma once

// Numerical checks of the kernel ellipticity class: coercivity (plain, square
// root and full-space), the upper bound on B_r(v), its dyadic ring form, and the
// two cancellation conditions. Pointwise conditions are evaluated by radial
// quadrature in polar coordinates around v; coercivity conditions by grid
// double sums against a family of test functions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kdg/kernels.hpp"

namespace kdg {

struct ConditionRecord {
  std::string id;
  double lhs = 0.0;       ///< worst measured left-hand side
  double rhs = 0.0;       ///< right-hand side at the same witness
  double constant = 0.0;  ///< measured constant (lhs normalised by the scale factor)
  double required = 0.0;  ///< declared lambda or Lambda it is compared against
  bool pass = false;
  bool enforced = true;   ///< false when the condition is not required (cancellation2, s < 1/2)
  bool sampled = false;   ///< true for certificates over a finite test family
  bool certified = false; ///< sampled and with more than 10% slack
  double margin = 0.0;    ///< rhs / lhs - 1 (infinite when lhs = 0)
  std::string witness;
};

struct ComplianceReport {
  KernelKind kind = KernelKind::fractional_laplacian;
  std::size_t d = 1;
  double s = 0.5;
  double lambda = 1.0;
  double Lambda = 1.0;
  double Rbar = 2.0;
  std::vector<ConditionRecord> conditions;

  bool all_pass() const;
  const ConditionRecord& get(const std::string& id) const;
};

struct EllipticityOptions {
  Vec radii{0.125, 0.25, 0.5, 1.0};
  /// Velocities for the pointwise conditions; empty means {0, ±Rbar/2 e_1}.
  std::vector<Vec> v_samples;
  std::size_t directions = 64;
  std::size_t radial_nodes = 16;
};

/// Hats, smooth bumps and seeded trigonometric polynomials times a bump, all
/// supported in B_radius and sampled on grid.
std::vector<VelocityField> test_function_library(const Lattice& grid, double radius, std::uint64_t seed,
                                                 std::size_t trig_count = 4);

ComplianceReport check_ellipticity(const KernelSpec& K, const std::vector<VelocityField>& tests,
                                   const EllipticityOptions& opts = {});

// Individual quantities, exposed for tests and reports.
/// ∫_{B_r(v)} K(v, w) |v - w|^2 dw.
double upperbound2_integral(const KernelSpec& K, const Vec& v, double r, std::size_t directions = 64,
                            std::size_t nodes = 16);
/// ∫_{B_2r(v) \ B_r(v)} K(v, w) dw.
double ring_integral(const KernelSpec& K, const Vec& v, double r, std::size_t directions = 64,
                     std::size_t nodes = 16);
/// ∫_{B_Rbar ∩ B_2r(w) \ B_r(w)} K(v, w) dv.
double ring_integral_adjoint(const KernelSpec& K, const Vec& w, double r, std::size_t directions = 64,
                             std::size_t nodes = 16);
/// PV ∫ (K(v, w) - K(w, v)) dw.
double cancellation1_integral(const KernelSpec& K, const Vec& v, std::size_t directions = 64,
                              std::size_t nodes = 8);
/// |PV ∫_{B_r(v)} (v - w)(K(v, w) - K(w, v)) dw|.
double cancellation2_integral(const KernelSpec& K, const Vec& v, double r, std::size_t directions = 64,
                              std::size_t nodes = 8);

struct CoercivitySides {
  double lhs = 0.0;  ///< lambda-free left side
  double rhs = 0.0;
};
CoercivitySides coercivity_sides(const KernelSpec& K, const VelocityField& phi);
CoercivitySides coercivity_sqrt_sides(const KernelSpec& K, const VelocityField& phi);
/// lhs = [phi]^2 over R^d x R^d, rhs = E_K(phi, phi) + Lambda |phi|^2.
CoercivitySides coercivity_full_sides(const KernelSpec& K, const VelocityField& phi);

struct ConePoint {
  Vec v;
  std::vector<Vec> directions;  ///< sampled directions in A(v)
  double fraction = 0.0;        ///< qualified share of the sampled sphere
  double measure = 0.0;         ///< fraction times |S^{d-1}|
  bool symmetric = true;        ///< e in A(v) iff -e in A(v)
  double achieved_lambda = 0.0; ///< largest lambda for which A(v) keeps its measured size
  double mu_reference = 0.0;    ///< (1 + |v|)^{-1}, the shape of the expected lower bound
};

struct ConeReport {
  double lambda = 0.0;
  double c0 = 0.25;
  double C0 = 4.0;
  std::size_t sphere_directions = 0;
  Vec radii;
  std::vector<ConePoint> points;
  double min_measure() const;
};

struct ConeOptions {
  std::size_t directions = 64;
  Vec radii{0.1, 0.25, 0.5, 1.0};
};

ConeReport cone_lower_bound(const KernelSpec& K, const std::vector<Vec>& v_samples, double lambda,
                            const ConeOptions& opts = {});

struct SqrtCoercivity {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool inconclusive = false;
};

/// Double sums ∬_{B_R^2} |g(v) - g(w)| |v - w|^{-(d/2+s)} and
/// ∬_{B_2R^2} |g(v) - g(w)| K^{1/2}(v, w).
SqrtCoercivity sqrt_coercivity_check(const KernelSpec& K, const ConeReport& cone, const VelocityField& g,
                                     double R);

}  // namespace kdg
