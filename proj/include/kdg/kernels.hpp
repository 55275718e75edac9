#pragma once

// Non-local kernels K(v, w), the principal-value operator
//   (L f)(v) = PV ∫ K(v, w) [f(w) - f(v)] dw,
// the bilinear form E(phi, g) = -∫ (L phi) g dv and macroscopic moments.
//
// The fractional Laplacian kernel is |v - w|^{-(d+2s)} with normalisation
// constant 1. The Boltzmann kernel uses the hyperplane representation
//   K_f(v, v') = (∫_{w ⊥ (v'-v)} f(v + w) |w|^{γ+1+2s} dw) |v - v'|^{-(d+2s)}
// with its implicit constant set to 1.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "kdg/geometry.hpp"
#include "kdg/grid.hpp"

namespace kdg {

enum class KernelKind { fractional_laplacian, boltzmann, custom };

std::string_view to_string(KernelKind kind);

using KernelFunction = std::function<double(std::span<const double>, std::span<const double>)>;

struct KernelSpec {
  KernelKind kind = KernelKind::fractional_laplacian;
  std::size_t d = 1;
  double s = 0.5;
  double lambda = 1.0;
  double Lambda = 1.0;
  double Rbar = 2.0;
  double gamma = 0.0;
  /// Boltzmann only: the density f entering K_f (zero outside its box).
  std::shared_ptr<const VelocityField> density;
  /// Custom only: an arbitrary nonnegative K(v, w).
  KernelFunction custom;

  void validate() const;
};

KernelSpec fractional_laplacian_kernel(std::size_t d, double s, double lambda = 1.0,
                                       double Lambda = 1.0, double Rbar = 2.0);
KernelSpec boltzmann_kernel(VelocityField density, double s, double gamma, double lambda = 1.0,
                            double Lambda = 1.0, double Rbar = 2.0);
KernelSpec custom_kernel(std::size_t d, double s, KernelFunction fn, double lambda = 1.0,
                         double Lambda = 1.0, double Rbar = 2.0);
/// K(v, w) = a(|v - w|) |v - w|^{-(d+2s)} with a tabulated on increasing radii
/// and interpolated linearly (constant beyond the table).
KernelSpec tabulated_radial_kernel(std::size_t d, double s, Vec radii, Vec values,
                                   double lambda = 1.0, double Lambda = 1.0, double Rbar = 2.0);

/// K(v, w); throws on v == w.
double kernel_eval(const KernelSpec& K, std::span<const double> v, std::span<const double> w);

/// K(v, v + rho e) rho^{d+2s}. Independent of rho for the fractional Laplacian
/// and Boltzmann kinds.
double angular_profile(const KernelSpec& K, std::span<const double> v, std::span<const double> e,
                       double rho = 1.0);

/// True when K(v, v + rho e) rho^{d+2s} does not depend on rho.
bool is_separable(const KernelSpec& K);

/// Hyperplane integral ∫_{w ⊥ e} f(v + w) |w|^{beta} dw by midpoint quadrature.
double hyperplane_integral(const VelocityField& f, std::span<const double> v, std::span<const double> e,
                           double beta);

struct OperatorOptions {
  bool near_field = true;
  bool far_field = true;
  std::size_t directions = 256;
};

/// Pieces of the discrete PV operator at one velocity node.
struct OperatorTerms {
  double grid_sum = 0.0;    ///< punctured-grid sum over the other nodes
  double near_field = 0.0;  ///< second-order correction for the punctured cell
  double far_field = 0.0;   ///< (far_field - f(v)) ∫_{outside box} K(v, w) dw
  double value() const { return grid_sum + near_field + far_field; }
};

OperatorTerms nonlocal_operator_terms(const KernelSpec& K, const VelocityField& f, std::size_t node,
                                      const OperatorOptions& opts = {});
std::vector<double> apply_operator_slice(const KernelSpec& K, const VelocityField& f,
                                         const OperatorOptions& opts = {});
/// (L f)(z) for a grid node z of the field.
double apply_nonlocal_operator(const KernelSpec& K, const GridField& f, const KineticPoint& z,
                               const OperatorOptions& opts = {});

/// ∫_{outside the box} K(v, w) dw for a velocity node (exact in d = 1 and for
/// separable kernels up to the sphere rule).
double outside_box_mass(const KernelSpec& K, const Lattice& grid, std::span<const double> v,
                        std::size_t directions = 256);

/// E(phi, g) = ∬ K(v, w) [phi(v) - phi(w)] g(v) dw dv. Both slices must vanish
/// on the outermost nodes of the box.
double bilinear_form(const KernelSpec& K, const VelocityField& phi, const VelocityField& g,
                     const OperatorOptions& opts = {});

/// [phi]^2 = ∬ |phi(v) - phi(w)|^2 |v - w|^{-(d+2s)} over R^d x R^d.
double gagliardo_seminorm_sq(const VelocityField& phi, double s, const OperatorOptions& opts = {});
double l2_norm(const VelocityField& phi);
double hs_norm(const VelocityField& phi, double s);

struct BilinearBound {
  double value = 0.0;
  double phi_hs = 0.0;
  double g_hs = 0.0;
  /// |E(phi, g)| / (|phi|_{H^s} |g|_{H^s}): an empirical lower bound on C.
  double ratio = 0.0;
};

BilinearBound bilinear_bound(const KernelSpec& K, const VelocityField& phi, const VelocityField& g);

/// Mass, energy and entropy densities per (t, x) node, time-major.
struct Macroscopics {
  std::size_t nt = 0;
  std::size_t nx = 0;
  std::vector<double> M;
  std::vector<double> E;
  std::vector<double> H;
};

Macroscopics compute_macroscopics(const GridField& f, bool entropy = true);

}  // namespace kdg
