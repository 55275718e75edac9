#pragma once

// Kinetic phase-space points z = (t, x, v), the Galilean group law, the
// kinetic scaling and the slanted cylinders built on top of them.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace kdg {

using Vec = std::vector<double>;

struct KineticPoint {
  double t = 0.0;
  Vec x;
  Vec v;

  std::size_t dim() const { return x.size(); }
};

/// Validated constructor: |x| and |v| must have equal dimension and finite entries.
KineticPoint make_point(double t, Vec x, Vec v);
KineticPoint origin(std::size_t d);

/// z0 ∘ z = (t0 + t, x0 + x + t v0, v0 + v).
KineticPoint galilean_compose(const KineticPoint& z0, const KineticPoint& z);
/// The unique z with z0 ∘ z = 0, namely (-t0, -x0 + t0 v0, -v0).
KineticPoint galilean_inverse(const KineticPoint& z0);

class ScalingTransform {
 public:
  ScalingTransform(double r, double s);

  double r() const { return r_; }
  double s() const { return s_; }

  /// (t, x, v) -> (r^{2s} t, r^{1+2s} x, r v).
  KineticPoint apply(const KineticPoint& z) const;
  KineticPoint invert(const KineticPoint& z) const;

 private:
  double r_;
  double s_;
};

KineticPoint scale_point(const ScalingTransform& transform, const KineticPoint& z);

double unit_ball_volume(std::size_t d);
double unit_sphere_area(std::size_t d);

/// n = 2s + d(2 + 2s), the homogeneous dimension of kinetic space.
double total_dimension(std::size_t d, double s);

/// |Q_r| = |B_1|^2 r^n.
double cylinder_volume(std::size_t d, double s, double r);

enum class CylinderVariant {
  plain,            ///< Q_r(z0)
  past,             ///< Q⁻_r(z0) = Q_r(z0 ∘ (-2r^{2s}, 0, 0))
  future,           ///< Q⁺_r(z0) = Q_r(z0 ∘ (2r^{2s}, 0, 0))
  covering,         ///< 𝔠_r[z] = z ∘ Q_{2r}((½(2r)^{2s}, 0, 0))
  covering_future,  ///< 𝔠⁺_r[z] = z ∘ Q_{2r}((5/2 (2r)^{2s}, 0, 0))
};

std::string_view to_string(CylinderVariant variant);

/// A kinetic cylinder. Every variant is stored as a plain cylinder Q_ρ(anchor):
///   anchor.t - ρ^{2s} ≤ t ≤ anchor.t,
///   |v - anchor.v| < ρ,
///   |x - anchor.x - (t - anchor.t) anchor.v| < ρ^{1+2s}.
/// The time window is closed at both ends; the balls are open.
class KineticCylinder {
 public:
  KineticCylinder(KineticPoint center, double r, double s,
                  CylinderVariant variant = CylinderVariant::plain);

  const KineticPoint& center() const { return center_; }
  const KineticPoint& anchor() const { return anchor_; }
  double radius() const { return r_; }
  double s() const { return s_; }
  CylinderVariant variant() const { return variant_; }
  std::size_t dim() const { return center_.dim(); }

  /// ρ: r for Q-type variants, 2r for the covering variants.
  double base_radius() const { return rho_; }
  double time_lo() const;
  double time_hi() const { return anchor_.t; }
  double x_radius() const;
  double v_radius() const { return rho_; }

  /// Spatial centre of the x-ball at time t (slanted along anchor.v).
  Vec x_center_at(double t) const;

  bool contains(const KineticPoint& z) const;
  double volume() const;

  /// Exact test for a common point (closed time windows, open balls).
  bool intersects(const KineticCylinder& other) const;

  /// Extreme points of the cylinder pulled towards the anchor by the factor
  /// (1 - shrink): both time ends, ±axis and diagonal offsets in x and v.
  std::vector<KineticPoint> extreme_points(double shrink = 1e-9) const;

 private:
  KineticPoint center_;
  KineticPoint anchor_;
  double r_;
  double s_;
  double rho_;
  CylinderVariant variant_;
};

KineticCylinder make_cylinder(const KineticPoint& z0, double r, double s,
                              CylinderVariant variant = CylinderVariant::plain);

struct CylinderQuery {
  bool contains = false;
  double volume = 0.0;
};

CylinderQuery cylinder_ops(const KineticCylinder& c, const KineticPoint& z);

/// Decay parameter of the covering sequence: α_k = (r0/2) 7^{1-k}.
double covering_alpha(double r0, int k);

}  // namespace kdg
