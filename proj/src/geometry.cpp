#include "kdg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kdg/error.hpp"

namespace kdg {

namespace {

void require_same_dim(const KineticPoint& a, const KineticPoint& b) {
  require(a.x.size() == b.x.size() && a.v.size() == b.v.size(),
          "kinetic points have different dimensions");
}

double norm(std::span<const double> a) {
  double acc = 0.0;
  for (double c : a) acc += c * c;
  return std::sqrt(acc);
}

double time_shift(CylinderVariant variant, double r, double s) {
  switch (variant) {
    case CylinderVariant::plain: return 0.0;
    case CylinderVariant::past: return -2.0 * std::pow(r, 2.0 * s);
    case CylinderVariant::future: return 2.0 * std::pow(r, 2.0 * s);
    case CylinderVariant::covering: return 0.5 * std::pow(2.0 * r, 2.0 * s);
    case CylinderVariant::covering_future: return 2.5 * std::pow(2.0 * r, 2.0 * s);
  }
  return 0.0;
}

}  // namespace

KineticPoint make_point(double t, Vec x, Vec v) {
  require(x.size() == v.size(), "x and v must have the same dimension");
  require(!x.empty(), "dimension must be at least 1");
  require(std::isfinite(t), "t must be finite");
  for (double c : x) require(std::isfinite(c), "x must be finite");
  for (double c : v) require(std::isfinite(c), "v must be finite");
  return KineticPoint{t, std::move(x), std::move(v)};
}

KineticPoint origin(std::size_t d) { return KineticPoint{0.0, Vec(d, 0.0), Vec(d, 0.0)}; }

KineticPoint galilean_compose(const KineticPoint& z0, const KineticPoint& z) {
  require_same_dim(z0, z);
  KineticPoint out{z0.t + z.t, Vec(z.dim()), Vec(z.dim())};
  for (std::size_t i = 0; i < z.dim(); ++i) {
    out.x[i] = z0.x[i] + z.x[i] + z.t * z0.v[i];
    out.v[i] = z0.v[i] + z.v[i];
  }
  return out;
}

KineticPoint galilean_inverse(const KineticPoint& z0) {
  KineticPoint out{-z0.t, Vec(z0.dim()), Vec(z0.dim())};
  for (std::size_t i = 0; i < z0.dim(); ++i) {
    out.x[i] = -z0.x[i] + z0.t * z0.v[i];
    out.v[i] = -z0.v[i];
  }
  return out;
}

ScalingTransform::ScalingTransform(double r, double s) : r_(r), s_(s) {
  require(r > 0.0 && r <= 1.0, "scaling factor r must lie in (0, 1]");
  require(s > 0.0 && s < 1.0, "fractional exponent s must lie in (0, 1)");
}

KineticPoint ScalingTransform::apply(const KineticPoint& z) const {
  const double ct = std::pow(r_, 2.0 * s_);
  const double cx = std::pow(r_, 1.0 + 2.0 * s_);
  KineticPoint out{ct * z.t, z.x, z.v};
  for (double& c : out.x) c *= cx;
  for (double& c : out.v) c *= r_;
  return out;
}

KineticPoint ScalingTransform::invert(const KineticPoint& z) const {
  const double ct = std::pow(r_, 2.0 * s_);
  const double cx = std::pow(r_, 1.0 + 2.0 * s_);
  KineticPoint out{z.t / ct, z.x, z.v};
  for (double& c : out.x) c /= cx;
  for (double& c : out.v) c /= r_;
  return out;
}

KineticPoint scale_point(const ScalingTransform& transform, const KineticPoint& z) {
  return transform.apply(z);
}

double unit_ball_volume(std::size_t d) {
  const double h = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

double unit_sphere_area(std::size_t d) {
  const double h = 0.5 * static_cast<double>(d);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double total_dimension(std::size_t d, double s) {
  return 2.0 * s + static_cast<double>(d) * (2.0 + 2.0 * s);
}

double cylinder_volume(std::size_t d, double s, double r) {
  const double w = unit_ball_volume(d);
  return w * w * std::pow(r, total_dimension(d, s));
}

std::string_view to_string(CylinderVariant variant) {
  switch (variant) {
    case CylinderVariant::plain: return "plain";
    case CylinderVariant::past: return "past";
    case CylinderVariant::future: return "future";
    case CylinderVariant::covering: return "covering";
    case CylinderVariant::covering_future: return "covering_future";
  }
  return "unknown";
}

KineticCylinder::KineticCylinder(KineticPoint center, double r, double s, CylinderVariant variant)
    : center_(std::move(center)), r_(r), s_(s), variant_(variant) {
  require(r > 0.0 && std::isfinite(r), "cylinder radius must be positive");
  require(s > 0.0 && s < 1.0, "fractional exponent s must lie in (0, 1)");
  require(center_.x.size() == center_.v.size() && !center_.x.empty(),
          "cylinder centre has inconsistent dimensions");
  const bool covering =
      variant == CylinderVariant::covering || variant == CylinderVariant::covering_future;
  rho_ = covering ? 2.0 * r : r;
  KineticPoint shift = origin(center_.dim());
  shift.t = time_shift(variant, r, s);
  anchor_ = galilean_compose(center_, shift);
}

double KineticCylinder::time_lo() const { return anchor_.t - std::pow(rho_, 2.0 * s_); }

double KineticCylinder::x_radius() const { return std::pow(rho_, 1.0 + 2.0 * s_); }

Vec KineticCylinder::x_center_at(double t) const {
  Vec c(anchor_.x);
  const double dt = t - anchor_.t;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += dt * anchor_.v[i];
  return c;
}

bool KineticCylinder::contains(const KineticPoint& z) const {
  require_same_dim(anchor_, z);
  const double tau = z.t - anchor_.t;
  if (tau > 0.0 || tau < -std::pow(rho_, 2.0 * s_)) return false;
  double dv = 0.0;
  double dx = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) {
    const double a = z.v[i] - anchor_.v[i];
    const double b = z.x[i] - anchor_.x[i] - tau * anchor_.v[i];
    dv += a * a;
    dx += b * b;
  }
  return std::sqrt(dv) < rho_ && std::sqrt(dx) < x_radius();
}

double KineticCylinder::volume() const { return cylinder_volume(dim(), s_, rho_); }

bool KineticCylinder::intersects(const KineticCylinder& other) const {
  require_same_dim(anchor_, other.anchor_);
  const double lo = std::max(time_lo(), other.time_lo());
  const double hi = std::min(time_hi(), other.time_hi());
  if (lo > hi) return false;

  const std::size_t d = dim();
  Vec dv(d);
  for (std::size_t i = 0; i < d; ++i) dv[i] = anchor_.v[i] - other.anchor_.v[i];
  if (norm(dv) >= v_radius() + other.v_radius()) return false;

  // x-centre difference is affine in t: D(t) = D0 + t * dv.
  Vec d0(d);
  for (std::size_t i = 0; i < d; ++i) {
    d0[i] = (anchor_.x[i] - anchor_.t * anchor_.v[i]) -
            (other.anchor_.x[i] - other.anchor_.t * other.anchor_.v[i]);
  }
  double dvdv = 0.0;
  double d0dv = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dvdv += dv[i] * dv[i];
    d0dv += d0[i] * dv[i];
  }
  double t_best = lo;
  if (dvdv > 0.0) t_best = std::clamp(-d0dv / dvdv, lo, hi);
  double dist = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double c = d0[i] + t_best * dv[i];
    dist += c * c;
  }
  return std::sqrt(dist) < x_radius() + other.x_radius();
}

std::vector<KineticPoint> KineticCylinder::extreme_points(double shrink) const {
  const std::size_t d = dim();
  const double keep = 1.0 - shrink;
  const double tspan = std::pow(rho_, 2.0 * s_);
  std::vector<double> taus{-tspan * keep, 0.0};

  // Offsets along every axis plus the main diagonals.
  std::vector<Vec> dirs;
  for (std::size_t i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
  }
  if (d > 1) {
    const std::size_t corners = std::size_t{1} << d;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      Vec e(d);
      for (std::size_t i = 0; i < d; ++i)
        e[i] = ((mask >> i) & 1U ? -1.0 : 1.0) / std::sqrt(static_cast<double>(d));
      dirs.push_back(e);
    }
  }

  std::vector<KineticPoint> out;
  const double rx = x_radius() * keep;
  const double rv = v_radius() * keep;
  for (double tau : taus) {
    for (const Vec& ex : dirs) {
      for (const Vec& ev : dirs) {
        KineticPoint local{tau, Vec(d), Vec(d)};
        for (std::size_t i = 0; i < d; ++i) {
          local.x[i] = rx * ex[i];
          local.v[i] = rv * ev[i];
        }
        out.push_back(galilean_compose(anchor_, local));
      }
    }
  }
  return out;
}

KineticCylinder make_cylinder(const KineticPoint& z0, double r, double s, CylinderVariant variant) {
  return KineticCylinder(z0, r, s, variant);
}

CylinderQuery cylinder_ops(const KineticCylinder& c, const KineticPoint& z) {
  return CylinderQuery{c.contains(z), c.volume()};
}

double covering_alpha(double r0, int k) {
  require(r0 > 0.0, "r0 must be positive");
  require(k >= 1, "covering index k starts at 1");
  return 0.5 * r0 * std::pow(7.0, 1.0 - static_cast<double>(k));
}

}  // namespace kdg
