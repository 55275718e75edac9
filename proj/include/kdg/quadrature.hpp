#pragma once

#include <cstddef>
#include <functional>

#include "kdg/geometry.hpp"

namespace kdg {

struct QuadratureRule {
  Vec nodes;
  Vec weights;
};

/// n-point Gauss–Legendre rule on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// Integral of fn over [a, b] with an n-point rule on each of the given panels
/// (breakpoints must be increasing and include a and b).
double integrate_panels(const std::function<double(double)>& fn, const Vec& breaks, std::size_t n);

/// Antipodally symmetric direction set on the unit sphere in R^d with equal
/// weights summing to |S^{d-1}|. d = 1 gives {+1, -1}; d = 2 uses equally
/// spaced angles; d = 3 uses a Fibonacci lattice on a hemisphere plus its
/// reflection.
struct SphereRule {
  std::vector<Vec> directions;
  Vec weights;
};

SphereRule sphere_rule(std::size_t d, std::size_t n);

/// Distance from v to the boundary of the box along the unit direction e
/// (infinite when e does not leave the box, which cannot happen for e != 0).
double exit_distance(std::span<const double> v, std::span<const double> e, const Vec& lo, const Vec& hi);

/// Largest rho with |c + rho e| <= R for |c| < R.
double ball_exit_distance(std::span<const double> c, std::span<const double> e, double R);

}  // namespace kdg
