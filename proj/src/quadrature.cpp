#include "kdg/quadrature.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <gsl/gsl_integration.h>

#include "kdg/error.hpp"

namespace kdg {

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  require(n >= 1, "quadrature needs at least one node");
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
      gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
  if (!table) throw NumericalError("cannot allocate Gauss-Legendre table");
  QuadratureRule rule{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(a, b, i, &rule.nodes[i], &rule.weights[i], table.get());
  }
  return rule;
}

double integrate_panels(const std::function<double(double)>& fn, const Vec& breaks, std::size_t n) {
  require(breaks.size() >= 2, "need at least one panel");
  const QuadratureRule unit = gauss_legendre(n, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    if (!(b > a)) continue;
    double panel = 0.0;
    for (std::size_t i = 0; i < n; ++i) panel += unit.weights[i] * fn(a + (b - a) * unit.nodes[i]);
    acc += (b - a) * panel;
  }
  return acc;
}

SphereRule sphere_rule(std::size_t d, std::size_t n) {
  SphereRule rule;
  if (d == 1) {
    rule.directions = {{1.0}, {-1.0}};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  require(n >= 2 && n % 2 == 0, "direction count must be even");
  const double area = unit_sphere_area(d);
  if (d == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      rule.directions.push_back({std::cos(a), std::sin(a)});
    }
  } else if (d == 3) {
    // Fibonacci points on the upper hemisphere, then their antipodes.
    const std::size_t half = n / 2;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < half; ++i) {
      const double z = 1.0 - (static_cast<double>(i) + 0.5) / static_cast<double>(half);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(i);
      rule.directions.push_back({rho * std::cos(a), rho * std::sin(a), z});
    }
    for (std::size_t i = 0; i < half; ++i) {
      Vec e = rule.directions[i];
      for (double& c : e) c = -c;
      rule.directions.push_back(e);
    }
  } else {
    throw ValidationError("sphere rules are implemented for d <= 3");
  }
  rule.weights.assign(rule.directions.size(), area / static_cast<double>(rule.directions.size()));
  return rule;
}

double exit_distance(std::span<const double> v, std::span<const double> e, const Vec& lo, const Vec& hi) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (e[k] > 0.0) best = std::min(best, (hi[k] - v[k]) / e[k]);
    if (e[k] < 0.0) best = std::min(best, (lo[k] - v[k]) / e[k]);
  }
  return std::max(best, 0.0);
}

double ball_exit_distance(std::span<const double> c, std::span<const double> e, double R) {
  double ce = 0.0;
  double cc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    ce += c[k] * e[k];
    cc += c[k] * c[k];
  }
  const double disc = ce * ce - (cc - R * R);
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, -ce + std::sqrt(disc));
}

}  // namespace kdg
