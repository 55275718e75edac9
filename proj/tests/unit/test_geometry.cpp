#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kdg/error.hpp"
#include "kdg/geometry.hpp"
#include "kdg/sampling.hpp"

using namespace kdg;

namespace {

bool same(const KineticPoint& a, const KineticPoint& b, double tol = 0.0) {
  if (std::abs(a.t - b.t) > tol || a.x.size() != b.x.size()) return false;
  for (std::size_t i = 0; i < a.x.size(); ++i)
    if (std::abs(a.x[i] - b.x[i]) > tol || std::abs(a.v[i] - b.v[i]) > tol) return false;
  return true;
}

}  // namespace

TEST_CASE("galilean composition") {
  const auto z0 = make_point(1, {0}, {1});
  const auto z = make_point(2, {3}, {4});
  CHECK(same(galilean_compose(z0, z), make_point(3, {5}, {5})));
  CHECK(same(galilean_compose(origin(1), z), z));
  const auto w0 = make_point(1, {2}, {3});
  CHECK(same(galilean_compose(w0, galilean_inverse(w0)), origin(1)));
}

TEST_CASE("group law is associative on random triples") {
  ScrambledSobol q(9, 7);
  for (int i = 0; i < 50; ++i) {
    const Vec u = q.next();
    auto pt = [&](int k) {
      return make_point(4 * u[3 * k] - 2, {4 * u[3 * k + 1] - 2}, {4 * u[3 * k + 2] - 2});
    };
    const auto a = pt(0), b = pt(1), c = pt(2);
    CHECK(same(galilean_compose(galilean_compose(a, b), c), galilean_compose(a, galilean_compose(b, c)), 1e-12));
  }
}

TEST_CASE("kinetic scaling") {
  const ScalingTransform S(0.5, 0.5);
  CHECK(same(S.apply(make_point(1, {1}, {1})), make_point(0.5, {0.25}, {0.5}), 1e-15));
  const auto z = make_point(-0.3, {0.7}, {1.1});
  CHECK(same(ScalingTransform(1.0, 0.3).apply(z), z));
  const auto w = ScalingTransform(0.3, 0.25).apply(make_point(1, {0}, {2}));
  CHECK(w.t == doctest::Approx(std::sqrt(0.3)).epsilon(1e-15));
  CHECK(w.v[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(same(S.invert(S.apply(z)), z, 1e-14));
  CHECK_THROWS_AS(ScalingTransform(0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(ScalingTransform(1.5, 0.5), ValidationError);
}

TEST_CASE("past cylinder window") {
  const KineticCylinder c(origin(1), 1.0 / 3.0, 0.5, CylinderVariant::past);
  CHECK(c.time_lo() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(c.time_hi() == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK(c.x_radius() == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(c.v_radius() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("covering alpha") {
  CHECK(covering_alpha(0.3, 1) == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(covering_alpha(0.3, 2) == doctest::Approx(0.15 / 7).epsilon(1e-15));
}

TEST_CASE("total dimension and volume") {
  CHECK(total_dimension(1, 0.5) == 4.0);
  CHECK(cylinder_volume(1, 0.5, 0.5) == doctest::Approx(4.0 * std::pow(0.5, 4)).epsilon(1e-15));
  CHECK(KineticCylinder(origin(2), 0.7, 0.3).volume() == doctest::Approx(cylinder_volume(2, 0.3, 0.7)));
}

TEST_CASE("membership") {
  const auto z0 = make_point(0.2, {0.1}, {-0.3});
  const KineticCylinder c(z0, 0.5, 0.5);
  CHECK(c.contains(z0));
  const KineticCylinder q(make_point(0, {0}, {1}), 1.0, 0.5);
  CHECK(q.contains(make_point(-0.5, {0.4}, {0.9})));
  CHECK_FALSE(q.contains(make_point(0.01, {0}, {1})));
  CHECK(q.contains(make_point(-0.5, {-0.6}, {1})));
  CHECK_FALSE(q.contains(make_point(-0.5, {0.6}, {1})));
}

TEST_CASE("membership invariant under group and scaling") {
  ScrambledSobol q(7, 3);
  const KineticCylinder unit(origin(1), 1.0, 0.5);
  for (int i = 0; i < 100; ++i) {
    const Vec u = q.next();
    const auto z0 = make_point(2 * u[0] - 1, {2 * u[1] - 1}, {2 * u[2] - 1});
    const auto z = make_point(-u[3], {2 * u[4] - 1}, {2 * u[5] - 1});
    const double r = 0.2 + 0.7 * u[6];
    const ScalingTransform S(r, 0.5);
    const KineticCylinder moved(z0, r, 0.5);
    const auto image = galilean_compose(z0, S.apply(z));
    // Skip points within rounding of the boundary.
    const double m = std::min({std::abs(z.t + 1), std::abs(std::abs(z.x[0]) - 1), std::abs(std::abs(z.v[0]) - 1)});
    if (m < 1e-9) continue;
    CHECK(moved.contains(image) == unit.contains(z));
  }
}

TEST_CASE("cylinder variants") {
  const auto z = make_point(1, {0.5}, {0.25});
  const double r = 0.4, s = 0.5;
  const KineticCylinder plus(z, r, s, CylinderVariant::future);
  CHECK(plus.time_hi() == doctest::Approx(1 + 2 * std::pow(r, 2 * s)));
  const KineticCylinder cov(z, r, s, CylinderVariant::covering);
  CHECK(cov.base_radius() == doctest::Approx(2 * r));
  CHECK(cov.contains(z));
  CHECK(cov.time_lo() == doctest::Approx(z.t - 0.5 * std::pow(2 * r, 2 * s)));
  const KineticCylinder covp(z, r, s, CylinderVariant::covering_future);
  CHECK(covp.time_lo() == doctest::Approx(z.t + 1.5 * std::pow(2 * r, 2 * s)));
  CHECK_FALSE(cov.intersects(covp));
}

TEST_CASE("intersection is symmetric and consistent with membership") {
  const KineticCylinder a(origin(1), 0.5, 0.5);
  const KineticCylinder b(make_point(-0.1, {0.05}, {0.2}), 0.3, 0.5);
  CHECK(a.intersects(b));
  CHECK(b.intersects(a));
  const KineticCylinder far(make_point(5, {0}, {0}), 0.3, 0.5);
  CHECK_FALSE(a.intersects(far));
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(make_point(0, {0, 1}, {0}), ValidationError);
  CHECK_THROWS_AS(KineticCylinder(origin(1), -1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(KineticCylinder(origin(1), 1.0, 1.0), ValidationError);
}
