#include <doctest.h>

#include <cmath>
#include <random>

#include "kdg/constants.hpp"
#include "kdg/error.hpp"
#include "kdg/harnack.hpp"

using namespace kdg;

namespace {

GridField field(std::size_t nt, std::size_t nx, std::size_t nv, double t_lo,
                const std::function<double(const KineticPoint&)>& fn, double v_half = 2.0) {
  return sample_grid_field(make_axis(t_lo, 0, nt), {centered_axis(1, nx, true)}, {centered_axis(v_half, nv)}, fn);
}

GridField constant(double c) {
  return field(40, 33, 33, -1, [c](const KineticPoint&) { return c; });
}

}  // namespace

TEST_CASE("covering sequence") {
  const double r0 = 0.3, s = 0.5;
  const auto seq = covering_sequence(1, r0, s, 6);
  REQUIRE(seq.size() == 6);
  const KineticCylinder past(origin(1), r0, s, CylinderVariant::past);
  CHECK(seq[0].radius() == doctest::Approx(r0).epsilon(1e-15));
  CHECK(seq[0].anchor().t == doctest::Approx(past.anchor().t).epsilon(1e-15));
  CHECK(covering_limit(1, r0, s).center().t == doctest::Approx(-0.675).epsilon(1e-14));
  CHECK(covering_limit_quarter(1, r0, s).radius() == doctest::Approx(0.075));
  const auto nest = check_nesting(seq, r0);
  CHECK(nest.first_is_past);
  CHECK(nest.strictly_nested);
  CHECK(nest.limit_inside);
  CHECK(nest.inside_past);
  CHECK_THROWS_AS(covering_sequence(1, 0.4, s, 3), ValidationError);
}

TEST_CASE("vitali thresholds") {
  CHECK(m_threshold(0.5) == doctest::Approx(5.0));
  CHECK(n_cov_admissible(1, 0.5, 32));
}

TEST_CASE("vitali single point") {
  CoveringParams p;
  p.m = 5.0;
  p.delta0 = std::exp(delta0_max_log(1, 0.5, 5.0));
  p.alpha_next = covering_alpha(0.3, 2);
  const double r_max = p.alpha_next / (5.0 * p.m) * (1.0 - 1e-9);
  p.cell_volume = p.delta0 * KineticCylinder(origin(1), 5.0 * p.m * r_max, p.s, CylinderVariant::covering).volume();
  const std::vector<KineticPoint> A{make_point(-0.5, {0.0}, {0.1})};
  const auto fam = vitali_cover(A, p);
  CHECK(fam.members.size() == 1);
  CHECK(audit_cover(A, fam).ok());

  p.delta0 = 0.5;
  CHECK_THROWS_AS(vitali_cover(A, p), ValidationError);
  p.enforce_delta0_bound = false;
  CHECK_NOTHROW(vitali_cover(A, p));
}

TEST_CASE("vitali exhaustive audit") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CoveringParams p;
  p.delta0 = std::exp(delta0_max_log(1, 0.5, 5.0));
  p.alpha_next = covering_alpha(0.3, 2);
  const double r_max = p.alpha_next / (5.0 * p.m) * (1.0 - 1e-9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<KineticPoint> A;
    for (std::size_t i = 0; i < n; ++i)
      A.push_back(make_point(-0.5 + 0.1 * u(rng), {0.1 * u(rng)}, {0.1 * u(rng)}));
    p.cell_volume = p.delta0 * KineticCylinder(origin(1), r_max, p.s, CylinderVariant::covering).volume() *
                    (1.0 + 100.0 * std::abs(u(rng)));
    const auto fam = vitali_cover(A, p);
    const auto audit = audit_cover(A, fam);
    CHECK(audit.disjoint);
    CHECK(audit.covers);
    CHECK(audit.radii_ok);
    CHECK(audit.density_ok);
    CHECK(audit.bookkeeping);
  }
}

TEST_CASE("weak quotient of constants") {
  const double zl = std::log(0.5);
  const auto a = weak_harnack_quotient(constant(0.3), nullptr, 0.5, 0.3, zl);
  const auto b = weak_harnack_quotient(constant(0.9), nullptr, 0.5, 0.3, zl);
  const auto f = constant(1.0);
  const double vol = grid_measure(f, covering_limit(1, 0.3, 0.5));
  CHECK(a.quotient == doctest::Approx(std::pow(vol, 2.0)).epsilon(1e-12));
  CHECK(b.quotient == doctest::Approx(a.quotient).epsilon(1e-12));
  CHECK_FALSE(a.violation);

  const auto z = weak_harnack_quotient(constant(0.0), nullptr, 0.5, 0.3, zl);
  CHECK(z.quotient == 0.0);
  CHECK_FALSE(z.violation);
}

TEST_CASE("weak quotient homogeneity") {
  auto f = field(40, 33, 33, -1, [](const KineticPoint& z) { return 0.2 + 0.1 * std::cos(z.v[0] + z.x[0] + z.t); });
  const double zl = std::log(0.3);
  const auto q1 = weak_harnack_quotient(f, nullptr, 0.5, 0.3, zl);
  auto g = f;
  for (double& y : g.values) y *= 2.0;
  CHECK(weak_harnack_quotient(g, nullptr, 0.5, 0.3, zl).quotient == q1.quotient);
  for (double& y : g.values) y *= 1.5;
  CHECK(weak_harnack_quotient(g, nullptr, 0.5, 0.3, zl).quotient == doctest::Approx(q1.quotient).epsilon(1e-12));
}

TEST_CASE("zero infimum is a violation") {
  auto f = field(40, 33, 33, -1, [](const KineticPoint& z) { return z.t > -0.05 ? 0.0 : 0.5; });
  const auto q = weak_harnack_quotient(f, nullptr, 0.5, 0.3, std::log(0.5));
  CHECK(q.violation);
  CHECK(std::isinf(q.quotient));
  CHECK_FALSE(q.witnesses.empty());
}

TEST_CASE("strong harnack on constants") {
  const double zl = std::log(0.5);
  const auto c = strong_harnack_check(constant(0.4), nullptr, 0.5, 0.3, zl, 2.2);
  CHECK(c.sup_val == 0.4);
  CHECK(c.inf_val == 0.4);
  CHECK(c.satisfied);
  const auto z = strong_harnack_check(constant(0.0), nullptr, 0.5, 0.3, zl, 2.2);
  CHECK(z.satisfied);
  CHECK(z.bound == 0.0);
}

TEST_CASE("log integrability") {
  const auto z = log_integrability(constant(0.0), 0.5, 0.3, 2.0);
  CHECK(z.lhs_measure_fraction == 0.0);
  CHECK(z.log_integral == 0.0);
  CHECK(z.premise);
  CHECK(z.delta_M == doctest::Approx(std::pow(1.0 / std::log(3.0), 1.0 / 65.0)));

  const auto c = constant(0.5);
  CHECK(log_integrability(c, 0.5, 0.3, 0.25).lhs_measure_fraction == 1.0);
  CHECK(log_integrability(c, 0.5, 0.3, 0.5).lhs_measure_fraction == 0.0);
}

TEST_CASE("measure to pointwise predicate") {
  const auto z0 = make_point(-0.5, {0.0}, {0.0});
  const auto hi = mtp_predicate(constant(2.0), 0.5, z0, 0.3, 1.0, 0.1);
  CHECK(hi.premise);
  CHECK(hi.conclusion);
  CHECK(hi.holds);
  const auto lo = mtp_predicate(constant(0.5), 0.5, z0, 0.3, 1.0, 0.1);
  CHECK_FALSE(lo.premise);
  CHECK(lo.holds);
  const auto bad = mtp_predicate(constant(0.5), 0.5, z0, 0.3, 0.25, 0.1);
  CHECK_FALSE(bad.holds);
  CHECK_FALSE(bad.witness.empty());
}

TEST_CASE("hoelder exponent of model profiles") {
  const auto lin = field(9, 9, 2049, -1.0, [](const KineticPoint& z) { return z.v[0]; });
  const auto z0 = make_point(lin.time.node(lin.nt() - 1), {0.0}, {0.0});
  const auto a = hoelder_exponent(lin, 0.5, z0, 0.5, 4, -10.0L);
  CHECK(a.fitted_alpha == doctest::Approx(1.0).epsilon(0.02));
  CHECK(a.nonincreasing);

  const auto sq = field(9, 9, 2049, -1.0, [](const KineticPoint& z) { return std::sqrt(std::abs(z.v[0])); });
  const auto b = hoelder_exponent(sq, 0.5, z0, 0.5, 4, -10.0L);
  CHECK(b.fitted_alpha == doctest::Approx(0.5).epsilon(0.1));

  CHECK_THROWS_AS(hoelder_exponent(constant(0.3), 0.5, z0, 0.5, 4, -10.0L), NumericalError);
  const auto forced = hoelder_exponent(lin, 0.5, z0, 0.5, 4, -10.0L, 1e-3);
  for (double y : forced.normalized) CHECK(y == 0.0);
}
