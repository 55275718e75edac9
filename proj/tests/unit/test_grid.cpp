#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "kdg/error.hpp"
#include "kdg/grid.hpp"

using namespace kdg;

TEST_CASE("cell-centred axes") {
  const Axis a = centered_axis(1.0, 5);
  CHECK(a.step() == doctest::Approx(0.4));
  CHECK(a.node(2) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(a.cell_of(0.05) == 2);
  CHECK(a.cell_of(-7.0) == 0);
  CHECK(a.node_index(0.4) == 3);
  CHECK(a.node_index(0.3) == 5);
}

TEST_CASE("lattice flattening is row-major") {
  const Lattice L({make_axis(0, 1, 2), make_axis(0, 1, 3)});
  CHECK(L.size() == 6);
  CHECK(L.flat({1, 2}) == 5);
  const auto m = L.multi(4);
  CHECK(m[0] == 1);
  CHECK(m[1] == 1);
  CHECK(L.cell_volume() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("grid field layout and slices") {
  const Axis t = make_axis(0, 1, 3);
  const auto f = sample_grid_field(t, {centered_axis(1, 4, true)}, {centered_axis(2, 5)},
                                   [](const KineticPoint& z) { return z.t + 10 * z.x[0] + 100 * z.v[0]; });
  const std::size_t i = f.index(2, 1, 3);
  const auto z = f.point(i);
  CHECK(f.values[i] == doctest::Approx(z.t + 10 * z.x[0] + 100 * z.v[0]));
  const PhaseField p = f.slice(2);
  CHECK(p.values[1 * 5 + 3] == f.values[i]);
  CHECK(interpolate(f, z) == doctest::Approx(f.values[i]));
}

TEST_CASE("nodes inside a cylinder") {
  const auto f = make_grid_field(make_axis(-1, 0, 4), {centered_axis(1, 9, true)}, {centered_axis(1, 9)});
  const KineticCylinder c(make_point(-0.125, {0}, {0}), 0.5, 0.5);
  const auto nodes = nodes_in(f, c);
  CHECK_FALSE(nodes.empty());
  for (std::size_t i : nodes) CHECK(c.contains(f.point(i)));
  CHECK(grid_measure(f, c) == doctest::Approx(nodes.size() * f.cell_volume()));
}

TEST_CASE("field files round trip exactly") {
  const auto dir = std::filesystem::temp_directory_path() / "kdg_grid_test";
  std::filesystem::create_directories(dir);
  const auto f = sample_grid_field(make_axis(0, 1, 2), {centered_axis(1, 3, true)}, {centered_axis(1, 4)},
                                   [](const KineticPoint& z) { return std::sin(z.t + z.x[0]) / (1 + z.v[0] * z.v[0]); },
                                   0.25);
  write_field(f, dir / "f.json");
  const GridField g = read_field(dir / "f.json");
  CHECK(g.values == f.values);
  CHECK(g.far_field_v == 0.25);
  CHECK(g.phase == f.phase);
}

TEST_CASE("invalid axes") {
  CHECK_THROWS_AS(make_axis(1, 0, 4), ValidationError);
  CHECK_THROWS_AS(make_axis(0, 1, 0), ValidationError);
}
