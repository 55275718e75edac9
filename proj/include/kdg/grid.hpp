#pragma once

// Uniform cell-centred grids and the sampled fields living on them.
//
// Every axis is split into n cells of width h = (hi - lo) / n and the node of
// cell i sits at lo + (i + 1/2) h. Level-set measures are cell counts times the
// cell volume.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kdg/geometry.hpp"

namespace kdg {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 1;
  bool periodic = false;

  double step() const { return (hi - lo) / static_cast<double>(n); }
  double length() const { return hi - lo; }
  double node(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * step(); }
  /// Index of the cell containing c (clamped to the axis).
  std::size_t cell_of(double c) const;
  /// Index of the node within tol * h of c, or n if there is none.
  std::size_t node_index(double c, double tol = 1e-9) const;
};

Axis make_axis(double lo, double hi, std::size_t n, bool periodic = false);
/// Axis on [-half, half] with n cells.
Axis centered_axis(double half, std::size_t n, bool periodic = false);

/// Tensor product of axes with row-major (last axis fastest) flattening.
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(std::vector<Axis> axes);

  std::size_t rank() const { return axes_.size(); }
  std::size_t size() const { return size_; }
  const Axis& axis(std::size_t k) const { return axes_[k]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t extent(std::size_t k) const { return axes_[k].n; }
  std::size_t stride(std::size_t k) const { return strides_[k]; }
  double cell_volume() const;

  std::size_t flat(const std::vector<std::size_t>& idx) const;
  std::vector<std::size_t> multi(std::size_t flat) const;
  double coordinate(std::size_t flat, std::size_t k) const;
  Vec point(std::size_t flat) const;

  bool operator==(const Lattice& other) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Scalar function of velocity only, with the constant it takes outside the box.
struct VelocityField {
  Lattice grid;
  std::vector<double> values;
  double far_field = 0.0;

  std::size_t dim() const { return grid.rank(); }
  std::size_t size() const { return values.size(); }
  Vec point(std::size_t i) const { return grid.point(i); }
};

/// Samples fn at the nodes, or its cell average over supersample^d sub-nodes.
VelocityField sample_velocity_field(const Lattice& grid, const std::function<double(const Vec&)>& fn,
                                    std::size_t supersample = 1, double far_field = 0.0);

/// Multilinear interpolation; far_field outside the outermost cells.
double interpolate(const VelocityField& f, std::span<const double> v);

/// Function of (x, v) on a lattice whose first d axes are x and last d are v.
struct PhaseField {
  std::size_t d = 1;
  Lattice grid;
  std::vector<double> values;

  std::size_t x_size() const;
  std::size_t v_size() const;
  Lattice x_lattice() const;
  Lattice v_lattice() const;
};

PhaseField make_phase_field(const std::vector<Axis>& x_axes, const std::vector<Axis>& v_axes);
PhaseField sample_phase_field(const std::vector<Axis>& x_axes, const std::vector<Axis>& v_axes,
                              const std::function<double(const Vec&, const Vec&)>& fn);

/// f(t, x, v) on a uniform kinetic grid. Values are stored time-major, then x,
/// then v, so that each velocity slice is contiguous.
struct GridField {
  Axis time;
  std::size_t d = 1;
  Lattice phase;
  std::vector<double> values;
  double far_field_v = 0.0;
  bool nonnegative = false;

  std::size_t nt() const { return time.n; }
  std::size_t x_size() const;
  std::size_t v_size() const;
  std::size_t slab_size() const { return phase.size(); }
  Lattice x_lattice() const;
  Lattice v_lattice() const;
  double cell_volume() const { return time.step() * phase.cell_volume(); }

  std::size_t index(std::size_t it, std::size_t ix, std::size_t iv) const {
    return (it * x_size() + ix) * v_size() + iv;
  }
  KineticPoint point(std::size_t flat) const;

  PhaseField slice(std::size_t it) const;
  void set_slice(std::size_t it, const PhaseField& slab);
  VelocityField velocity_slice(std::size_t it, std::size_t ix) const;

  void validate() const;
};

GridField make_grid_field(const Axis& time, const std::vector<Axis>& x_axes,
                          const std::vector<Axis>& v_axes, double far_field_v = 0.0);
GridField sample_grid_field(const Axis& time, const std::vector<Axis>& x_axes,
                            const std::vector<Axis>& v_axes,
                            const std::function<double(const KineticPoint&)>& fn,
                            double far_field_v = 0.0);
/// Stacks equally shaped phase slabs along a time axis.
GridField stack_slices(const Axis& time, const std::vector<PhaseField>& slabs, double far_field_v = 0.0);

/// Multilinear interpolation in (t, x, v), clamped to the node range in t and x
/// and equal to far_field_v outside the velocity box.
double interpolate(const GridField& f, const KineticPoint& z);

/// Nearest grid node to z; throws if z is further than tol cells from a node.
std::size_t locate_node(const GridField& f, const KineticPoint& z, double tol = 1e-6);

/// Flat indices of nodes inside the cylinder.
std::vector<std::size_t> nodes_in(const GridField& f, const KineticCylinder& c);
/// Grid (cell count) measure of the cylinder.
double grid_measure(const GridField& f, const KineticCylinder& c);

// Serialization.
void write_csv(const GridField& f, const std::filesystem::path& path);
void write_csv(const PhaseField& f, const std::filesystem::path& path);
/// JSON header with grid metadata plus a raw binary column of doubles
/// (little-endian IEEE 754). The binary file sits next to the header.
void write_field(const GridField& f, const std::filesystem::path& header_path);
GridField read_field(const std::filesystem::path& header_path);

}  // namespace kdg
