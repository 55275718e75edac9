#include "kdg/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "kdg/error.hpp"

namespace kdg {

std::size_t Axis::cell_of(double c) const {
  const double u = (c - lo) / step();
  if (!(u > 0.0)) return 0;
  const auto i = static_cast<std::size_t>(std::floor(u));
  return std::min(i, n - 1);
}

std::size_t Axis::node_index(double c, double tol) const {
  const double u = (c - lo) / step() - 0.5;
  const double r = std::round(u);
  if (r < 0.0 || r > static_cast<double>(n - 1) || std::abs(u - r) > tol) return n;
  return static_cast<std::size_t>(r);
}

Axis make_axis(double lo, double hi, std::size_t n, bool periodic) {
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "axis bounds must satisfy lo < hi");
  require(n >= 1, "axis needs at least one cell");
  return Axis{lo, hi, n, periodic};
}

Axis centered_axis(double half, std::size_t n, bool periodic) {
  return make_axis(-half, half, n, periodic);
}

Lattice::Lattice(std::vector<Axis> axes) : axes_(std::move(axes)) {
  strides_.assign(axes_.size(), 1);
  size_ = 1;
  for (std::size_t k = axes_.size(); k-- > 0;) {
    require(axes_[k].n >= 1 && axes_[k].hi > axes_[k].lo, "invalid axis in lattice");
    strides_[k] = size_;
    size_ *= axes_[k].n;
  }
}

double Lattice::cell_volume() const {
  double vol = 1.0;
  for (const Axis& a : axes_) vol *= a.step();
  return vol;
}

std::size_t Lattice::flat(const std::vector<std::size_t>& idx) const {
  std::size_t out = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) out += idx[k] * strides_[k];
  return out;
}

std::vector<std::size_t> Lattice::multi(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    idx[k] = flat / strides_[k];
    flat %= strides_[k];
  }
  return idx;
}

double Lattice::coordinate(std::size_t flat, std::size_t k) const {
  return axes_[k].node((flat / strides_[k]) % axes_[k].n);
}

Vec Lattice::point(std::size_t flat) const {
  Vec p(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) p[k] = coordinate(flat, k);
  return p;
}

bool Lattice::operator==(const Lattice& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const Axis& a = axes_[k];
    const Axis& b = other.axes_[k];
    if (a.lo != b.lo || a.hi != b.hi || a.n != b.n || a.periodic != b.periodic) return false;
  }
  return true;
}

VelocityField sample_velocity_field(const Lattice& grid, const std::function<double(const Vec&)>& fn,
                                    std::size_t supersample, double far_field) {
  require(supersample >= 1, "supersample must be at least 1");
  VelocityField out{grid, std::vector<double>(grid.size()), far_field};
  const std::size_t d = grid.rank();
  std::size_t sub_count = 1;
  for (std::size_t k = 0; k < d; ++k) sub_count *= supersample;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec centre = grid.point(i);
    if (supersample == 1) {
      out.values[i] = fn(centre);
      continue;
    }
    double acc = 0.0;
    Vec p(d);
    for (std::size_t j = 0; j < sub_count; ++j) {
      std::size_t rem = j;
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t q = rem % supersample;
        rem /= supersample;
        const double h = grid.axis(k).step();
        p[k] = centre[k] - 0.5 * h + (static_cast<double>(q) + 0.5) * h / static_cast<double>(supersample);
      }
      acc += fn(p);
    }
    out.values[i] = acc / static_cast<double>(sub_count);
  }
  return out;
}

namespace {

// Multilinear weights along one axis for coordinate c. Returns false when c
// lies outside the node range and clamp is off.
struct Bracket {
  std::size_t i0;
  std::size_t i1;
  double w1;
};

bool bracket(const Axis& a, double c, bool clamp, Bracket& out) {
  const double u = (c - a.lo) / a.step() - 0.5;
  const double last = static_cast<double>(a.n - 1);
  if (a.n == 1) {
    if (!clamp && std::abs(u) > 0.5 + 1e-12) return false;
    out = {0, 0, 0.0};
    return true;
  }
  if (u < 0.0 || u > last) {
    if (!clamp) {
      // Half a cell beyond the outermost node still belongs to the box.
      if (u < -0.5 - 1e-12 || u > last + 0.5 + 1e-12) return false;
    }
    const double uc = std::clamp(u, 0.0, last);
    const auto i = static_cast<std::size_t>(uc);
    out = {i, i, 0.0};
    return true;
  }
  auto i0 = static_cast<std::size_t>(std::floor(u));
  if (i0 >= a.n - 1) i0 = a.n - 2;
  out = {i0, i0 + 1, u - static_cast<double>(i0)};
  return true;
}

double multilinear(const Lattice& grid, const double* values, const std::vector<Bracket>& br) {
  const std::size_t r = br.size();
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << r); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t k = 0; k < r; ++k) {
      const bool up = (corner >> k) & 1U;
      w *= up ? br[k].w1 : 1.0 - br[k].w1;
      flat += (up ? br[k].i1 : br[k].i0) * grid.stride(k);
    }
    if (w != 0.0) acc += w * values[flat];
  }
  return acc;
}

}  // namespace

double interpolate(const VelocityField& f, std::span<const double> v) {
  require(v.size() == f.dim(), "velocity dimension mismatch");
  std::vector<Bracket> br(f.dim());
  for (std::size_t k = 0; k < f.dim(); ++k) {
    if (!bracket(f.grid.axis(k), v[k], false, br[k])) return f.far_field;
  }
  return multilinear(f.grid, f.values.data(), br);
}

std::size_t PhaseField::x_size() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < d; ++k) n *= grid.extent(k);
  return n;
}

std::size_t PhaseField::v_size() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < d; ++k) n *= grid.extent(d + k);
  return n;
}

Lattice PhaseField::x_lattice() const {
  return Lattice(std::vector<Axis>(grid.axes().begin(), grid.axes().begin() + static_cast<long>(d)));
}

Lattice PhaseField::v_lattice() const {
  return Lattice(std::vector<Axis>(grid.axes().begin() + static_cast<long>(d), grid.axes().end()));
}

PhaseField make_phase_field(const std::vector<Axis>& x_axes, const std::vector<Axis>& v_axes) {
  require(!x_axes.empty() && x_axes.size() == v_axes.size(), "x and v axes must have equal dimension");
  std::vector<Axis> all(x_axes);
  all.insert(all.end(), v_axes.begin(), v_axes.end());
  PhaseField out;
  out.d = x_axes.size();
  out.grid = Lattice(all);
  out.values.assign(out.grid.size(), 0.0);
  return out;
}

PhaseField sample_phase_field(const std::vector<Axis>& x_axes, const std::vector<Axis>& v_axes,
                              const std::function<double(const Vec&, const Vec&)>& fn) {
  PhaseField out = make_phase_field(x_axes, v_axes);
  const std::size_t d = out.d;
  Vec x(d);
  Vec v(d);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = out.grid.coordinate(i, k);
      v[k] = out.grid.coordinate(i, d + k);
    }
    out.values[i] = fn(x, v);
  }
  return out;
}

std::size_t GridField::x_size() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < d; ++k) n *= phase.extent(k);
  return n;
}

std::size_t GridField::v_size() const {
  std::size_t n = 1;
  for (std::size_t k = 0; k < d; ++k) n *= phase.extent(d + k);
  return n;
}

Lattice GridField::x_lattice() const {
  return Lattice(std::vector<Axis>(phase.axes().begin(), phase.axes().begin() + static_cast<long>(d)));
}

Lattice GridField::v_lattice() const {
  return Lattice(std::vector<Axis>(phase.axes().begin() + static_cast<long>(d), phase.axes().end()));
}

KineticPoint GridField::point(std::size_t flat) const {
  const std::size_t it = flat / slab_size();
  const std::size_t rest = flat % slab_size();
  KineticPoint z{time.node(it), Vec(d), Vec(d)};
  for (std::size_t k = 0; k < d; ++k) {
    z.x[k] = phase.coordinate(rest, k);
    z.v[k] = phase.coordinate(rest, d + k);
  }
  return z;
}

PhaseField GridField::slice(std::size_t it) const {
  require(it < nt(), "time index out of range");
  PhaseField out;
  out.d = d;
  out.grid = phase;
  const auto begin = values.begin() + static_cast<long>(it * slab_size());
  out.values.assign(begin, begin + static_cast<long>(slab_size()));
  return out;
}

void GridField::set_slice(std::size_t it, const PhaseField& slab) {
  require(it < nt(), "time index out of range");
  require(slab.grid == phase, "slab grid does not match the field");
  std::copy(slab.values.begin(), slab.values.end(), values.begin() + static_cast<long>(it * slab_size()));
}

VelocityField GridField::velocity_slice(std::size_t it, std::size_t ix) const {
  VelocityField out{v_lattice(), {}, far_field_v};
  const auto begin = values.begin() + static_cast<long>(index(it, ix, 0));
  out.values.assign(begin, begin + static_cast<long>(v_size()));
  return out;
}

void GridField::validate() const {
  require(d >= 1 && phase.rank() == 2 * d, "phase lattice must have 2d axes");
  require(time.n >= 1 && time.hi > time.lo, "invalid time axis");
  require(values.size() == nt() * slab_size(), "value count does not match the grid");
  require(std::isfinite(far_field_v), "far field must be finite");
  for (double c : values) require(std::isfinite(c), "grid values must be finite");
  if (nonnegative) {
    for (double c : values) require(c >= 0.0, "field flagged nonnegative has a negative value");
  }
}

GridField make_grid_field(const Axis& time, const std::vector<Axis>& x_axes,
                          const std::vector<Axis>& v_axes, double far_field_v) {
  require(!x_axes.empty() && x_axes.size() == v_axes.size(), "x and v axes must have equal dimension");
  std::vector<Axis> all(x_axes);
  all.insert(all.end(), v_axes.begin(), v_axes.end());
  GridField f;
  f.time = time;
  f.d = x_axes.size();
  f.phase = Lattice(all);
  f.values.assign(time.n * f.phase.size(), 0.0);
  f.far_field_v = far_field_v;
  return f;
}

GridField sample_grid_field(const Axis& time, const std::vector<Axis>& x_axes,
                            const std::vector<Axis>& v_axes,
                            const std::function<double(const KineticPoint&)>& fn, double far_field_v) {
  GridField f = make_grid_field(time, x_axes, v_axes, far_field_v);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = fn(f.point(i));
  return f;
}

GridField stack_slices(const Axis& time, const std::vector<PhaseField>& slabs, double far_field_v) {
  require(!slabs.empty() && slabs.size() == time.n, "need one slab per time cell");
  GridField f;
  f.time = time;
  f.d = slabs.front().d;
  f.phase = slabs.front().grid;
  f.far_field_v = far_field_v;
  f.values.resize(time.n * f.phase.size());
  for (std::size_t it = 0; it < time.n; ++it) f.set_slice(it, slabs[it]);
  return f;
}

double interpolate(const GridField& f, const KineticPoint& z) {
  require(z.dim() == f.d, "point dimension does not match the field");
  std::vector<Bracket> br(2 * f.d + 1);
  bracket(f.time, z.t, true, br[0]);
  for (std::size_t k = 0; k < f.d; ++k) {
    bracket(f.phase.axis(k), z.x[k], true, br[1 + k]);
    if (!bracket(f.phase.axis(f.d + k), z.v[k], false, br[1 + f.d + k])) return f.far_field_v;
  }
  // Flatten against a lattice with the time axis prepended.
  std::vector<Axis> axes{f.time};
  axes.insert(axes.end(), f.phase.axes().begin(), f.phase.axes().end());
  const Lattice full(axes);
  return multilinear(full, f.values.data(), br);
}

std::size_t locate_node(const GridField& f, const KineticPoint& z, double tol) {
  require(z.dim() == f.d, "point dimension does not match the field");
  const std::size_t it = f.time.node_index(z.t, tol);
  require(it < f.time.n, "point time is not a grid node");
  std::vector<std::size_t> idx(2 * f.d);
  for (std::size_t k = 0; k < f.d; ++k) {
    idx[k] = f.phase.axis(k).node_index(z.x[k], tol);
    idx[f.d + k] = f.phase.axis(f.d + k).node_index(z.v[k], tol);
    require(idx[k] < f.phase.extent(k) && idx[f.d + k] < f.phase.extent(f.d + k),
            "point is not a grid node");
  }
  return it * f.slab_size() + f.phase.flat(idx);
}

std::vector<std::size_t> nodes_in(const GridField& f, const KineticCylinder& c) {
  require(c.dim() == f.d, "cylinder dimension does not match the field");
  std::vector<std::size_t> out;
  const std::size_t slab = f.slab_size();
  for (std::size_t it = 0; it < f.nt(); ++it) {
    const double t = f.time.node(it);
    if (t > c.time_hi() || t < c.time_lo()) continue;
    for (std::size_t j = 0; j < slab; ++j) {
      const std::size_t flat = it * slab + j;
      if (c.contains(f.point(flat))) out.push_back(flat);
    }
  }
  return out;
}

double grid_measure(const GridField& f, const KineticCylinder& c) {
  return static_cast<double>(nodes_in(f, c).size()) * f.cell_volume();
}

namespace {

void write_rows(std::FILE* out, std::size_t d, const std::function<bool(std::size_t, KineticPoint&, double&)>& row) {
  std::fputs("t", out);
  for (std::size_t k = 0; k < d; ++k) std::fprintf(out, ",x%zu", k + 1);
  for (std::size_t k = 0; k < d; ++k) std::fprintf(out, ",v%zu", k + 1);
  std::fputs(",value\n", out);
  KineticPoint z;
  double value = 0.0;
  for (std::size_t i = 0; row(i, z, value); ++i) {
    std::fprintf(out, "%.17g", z.t);
    for (double c : z.x) std::fprintf(out, ",%.17g", c);
    for (double c : z.v) std::fprintf(out, ",%.17g", c);
    std::fprintf(out, ",%.17g\n", value);
  }
}

std::FILE* open_or_throw(const std::filesystem::path& path, const char* mode) {
  std::FILE* f = std::fopen(path.c_str(), mode);
  if (f == nullptr) throw ValidationError("cannot open " + path.string());
  return f;
}

nlohmann::json axis_json(const Axis& a) {
  return {{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}, {"periodic", a.periodic}};
}

Axis axis_from_json(const nlohmann::json& j) {
  return make_axis(j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("n").get<std::size_t>(),
                   j.at("periodic").get<bool>());
}

}  // namespace

void write_csv(const GridField& f, const std::filesystem::path& path) {
  std::FILE* out = open_or_throw(path, "w");
  write_rows(out, f.d, [&](std::size_t i, KineticPoint& z, double& value) {
    if (i >= f.values.size()) return false;
    z = f.point(i);
    value = f.values[i];
    return true;
  });
  std::fclose(out);
}

void write_csv(const PhaseField& f, const std::filesystem::path& path) {
  std::FILE* out = open_or_throw(path, "w");
  write_rows(out, f.d, [&](std::size_t i, KineticPoint& z, double& value) {
    if (i >= f.values.size()) return false;
    z = KineticPoint{0.0, Vec(f.d), Vec(f.d)};
    for (std::size_t k = 0; k < f.d; ++k) {
      z.x[k] = f.grid.coordinate(i, k);
      z.v[k] = f.grid.coordinate(i, f.d + k);
    }
    value = f.values[i];
    return true;
  });
  std::fclose(out);
}

void write_field(const GridField& f, const std::filesystem::path& header_path) {
  static_assert(std::endian::native == std::endian::little, "binary columns assume little-endian");
  f.validate();
  std::filesystem::path data_path = header_path;
  data_path.replace_extension(".bin");
  nlohmann::json header;
  header["format"] = "kdg-grid-field";
  header["version"] = 1;
  header["d"] = f.d;
  header["time"] = axis_json(f.time);
  header["x"] = nlohmann::json::array();
  header["v"] = nlohmann::json::array();
  for (std::size_t k = 0; k < f.d; ++k) {
    header["x"].push_back(axis_json(f.phase.axis(k)));
    header["v"].push_back(axis_json(f.phase.axis(f.d + k)));
  }
  header["far_field_v"] = f.far_field_v;
  header["nonnegative"] = f.nonnegative;
  header["count"] = f.values.size();
  header["data_file"] = data_path.filename().string();
  std::ofstream h(header_path);
  if (!h) throw ValidationError("cannot open " + header_path.string());
  h << header.dump(2) << '\n';
  std::ofstream b(data_path, std::ios::binary);
  if (!b) throw ValidationError("cannot open " + data_path.string());
  b.write(reinterpret_cast<const char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

GridField read_field(const std::filesystem::path& header_path) {
  std::ifstream h(header_path);
  if (!h) throw ValidationError("cannot open " + header_path.string());
  nlohmann::json header = nlohmann::json::parse(h);
  if (header.value("format", "") != "kdg-grid-field") throw ValidationError("not a grid field header");
  const auto d = header.at("d").get<std::size_t>();
  std::vector<Axis> xs;
  std::vector<Axis> vs;
  for (std::size_t k = 0; k < d; ++k) {
    xs.push_back(axis_from_json(header.at("x").at(k)));
    vs.push_back(axis_from_json(header.at("v").at(k)));
  }
  GridField f = make_grid_field(axis_from_json(header.at("time")), xs, vs,
                                header.at("far_field_v").get<double>());
  f.nonnegative = header.at("nonnegative").get<bool>();
  const auto count = header.at("count").get<std::size_t>();
  require(count == f.values.size(), "header count does not match the grid");
  const auto data_path = header_path.parent_path() / header.at("data_file").get<std::string>();
  std::ifstream b(data_path, std::ios::binary);
  if (!b) throw ValidationError("cannot open " + data_path.string());
  b.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  require(b.gcount() == static_cast<std::streamsize>(count * sizeof(double)), "binary column is truncated");
  return f;
}

}  // namespace kdg
