#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kdg/constants.hpp"
#include "kdg/degiorgi.hpp"
#include "kdg/error.hpp"
#include "kdg/geometry.hpp"
#include "kdg/harnack.hpp"
#include "kdg/kernels.hpp"
#include "kdg/kolmogorov.hpp"
#include "kdg/report.hpp"

namespace py = pybind11;
using namespace kdg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

KineticPoint point_of(double t, const Vec& x, const Vec& v) { return make_point(t, x, v); }

std::vector<Axis> axes(double half, std::size_t n, std::size_t d, bool periodic) {
  return std::vector<Axis>(d, centered_axis(half, n, periodic));
}

// Field on [t_lo, t_hi] × [-x_half, x_half]^d (periodic) × [-v_half, v_half]^d,
// values shaped (nt, nx^d, nv^d) in any layout numpy can flatten in C order.
GridField grid_field(const Array& values, double t_lo, double t_hi, double x_half, double v_half, std::size_t d,
                     std::size_t nx, std::size_t nv) {
  const std::size_t nt = values.size() / (static_cast<std::size_t>(std::pow(nx, d)) * std::pow(nv, d));
  GridField f = make_grid_field(make_axis(t_lo, t_hi, nt), axes(x_half, nx, d, true), axes(v_half, nv, d, false));
  if (static_cast<std::size_t>(values.size()) != f.values.size())
    throw ValidationError("values do not match the grid shape");
  std::copy(values.data(), values.data() + values.size(), f.values.begin());
  bool nonneg = true;
  for (double y : f.values) nonneg = nonneg && y >= 0.0;
  f.nonnegative = nonneg;
  return f;
}

py::dict constants_dict(const TheoryConstants& c) {
  py::dict out;
  out["n"] = c.n;
  out["p_crit"] = c.p_crit;
  out["p_star"] = c.p_star;
  out["sigma_max"] = c.sigma_max;
  out["beta1"] = c.dg.beta1;
  out["beta2"] = c.dg.beta2;
  out["log2_Q"] = c.dg.log2_Q;
  out["eps_log"] = c.ivl.eps_log;
  out["mu_log"] = c.ivl.mu_log;
  out["nu_log"] = c.ivl.nu_log;
  out["theta_log"] = static_cast<double>(c.mtp.theta_log);
  out["zeta_log"] = c.zeta_log;
  out["m_threshold"] = c.m_threshold;
  out["delta0_max_log"] = c.delta0_max_log;
  out["M_log"] = static_cast<double>(c.M_log);
  out["alpha_log"] = c.alpha_log;
  out["alpha"] = c.alpha;
  return out;
}

}  // namespace

PYBIND11_MODULE(_kdg, m) {
  m.doc() = "Numerical checks for the De Giorgi/Harnack theory of kinetic integro-differential equations.";
  m.attr("__version__") = tool_version();

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<KineticPoint>(m, "KineticPoint")
      .def(py::init(&point_of), py::arg("t"), py::arg("x"), py::arg("v"))
      .def_readonly("t", &KineticPoint::t)
      .def_readonly("x", &KineticPoint::x)
      .def_readonly("v", &KineticPoint::v)
      .def("__repr__", [](const KineticPoint& z) {
        return "KineticPoint(t=" + std::to_string(z.t) + ", d=" + std::to_string(z.dim()) + ")";
      });
  m.def("galilean_compose", &galilean_compose, py::arg("z0"), py::arg("z"));

  py::enum_<CylinderVariant>(m, "CylinderVariant")
      .value("plain", CylinderVariant::plain)
      .value("past", CylinderVariant::past)
      .value("future", CylinderVariant::future)
      .value("covering", CylinderVariant::covering)
      .value("covering_future", CylinderVariant::covering_future);

  py::class_<KineticCylinder>(m, "KineticCylinder")
      .def(py::init<KineticPoint, double, double, CylinderVariant>(), py::arg("center"), py::arg("r"), py::arg("s"),
           py::arg("variant") = CylinderVariant::plain)
      .def_property_readonly("time_lo", &KineticCylinder::time_lo)
      .def_property_readonly("time_hi", &KineticCylinder::time_hi)
      .def_property_readonly("x_radius", &KineticCylinder::x_radius)
      .def_property_readonly("v_radius", &KineticCylinder::v_radius)
      .def("contains", &KineticCylinder::contains)
      .def("volume", &KineticCylinder::volume)
      .def("intersects", &KineticCylinder::intersects);
  m.def("cylinder_volume", &cylinder_volume, py::arg("d"), py::arg("s"), py::arg("r"));
  m.def("covering_alpha", &covering_alpha, py::arg("r0"), py::arg("k"));

  m.def(
      "fractional_kernel",
      [](std::size_t d, double s, const Vec& v, const Vec& w) {
        return kernel_eval(fractional_laplacian_kernel(d, s), v, w);
      },
      py::arg("d"), py::arg("s"), py::arg("v"), py::arg("w"), "|v - w|^{-(d+2s)}");

  m.def(
      "degiorgi_exponents",
      [](double p) {
        const DeGiorgiExponents e = degiorgi_exponents(p);
        return py::dict(py::arg("beta1") = e.beta1, py::arg("beta2") = e.beta2, py::arg("log2_Q") = e.log2_Q);
      },
      py::arg("p"));
  m.def("p_critical", &p_critical, py::arg("d"), py::arg("s"));
  m.def("p_star", &p_star, py::arg("d"), py::arg("s"));
  m.def("m_threshold", &m_threshold, py::arg("s"));
  m.def(
      "theory_constants",
      [](std::size_t d, double s, double p, double sigma, double r0, double delta1, double delta2, double delta,
         double delta0, double m) {
        ConstantsInput in;
        in.d = d;
        in.s = s;
        in.p = p;
        in.sigma = sigma;
        in.r0 = r0;
        in.delta1 = delta1;
        in.delta2 = delta2;
        in.delta = delta;
        in.delta0 = delta0;
        in.m = m;
        return constants_dict(theory_constants(in));
      },
      py::arg("d") = 1, py::arg("s") = 0.5, py::arg("p") = 2.5, py::arg("sigma") = 0.2, py::arg("r0") = 0.3,
      py::arg("delta1") = 0.5, py::arg("delta2") = 0.5, py::arg("delta") = 0.5, py::arg("delta0") = 0.01,
      py::arg("m") = 5.0);

  m.def(
      "symbol",
      [](double s, const Vec& phi, const Vec& xi, std::size_t n_tau) { return symbol_eval(s, phi, xi, n_tau); },
      py::arg("s"), py::arg("phi"), py::arg("xi"), py::arg("n_tau") = 16);
  m.def(
      "fundamental_solution",
      [](double s, double t, double x_half, double v_half, std::size_t n, std::size_t d) {
        const FundamentalSolution J = fundamental_solution(s, t, axes(x_half, n, d, true), axes(v_half, n, d, true));
        std::vector<py::ssize_t> shape(2 * d, static_cast<py::ssize_t>(n));
        Array values(shape);
        std::copy(J.J.values.begin(), J.J.values.end(), values.mutable_data());
        return py::dict(py::arg("J") = values, py::arg("mass") = J.mass, py::arg("min") = J.min,
                        py::arg("max") = J.max, py::arg("l2") = J.l2);
      },
      py::arg("s"), py::arg("t"), py::arg("x_half"), py::arg("v_half"), py::arg("n"), py::arg("d") = 1);
  m.def(
      "solve",
      [](const Array& f0, double x_half, double v_half, std::size_t d, double s, const Vec& times) {
        const std::size_t n = static_cast<std::size_t>(std::llround(std::pow(f0.size(), 0.5 / d)));
        PhaseField p = make_phase_field(axes(x_half, n, d, true), axes(v_half, n, d, false));
        if (static_cast<std::size_t>(f0.size()) != p.values.size())
          throw ValidationError("f0 must have n^d x n^d entries");
        std::copy(f0.data(), f0.data() + f0.size(), p.values.begin());
        SolverOptions opts;
        opts.s = s;
        const KolmogorovSolution sol = solve_kolmogorov(p, {}, times, opts);
        py::list out;
        for (const auto& slab : sol.slices) {
          Array a(static_cast<py::ssize_t>(slab.values.size()));
          std::copy(slab.values.begin(), slab.values.end(), a.mutable_data());
          out.append(a);
        }
        return out;
      },
      py::arg("f0"), py::arg("x_half"), py::arg("v_half"), py::arg("d"), py::arg("s"), py::arg("times"),
      "Free fractional Kolmogorov evolution of a square phase grid; returns flat slices.");

  m.def(
      "barrier",
      [](double s, double r0, double mu, const Vec& x, const Vec& v, int which) {
        return barrier_eval(make_barriers(x.size(), s, r0, mu), x, v, which);
      },
      py::arg("s"), py::arg("r0"), py::arg("mu"), py::arg("x"), py::arg("v"), py::arg("which"));
  m.def("level_function", py::overload_cast<double, double, int>(&level_function), py::arg("f"), py::arg("mu"),
        py::arg("k"));

  m.def(
      "weak_harnack_quotient",
      [](const Array& values, double t_lo, double t_hi, double x_half, double v_half, std::size_t d, std::size_t nx,
         std::size_t nv, double s, double r0, double zeta) {
        const GridField f = grid_field(values, t_lo, t_hi, x_half, v_half, d, nx, nv);
        const HarnackReport r = weak_harnack_quotient(f, nullptr, s, r0, std::log(zeta));
        return py::dict(py::arg("quotient") = r.quotient, py::arg("infimum") = r.infimum,
                        py::arg("integral") = r.integral, py::arg("violation") = r.violation);
      },
      py::arg("values"), py::arg("t_lo"), py::arg("t_hi"), py::arg("x_half"), py::arg("v_half"), py::arg("d"),
      py::arg("nx"), py::arg("nv"), py::arg("s"), py::arg("r0"), py::arg("zeta"));
  m.def(
      "hoelder_exponent",
      [](const Array& values, double t_lo, double t_hi, double x_half, double v_half, std::size_t d, std::size_t nx,
         std::size_t nv, double s, double r0, int n_max) {
        const GridField f = grid_field(values, t_lo, t_hi, x_half, v_half, d, nx, nv);
        const KineticPoint z0 = make_point(f.time.node(f.time.n - 1), Vec(d, 0.0), Vec(d, 0.0));
        const HoelderReport r = hoelder_exponent(f, s, z0, r0, n_max, std::log(0.2L));
        return py::dict(py::arg("fitted_alpha") = r.fitted_alpha, py::arg("radii") = r.radii, py::arg("osc") = r.osc,
                        py::arg("nonincreasing") = r.nonincreasing);
      },
      py::arg("values"), py::arg("t_lo"), py::arg("t_hi"), py::arg("x_half"), py::arg("v_half"), py::arg("d"),
      py::arg("nx"), py::arg("nv"), py::arg("s"), py::arg("r0"), py::arg("n_max"));

  m.def(
      "vitali_cover",
      [](const std::vector<std::tuple<double, Vec, Vec>>& pts, std::size_t d, double s, double m, double delta0,
         double alpha_next, double cell_volume) {
        std::vector<KineticPoint> A;
        for (const auto& [t, x, v] : pts) A.push_back(make_point(t, x, v));
        CoveringParams cp;
        cp.d = d;
        cp.s = s;
        cp.m = m;
        cp.delta0 = delta0;
        cp.alpha_next = alpha_next;
        cp.cell_volume = cell_volume;
        cp.enforce_delta0_bound = false;
        const CoveringFamily fam = vitali_cover(A, cp);
        const CoveringAudit au = audit_cover(A, fam);
        py::list members;
        for (const auto& mb : fam.members) members.append(py::make_tuple(mb.z, mb.r));
        return py::dict(py::arg("members") = members, py::arg("disjoint") = au.disjoint,
                        py::arg("covers") = au.covers, py::arg("bookkeeping") = au.bookkeeping);
      },
      py::arg("points"), py::arg("d"), py::arg("s"), py::arg("m"), py::arg("delta0"), py::arg("alpha_next"),
      py::arg("cell_volume"));

  m.def(
      "canonical_json", [](const std::string& text) { return canonical_dump(Json::parse(text)); }, py::arg("text"));
}
