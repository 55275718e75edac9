#include "app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "kdg/constants.hpp"
#include "kdg/degiorgi.hpp"
#include "kdg/ellipticity.hpp"
#include "kdg/error.hpp"
#include "kdg/harnack.hpp"
#include "kdg/kernels.hpp"
#include "kdg/kolmogorov.hpp"
#include "kdg/sampling.hpp"

namespace kdg::app {

namespace {

Json num(double x) { return json_number(x); }

Json num_array(const Vec& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

// odd counts stay odd so a node keeps sitting at the origin
std::size_t scaled(std::size_t n, int level) { return n % 2 ? ((n - 1) << level) + 1 : n << level; }

std::vector<Axis> repeat(const Axis& a, std::size_t d) { return std::vector<Axis>(d, a); }

double norm2(const Vec& v) {
  double acc = 0.0;
  for (double c : v) acc += c * c;
  return acc;
}

ConstantKnobs knobs_of(const RunConfig& cfg) {
  ConstantKnobs k;
  k.C_eps = cfg.real("constants.C_eps");
  k.C_mu = cfg.real("constants.C_mu");
  k.C_zeta = cfg.real("constants.C_zeta");
  k.C_theta = cfg.real("constants.C_theta");
  return k;
}

KernelSpec kernel_of(const RunConfig& cfg) {
  const std::size_t d = cfg.count("kernel.d");
  const double s = cfg.real("kernel.s");
  const double lambda = cfg.real("kernel.lambda");
  const double Lambda = cfg.real("kernel.Lambda");
  const double Rbar = cfg.real("kernel.Rbar");
  if (cfg.text("kernel.kind") == "fractional_laplacian") return fractional_laplacian_kernel(d, s, lambda, Lambda, Rbar);
  const Axis a = centered_axis(cfg.real("kernel.density_half"), cfg.count("kernel.density_n"));
  const Lattice grid(repeat(a, d));
  const bool ball = cfg.text("kernel.density") == "uniform_ball";
  const double dd = static_cast<double>(d);
  auto density = [&](const Vec& v) {
    const double r2 = norm2(v);
    if (ball) return r2 < 1.0 ? 1.0 / unit_ball_volume(d) : 0.0;
    return std::pow(2.0 * M_PI, -0.5 * dd) * std::exp(-0.5 * r2);
  };
  return boltzmann_kernel(sample_velocity_field(grid, density, 4), s, cfg.real("kernel.gamma"), lambda, Lambda, Rbar);
}

Json condition_json(const ConditionRecord& c) {
  return {{"id", c.id},           {"lhs", num(c.lhs)},         {"rhs", num(c.rhs)},
          {"constant", num(c.constant)}, {"required", num(c.required)}, {"pass", c.pass},
          {"enforced", c.enforced}, {"sampled", c.sampled},      {"certified", c.certified},
          {"margin", num(c.margin)}, {"witness", c.witness}};
}

Json cylinder_json(const KineticCylinder& c) {
  return {{"t_lo", num(c.time_lo())}, {"t_hi", num(c.time_hi())}, {"radius", num(c.radius())},
          {"x_radius", num(c.x_radius())}, {"v_radius", num(c.v_radius())}};
}

// Nearest grid node to (t, 0, 0).
KineticPoint node_near(const GridField& f, double t) {
  const std::size_t it = f.time.cell_of(t);
  const Lattice xl = f.x_lattice();
  const Lattice vl = f.v_lattice();
  std::size_t bx = 0, bv = 0;
  for (std::size_t i = 0; i < xl.size(); ++i)
    if (norm2(xl.point(i)) < norm2(xl.point(bx))) bx = i;
  for (std::size_t i = 0; i < vl.size(); ++i)
    if (norm2(vl.point(i)) < norm2(vl.point(bv))) bv = i;
  return make_point(f.time.node(it), xl.point(bx), vl.point(bv));
}

// ---------------------------------------------------------------------------

CommandResult check_kernel(const RunConfig& cfg, int level) {
  const KernelSpec K = kernel_of(cfg);
  const std::size_t d = K.d;
  const Axis a = centered_axis(cfg.real("kernel.v_half"), scaled(cfg.count("kernel.nv"), level));
  const Lattice grid(repeat(a, d));
  const auto tests = test_function_library(grid, cfg.real("kernel.test_radius"), derive_seed(cfg.seed, 1));
  EllipticityOptions opts;
  opts.directions = cfg.count("kernel.directions");
  const ComplianceReport rep = check_ellipticity(K, tests, opts);

  CommandResult out;
  Json conds = Json::array();
  for (const auto& c : rep.conditions) {
    conds.push_back(condition_json(c));
    if (c.enforced && !c.pass) out.failures.push_back("condition " + c.id + " fails: " + c.witness);
  }
  out.body["kernel"] = {{"kind", std::string(to_string(K.kind))}, {"d", d}, {"s", num(K.s)},
                        {"lambda", num(K.lambda)}, {"Lambda", num(K.Lambda)}, {"Rbar", num(K.Rbar)},
                        {"gamma", num(K.gamma)}};
  out.body["grid"] = {{"v_half", num(a.hi)}, {"n", a.n}};
  out.body["conditions"] = conds;
  out.body["all_pass"] = rep.all_pass();
  if (K.kind == KernelKind::boltzmann) {
    ConeOptions co;
    co.directions = opts.directions;
    const ConeReport cone = cone_lower_bound(K, {Vec(d, 0.0)}, K.lambda, co);
    out.body["cone"] = {{"v", num_array(cone.points.front().v)},
                        {"fraction", num(cone.points.front().fraction)},
                        {"measure", num(cone.points.front().measure)},
                        {"symmetric", cone.points.front().symmetric}};
    if (!(cone.min_measure() > 0.0)) out.failures.push_back("empty cone of directions at v = 0");
  }
  return out;
}

CommandResult fundamental(const RunConfig& cfg, int level) {
  const std::size_t d = cfg.count("kernel.d");
  const double s = cfg.real("kernel.s");
  const std::size_t n = scaled(cfg.count("fundamental.n"), level);
  const bool similar = cfg.flag("fundamental.self_similar");
  CommandResult out;
  Json rows = Json::array();
  Vec lt, ll;
  for (double t : cfg.list("fundamental.times")) {
    const double gx = similar ? std::pow(t, 1.0 + 0.5 / s) : 1.0;
    const double gv = similar ? std::pow(t, 0.5 / s) : 1.0;
    const Axis ax = centered_axis(cfg.real("fundamental.x_half") * gx, n, true);
    const Axis av = centered_axis(cfg.real("fundamental.v_half") * gv, n, true);
    const FundamentalSolution J = fundamental_solution(s, t, repeat(ax, d), repeat(av, d), cfg.count("solve.n_tau"));
    char name[64];
    std::snprintf(name, sizeof name, "J_t%g%s.csv", t, level ? ("_refine" + std::to_string(level)).c_str() : "");
    write_csv(J.J, cfg.out_dir / name);
    rows.push_back({{"t", num(t)},          {"x_half", num(ax.hi)}, {"v_half", num(av.hi)}, {"mass", num(J.mass)},
                    {"min", num(J.min)},    {"max", num(J.max)},    {"l2", num(J.l2)},      {"csv_file", name}});
    lt.push_back(std::log(t));
    ll.push_back(std::log(J.l2));
    if (std::abs(J.mass - 1.0) > 1e-3) out.failures.push_back("mass of J(" + std::to_string(t) + ") is " + std::to_string(J.mass));
    if (J.min < -1e-4 * J.max) out.failures.push_back("J(" + std::to_string(t) + ") has min " + std::to_string(J.min));
  }
  out.body["times"] = rows;
  out.body["expected_l2_exponent"] = num(-0.5 * static_cast<double>(d) * (1.0 + 1.0 / s));
  if (lt.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(lt.size());
    for (std::size_t i = 0; i < lt.size(); ++i) {
      sx += lt[i];
      sy += ll[i];
      sxx += lt[i] * lt[i];
      sxy += lt[i] * ll[i];
    }
    out.body["fitted_l2_exponent"] = num((m * sxy - sx * sy) / (m * sxx - sx * sx));
  }
  out.body["grid"] = {{"n", n}, {"x_half", num(cfg.real("fundamental.x_half"))},
                      {"v_half", num(cfg.real("fundamental.v_half"))}, {"self_similar", similar}};
  return out;
}

PhaseField initial_datum(const RunConfig& cfg, const std::vector<Axis>& xa, const std::vector<Axis>& va) {
  const std::string kind = cfg.text("solve.initial");
  const double A = cfg.real("solve.amplitude");
  const double w = cfg.real("solve.width");
  return sample_phase_field(xa, va, [&](const Vec& x, const Vec& v) {
    const double r2 = norm2(x) + norm2(v);
    if (kind == "gaussian") return A * std::exp(-0.5 * r2 / (w * w));
    if (kind == "bump") {
      const double q = r2 / (w * w);
      return q < 1.0 ? A * std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    }
    return A * 0.5 * (1.0 + std::tanh((w - std::sqrt(norm2(v))) / (0.2 * w)));
  });
}

SolverOptions solver_options(const RunConfig& cfg, double t_start) {
  SolverOptions o;
  o.s = cfg.real("kernel.s");
  o.dt_max = cfg.real("solve.dt_max");
  o.t_start = t_start;
  o.n_tau = cfg.count("solve.n_tau");
  o.refine_levels = cfg.count("solve.refine_levels");
  return o;
}

SourceDecomposition constant_source(const RunConfig& cfg, const Axis& time, const std::vector<Axis>& xa,
                                    const std::vector<Axis>& va) {
  SourceDecomposition src;
  const double h = cfg.real("solve.source");
  if (h != 0.0) src.h1 = sample_grid_field(time, xa, va, [h](const KineticPoint&) { return h; });
  return src;
}

CommandResult solve(const RunConfig& cfg, int level) {
  const std::size_t d = cfg.count("kernel.d");
  const double dt = cfg.real("solve.dt");
  const double t_end = cfg.real("solve.t_end");
  require(dt <= t_end, "config key 'solve.dt' must not exceed solve.t_end");
  const auto xa = repeat(centered_axis(cfg.real("grid.x_half"), scaled(cfg.count("grid.nx"), level), true), d);
  const auto va = repeat(centered_axis(cfg.real("grid.v_half"), scaled(cfg.count("grid.nv"), level)), d);
  Vec times;
  for (std::size_t k = 1; k * dt <= t_end * (1.0 + 1e-12); ++k) times.push_back(static_cast<double>(k) * dt);
  const PhaseField f0 = initial_datum(cfg, xa, va);
  const Axis time = make_axis(0.0, t_end, times.size());
  const KolmogorovSolution sol = solve_kolmogorov(f0, constant_source(cfg, time, xa, va), times, solver_options(cfg, 0.0));

  auto mass = [](const PhaseField& p) {
    double m = 0.0;
    for (double y : p.values) m += y;
    return m * p.grid.cell_volume();
  };
  const double m0 = mass(f0);
  CommandResult out;
  Json rows = Json::array();
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const auto& p = sol.slices[i];
    const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
    rows.push_back({{"t", num(sol.times[i])}, {"mass", num(mass(p))}, {"min", num(*lo)}, {"max", num(*hi)},
                    {"l2", num(lr_norm(p, 2.0))}});
  }
  out.body["initial_mass"] = num(m0);
  out.body["slices"] = rows;
  out.body["steps"] = sol.steps;
  out.body["grid"] = {{"nx", xa.front().n}, {"nv", va.front().n}, {"x_half", num(xa.front().hi)},
                      {"v_half", num(va.front().hi)}};
  if (cfg.real("solve.source") == 0.0) {
    const double drift = std::abs(mass(sol.slices.back()) - m0) / m0;
    out.body["relative_mass_drift"] = num(drift);
    if (drift > 1e-6) out.failures.push_back("mass drift " + std::to_string(drift) + " exceeds 1e-6");
  }
  const std::string stem = "solve_field" + (level ? "_refine" + std::to_string(level) : std::string());
  write_field(sol.to_grid_field(), cfg.out_dir / (stem + ".json"));
  out.body["field_file"] = stem + ".json";
  if (cfg.flag("solve.csv")) {
    write_csv(sol.slices.back(), cfg.out_dir / (stem + "_final.csv"));
    out.body["csv_file"] = stem + "_final.csv";
  }
  return out;
}

}  // namespace

GridField solver_field(const RunConfig& cfg, int level, double t_lo, double t_hi, std::size_t nv_override) {
  require(t_lo < t_hi, "config key 'grid.t_lo' must be below grid.t_hi");
  const std::size_t d = cfg.count("kernel.d");
  const std::size_t nv = nv_override ? nv_override : scaled(cfg.count("grid.nv"), level);
  const auto xa = repeat(centered_axis(cfg.real("grid.x_half"), scaled(cfg.count("grid.nx"), level), true), d);
  const auto va = repeat(centered_axis(cfg.real("grid.v_half"), nv), d);
  const Axis time = make_axis(t_lo, t_hi, scaled(cfg.count("grid.nt"), level));
  Vec times(time.n);
  for (std::size_t i = 0; i < time.n; ++i) times[i] = time.node(i);
  const PhaseField f0 = initial_datum(cfg, xa, va);
  const KolmogorovSolution sol =
      solve_kolmogorov(f0, constant_source(cfg, time, xa, va), times, solver_options(cfg, t_lo));
  GridField f = sol.to_grid_field();
  for (double& y : f.values) y = std::clamp(y, 0.0, 1.0);
  f.nonnegative = true;
  return f;
}

namespace {

CommandResult degiorgi(const RunConfig& cfg, int level) {
  const KernelSpec K = kernel_of(cfg);
  const std::size_t d = K.d;
  const double s = K.s;
  const GridField f = solver_field(cfg, level, cfg.real("grid.t_lo"), cfg.real("grid.t_hi"));
  const KineticPoint z0 = node_near(f, cfg.real("grid.t_hi"));
  const KineticCylinder inner(z0, cfg.real("degiorgi.r"), s);
  const KineticCylinder outer(z0, cfg.real("degiorgi.R"), s);
  const double p = cfg.real("degiorgi.p");
  const double sigma = cfg.real("degiorgi.sigma");

  CommandResult out;
  const EnergyBalance e = energy_balance(K, f, nullptr, inner, outer);
  out.body["energy"] = {{"sup_mass", num(e.sup_mass)}, {"gagliardo", num(e.gagliardo)},
                        {"initial_mass", num(e.initial_mass)}, {"positive_measure", num(e.positive_measure)},
                        {"source_l2", num(e.source_l2)}, {"lhs", num(e.lhs)}, {"rhs", num(e.rhs)},
                        {"ratio", num(e.ratio)}};
  const IntegrabilityGain g = integrability_gain(K, f, nullptr, inner, outer, p, sigma);
  out.body["integrability"] = {{"lp_lhs", num(g.lp_lhs)}, {"w_sigma_lhs", num(g.w_sigma_lhs)},
                               {"rhs", num(g.rhs)}, {"lp_ratio", num(g.lp_ratio)},
                               {"w_sigma_ratio", num(g.w_sigma_ratio)}};

  FirstLemmaOptions fo;
  fo.k_max = static_cast<int>(cfg.integer("degiorgi.k_max"));
  fo.C = cfg.real("degiorgi.C");
  const FirstLemmaResult fl = first_lemma(K, f, nullptr, inner, outer, p, cfg.real("degiorgi.eps"), fo);
  Json steps = Json::array();
  for (const auto& st : fl.schedule.steps) {
    steps.push_back({{"k", st.k}, {"l", num(st.l)}, {"r", num(st.r)}, {"t", num(st.t)}, {"A", num(st.A)},
                     {"A_star", num(st.A_star)}, {"chebyshev_measure", num(st.chebyshev_measure)},
                     {"chebyshev_bound", num(st.chebyshev_bound)}, {"chebyshev_holds", st.chebyshev_holds},
                     {"decay_holds", st.decay_holds}});
    if (!st.chebyshev_holds) out.failures.push_back("Chebyshev inequality fails at k = " + std::to_string(st.k));
  }
  out.body["first_lemma"] = {{"converged", fl.converged}, {"bound", num(fl.bound)}, {"sup_inner", num(fl.sup_inner)},
                             {"A0", num(fl.A0)}, {"L", num(fl.schedule.L)}, {"log_L", num(fl.schedule.log_L)},
                             {"beta1", num(fl.exponents.beta1)}, {"beta2", num(fl.exponents.beta2)},
                             {"log2_Q", num(fl.exponents.log2_Q)}, {"schedule", steps}};

  const Truncation tr = truncate_levels(f, 0.5);
  const double cross = cross_term(K, tr);
  out.body["cross_term"] = {{"level", num(0.5)}, {"value", num(cross)}, {"nonnegative", cross >= 0.0}};
  if (cross < 0.0) out.failures.push_back("negative cross term " + std::to_string(cross));

  // Barrier ordering on a dense velocity line through the origin.
  const double r0 = cfg.real("degiorgi.r0");
  const Barriers B = make_barriers(d, s, r0, cfg.real("degiorgi.mu"));
  bool ordered = true;
  const Vec x0(d, 0.0);
  for (int i = 0; i <= 1000; ++i) {
    Vec v(d, 0.0);
    v[0] = -4.0 * r0 + 8.0 * r0 * i / 1000.0;
    const double p0 = barrier_eval(B, x0, v, 0), p1 = barrier_eval(B, x0, v, 1), p2 = barrier_eval(B, x0, v, 2);
    if (!(p0 <= p1 && p1 <= p2)) {
      ordered = false;
      out.failures.push_back("barrier ordering fails at v = " + std::to_string(v[0]));
      break;
    }
  }
  out.body["barriers"] = {{"r0", num(r0)}, {"mu", num(B.mu)}, {"ordered", ordered}};

  PoincareOptions po;
  po.sigma = sigma;
  po.scale = cfg.real("degiorgi.poincare_scale");
  po.C = cfg.real("degiorgi.poincare_C");
  const PoincareTerms pt = poincare_terms(K, f, nullptr, cfg.real("degiorgi.poincare_eps"), po);
  out.body["poincare"] = {{"average", num(pt.average)}, {"lhs", num(pt.lhs)}, {"sym_term", num(pt.sym_term)},
                          {"skew_term", num(pt.skew_term)}, {"sobolev_term", num(pt.sobolev_term)},
                          {"source_term", num(pt.source_term)}, {"rhs", num(pt.rhs)}, {"ratio", num(pt.ratio)},
                          {"holds", pt.holds}};
  out.body["center"] = {{"t", num(z0.t)}, {"x", num_array(z0.x)}, {"v", num_array(z0.v)}};
  return out;
}

CommandResult ivl_scan(const RunConfig& cfg, int level) {
  const KernelSpec K = kernel_of(cfg);
  const double r0 = cfg.real("degiorgi.r0");
  const GridField f = solver_field(cfg, level, -3.0, 0.0);
  IvlOptions io;
  io.sigma = cfg.real("degiorgi.sigma");
  io.C_h = cfg.real("ivl.C_h");
  io.knobs = knobs_of(cfg);
  CommandResult out;
  Json rows = Json::array();
  for (double d1 : cfg.list("ivl.delta1"))
    for (double d2 : cfg.list("ivl.delta2")) {
      const IvlCheck c = ivl_check(K, f, nullptr, r0, d1, d2, io);
      rows.push_back({{"delta1", num(d1)}, {"delta2", num(d2)}, {"eps_log", num(c.constants.eps_log)},
                      {"mu_log", num(c.mu_log)}, {"nu_log", num(c.nu_log)}, {"nu_bound_log", num(c.nu_bound_log)},
                      {"low_fraction", num(c.low_fraction)}, {"high_fraction", num(c.high_fraction)},
                      {"hypotheses_hold", c.hypotheses_hold}, {"intermediate_measure", num(c.intermediate_measure)},
                      {"region_covered", c.region_covered}, {"conclusion_holds", c.conclusion_holds}});
    }
  const std::size_t d = K.d;
  out.body["exponents"] = {{"mu_delta1", static_cast<int>(6 * d + 16)}, {"mu_delta2", static_cast<int>(6 * d + 14)},
                           {"nu", static_cast<int>(18 * d + 46)}};
  out.body["r0"] = num(r0);
  out.body["scan"] = rows;
  return out;
}

CommandResult harnack_report(const RunConfig& cfg, int level) {
  const std::size_t d = cfg.count("kernel.d");
  const double s = cfg.real("kernel.s");
  const double r0 = cfg.real("harnack.r0");
  const double m = cfg.real("harnack.m");
  const double C = cfg.real("harnack.C");
  const double p = cfg.real("harnack.p");
  const bool surrogate = cfg.flag("surrogate.enabled");
  const ConstantKnobs knobs = knobs_of(cfg);
  CommandResult out;

  const double delta0_max = std::exp(delta0_max_log(d, s, m));
  const double delta0 = surrogate ? cfg.real("surrogate.delta0") : cfg.real("harnack.delta0");
  const MtpConstants mtp = mtp_constants(cfg.real("harnack.delta"), d, knobs);
  const double zl = zeta_log(delta0, d, knobs);
  const long double M_log = level_M_log(covering_delta_log(d, s, m, delta0), d);
  const HoelderAlpha alpha = hoelder_alpha(mtp.theta_log, r0);
  out.body["constants"] = {{"zeta_log", num(zl)},
                           {"theta_log", num(static_cast<double>(mtp.theta_log))},
                           {"theta_loglog", num(mtp.theta_loglog)},
                           {"M_log", num(static_cast<double>(M_log))},
                           {"alpha_log", num(alpha.alpha_log)},
                           {"delta0_max_log", num(std::log(delta0_max))},
                           {"oscillation_exponent_log", num(oscillation_exponent_log(d))},
                           {"m_threshold", num(m_threshold(s))},
                           {"knobs", {{"C_eps", num(knobs.C_eps)}, {"C_mu", num(knobs.C_mu)},
                                      {"C_zeta", num(knobs.C_zeta)}, {"C_theta", num(knobs.C_theta)}}}};
  const double zeta_used_log = surrogate ? std::log(cfg.real("surrogate.zeta")) : zl;
  const double M_used = surrogate ? cfg.real("surrogate.M") : std::exp(static_cast<double>(M_log));
  out.body["surrogate"] = {{"enabled", surrogate}, {"zeta", num(cfg.real("surrogate.zeta"))},
                           {"theta", num(cfg.real("surrogate.theta"))}, {"M", num(cfg.real("surrogate.M"))},
                           {"delta0", num(cfg.real("surrogate.delta0"))}};

  const int k_max = static_cast<int>(cfg.integer("harnack.k_max"));
  const auto seq = covering_sequence(d, r0, s, k_max);
  const NestingCheck nest = check_nesting(seq, r0);
  Json cyl = Json::array();
  for (const auto& c : seq) cyl.push_back(cylinder_json(c));
  out.body["covering"] = {{"cylinders", cyl}, {"limit", cylinder_json(covering_limit(d, r0, s))},
                          {"nested", nest.ok()}};
  if (!nest.ok()) out.failures.push_back("covering sequence is not nested");

  const GridField f = solver_field(cfg, level, cfg.real("grid.t_lo"), cfg.real("grid.t_hi"));
  Json witnesses = Json::array();
  if (zeta_used_log > 0.0 || std::exp(zeta_used_log) <= 0.0) {
    out.body["quotient"] = nullptr;
    witnesses.push_back("zeta is not representable; enable surrogate constants");
  } else {
    const HarnackReport hr = weak_harnack_quotient(f, nullptr, s, r0, zeta_used_log, C);
    out.body["quotient"] = {{"value", num(hr.quotient)}, {"log", num(hr.quotient_log)}, {"lhs_log", num(hr.lhs_log)},
                            {"infimum", num(hr.infimum)}, {"supremum", num(hr.supremum)}, {"integral", num(hr.integral)},
                            {"zeta", num(hr.zeta)}, {"violation", hr.violation}};
    for (const auto& w : hr.witnesses) witnesses.push_back(w);
    const StrongHarnack sh = strong_harnack_check(f, nullptr, s, r0, zeta_used_log, p, C);
    out.body["strong"] = {{"sup", num(sh.sup_val)}, {"inf", num(sh.inf_val)}, {"beta", num(sh.beta)},
                          {"beta_log", num(sh.beta_log)}, {"bound", num(sh.bound)}, {"satisfied", sh.satisfied}};
  }
  if (std::isfinite(M_used)) {
    const LogIntegrability li = log_integrability(f, s, r0, M_used);
    out.body["log_integrability"] = {{"fraction", num(li.lhs_measure_fraction)}, {"delta_M", num(li.delta_M)},
                                     {"log_integral", num(li.log_integral)}, {"premise", li.premise}};
    const MtpPredicate mp = mtp_predicate(f, s, node_near(f, cfg.real("grid.t_hi") - 2.0 * std::pow(r0, 2.0 * s)), r0,
                                          M_used, cfg.real("harnack.delta"));
    out.body["mtp"] = {{"fraction", num(mp.fraction)}, {"inf_future", num(mp.inf_future)}, {"premise", mp.premise},
                       {"holds", mp.holds}};
    if (!mp.holds) witnesses.push_back(mp.witness);

    // Vitali selection on {f > M·inf} ∩ 𝒬^2 with the infimum over the limit
    // cylinder, thinned to at most 200 points.
    double inf_limit = std::numeric_limits<double>::infinity();
    for (std::size_t i : nodes_in(f, covering_limit(d, r0, s))) inf_limit = std::min(inf_limit, f.values[i]);
    std::vector<KineticPoint> A;
    for (std::size_t i : nodes_in(f, seq.size() > 1 ? seq[1] : seq[0]))
      if (f.values[i] > M_used * inf_limit) A.push_back(f.point(i));
    const std::size_t stride = A.size() > 200 ? (A.size() + 199) / 200 : 1;
    std::vector<KineticPoint> thin;
    for (std::size_t i = 0; i < A.size(); i += stride) thin.push_back(A[i]);
    CoveringParams cp;
    cp.d = d;
    cp.s = s;
    cp.m = m;
    cp.n_cov = static_cast<int>(cfg.integer("harnack.n_cov"));
    cp.delta0 = delta0;
    cp.alpha_next = covering_alpha(r0, 2);
    cp.cell_volume = f.cell_volume() * static_cast<double>(stride);
    cp.enforce_delta0_bound = !surrogate;
    const CoveringFamily fam = vitali_cover(thin, cp);
    const CoveringAudit au = audit_cover(thin, fam);
    Json members = Json::array();
    for (const auto& mb : fam.members)
      members.push_back({{"t", num(mb.z.t)}, {"x", num_array(mb.z.x)}, {"v", num_array(mb.z.v)}, {"r", num(mb.r)}});
    out.body["vitali"] = {{"points", thin.size()}, {"inf_limit", num(inf_limit)}, {"members", members}, {"candidates", fam.candidates},
                          {"sum_volume_r", num(fam.sum_volume_r)}, {"sum_volume_5mr", num(fam.sum_volume_5mr)},
                          {"volume_factor", num(fam.volume_factor)}, {"audit_ok", au.ok()}};
    for (const auto& w : au.witnesses) out.failures.push_back(w);
  } else {
    witnesses.push_back("M is not representable; enable surrogate constants");
  }
  out.body["witnesses"] = witnesses;
  return out;
}

CommandResult hoelder_estimate(const RunConfig& cfg, int level) {
  const double s = cfg.real("kernel.s");
  const std::size_t nv = scaled(cfg.count("hoelder.nv"), level);
  const GridField f = solver_field(cfg, level, cfg.real("grid.t_lo"), cfg.real("grid.t_hi"), nv);
  const bool surrogate = cfg.flag("surrogate.enabled");
  const MtpConstants mtp = mtp_constants(cfg.real("harnack.delta"), f.d, knobs_of(cfg));
  const long double theta_log = surrogate ? std::log(static_cast<long double>(cfg.real("surrogate.theta"))) : mtp.theta_log;
  const double r0 = cfg.real("hoelder.r0");
  const HoelderReport hr =
      hoelder_exponent(f, s, node_near(f, cfg.real("grid.t_hi")), r0, static_cast<int>(cfg.integer("hoelder.n_max")), theta_log);
  CommandResult out;
  out.body["theta_log"] = num(static_cast<double>(hr.theta_log));
  out.body["theory_alpha"] = num(hr.theory_alpha);
  out.body["theory_alpha_log"] = num(hr.theory_alpha_log);
  out.body["radii"] = num_array(hr.radii);
  out.body["osc"] = num_array(hr.osc);
  out.body["band"] = num_array(hr.band);
  out.body["normalized"] = num_array(hr.normalized);
  out.body["nonincreasing"] = hr.nonincreasing;
  out.body["fitted_alpha"] = num(hr.fitted_alpha);
  out.body["used_scales"] = hr.used_scales;
  if (!hr.nonincreasing) out.failures.push_back("normalized oscillation increases");

  const std::string csv = "hoelder_oscillation" + (level ? "_refine" + std::to_string(level) : std::string()) + ".csv";
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream os(cfg.out_dir / csv);
  if (!os) throw ValidationError("cannot write " + (cfg.out_dir / csv).string());
  os << "scale,osc\n";
  char buf[80];
  for (std::size_t i = 0; i < hr.radii.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", hr.radii[i], hr.osc[i]);
    os << buf;
  }
  out.body["csv_file"] = csv;
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check-kernel", "fundamental-solution", "solve", "degiorgi",
                                              "ivl-scan", "harnack-report", "hoelder-estimate"};
  return names;
}

CommandResult run_level(const std::string& name, const RunConfig& cfg, int level) {
  if (name == "check-kernel") return check_kernel(cfg, level);
  if (name == "fundamental-solution") return fundamental(cfg, level);
  if (name == "solve") return solve(cfg, level);
  if (name == "degiorgi") return degiorgi(cfg, level);
  if (name == "ivl-scan") return ivl_scan(cfg, level);
  if (name == "harnack-report") return harnack_report(cfg, level);
  if (name == "hoelder-estimate") return hoelder_estimate(cfg, level);
  throw ValidationError("unknown subcommand '" + name + "'");
}

int run_subcommand(const std::string& name, const RunConfig& cfg, std::ostream& err) {
  try {
    require(cfg.refine >= 0 && cfg.refine <= 6, "--refine must lie in [0, 6]");
    std::filesystem::create_directories(cfg.out_dir);
    std::vector<std::string> failures;
    Json body;
    if (cfg.refine == 0) {
      CommandResult r = run_level(name, cfg, 0);
      body = std::move(r.body);
      failures = std::move(r.failures);
    } else {
      Json levels = Json::array();
      for (int k = 0; k <= cfg.refine; ++k) {
        CommandResult r = run_level(name, cfg, k);
        levels.push_back({{"level", k}, {"report", std::move(r.body)}});
        for (auto& f : r.failures) failures.push_back("level " + std::to_string(k) + ": " + f);
      }
      body["levels"] = std::move(levels);
    }
    body["failures"] = failures;
    write_report(cfg.out_dir / (name + ".json"), make_envelope(name, cfg.hash(), cfg.seed, std::move(body)));
    if (!failures.empty()) {
      for (const auto& f : failures) err << "check failed: " << f << "\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace kdg::app
