#include "app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <sstream>

#include "kdg/error.hpp"
#include "kdg/report.hpp"

namespace kdg::app {

namespace {

std::optional<double> parse_real(const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e || !std::isfinite(x)) return std::nullopt;
  return x;
}

std::optional<long long> parse_int(const std::string& s) {
  long long x = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return x;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

using Check = std::function<std::string(const std::string&)>;

Check real_in(double lo, double hi, bool lo_open, bool hi_open, std::string what) {
  return [=](const std::string& v) -> std::string {
    const auto x = parse_real(v);
    if (!x) return "is not a number";
    const bool ok_lo = lo_open ? *x > lo : *x >= lo;
    const bool ok_hi = hi_open ? *x < hi : *x <= hi;
    return ok_lo && ok_hi ? std::string() : "must be " + what;
  };
}

Check positive() { return real_in(0.0, HUGE_VAL, true, true, "positive"); }
Check unit_open() { return real_in(0.0, 1.0, true, true, "in (0, 1)"); }

Check int_in(long long lo, long long hi) {
  return [=](const std::string& v) -> std::string {
    const auto x = parse_int(v);
    if (!x) return "is not an integer";
    if (*x < lo || *x > hi) return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    return {};
  };
}

Check one_of(std::vector<std::string> options) {
  return [=](const std::string& v) -> std::string {
    for (const auto& o : options)
      if (v == o) return {};
    std::string msg = "must be one of";
    for (const auto& o : options) msg += " " + o;
    return msg;
  };
}

Check positive_list() {
  return [](const std::string& v) -> std::string {
    const auto items = split(v);
    if (items.empty()) return "must be a nonempty list";
    for (const auto& it : items) {
      const auto x = parse_real(it);
      if (!x) return "contains a non-number";
      if (*x <= 0.0) return "entries must be positive";
    }
    return {};
  };
}

Check unit_list() {
  return [](const std::string& v) -> std::string {
    const auto items = split(v);
    if (items.empty()) return "must be a nonempty list";
    for (const auto& it : items) {
      const auto x = parse_real(it);
      if (!x || *x <= 0.0 || *x >= 1.0) return "entries must lie in (0, 1)";
    }
    return {};
  };
}

std::vector<KeySpec> build_registry() {
  using K = KeyType;
  return {
      {"kernel.kind", K::text, "fractional_laplacian", "fractional_laplacian or boltzmann",
       one_of({"fractional_laplacian", "boltzmann"})},
      {"kernel.d", K::integer, "1", "velocity/space dimension", int_in(1, 3)},
      {"kernel.s", K::real, "0.5", "fractional order s", unit_open()},
      {"kernel.lambda", K::real, "1", "declared coercivity constant", positive()},
      {"kernel.Lambda", K::real, "2", "declared upper-bound constant", positive()},
      {"kernel.Rbar", K::real, "2", "radius of the ellipticity ball", positive()},
      {"kernel.gamma", K::real, "0", "Boltzmann kinetic exponent gamma", real_in(-3.0, 1.0, true, false, "in (-d, 1]")},
      {"kernel.density", K::text, "maxwellian", "Boltzmann density: maxwellian or uniform_ball",
       one_of({"maxwellian", "uniform_ball"})},
      {"kernel.density_n", K::integer, "32", "density grid points per axis", int_in(4, 512)},
      {"kernel.density_half", K::real, "2", "density box half-width", positive()},
      {"kernel.directions", K::integer, "64", "sphere directions for pointwise conditions", int_in(8, 4096)},
      {"kernel.test_radius", K::real, "1", "support radius of the coercivity test functions", positive()},
      {"kernel.v_half", K::real, "2.5", "half-width of the velocity grid for kernel checks", positive()},
      {"kernel.nv", K::integer, "33", "velocity grid points per axis for kernel checks", int_in(5, 1024)},

      {"grid.nt", K::integer, "16", "time cells", int_in(2, 4096)},
      {"grid.nx", K::integer, "33", "x cells per axis", int_in(4, 4096)},
      {"grid.nv", K::integer, "33", "v cells per axis", int_in(4, 4096)},
      {"grid.t_lo", K::real, "-1", "start of the time window", real_in(-1e6, 1e6, false, false, "finite")},
      {"grid.t_hi", K::real, "0", "end of the time window", real_in(-1e6, 1e6, false, false, "finite")},
      {"grid.x_half", K::real, "1", "half-width of the periodic x box", positive()},
      {"grid.v_half", K::real, "2", "half-width of the v box", positive()},

      {"solve.dt", K::real, "0.05", "spacing of the output times", positive()},
      {"solve.t_end", K::real, "1", "final time of the solve command", positive()},
      {"solve.dt_max", K::real, "0.05", "largest internal step", positive()},
      {"solve.n_tau", K::integer, "16", "Gauss-Legendre nodes per symbol panel", int_in(2, 256)},
      {"solve.refine_levels", K::integer, "6", "geometric Duhamel refinement levels", int_in(0, 40)},
      {"solve.initial", K::text, "gaussian", "initial datum: gaussian, bump or plateau",
       one_of({"gaussian", "bump", "plateau"})},
      {"solve.amplitude", K::real, "1", "amplitude of the initial datum", positive()},
      {"solve.width", K::real, "0.5", "width of the initial datum", positive()},
      {"solve.source", K::real, "0", "constant source h1 on the grid", real_in(-1e6, 1e6, false, false, "finite")},
      {"solve.csv", K::integer, "0", "also write the final slice as CSV (0/1)", int_in(0, 1)},

      {"fundamental.times", K::list, "0.5,1,2", "times at which J is evaluated", positive_list()},
      {"fundamental.x_half", K::real, "8", "x half-width for J (at t = 1 when self_similar)", positive()},
      {"fundamental.v_half", K::real, "12", "v half-width for J (at t = 1 when self_similar)", positive()},
      {"fundamental.self_similar", K::integer, "1", "scale the J grid with t^(1+1/2s), t^(1/2s) (0/1)", int_in(0, 1)},
      {"fundamental.n", K::integer, "256", "grid points per axis for J", int_in(8, 4096)},

      {"degiorgi.r", K::real, "0.25", "inner radius r", unit_open()},
      {"degiorgi.R", K::real, "0.5", "outer radius R", real_in(0.0, 1.0, true, false, "in (0, 1]")},
      {"degiorgi.p", K::real, "2.5", "integrability exponent p", real_in(2.0, HUGE_VAL, true, true, "above 2")},
      {"degiorgi.sigma", K::real, "0.2", "W^{sigma,1} exponent", unit_open()},
      {"degiorgi.eps", K::real, "1", "smallness threshold for the first lemma", positive()},
      {"degiorgi.k_max", K::integer, "8", "first-lemma iterations", int_in(0, 60)},
      {"degiorgi.C", K::real, "1", "constant of the pointwise bound", positive()},
      {"degiorgi.poincare_eps", K::real, "0.5", "epsilon of the weak Poincare inequality", unit_open()},
      {"degiorgi.poincare_scale", K::real, "0.25", "kinetic scaling of the Poincare geometry", positive()},
      {"degiorgi.poincare_C", K::real, "1", "recorded Poincare constant", positive()},
      {"degiorgi.mu", K::real, "0.1", "barrier gap mu", unit_open()},
      {"degiorgi.r0", K::real, "0.1", "barrier and IVL scale r0", real_in(0.0, 1.0 / 3.0, true, true, "in (0, 1/3)")},

      {"ivl.delta1", K::list, "0.3,0.5,0.7", "delta1 values to scan", unit_list()},
      {"ivl.delta2", K::list, "0.3,0.5,0.7", "delta2 values to scan", unit_list()},
      {"ivl.C_h", K::real, "1", "source constant in ||h|| <= C mu^2", positive()},

      {"harnack.r0", K::real, "0.3", "Harnack scale r0", real_in(0.0, 1.0 / 3.0, true, true, "in (0, 1/3)")},
      {"harnack.m", K::real, "5", "covering multiplier m", real_in(3.0, HUGE_VAL, false, true, "at least 3")},
      {"harnack.n_cov", K::integer, "1", "covering time-gap integer", int_in(1, 1000000)},
      {"harnack.delta0", K::real, "0.01", "density threshold delta0", unit_open()},
      {"harnack.delta", K::real, "0.5", "measure-to-pointwise delta", unit_open()},
      {"harnack.p", K::real, "2.5", "exponent p of the strong check", real_in(2.0, HUGE_VAL, true, true, "above 2")},
      {"harnack.k_max", K::integer, "6", "covering sequence length", int_in(1, 60)},
      {"harnack.C", K::real, "1", "constant of the Harnack inequalities", positive()},

      {"hoelder.r0", K::real, "0.5", "ratio of consecutive radii", unit_open()},
      {"hoelder.n_max", K::integer, "4", "number of shrinking scales", int_in(2, 40)},
      {"hoelder.nv", K::integer, "257", "v cells of the Hoelder grid", int_in(8, 100000)},

      {"constants.C_eps", K::real, "1", "constant in the epsilon formula", positive()},
      {"constants.C_mu", K::real, "1", "constant in the mu formula", positive()},
      {"constants.C_zeta", K::real, "1", "constant in the zeta bound", positive()},
      {"constants.C_theta", K::real, "1", "constant in the theta formula", positive()},

      {"surrogate.enabled", K::integer, "0", "use the surrogate constants below (0/1)", int_in(0, 1)},
      {"surrogate.theta", K::real, "0.2", "surrogate theta", unit_open()},
      {"surrogate.zeta", K::real, "0.5", "surrogate zeta", real_in(0.0, 1.0, true, false, "in (0, 1]")},
      {"surrogate.M", K::real, "2", "surrogate level M", positive()},
      {"surrogate.delta0", K::real, "0.05", "surrogate delta0", unit_open()},
  };
}

}  // namespace

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> reg = build_registry();
  return reg;
}

std::string describe_keys() {
  std::string out = "Config keys ([section] then key = value):\n";
  for (const auto& k : key_registry()) out += "  " + k.name + " (default " + k.fallback + "): " + k.help + "\n";
  return out;
}

RunConfig::RunConfig() {
  for (const auto& k : key_registry()) values_[k.name] = k.fallback;
}

const KeySpec& RunConfig::key_spec(const std::string& key) const {
  for (const auto& k : key_registry())
    if (k.name == key) return k;
  throw ValidationError("unknown config key '" + key + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& k = key_spec(key);
  const std::string err = k.check(value);
  if (!err.empty()) throw ValidationError("config key '" + key + "' " + err + " (got '" + value + "')");
  values_[key] = value;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  RunConfig c;
  c.merge_file(path);
  return c;
}

void RunConfig::merge_file(const std::filesystem::path& path, bool surrogate_only) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("malformed config " + path.string() + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ValidationError("config key '" + section + "' lies outside a [section]");
    if (surrogate_only && section != "surrogate")
      throw ValidationError("the surrogate constants file may only contain [surrogate]");
    for (const auto& [key, node] : body) set(section + "." + key, node.get_value<std::string>());
  }
  if (surrogate_only) values_["surrogate.enabled"] = "1";
}

double RunConfig::real(const std::string& key) const {
  const KeySpec& k = key_spec(key);
  require(k.type == KeyType::real, "config key '" + key + "' is not real-valued");
  return *parse_real(values_.at(key));
}

long long RunConfig::integer(const std::string& key) const {
  const KeySpec& k = key_spec(key);
  require(k.type == KeyType::integer, "config key '" + key + "' is not an integer");
  return *parse_int(values_.at(key));
}

std::size_t RunConfig::count(const std::string& key) const {
  const long long v = integer(key);
  require(v >= 0, "config key '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

std::string RunConfig::text(const std::string& key) const {
  key_spec(key);
  return values_.at(key);
}

std::vector<double> RunConfig::list(const std::string& key) const {
  const KeySpec& k = key_spec(key);
  require(k.type == KeyType::list, "config key '" + key + "' is not a list");
  std::vector<double> out;
  for (const auto& item : split(values_.at(key))) out.push_back(*parse_real(item));
  return out;
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "refine = " + std::to_string(refine) + "\n";
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical_text())); }

}  // namespace kdg::app
