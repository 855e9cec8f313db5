#include "cli/tasks.hpp"

#include "curvlab/bending.hpp"
#include "curvlab/conformal.hpp"
#include "curvlab/cosmic_strings.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/strings_exact.hpp"
#include "curvlab/surface_geom.hpp"
#include "curvlab/vortex_models.hpp"
#include "curvlab/vortex_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace curvlab::cli {

namespace {

constexpr double pi = std::numbers::pi;

std::string describe(const Range& r) {
  std::string lo = std::isinf(r.lo) ? "(-inf" : (r.lo_open ? "(" : "[") + fmt_sci(r.lo);
  std::string hi = std::isinf(r.hi) ? "inf)" : fmt_sci(r.hi) + (r.hi_open ? ")" : "]");
  return lo + ", " + hi;
}

bool inside(double x, const Range& r) {
  if (r.lo_open ? !(x > r.lo) : !(x >= r.lo)) return false;
  if (r.hi_open ? !(x < r.hi) : !(x <= r.hi)) return false;
  return true;
}

} // namespace

Params::Params(const json& table, std::string section) : table_(table), section_(std::move(section)) {}

bool Params::has(const std::string& key) const { return table_.contains(key) && !table_.at(key).is_null(); }

const json& Params::at(const std::string& key) {
  used_.insert(key);
  return table_.at(key);
}

double Params::number(const std::string& key, std::optional<double> fallback, Range r) {
  used_.insert(key);
  double x;
  if (!has(key)) {
    if (!fallback) throw ValidationError(section_ + "." + key + " is required");
    x = *fallback;
  } else {
    const json& v = at(key);
    if (!v.is_number()) throw ValidationError(section_ + "." + key + " must be a number");
    x = v.get<double>();
  }
  if (!std::isfinite(x) || !inside(x, r))
    throw ValidationError(section_ + "." + key + " = " + fmt_sci(x) + " outside " + describe(r));
  return x;
}

int Params::integer(const std::string& key, std::optional<int> fallback, Range r) {
  used_.insert(key);
  long long x;
  if (!has(key)) {
    if (!fallback) throw ValidationError(section_ + "." + key + " is required");
    x = *fallback;
  } else {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ValidationError(section_ + "." + key + " must be an integer");
    x = v.get<long long>();
  }
  if (!inside(static_cast<double>(x), r) || std::llabs(x) > 1000000000LL)
    throw ValidationError(section_ + "." + key + " = " + std::to_string(x) + " outside " + describe(r));
  return static_cast<int>(x);
}

std::string Params::text(const std::string& key, std::optional<std::string> fallback,
                         const std::vector<std::string>& choices) {
  used_.insert(key);
  std::string s;
  if (!has(key)) {
    if (!fallback) throw ValidationError(section_ + "." + key + " is required");
    s = *fallback;
  } else {
    const json& v = at(key);
    if (!v.is_string()) throw ValidationError(section_ + "." + key + " must be a string");
    s = v.get<std::string>();
  }
  if (!choices.empty() && std::find(choices.begin(), choices.end(), s) == choices.end()) {
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    throw ValidationError(section_ + "." + key + " = '" + s + "' is not one of: " + list);
  }
  return s;
}

std::vector<double> Params::numbers(const std::string& key) {
  if (!has(key)) throw ValidationError(section_ + "." + key + " is required");
  const json& v = at(key);
  if (!v.is_array()) throw ValidationError(section_ + "." + key + " must be a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>()))
      throw ValidationError(section_ + "." + key + " must be a list of finite numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::pair<double, double>> Params::pairs(const std::string& key) {
  if (!has(key)) throw ValidationError(section_ + "." + key + " is required");
  const json& v = at(key);
  if (!v.is_array()) throw ValidationError(section_ + "." + key + " must be a list of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ValidationError(section_ + "." + key + " must be a list of [x, y] pairs");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
    if (!std::isfinite(out.back().first) || !std::isfinite(out.back().second))
      throw ValidationError(section_ + "." + key + " has a non-finite coordinate");
  }
  return out;
}

std::optional<std::pair<double, double>> Params::pair(const std::string& key) {
  used_.insert(key);
  if (!has(key)) return std::nullopt;
  const json& p = at(key);
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
    throw ValidationError(section_ + "." + key + " must be a pair [x, y]");
  return std::pair{p[0].get<double>(), p[1].get<double>()};
}

void Params::finish() const {
  for (const auto& [k, _] : table_.items())
    if (!used_.count(k)) throw ValidationError("unknown key " + section_ + "." + k);
}

TaskInputs::TaskInputs(const RunConfig& c)
    : inputs(c.inputs, "inputs"), grid(c.grid, "grid"), tolerance(c.tolerance, "tolerance") {}

void TaskInputs::finish() const {
  inputs.finish();
  grid.finish();
  tolerance.finish();
}

namespace {

// ---------------------------------------------------------------- helpers

ModelSpec read_model(Params& p) {
  const std::string name = p.text("model", std::nullopt, model_names());
  ModelParams mp;
  mp.m = p.integer("m", 1, between(0, 64));
  mp.b = p.number("b", 1.0, positive());
  mp.alpha = p.number("alpha", 1.0, positive());
  mp.beta = p.number("beta", 1.0, positive());
  mp.kappa = p.number("kappa", 2.0, positive());
  return make_model(name, mp);
}

json model_json(const ModelSpec& M) {
  return {{"name", M.name}, {"tau", M.tau}, {"rhs_monotone", M.rhs_monotone}};
}

StringConfiguration read_strings(Params& p, bool allow_N = true) {
  StringConfiguration c;
  c.lambda = p.number("lambda", 1.0, positive());
  if (allow_N && p.has("N")) {
    if (p.has("points") || p.has("multiplicities"))
      throw ValidationError("give either N (one center at the origin) or points with multiplicities");
    c.points = {{0.0, 0.0}};
    c.multiplicities = {p.integer("N", std::nullopt, between(1, 1000))};
  } else {
    for (auto [x, y] : p.pairs("points")) c.points.push_back({x, y});
    for (double x : p.numbers("multiplicities")) {
      if (x != std::floor(x)) throw ValidationError("inputs.multiplicities must be integers");
      c.multiplicities.push_back(static_cast<int>(x));
    }
  }
  c.validate();
  return c;
}

json config_json(const StringConfiguration& c) {
  json pts = json::array();
  for (const auto& q : c.points) pts.push_back({q.x, q.y});
  return {{"points", pts}, {"multiplicities", c.multiplicities}, {"lambda", c.lambda}};
}

json diag_json(const SolveDiagnostics& d) {
  return {{"residual_norm", d.residual_norm}, {"flux", d.flux},         {"energy", d.energy},
          {"bps_energy", d.bps_energy},       {"mass_integral", d.mass_integral}, {"iterations", d.iterations}};
}

Table grid_table(const FieldGrid& F, const std::string& name, const json& header) {
  Table t;
  t.name = name;
  t.columns = {"x", "y", "v", "exp_v"};
  for (int i = 0; i < F.n; ++i)
    for (int j = 0; j < F.n; ++j) {
      const int k = i * F.n + j;
      if (F.kind == GeometryKind::disk && F.mask[k] == 0) continue;
      const double v = F.v(k);
      t.rows.push_back({F.x(i), F.y(j), v, std::exp(v)});
    }
  t.header = header;
  return t;
}

BendingParams helfrich_params(Params& p, bool need_pressure) {
  BendingParams b;
  b.kappa = p.number("kappa", 1.0, positive());
  b.c0 = p.number("c0", 0.0);
  if (need_pressure) {
    b.p = p.number("p", 0.0, nonnegative());
    b.lambda = p.number("lambda", 0.0, nonnegative());
  }
  return b;
}

// ---------------------------------------------------------------- tasks

Runner gauss_bonnet(TaskInputs& in) {
  const std::string kind = in.inputs.text("surface", "ring_torus", {"sphere", "ring_torus"});
  const double R = in.inputs.number("R", 1.0, positive());
  const double a = in.inputs.number("a", 2.0, positive());
  const double b = in.inputs.number("b", 1.0, positive());
  const int nu = in.grid.integer("n_u", 128, between(8, 4096));
  const int nv = in.grid.integer("n_v", 128, between(8, 4096));
  if (kind == "ring_torus" && !(b < a)) throw ValidationError("ring torus needs b < a");
  return [=] {
    const auto S = kind == "sphere" ? ParamSurface::sphere(R, nu, nv) : ParamSurface::ring_torus(a, b, nu, nv);
    const auto gb = gauss_bonnet_check(S);
    const auto cf = curvature_data(S);
    TaskResult r;
    r.diagnostics = {{"total_curvature", gb.total_curvature}, {"expected", gb.expected}, {"defect", gb.defect},
                     {"area", surface_area(S)},               {"volume", enclosed_volume(S)},
                     {"genus", S.genus()}};
    r.provenance = {{"n_u", nu}, {"n_v", nv}, {"surface", S.describe()}};
    Table t{"meridian", {"u", "k1", "k2", "H", "K"}, {}, nullptr};
    for (int i = 0; i < nu; ++i) {
      const int k = i * nv;
      t.rows.push_back({cf.u[i], cf.k1[k], cf.k2[k], cf.H[k], cf.K[k]});
    }
    r.tables.push_back(std::move(t));
    return r;
  };
}

Runner helfrich_torus(TaskInputs& in) {
  const double kappa = in.inputs.number("kappa", 1.0, positive());
  const double c0 = in.inputs.number("c0", 0.0);
  const double tau = in.inputs.number("tau", 1.0 / std::sqrt(2.0), open_between(0.0, 1.0));
  const double a = in.inputs.number("a", 1.0, positive());
  const int n = in.grid.integer("n", 128, between(8, 4096));
  return [=] {
    BendingParams bp;
    bp.kappa = kappa;
    bp.c0 = c0;
    const double closed = helfrich_torus_closed_form(a, tau, kappa, c0);
    const double quad = bending_energy(ParamSurface::ring_torus(a, tau * a, n, n), bp, BendingKind::helfrich);
    TaskResult r;
    r.diagnostics = {{"closed_form", closed},
                     {"quadrature", quad},
                     {"relative_difference", std::abs(quad - closed) / std::abs(closed)},
                     {"willmore_value", 4.0 * pi * pi * kappa}};
    r.provenance = {{"n_u", n}, {"n_v", n}};
    return r;
  };
}

Runner helfrich_scan(TaskInputs& in) {
  const double kappa = in.inputs.number("kappa", 1.0, positive());
  const double c0 = in.inputs.number("c0", 1.0);
  const double a_min = in.inputs.number("a_min", 0.01, positive());
  const double a_max = in.inputs.number("a_max", 2.0, positive());
  const double t_min = in.inputs.number("tau_min", 0.05, open_between(0.0, 1.0));
  const double t_max = in.inputs.number("tau_max", 0.95, open_between(0.0, 1.0));
  const int na = in.grid.integer("n_a", 200, between(2, 4000));
  const int nt = in.grid.integer("n_tau", 200, between(2, 4000));
  if (!(a_min < a_max) || !(t_min < t_max)) throw ValidationError("scan ranges must be increasing");
  return [=] {
    const double bound = 4.0 * pi * pi * kappa;
    TaskResult r;
    Table t{"scan", {"a", "tau", "energy"}, {}, nullptr};
    double best = HUGE_VAL, best_a = 0.0, best_t = 0.0;
    bool above = true;
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nt; ++j) {
        const double a = a_min + (a_max - a_min) * i / (na - 1);
        const double tau = t_min + (t_max - t_min) * j / (nt - 1);
        const double e = helfrich_torus_closed_form(a, tau, kappa, c0);
        t.rows.push_back({a, tau, e});
        above = above && e > bound;
        if (e < best) best = e, best_a = a, best_t = tau;
      }
    r.diagnostics = {{"minimum", best}, {"argmin_a", best_a}, {"argmin_tau", best_t},
                     {"willmore_value", bound}, {"all_above_willmore", above}};
    r.provenance = {{"n_a", na}, {"n_tau", nt}};
    r.tables.push_back(std::move(t));
    return r;
  };
}

Runner torus_minimum(TaskInputs& in) {
  BendingParams bp;
  bp.kappa = in.inputs.number("kappa", 1.0, positive());
  bp.c0 = in.inputs.number("c0", -1.0, {-HUGE_VAL, 0.0, false, true});
  bp.p = in.inputs.number("p", 1.0, positive());
  bp.lambda = in.inputs.number("lambda", 0.0, nonnegative());
  return [=] {
    const auto m = minimize_full_helfrich_torus(bp);
    TaskResult r;
    r.diagnostics = {{"a0", m.a0},
                     {"b0", m.b0},
                     {"tau0", m.tau0},
                     {"beta0", m.beta0},
                     {"energy", m.energy},
                     {"bracket", {m.bracket.first, m.bracket.second}},
                     {"dh_da", full_helfrich_dh_da(m.a0, m.tau0, bp)}};
    r.provenance = {{"iterations", m.iterations}};
    return r;
  };
}

Runner sphere_minimum(TaskInputs& in) {
  BendingParams bp = helfrich_params(in.inputs, true);
  return [=] {
    const auto m = minimize_full_helfrich_sphere(bp);
    TaskResult r;
    r.diagnostics = {{"R0", m.R0}, {"energy", m.energy}, {"positive_root_R0", m.positive_root_R0}};
    r.diagnostics["printed_formula_R0"] = std::isfinite(m.printed_formula_R0) ? json(m.printed_formula_R0) : json(nullptr);
    return r;
  };
}

Runner aniso_minimum(TaskInputs& in) {
  double k1, k2;
  if (in.inputs.has("gamma")) {
    k1 = in.inputs.number("gamma", std::nullopt, positive());
    k2 = 1.0;
  } else {
    k1 = in.inputs.number("kappa1", std::nullopt, positive());
    k2 = in.inputs.number("kappa2", std::nullopt, positive());
  }
  const int n = in.grid.integer("n_profile", 200, between(2, 100000));
  return [=] {
    const auto m = anisotropic_torus_minimum(k1, k2);
    TaskResult r;
    r.diagnostics = {{"tau_min", m.tau_min}, {"U_min", m.U_min}, {"gamma", k1 / k2}};
    r.provenance = {{"iterations", m.iterations}, {"n_profile", n}};
    Table t{"profile", {"tau", "f"}, {}, nullptr};
    for (int i = 1; i < n; ++i) {
      const double tau = static_cast<double>(i) / n;
      t.rows.push_back({tau, anisotropic_torus_profile(tau, k1 / k2)});
    }
    r.tables.push_back(std::move(t));
    return r;
  };
}

Runner bounds(TaskInputs& in) {
  const int g = in.inputs.integer("genus", 1, between(0, 1000));
  const double k1 = in.inputs.number("kappa1", 1.0, positive());
  const double k2 = in.inputs.number("kappa2", 1.0, positive());
  return [=] {
    const auto b = topological_bounds(g, k1, k2);
    TaskResult r;
    r.diagnostics = {{"lower", b.lower}, {"upper", b.upper}};
    return r;
  };
}

Runner shape(TaskInputs& in) {
  const std::string kind = in.inputs.text("surface", "sphere", {"sphere", "ring_torus"});
  BendingParams bp = helfrich_params(in.inputs, true);
  const bool given_R = in.inputs.has("R");
  const double R = in.inputs.number("R", 1.0, positive());
  const double a = in.inputs.number("a", std::sqrt(2.0), positive());
  const double b = in.inputs.number("b", 1.0, positive());
  const int n = in.grid.integer("n", 64, between(8, 2048));
  if (kind == "ring_torus" && !(b < a)) throw ValidationError("ring torus needs b < a");
  return [=] {
    double radius = R;
    if (kind == "sphere" && !given_R) radius = minimize_full_helfrich_sphere(bp).R0;
    const auto S = kind == "sphere" ? ParamSurface::sphere(radius, n, n) : ParamSurface::ring_torus(a, b, n, 16);
    const auto res = shape_residual(S, bp);
    TaskResult r;
    r.diagnostics = {{"residual_norm", res.norm}};
    if (kind == "sphere") r.diagnostics["R"] = radius;
    r.provenance = {{"n", n}, {"surface", S.describe()}};
    return r;
  };
}

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Runner nirenberg_flow(TaskInputs& in) {
  const double L = in.inputs.number("L", 2.0 * pi, positive());
  const double F0 = in.inputs.number("F", 0.0);
  const double amp = in.inputs.number("eta_amplitude", 0.5, nonnegative());
  const int modes = in.inputs.integer("modes", 3, between(0, 16));
  const int seed = in.inputs.integer("seed", 1, nonnegative());
  const int n = in.grid.integer("n", 32, between(4, 1024));
  if (n & (n - 1)) throw ValidationError("grid.n must be a power of two");
  const double dt = in.grid.number("dt", 0.05, positive());
  const int steps = in.grid.integer("steps", 400, between(1, 10000000));
  const double tol = in.tolerance.number("convergence_tol", 1e-8, positive());
  return [=] {
    std::uint64_t s = static_cast<std::uint64_t>(seed);
    auto uniform = [&] { return (splitmix(s) >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    std::vector<std::array<double, 4>> coef;  // k1, k2, cos, sin
    for (int k1 = 0; k1 <= modes; ++k1)
      for (int k2 = -modes; k2 <= modes; ++k2) {
        if (k1 == 0 && k2 <= 0) continue;
        const double damp = amp / (1.0 + k1 * k1 + k2 * k2);
        coef.push_back({double(k1), double(k2), damp * uniform(), damp * uniform()});
      }
    const double c = amp * uniform();
    const auto eta0 = TorusField::sample(n, n, L, L, [&](double x, double y) {
      double e = c;
      for (const auto& q : coef) {
        const double ph = 2.0 * pi * (q[0] * x + q[1] * y) / L;
        e += q[2] * std::cos(ph) + q[3] * std::sin(ph);
      }
      return e;
    });
    const auto F = TorusField::constant(n, n, L, L, F0);
    FlowOptions o;
    o.convergence_tol = tol;
    const auto res = heat_flow(F, eta0, dt, steps, o);
    TaskResult r;
    bool monotone = true;
    Table t{"functional", {"time", "I"}, {}, nullptr};
    for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
      t.rows.push_back({res.trajectory[k].time, res.trajectory[k].functional_value});
      if (k > 0) monotone = monotone && res.trajectory[k].functional_value <= res.trajectory[k - 1].functional_value + 1e-10;
    }
    const auto& last = res.trajectory.back();
    r.diagnostics = {{"initial_functional", res.trajectory.front().functional_value},
                     {"final_functional", last.functional_value},
                     {"monotone", monotone},
                     {"initial_mean", eta0.mean()},
                     {"final_mean", last.eta.mean()},
                     {"converged", res.converged},
                     {"terminal_residual", res.terminal_residual}};
    r.provenance = {{"n", n}, {"dt", dt}, {"steps_taken", res.steps_taken}, {"rejected_steps", res.rejected_steps},
                    {"seed", seed}};
    r.tables.push_back(std::move(t));
    return r;
  };
}

Runner letelier(TaskInputs& in) {
  StringDistribution d;
  for (auto [x, y] : in.inputs.pairs("points")) d.points.push_back({x, y});
  d.strengths = in.inputs.numbers("strengths");
  d.G = in.inputs.number("G", std::nullopt, nonnegative());
  d.lambda = in.inputs.number("lambda", 1.0, positive());
  d.validate();
  return [=] {
    const auto c = letelier_conical_report(d);
    const auto f = letelier_factor(d);
    TaskResult r;
    r.diagnostics = {{"total_strength", c.total_strength}, {"radial_exponent", c.radial_exponent},
                     {"angle_range", c.angle_range},       {"deficit", c.deficit},
                     {"alpha", f.alpha}};
    Table t{"factor_x_axis", {"x", "exp_eta"}, {}, nullptr};
    for (int i = 1; i <= 400; ++i) {
      const double x = f.feature_radius + 0.05 * i;
      t.rows.push_back({x, f.value(x, 0.0)});
    }
    r.tables.push_back(std::move(t));
    return r;
  };
}

Runner sigma_strings(TaskInputs& in) {
  RationalMap map;
  for (auto [x, y] : in.inputs.pairs("poles")) map.poles.emplace_back(x, y);
  if (in.inputs.has("zeros"))
    for (auto [x, y] : in.inputs.pairs("zeros")) map.zeros.emplace_back(x, y);
  if (auto c = in.inputs.pair("c")) map.c = cplx(c->first, c->second);
  map.validate();
  const double G = in.inputs.number("G", 1e-3, positive());
  const double lambda = in.inputs.number("lambda", 1.0, positive());
  const double R = in.grid.number("R", 300.0, positive());
  const double rtol = in.tolerance.number("rtol", 1e-4, positive());
  return [=] {
    const auto s = sigma_energy_and_degree(map, R);
    const auto cr = curvature_deficit_report(cg_string_metric(map, G, lambda), map.N(), G, rtol);
    TaskResult r;
    r.diagnostics = {{"energy", s.energy},
                     {"energy_tail_estimate", s.tail_estimate},
                     {"degree_integral", s.degree_integral},
                     {"N", s.N_detected},
                     {"bps_energy", 4.0 * pi * map.N()},
                     {"total_curvature", cr.total_curvature},
                     {"deficit", cr.deficit},
                     {"curvature_defect", cr.defect}};
    r.provenance = {{"R", R}, {"truncation_radius", cr.truncation_radius}, {"curvature_tail", cr.tail_estimate}};
    return r;
  };
}

Runner completeness(TaskInputs& in) {
  const int N = in.inputs.integer("N", std::nullopt, between(1, 1000000));
  const double G = in.inputs.number("G", std::nullopt, positive());
  const std::string mode = in.inputs.text("mode", "lohe", {"lohe", "harmonic_map"});
  const double tau = in.inputs.number("tau", 1.0, positive());
  return [=] {
    const auto c = completeness_check(N, G, mode == "lohe" ? CompletenessMode::lohe : CompletenessMode::harmonic_map, tau);
    TaskResult r;
    r.diagnostics = {{"complete", c.complete}, {"boundary", c.boundary}, {"threshold", c.threshold},
                     {"exponent", c.exponent}};
    r.diagnostics["radial_length"] = std::isfinite(c.radial_length) ? json(c.radial_length) : json("infinity");
    return r;
  };
}

Runner model_check(TaskInputs& in) {
  const ModelSpec M = read_model(in.inputs);
  return [=] {
    const auto rep = consistency_check(M);
    TaskResult r;
    r.diagnostics = model_json(M);
    r.diagnostics["consistency_residual"] = rep.max_residual;
    r.diagnostics["worst_check"] = rep.worst_check;
    r.diagnostics["vacuum_mass_sq"] = vacuum_mass_sq(M);
    Table t{"profiles", {"s", "w", "rhs"}, {}, nullptr};
    for (int i = 0; i <= 200; ++i) {
      const double s = i / 100.0;
      t.rows.push_back({s, M.w(s), rhs_eval(M, std::log(std::max(s, 1e-300)))});
    }
    r.tables.push_back(std::move(t));
    return r;
  };
}

Runner radial(TaskInputs& in) {
  const ModelSpec M = read_model(in.inputs);
  const int N = in.inputs.integer("N", 1, between(1, 1000));
  const double lambda = in.inputs.number("lambda", 1.0, positive());
  RadialOptions o;
  o.r_max = in.grid.number("r_max", 0.0, nonnegative());
  o.n = in.grid.integer("n", 3001, between(101, 1000001));
  o.mu = in.grid.number("mu", 1.0, positive());
  o.r_min = in.grid.number("r_min", 1e-6, open_between(0.0, 1.0));
  o.tol = in.tolerance.number("tol", 1e-10, positive());
  o.accept = in.tolerance.number("accept", 1e-8, positive());
  o.max_newton = in.tolerance.integer("max_newton", 60, between(1, 10000));
  return [=] {
    const auto F = radial_solve(M, N, lambda, o);
    TaskResult r;
    r.diagnostics = diag_json(F.diag);
    r.diagnostics["model"] = model_json(M);
    r.provenance = {{"n", F.r.size()}, {"r_min", F.r.front()}, {"r_max", F.extent}, {"mu", F.mu},
                    {"tol", o.tol},    {"newton_iterations", F.diag.iterations}};
    r.warnings = F.warnings;
    Table t{"profile", {"r", "v", "exp_v", "F12"}, {}, nullptr};
    for (std::size_t k = 0; k < F.r.size(); ++k)
      t.rows.push_back({F.r[k], F.v(k), std::exp(F.v(k)), field_strength(M, F.v(k), lambda)});
    r.tables.push_back(std::move(t));
    return r;
  };
}

PlanarOptions read_planar(TaskInputs& in) {
  PlanarOptions o;
  o.R = in.grid.number("R", 0.0, nonnegative());
  o.h = in.grid.number("h", 0.1, open_between(0.0, 10.0));
  o.mu = in.grid.number("mu", 1.0, positive());
  o.tol = in.tolerance.number("tol", 1e-9, positive());
  o.max_newton = in.tolerance.integer("max_newton", 40, between(1, 10000));
  return o;
}

Runner planar(TaskInputs& in) {
  const ModelSpec M = read_model(in.inputs);
  const StringConfiguration c = read_strings(in.inputs);
  const PlanarOptions o = read_planar(in);
  return [=] {
    const auto F = planar_solve(M, c, o);
    TaskResult r;
    r.diagnostics = diag_json(F.diag);
    r.diagnostics["model"] = model_json(M);
    r.provenance = {{"R", F.extent}, {"h", F.h}, {"n", F.n}, {"tol", o.tol}, {"strings", config_json(c)}};
    r.warnings = F.warnings;
    r.tables.push_back(grid_table(F, "field", {{"geometry", "disk"}, {"R", F.extent}, {"h", F.h}, {"model", M.name}}));
    return r;
  };
}

Runner sandwich(TaskInputs& in) {
  const ModelSpec M = read_model(in.inputs);
  const StringConfiguration c = read_strings(in.inputs);
  PlanarOptions o = read_planar(in);
  const int max_iter = in.tolerance.integer("max_iter", 2000, between(1, 1000000));
  if (!M.rhs_monotone) throw ValidationError("model '" + M.name + "' is not monotone; the sandwich needs it");
  return [=] {
    const auto S = monotone_sandwich_solve(M, c, o, max_iter);
    TaskResult r;
    r.diagnostics = diag_json(S.field.diag);
    r.diagnostics["model"] = model_json(M);
    r.diagnostics["comparison_factor"] = S.comparison_factor;
    r.diagnostics["sandwich_iterations"] = S.iterations;
    r.provenance = {{"R", S.field.extent}, {"h", S.field.h}, {"n", S.field.n}, {"tol", o.tol}};
    r.warnings = S.field.warnings;
    Table h{"history", {"iteration", "residual"}, {}, nullptr};
    for (std::size_t k = 0; k < S.residual_history.size(); ++k) h.rows.push_back({double(k + 1), S.residual_history[k]});
    r.tables.push_back(std::move(h));
    r.tables.push_back(grid_table(S.field, "field", {{"geometry", "disk"}, {"R", S.field.extent}, {"h", S.field.h}}));
    return r;
  };
}

Runner compact(TaskInputs& in) {
  const ModelSpec M = read_model(in.inputs);
  const double L = in.inputs.number("L", 10.0, positive());
  const StringConfiguration c = read_strings(in.inputs, false);
  const int n = in.grid.integer("n", 128, between(8, 2048));
  if (n & (n - 1)) throw ValidationError("grid.n must be a power of two");
  const double tol = in.tolerance.number("tol", 1e-10, positive());
  const int max_newton = in.tolerance.integer("max_newton", 60, between(1, 10000));
  return [=] {
    const auto R = compact_solve(L, M, c, n, tol, max_newton);
    TaskResult r;
    r.diagnostics = diag_json(R.field.diag);
    r.diagnostics["constraint"] = R.constraint;
    r.diagnostics["target"] = R.target;
    r.diagnostics["model"] = model_json(M);
    r.provenance = {{"L", L}, {"n", n}, {"tol", tol}};
    r.warnings = R.field.warnings;
    r.tables.push_back(grid_table(R.field, "field", {{"geometry", "torus"}, {"L", L}, {"n", n}}));
    return r;
  };
}

Runner gravitating(TaskInputs& in) {
  const ModelSpec M = read_model(in.inputs);
  const StringConfiguration c = read_strings(in.inputs);
  double G;
  if (in.inputs.has("four_pi_G")) {
    if (in.inputs.has("G")) throw ValidationError("give G or four_pi_G, not both");
    G = in.inputs.number("four_pi_G", std::nullopt, between(0.0, 0.1)) / (4.0 * pi);
  } else {
    G = in.inputs.number("G", std::nullopt, between(0.0, 0.1 / (4.0 * pi)));
  }
  GravitatingOptions o;
  o.radial.n = in.grid.integer("n", 3001, between(101, 1000001));
  o.radial.r_max = in.grid.number("r_max", 0.0, nonnegative());
  o.planar = read_planar(in);
  o.tol = in.tolerance.number("outer_tol", 1e-7, positive());
  o.max_outer = in.tolerance.integer("max_outer", 60, between(1, 10000));
  return [=] {
    const auto S = gravitating_solve(M, c, G, o);
    const auto rep = string_report(S);
    TaskResult r;
    r.diagnostics = {{"deficit", rep.deficit},
                     {"energy", rep.energy},
                     {"bps_energy", S.bps_energy},
                     {"total_curvature", rep.total_curvature},
                     {"complete", rep.complete},
                     {"reduction_defect", S.reduction_defect},
                     {"total_laplacian_defect", S.total_laplacian_defect},
                     {"flux", S.field.diag.flux},
                     {"G", G},
                     {"model", model_json(M)}};
    r.diagnostics["threshold"] = std::isfinite(rep.threshold) ? json(rep.threshold) : json("infinity");
    r.provenance = {{"outer_iterations", S.outer_iterations}, {"history", S.history},
                    {"curvature_tail", S.curvature_tail},      {"outer_tol", o.tol},
                    {"geometry", S.field.kind == GeometryKind::radial ? "radial" : "disk"}};
    r.warnings = S.field.warnings;
    if (S.field.kind == GeometryKind::radial) {
      Table t{"radial_summary", {"r", "v", "exp_eta", "K_eta"}, {}, nullptr};
      const double dt = S.field.h;
      const std::size_t n = S.eta.size();
      for (std::size_t k = 2; k + 2 < n; ++k) {
        const double ett = (-S.eta[k - 2] + 16 * S.eta[k - 1] - 30 * S.eta[k] + 16 * S.eta[k + 1] - S.eta[k + 2]) /
                           (12 * dt * dt);
        const double rr = S.field.r[k];
        t.rows.push_back({rr, S.field.v(k), std::exp(S.eta[k]), -0.5 * std::exp(-S.eta[k]) * ett / (rr * rr)});
      }
      r.tables.push_back(std::move(t));
    } else {
      r.tables.push_back(grid_table(S.field, "field", {{"geometry", "disk"}, {"R", S.field.extent}, {"h", S.field.h}}));
    }
    return r;
  };
}

} // namespace

const std::vector<Task>& task_registry() {
  static const std::vector<Task> tasks = {
      {"anisotropic_torus_minimum", "optimal ring-torus ratio for moduli kappa1, kappa2 (or gamma)", aniso_minimum},
      {"compact_solve", "vortex equation on the flat torus of side L", compact},
      {"completeness", "geodesic completeness of a string metric", completeness},
      {"gauss_bonnet", "curvature data and Gauss-Bonnet check of a sphere or ring torus", gauss_bonnet},
      {"gravitating_solve", "self-gravitating vortex strings", gravitating},
      {"helfrich_scan", "Helfrich energy of ring tori on an (a, tau) grid", helfrich_scan},
      {"helfrich_torus", "Helfrich energy of one ring torus, closed form and quadrature", helfrich_torus},
      {"letelier_strings", "conical metric of Dirac-source strings", letelier},
      {"model_check", "consistency check of a vortex model", model_check},
      {"nirenberg_flow", "prescribed-curvature heat flow on the flat torus", nirenberg_flow},
      {"planar_solve", "vortex equation on a disk by Newton", planar},
      {"radial_solve", "radially symmetric vortex profile", radial},
      {"sandwich_solve", "vortex equation by monotone iteration", sandwich},
      {"shape_residual", "residual of the shape equation on a sphere or ring torus", shape},
      {"sigma_strings", "sigma-model strings from a rational map", sigma_strings},
      {"sphere_minimum", "minimizing sphere of the full Helfrich energy", sphere_minimum},
      {"topological_bounds", "genus bounds on the anisotropic energy", bounds},
      {"torus_minimum", "minimizing ring torus of the full Helfrich energy", torus_minimum},
  };
  return tasks;
}

const Task& find_task(const std::string& name) {
  for (const auto& t : task_registry())
    if (t.name == name) return t;
  throw ValidationError("unknown task '" + name + "' (see list-tasks)");
}

Runner prepare_task(const RunConfig& config) {
  const Task& t = find_task(config.task);
  TaskInputs in(config);
  Runner r = t.prepare(in);
  in.finish();
  return r;
}

} // namespace curvlab::cli
