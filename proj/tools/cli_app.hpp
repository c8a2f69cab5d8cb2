#pragma once

// Run configuration and the four subcommands of the qme tool. Kept apart from
// main() so the tests can drive them directly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qme/evolution.hpp"
#include "qme/fock_oracle.hpp"
#include "qme/measurement.hpp"

namespace qme::cli {

using nlohmann::ordered_json;

enum ExitCode { ok = 0, config_error = 2, numerical_failure = 3, verify_failure = 4 };

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  std::vector<double> points() const {
    std::vector<double> v;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) v.push_back(lo + step * double(i));
    return v;
  }
};

struct RunConfig {
  SystemParams params{};
  double time = 2.0;
  Outcome outcome = Outcome::e;
  std::string mode = "parity";
  Range t{0.0, 4.0, 0.05};
  Range temp{0.0, 1.2, 0.02};
  Range p{-6.0, 6.0, 0.1};
  Range p_fidelity{-2.0, 2.0, 0.25};  // outcomes searched for the max-fidelity grid
  std::uint64_t seed = 1;
  std::size_t starts = 32;
  std::string weighting = "probability";
  int cutoff = 30;
  double dt = 1e-3;
  double lambda_scale = 1.0;  // verify only: corrupts the analytic lambda
  std::string out;
  std::string format = "csv";

  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::vector<std::pair<std::string, std::string>> echo() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

inline long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<long>(x);
}

/// Evaluates f, mapping an impossible conditioning outcome to NaN.
template <class F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const ZeroProbability&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Ordering for max_element that ranks NaN below everything.
inline bool less_by(const std::vector<double>& a, const std::vector<double>& b, std::size_t c) {
  if (std::isnan(b[c])) return false;
  return std::isnan(a[c]) || a[c] < b[c];
}

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = detail::trim(raw);
  auto d = [&] { return detail::to_double(key, v); };
  try {
    if (key == "kappa") params.kappa = d();
    else if (key == "gamma") params.gamma = d();
    else if (key == "temp") params.temperature = d();
    else if (key == "time") time = d();
    else if (key == "seed") seed = static_cast<std::uint64_t>(detail::to_long(key, v));
    else if (key == "outcome") outcome = outcome_from_string(v);
    else if (key == "interaction") params.interaction = interaction_from_string(v);
    else if (key == "mode") mode = v;
    else if (key == "out") out = v;
    else if (key == "format") format = v;
    else if (key == "t_min") t.lo = d();
    else if (key == "t_max") t.hi = d();
    else if (key == "t_step") t.step = d();
    else if (key == "temp_min") temp.lo = d();
    else if (key == "temp_max") temp.hi = d();
    else if (key == "temp_step") temp.step = d();
    else if (key == "p_min") p.lo = d();
    else if (key == "p_max") p.hi = d();
    else if (key == "p_step") p.step = d();
    else if (key == "pf_min") p_fidelity.lo = d();
    else if (key == "pf_max") p_fidelity.hi = d();
    else if (key == "pf_step") p_fidelity.step = d();
    else if (key == "starts") starts = static_cast<std::size_t>(detail::to_long(key, v));
    else if (key == "weighting") weighting = v;
    else if (key == "cutoff") cutoff = static_cast<int>(detail::to_long(key, v));
    else if (key == "dt") dt = d();
    else if (key == "lambda_scale") lambda_scale = d();
    else throw ConfigError("unknown key '" + key + "'");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

inline void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(time >= 0.0)) throw ConfigError("time must be non-negative");
  for (const auto& [name, r] : {std::pair{"t", t}, {"temp", temp}, {"p", p}, {"pf", p_fidelity}}) {
    if (!(r.step > 0.0) || !(r.hi >= r.lo)) throw ConfigError(std::string(name) + " range is empty or has step <= 0");
  }
  if (t.lo < 0.0 || temp.lo < 0.0) throw ConfigError("time and temperature ranges must be non-negative");
  if (mode != "momentum" && mode != "parity") throw ConfigError("mode must be momentum or parity");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (weighting != "probability" && weighting != "uniform") throw ConfigError("weighting must be probability or uniform");
  if (starts == 0) throw ConfigError("starts must be positive");
  if (cutoff < 4) throw ConfigError("cutoff must be at least 4");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(lambda_scale > 0.0)) throw ConfigError("lambda_scale must be positive");
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  using detail::num;
  return {{"kappa", num(params.kappa)},
          {"gamma", num(params.gamma)},
          {"temp", num(params.temperature)},
          {"time", num(time)},
          {"seed", std::to_string(seed)},
          {"outcome", to_string(outcome)},
          {"interaction", to_string(params.interaction)},
          {"mode", mode},
          {"format", format},
          {"t_min", num(t.lo)},
          {"t_max", num(t.hi)},
          {"t_step", num(t.step)},
          {"temp_min", num(temp.lo)},
          {"temp_max", num(temp.hi)},
          {"temp_step", num(temp.step)},
          {"p_min", num(p.lo)},
          {"p_max", num(p.hi)},
          {"p_step", num(p.step)},
          {"pf_min", num(p_fidelity.lo)},
          {"pf_max", num(p_fidelity.hi)},
          {"pf_step", num(p_fidelity.step)},
          {"starts", std::to_string(starts)},
          {"weighting", weighting},
          {"cutoff", std::to_string(cutoff)},
          {"dt", num(dt)},
          {"lambda_scale", num(lambda_scale)}};
}

/// Reads key=value lines; blank lines and '#' comments are ignored.
inline void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    cfg.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

// ---------------------------------------------------------------------------
// Output

/// A table plus the notes that go into its header.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> notes;
  ordered_json summary = ordered_json::object();
  std::vector<Table> tables;
};

inline ordered_json to_json(const Report& r) {
  ordered_json j;
  j["command"] = r.command;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : r.config) cfg[k] = v;
  j["config"] = cfg;
  if (!r.notes.empty()) j["notes"] = r.notes;
  j["summary"] = r.summary;
  for (const auto& t : r.tables) {
    ordered_json tj;
    tj["columns"] = t.columns;
    tj["rows"] = t.rows;
    j["tables"][t.name] = tj;
  }
  return j;
}

inline std::string csv_table(const Report& r, const Table& t) {
  std::ostringstream os;
  os << "# qme " << r.command << " " << t.name << "\n";
  for (const auto& [k, v] : r.config) os << "# " << k << "=" << v << "\n";
  for (const auto& n : r.notes) os << "# note: " << n << "\n";
  for (const auto& [k, v] : r.summary.items()) os << "# " << k << ": " << v.dump() << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  char buf[40];
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.10g", row[c]);
      os << (c ? "," : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

/// Path of table k: the first table takes `out` itself, later ones get a
/// "_<name>" suffix before the extension.
inline std::string table_path(const std::string& out, const std::string& name, std::size_t k) {
  if (k == 0) return out;
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + "_" + name;
  return out.substr(0, dot) + "_" + name + out.substr(dot);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  os << text;
}

/// Writes the report: one JSON document, or one CSV file per table. Without
/// --out everything goes to `console`.
inline void emit(const Report& r, const RunConfig& cfg, std::ostream& console) {
  if (cfg.format == "json") {
    const std::string text = to_json(r).dump(2) + "\n";
    if (cfg.out.empty()) console << text;
    else write_text(cfg.out, text);
    return;
  }
  if (r.tables.empty()) {
    Table empty{"summary", {}, {}};
    const std::string text = csv_table(r, empty);
    if (cfg.out.empty()) console << text;
    else write_text(cfg.out, text);
    return;
  }
  for (std::size_t k = 0; k < r.tables.size(); ++k) {
    const std::string text = csv_table(r, r.tables[k]);
    if (cfg.out.empty()) console << text;
    else write_text(table_path(cfg.out, r.tables[k].name, k), text);
  }
}

// ---------------------------------------------------------------------------
// Commands

inline Report cmd_evolve(const RunConfig& cfg) {
  Report r{"evolve", cfg.echo(), {}, {}, {}};
  const SystemParams& p = cfg.params;

  const auto w2 = evolve_two_mode(p, cfg.time);
  const double pg = integrate_full(w2.components[0] + w2.components[3]).real();
  r.summary["p_g"] = pg;
  r.summary["p_e"] = 1.0 - pg;

  Table fn{"functions", {"t", "im_lambda", "im_mu", "re_nu", "p_g", "p_e"}, {}};
  for (double t : cfg.t.points()) {
    const auto f = evolution_functions(entangling_kappa(p), p.gamma, delta_of(p), t);
    const auto w = evolve_two_mode(p, t);
    const double g = integrate_full(w.components[0] + w.components[3]).real();
    fn.rows.push_back({t, f.lambda.imag(), f.mu.imag(), f.nu().real(), g, 1.0 - g});
  }

  // single qubit-oscillator Wigner matrix at the requested time, alpha = x + i p
  Table wig{"wigner", {"x", "p", "w_gg", "w_ee", "re_w_ge", "im_w_ge"}, {}};
  const auto w1 = evolve_single(p, cfg.time);
  const auto axis = cfg.p.points();
  wig.rows.resize(axis.size() * axis.size());
  parallel_for(axis.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < axis.size(); ++j) {
      const auto m = w1.at({cplx(axis[i], axis[j])});
      wig.rows[i * axis.size() + j] = {axis[i], axis[j], m(0, 0).real(), m(1, 1).real(), m(0, 1).real(),
                                       m(0, 1).imag()};
    }
  });
  r.tables = {std::move(fn), std::move(wig)};
  return r;
}

inline Report cmd_bell(const RunConfig& cfg) {
  Report r{"bell", cfg.echo(), {}, {}, {}};
  r.notes.push_back("frozen settings: ideal-limit optimum at t=" + detail::num(large_time_reference) +
                    ", T=0, rescaled to the effective time (2/kappa)(1 - exp(-kappa t/2))");
  BellStrategy st;
  st.seed = cfg.seed;
  st.starts = cfg.starts;
  const auto frozen = ideal_reference_settings(cfg.outcome, large_time_reference, 0.0, st);
  ordered_json fs = ordered_json::array();
  for (const auto& z : frozen.scaled) fs.push_back({z.real(), z.imag()});
  r.summary["frozen_settings_times_t"] = fs;

  const auto temps = cfg.temp.points();
  const auto times = cfg.t.points();
  Table surf{"surface", {"T", "t", "bell_ideal", "bell_lower", "max_ideal_2", "max_lower_2"}, {}};
  surf.rows.resize(temps.size() * times.size());
  parallel_for(temps.size(), [&](std::size_t i) {
    SystemParams ideal = cfg.params;
    ideal.kappa = 0.0;
    ideal.gamma = 0.0;
    ideal.temperature = temps[i];
    SystemParams real = cfg.params;
    real.temperature = temps[i];
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double bi = detail::or_nan([&] { return bell_lower_bound(ideal, times[j], frozen, cfg.outcome); });
      const double bl = detail::or_nan([&] { return bell_lower_bound(real, times[j], frozen, cfg.outcome); });
      surf.rows[i * times.size() + j] = {temps[i], times[j], bi, bl, std::fmax(bi, 2.0), std::fmax(bl, 2.0)};
    }
  });
  const auto best = std::max_element(surf.rows.begin(), surf.rows.end(),
                                     [](const auto& a, const auto& b) { return detail::less_by(a, b, 3); });
  r.summary["max_lower_bound"] = {{"value", (*best)[3]}, {"T", (*best)[0]}, {"t", (*best)[1]}};
  r.summary["bell_max_formula_T0"] = bell_max_formula(0.0);
  r.summary["critical_temperature"] = critical_temperature();
  r.tables = {std::move(surf)};
  return r;
}

namespace detail {

inline std::array<double, 4> sector_probabilities(const std::array<ParitySector, 4>& s) {
  return {s[0].probability, s[1].probability, s[2].probability, s[3].probability};
}

inline double sector_negativity(const ParitySector& s) { return s.state ? negativity(*s.state) : 0.0; }

}  // namespace detail

inline Report cmd_reciprocate(const RunConfig& cfg) {
  Report r{"reciprocate", cfg.echo(), {}, {}, {}};
  r.notes.push_back("grid axes assumed to be (temperature T, interaction time t); both stages last t");
  const auto temps = cfg.temp.points();
  const auto times = cfg.t.points();
  const SystemParams& p = cfg.params;

  if (cfg.mode == "parity") {
    const auto weighting = cfg.weighting == "uniform" ? SectorWeighting::Uniform : SectorWeighting::Probability;
    r.notes.push_back("sector average weighted by " + cfg.weighting);
    auto row_at = [&](double temp, double t) -> std::vector<double> {
      SystemParams q = p;
      q.temperature = temp;
      std::vector<double> row(11, std::numeric_limits<double>::quiet_NaN());
      row[0] = temp;
      row[1] = t;
      WignerMatrix<2, 2> w4;
      try {
        w4 = reciprocation_state(q, t, t, cfg.outcome).first;
      } catch (const ZeroProbability&) {
        return row;
      }
      const auto secs = reciprocate_parity_all(w4);
      row.resize(2);
      for (const auto& s : secs) row.push_back(s.probability);
      for (const auto& s : secs) row.push_back(detail::sector_negativity(s));
      row.push_back(averaged_negativity(secs, weighting));
      return row;
    };
    Table grid{"grid", {"T", "t", "p_pp", "p_pm", "p_mp", "p_mm", "neg_pp", "neg_pm", "neg_mp", "neg_mm", "neg_avg"}, {}};
    grid.rows.resize(temps.size() * times.size());
    parallel_for(grid.rows.size(), [&](std::size_t k) {
      grid.rows[k] = row_at(temps[k / times.size()], times[k % times.size()]);
    });
    const auto point = row_at(p.temperature, cfg.time);
    r.summary["sector_probabilities"] = std::vector<double>(point.begin() + 2, point.begin() + 6);
    r.summary["sector_negativities"] = std::vector<double>(point.begin() + 6, point.begin() + 10);
    r.summary["averaged_negativity"] = point[10];
    const auto best = std::max_element(grid.rows.begin(), grid.rows.end(),
                                       [](const auto& a, const auto& b) { return detail::less_by(a, b, 10); });
    r.summary["max_averaged_negativity"] = {{"value", (*best)[10]}, {"T", (*best)[0]}, {"t", (*best)[1]}};
    r.tables = {std::move(grid)};
    return r;
  }

  // momentum
  const auto w4 = reciprocation_state(p, cfg.time, cfg.time, cfg.outcome).first;
  const MomentumConditioner mc(w4);
  const auto axis = cfg.p.points();
  Table surf{"surface", {"p_a", "p_b", "density", "fidelity", "negativity"}, {}};
  surf.rows.resize(axis.size() * axis.size());
  parallel_for(axis.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < axis.size(); ++j) {
      std::vector<double> row{axis[i], axis[j], mc.density(axis[i], axis[j]), 0.0, 0.0};
      if (row[2] >= zero_probability_cutoff) {
        const auto st = mc(axis[i], axis[j]).first;
        row[3] = fidelity_psi_plus(st);
        row[4] = negativity(st);
      }
      surf.rows[i * axis.size() + j] = std::move(row);
    }
  });

  const auto pf = cfg.p_fidelity.points();
  Table grid{"grid", {"T", "t", "max_fidelity", "p_a", "p_b"}, {}};
  grid.rows.resize(temps.size() * times.size());
  parallel_for(grid.rows.size(), [&](std::size_t k) {
    SystemParams q = p;
    q.temperature = temps[k / times.size()];
    const double t = times[k % times.size()];
    WignerMatrix<2, 2> w;
    try {
      w = reciprocation_state(q, t, t, cfg.outcome).first;
    } catch (const ZeroProbability&) {
      grid.rows[k] = {q.temperature, t, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0};
      return;
    }
    const MomentumConditioner m(w);
    std::vector<double> row{q.temperature, t, 0.0, 0.0, 0.0};
    for (double a : pf)
      for (double b : pf) {
        if (m.density(a, b) < zero_probability_cutoff) continue;
        const double f = fidelity_psi_plus(m(a, b).first);
        if (f > row[2]) row = {q.temperature, t, f, a, b};
      }
    grid.rows[k] = std::move(row);
  });
  const auto at0 = mc(0.0, 0.0);
  r.summary["fidelity_origin"] = fidelity_psi_plus(at0.first);
  r.summary["negativity_origin"] = negativity(at0.first);
  r.summary["density_origin"] = at0.second;
  r.tables = {std::move(surf), std::move(grid)};
  return r;
}

// ---------------------------------------------------------------------------
// Oracle verification

struct Check {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string error;
};

namespace detail {

/// Closed-form one-mode Wigner matrix with lambda scaled (1 = correct).
inline WignerMatrix<1, 1> evolve_single_scaled(const SystemParams& p, double t, double lambda_scale) {
  const auto f = evolution_functions(p, t);
  const GaussianSum<1> wt{thermal_form(delta_of(p))};
  const cplx lam = lambda_scale * f.lambda;
  NormalModeVector<1> n;
  n.v[0] = shift(wt, lam);
  n.v[1] = shift(wt, -lam);
  n.v[2] = multiply_exponential(wt, f.mu, f.mu, I * std::exp(f.nu()));
  n.v[3] = multiply_exponential(wt, -f.mu, -f.mu, -I * std::exp(f.nu()));
  return to_pauli(n);
}

inline const std::array<cplx, 6>& probe_points() {
  static const std::array<cplx, 6> pts{cplx(0.0, 0.0), cplx(0.3, -0.4), cplx(-0.7, 1.1),
                                       cplx(1.2, 0.5), cplx(-0.5, -1.5), cplx(0.9, 1.9)};
  return pts;
}

template <typename Fn>
Check run_check(std::string name, double tol, Fn&& fn) {
  Check c{std::move(name), 0.0, tol, false, {}};
  try {
    c.deviation = fn();
    c.pass = c.deviation < tol;
  } catch (const fock::TruncationOverflow& e) {
    c.error = std::string("TruncationOverflow: ") + e.what();
  } catch (const std::exception& e) {
    c.error = e.what();
  }
  return c;
}

}  // namespace detail

inline std::vector<Check> verify_checks(const RunConfig& cfg) {
  std::vector<Check> checks;
  const int n = cfg.cutoff;
  const double t_check = std::min(cfg.time, 1.5);

  checks.push_back(detail::run_check("unitary_limit", 1e-6, [&] {
    SystemParams p;
    p.temperature = cfg.params.temperature;
    const fock::Layout l{1, 1, n};
    const auto u = fock::unitary_single(n, t_check);
    const fock::Dense rho = u * fock::ground_thermal_state(l, thermal_occupation(p.temperature)) * u.adjoint();
    const auto w = detail::evolve_single_scaled(p, t_check, cfg.lambda_scale);
    double worst = 0.0;
    for (const cplx a : detail::probe_points())
      worst = std::max(worst, (fock::wigner_point(rho, l, {a}) - w.at({a})).cwiseAbs().maxCoeff());
    return worst;
  }));

  checks.push_back(detail::run_check("master_equation", 1e-4, [&] {
    const SystemParams& p = cfg.params;
    const fock::Layout l{1, 1, n};
    const fock::Dense rho = fock::integrate(fock::ground_thermal_state(l, thermal_occupation(p.temperature)),
                                            fock::model_for(l, {{0, 0}}, p), t_check, cfg.dt);
    const auto w = detail::evolve_single_scaled(p, t_check, cfg.lambda_scale);
    double worst = 0.0;
    for (const cplx a : detail::probe_points())
      worst = std::max(worst, (fock::wigner_point(rho, l, {a}) - w.at({a})).cwiseAbs().maxCoeff());
    return worst;
  }));

  checks.push_back(detail::run_check("kernel_route", 1e-10, [&] {
    const SystemParams& p = cfg.params;
    const auto initial = to_normal_modes(ground_state_times(GaussianSum<1>{thermal_form(delta_of(p))}));
    const auto routed = to_pauli(evolve_generic(initial, p, cfg.time));
    const auto closed = evolve_single(p, cfg.time);
    double worst = 0.0;
    for (const cplx a : detail::probe_points())
      worst = std::max(worst, (routed.at({a}) - closed.at({a})).cwiseAbs().maxCoeff());
    return worst;
  }));

  // both protocol stages on a small two-mode Fock space
  const int n2 = std::max(4, n / 3);
  const double t_short = std::min(cfg.time, 0.3);
  checks.push_back(detail::run_check("reciprocation_parity", 1e-6, [&] {
    const SystemParams& p = cfg.params;
    const fock::Layout l1{1, 2, n2};
    const fock::Layout l2{2, 2, n2};
    const auto rho1 = fock::integrate(fock::ground_thermal_state(l1, thermal_occupation(p.temperature)),
                                      fock::model_for(l1, {{0, 0}, {0, 1}}, p), t_short, 2.0 * cfg.dt);
    const auto rf = fock::measure_qubit(rho1, l1, 0, cfg.outcome).first;
    const auto rho2 = fock::integrate(fock::attach_ground_qubits(rf, l2), fock::model_for(l2, {{0, 0}, {1, 1}}, p),
                                      t_short, 2.0 * cfg.dt);
    const auto secs = reciprocate_parity_all(reciprocation_state(p, t_short, t_short, cfg.outcome).first);
    double worst = 0.0;
    for (const auto& s : secs) {
      const auto [r, prob] = fock::qubit_state_after_parity(rho2, l2, s.parity_a, s.parity_b);
      worst = std::max(worst, std::abs(prob - s.probability));
      if (s.state) worst = std::max(worst, (r / prob - s.state->rho).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  return checks;
}

inline Report cmd_verify(const RunConfig& cfg, bool& all_pass) {
  Report r{"verify", cfg.echo(), {}, {}, {}};
  const auto checks = verify_checks(cfg);
  all_pass = true;
  ordered_json arr = ordered_json::array();
  Table t{"checks", {"index", "pass", "deviation", "tolerance"}, {}};
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const auto& c = checks[k];
    all_pass = all_pass && c.pass;
    ordered_json j{{"name", c.name}, {"pass", c.pass}, {"max_deviation", c.deviation}, {"tolerance", c.tolerance}};
    if (!c.error.empty()) j["error"] = c.error;
    arr.push_back(j);
    t.rows.push_back({double(k), c.pass ? 1.0 : 0.0, c.deviation, c.tolerance});
    r.notes.push_back(std::to_string(k) + " " + c.name + (c.error.empty() ? "" : " error: " + c.error));
  }
  r.summary["checks"] = arr;
  r.summary["all_pass"] = all_pass;
  r.tables = {std::move(t)};
  return r;
}

}  // namespace qme::cli
