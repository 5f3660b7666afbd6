#include "idft/cli.hpp"
#include "idft/error.hpp"
#include "idft/exact.hpp"
#include "idft/jacobi.hpp"
#include "idft/ks.hpp"
#include "idft/limits.hpp"
#include "idft/system.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace idft {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr unsigned long kSeed = 20240611;

struct Flags {
  std::string command;
  std::string config;
  std::string out = ".";
  long grid_n = 0;
  double tol = 0.0;
  std::string functional = "hartree";
  std::string values;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::validation_error, "cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << fmt(r[i]);
    f << '\n';
  }
}

void write_density(const fs::path& path, const GridFunction& g, const char* col = "rho") {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({g.grid.x(i), g[i]});
  write_csv(path, {"r", col}, rows);
}

void write_table(const fs::path& path, const Table2D& t) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < t.grid.n; ++i)
    for (std::size_t j = 0; j < t.grid.n; ++j) rows.push_back({t.grid.x(i), t.grid.x(j), t.at(i, j)});
  write_csv(path, {"r", "rp", "value"}, rows);
}

std::vector<double> parse_values(const std::string& text, std::vector<double> fallback) {
  if (text.empty()) return fallback;
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::validation_error, "--values: cannot parse '" + item + "'");
    }
  }
  return v;
}

std::string label(const SystemSpec& s, int l) { return s.species[std::size_t(l)].label; }

// Descriptive tags for the decomposition terms and the definitions they instantiate.
json breakdown_json(const EnergyBreakdown& b, const SystemSpec& s) {
  json j;
  for (int l = 0; l < 2; ++l) {
    if (s.species[std::size_t(l)].count < 1) continue;
    const std::string t = label(s, l);
    const std::size_t li = std::size_t(l);
    j["T_S_" + t] = b.ks_kinetic[li];
    j["E_H_" + t] = b.hartree[li];
    j["E_XC_interaction_" + t] = b.xc_interaction[li];
    j["E_XC_kinetic_" + t] = b.xc_kinetic[li];
    j["E_XC_" + t] = b.xc(l);
    j["V_int_" + t] = b.vint[li];
  }
  j["E_H12"] = b.hartree12;
  j["E_C12"] = b.c12;
  j["total"] = b.total;
  j["ks_kinetic_symbolic"] = b.ks_kinetic_symbolic;
  return j;
}

json definitions() {
  return {{"T_S_<l>", "noninteracting kinetic energy of the species-l Kohn-Sham reference"},
          {"E_H_<l>", "1/2 int int rho_l(r) rho_l(r') u_l(r - r')"},
          {"E_XC_interaction_<l>", "1/2 int int [gamma_l(r, r') - rho_l(r) rho_l(r')] u_l(r - r')"},
          {"E_XC_kinetic_<l>", "interacting kinetic energy of species l minus T_S_<l> (c.m. and kinetic correlation)"},
          {"E_H12", "int int rho_1(r) rho_2(r') u12(r - r')"},
          {"E_C12", "int int [gamma_12(r, r') - rho_1(r) rho_2(r')] u12(r - r')"},
          {"V_int_<l>", "int v_int_l(r) rho_l(r)"},
          {"total", "sum of all terms above"}};
}

json grid_json(const SystemSpec& s) {
  return {{"xmin", s.grid.xmin}, {"xmax", s.grid.xmax}, {"n", s.grid.n}, {"stencil", s.solver.stencil}};
}

struct Context {
  Flags flags;
  SystemSpec spec;
  fs::path out;
  json result;
};

InternalWavefunction exact_ground(const SystemSpec& spec) {
  const JacobiMap map = build_jacobi_map(spec.counts(), spec.masses());
  SolveOptions opt;
  opt.seed = kSeed;
  return solve_ground(build_internal_hamiltonian(spec, map), opt);
}

json wavefunction_json(const InternalWavefunction& psi) {
  json j{{"E_int", psi.energy},
         {"residual", psi.residual},
         {"sector_weight", psi.sector_weight},
         {"symmetry_defect", psi.symmetry_defect},
         {"edge_density", psi.edge_density},
         {"matvecs", psi.matvecs}};
  j["next_energy_in_sector"] = std::isfinite(psi.next_energy) ? json(psi.next_energy) : json(nullptr);
  j["reduced_masses"] = psi.map.reduced_masses;
  return j;
}

// Two-variable tables are written on at most 256 points per axis.
Grid1D table_grid(const SystemSpec& s) {
  Grid1D g = s.grid.grid();
  g.n = std::min<std::size_t>(g.n, 256);
  return g;
}

void cmd_solve_exact(Context& c) {
  const InternalWavefunction psi = exact_ground(c.spec);
  const ExactOracle o = make_oracle(psi);
  c.result["exact"] = wavefunction_json(psi);
  c.result["exact"]["interacting_kinetic"] = interacting_kinetic(psi);
  c.result["breakdown"] = breakdown_json(energy_breakdown_exact(o), c.spec);
  for (int l = 0; l < 2; ++l) {
    const std::size_t li = std::size_t(l);
    const std::string t = label(c.spec, l);
    if (o.densities.rho[li]) {
      write_density(c.out / ("rho_" + t + ".csv"), *o.densities.rho[li]);
      c.result["integrals"]["rho_" + t] = integrate(*o.densities.rho[li]);
    }
    if (o.densities.rho_p[li]) {
      write_density(c.out / ("rho_p_" + t + ".csv"), *o.densities.rho_p[li], "rho_p");
      c.result["integrals"]["rho_p_" + t] = integrate(*o.densities.rho_p[li]);
    }
    if (o.densities.gamma[li]) {
      write_table(c.out / ("gamma_" + t + ".csv"), pair_density(psi, l, table_grid(c.spec)));
      c.result["integrals"]["gamma_" + t] = o.densities.gamma[li]->integral();
    }
  }
  if (o.densities.gamma12) {
    write_table(c.out / "gamma_12.csv", coupling_pair_density(psi, table_grid(c.spec)));
    c.result["integrals"]["gamma_12"] = o.densities.gamma12->integral();
  }
  c.result["metadata"]["pair_table_n"] = table_grid(c.spec).n;
}

void cmd_solve_ks(Context& c) {
  const FunctionalSpec f = functional_from_name(c.flags.functional);
  const ScfOptions opt = ScfOptions::from(c.spec);
  const KSState st = scf_solve(c.spec, f, opt);
  c.result["ks"] = {{"iterations", st.iterations}, {"residual", st.residual}, {"residual_history", st.residual_history}};
  for (int l = 0; l < 2; ++l) {
    const KSSpecies& s = st.species[std::size_t(l)];
    if (!s.active()) continue;
    const std::string t = label(c.spec, l);
    c.result["ks"]["eigenvalues_" + t] = s.eigenvalues;
    c.result["ks"]["occupations_" + t] = s.occupations;
    write_density(c.out / ("rho_" + t + ".csv"), s.rho);
    write_density(c.out / ("v_S_" + t + ".csv"), s.potential, "v_S");
  }
  c.result["breakdown"] = breakdown_json(ks_energy(st, f, c.spec, opt), c.spec);
}

void cmd_invert_ks(Context& c) {
  if (c.spec.species[1].count != 0)
    throw Error(ErrorKind::validation_error, "invert-ks works on a single-species system (species2.count = 0)");
  const InternalWavefunction psi = exact_ground(c.spec);
  const GridFunction rho = internal_density(psi, 0);
  const double m = c.spec.species[0].mass;
  const InversionResult inv = invert_ks_single_orbital(rho, m, c.spec.solver.stencil);
  const GridFunction back = ground_density(inv.potential, m, c.spec.species[0].count, c.spec.solver.stencil);
  const std::string t = label(c.spec, 0);
  write_density(c.out / ("rho_" + t + ".csv"), rho);
  write_density(c.out / ("v_S_" + t + ".csv"), inv.potential, "v_S");
  c.result["exact"] = wavefunction_json(psi);
  c.result["inversion"] = {{"epsilon", inv.epsilon},
                           {"retained_r_min", rho.grid.x(inv.lo)},
                           {"retained_r_max", rho.grid.x(inv.hi)},
                           {"round_trip_density_l1", l1_distance(rho, back)}};
}

void cmd_compare(Context& c) {
  const InternalWavefunction psi = exact_ground(c.spec);
  const ExactOracle o = make_oracle(psi);
  const FunctionalSpec f = functional_from_name(c.flags.functional == "exact-oracle" ? "hartree" : c.flags.functional);
  const ScfOptions opt = ScfOptions::from(c.spec);
  const KSState st = scf_solve(c.spec, f, opt);
  const EnergyBreakdown kb = ks_energy(st, f, c.spec, opt);
  std::array<double, 2> ts{};
  for (int l = 0; l < 2; ++l)
    if (st.species[std::size_t(l)].active()) ts[std::size_t(l)] = ks_kinetic(st.species[std::size_t(l)], opt.stencil);
  c.result["exact"] = wavefunction_json(psi);
  c.result["ks_functional"] = c.flags.functional;
  c.result["E_exact"] = psi.energy;
  c.result["E_ks"] = kb.total;
  c.result["energy_gap"] = kb.total - psi.energy;
  c.result["breakdown_ks"] = breakdown_json(kb, c.spec);
  c.result["breakdown_exact_with_ks_reference"] = breakdown_json(energy_breakdown_exact(o, ts), c.spec);
  for (int l = 0; l < 2; ++l) {
    const std::size_t li = std::size_t(l);
    if (!o.densities.rho[li]) continue;
    const std::string t = label(c.spec, l);
    c.result["density_l1_" + t] = l1_distance(*o.densities.rho[li], st.species[li].rho);
    write_density(c.out / ("rho_" + t + ".csv"), *o.densities.rho[li]);
    write_density(c.out / ("rho_ks_" + t + ".csv"), st.species[li].rho);
  }
}

json report_json(const LimitReport& r) {
  json j{{"parameter", r.parameter}, {"values", r.values}, {"observables", r.observables}, {"rows", r.rows}};
  json e = json::array();
  for (double x : r.exponents) e.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  j["fitted_exponents"] = e;
  j["monotone_decreasing"] = r.monotone;
  j["passed"] = r.passed;
  j["notes"] = r.notes;
  return j;
}

void write_report(Context& c, const LimitReport& r) {
  std::vector<std::string> header{r.parameter};
  header.insert(header.end(), r.observables.begin(), r.observables.end());
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    std::vector<double> row{r.values[i]};
    row.insert(row.end(), r.rows[i].begin(), r.rows[i].end());
    rows.push_back(row);
  }
  write_csv(c.out / "sweep.csv", header, rows);
  c.result["report"] = report_json(r);
}

void cmd_sweep_mass(Context& c) {
  write_report(c, mass_ratio_sweep(c.spec, parse_values(c.flags.values, {10, 100, 1000, 10000})));
}

void cmd_sweep_classical(Context& c) {
  write_report(c, classical_limit_sweep(c.spec, parse_values(c.flags.values, {1, 10, 100})));
}

void cmd_clamped(Context& c) {
  const FunctionalSpec f = functional_from_name(c.flags.functional);
  const int nh = c.spec.species[0].count;
  if (nh != 1 && nh != 2) throw Error(ErrorKind::validation_error, "clamped-scan handles one or two heavy particles");
  const auto seps = parse_values(c.flags.values, {nh == 1 ? 0.0 : 1.0});
  std::vector<std::vector<double>> rows;
  json pts = json::array();
  std::size_t best = 0;
  for (std::size_t i = 0; i < seps.size(); ++i) {
    const double d = seps[i];
    const std::vector<double> pos = nh == 1 ? std::vector<double>{0.0} : std::vector<double>{-0.5 * d, 0.5 * d};
    const ClampedPoint p = clamped_nuclei_solve(c.spec, pos, f);
    rows.push_back({d, p.light_energy, p.heavy_pair, p.heavy_vint, p.total});
    pts.push_back({{"separation", d}, {"total", p.total}, {"light", breakdown_json(p.light, c.spec)}});
    if (p.total < rows[best][4]) best = i;
  }
  write_csv(c.out / "sweep.csv", {"separation", "light_energy", "heavy_pair", "heavy_vint", "total"}, rows);
  c.result["points"] = pts;
  c.result["minimum_separation"] = rows[best][0];
}

// Used by `check` when no configuration is given: two bosons and one light particle on springs.
SystemSpec demo_spec() {
  SystemSpec s;
  s.species[0] = {"1", 2, 1.0, Statistics::boson};
  s.species[1] = {"2", 1, 1.0, Statistics::boson};
  s.u11 = {PairKind::harmonic, 1, 1, 1, 1};
  s.u12 = {PairKind::harmonic, 1, 1, 1, 1};
  s.grid = {-6, 6, 24};
  return s;
}

// Fast invariant suite.
void cmd_check(Context& c, std::ostream& out, bool& all) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0), mass(0.1, 10.0);
  std::uniform_int_distribution<int> cnt(0, 4);
  json lines = json::array();
  auto line = [&](const std::string& name, bool ok, double value) {
    out << (ok ? "PASS " : "FAIL ") << name << " value=" << fmt(value) << '\n';
    lines.push_back({{"check", name}, {"pass", ok}, {"value", value}});
    all = all && ok;
  };

  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    int n1 = 1 + cnt(rng) % 4, n2 = cnt(rng);
    if (n1 + n2 < 2) n2 = 1;
    const JacobiMap map = build_jacobi_map({n1, n2}, {mass(rng), mass(rng)});
    std::vector<double> p(static_cast<std::size_t>(n1 + n2));
    for (auto& x : p) x = uni(rng);
    worst = std::max(worst, kinetic_split_residual(map, p));
  }
  line("kinetic_split", worst <= 1e-12, worst);

  double rt = 0.0;
  for (int t = 0; t < 200; ++t) {
    const JacobiMap map = build_jacobi_map({2, 2}, {mass(rng), mass(rng)});
    std::vector<double> x(4);
    for (auto& v : x) v = 5 * uni(rng);
    const auto back = from_internal(map, to_internal(map, x));
    for (std::size_t i = 0; i < 4; ++i) rt = std::max(rt, std::abs(back[i] - x[i]));
  }
  line("coordinate_round_trip", rt <= 1e-12, rt);

  const bool cfg_ok = parse_config(serialize_config(c.spec)) == c.spec;
  line("config_round_trip", cfg_ok, cfg_ok ? 0.0 : 1.0);

  const Grid1D g = make_grid(-8, 8, 256);
  const GridFunction f = sample(g, [](double x) { return std::exp(-x * x) * (1 + 0.3 * x); });
  const auto ft = fourier(f);
  double nf = 0, nk = 0;
  for (double v : f.values) nf += v * v;
  for (auto v : ft.values) nk += std::norm(v);
  const double unit = std::abs(nf * g.spacing() - nk * ft.grid.spacing());
  line("fourier_unitary", unit <= 1e-12, unit);

  // Small exact solve for the configured system: normalizations.
  SystemSpec small = c.spec;
  small.grid.n = std::min<long>(small.grid.n, small.total_count() > 2 ? 24 : 256);
  try {
    const JacobiMap map = build_jacobi_map(small.counts(), small.masses());
    SolveOptions so;
    so.seed = kSeed;
    so.edge_tol = -1;
    so.check_degeneracy = false;
    const InternalWavefunction psi = solve_ground(build_internal_hamiltonian(small, map), so);
    double norm = 0.0;
    for (double a : psi.amplitudes) norm += a * a;
    norm *= psi.tensor().cell();
    line("wavefunction_norm", std::abs(norm - 1) <= 1e-10, norm);
    for (int l = 0; l < 2; ++l) {
      const int n = small.counts()[std::size_t(l)];
      if (n < 1) continue;
      const double i1 = integrate(internal_density(psi, l));
      line("rho_norm_" + label(small, l), std::abs(i1 - n) <= 1e-8, i1);
      if (n >= 2) {
        const double i2 = pair_density(psi, l).integral();
        line("gamma_norm_" + label(small, l), std::abs(i2 - n * (n - 1)) <= 1e-6, i2);
      }
    }
  } catch (const Error& e) {
    line(std::string("small_exact_solve:") + std::string(to_string(e.kind())), false, NAN);
  }
  c.result["checks"] = lines;
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  Flags flags;
  CLI::App app{"Internal-frame density functional laboratory for 1D few-body systems"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve-exact", "exact internal ground state, densities and energy decomposition"},
      {"solve-ks", "internal Kohn-Sham self-consistent solution"},
      {"invert-ks", "single-orbital Kohn-Sham inversion of the exact density"},
      {"compare", "exact versus Kohn-Sham energies and densities"},
      {"sweep-mass-ratio", "heavy-mass limit sweep"},
      {"sweep-classical", "classical point-like limit sweep"},
      {"clamped-scan", "light species around clamped heavy particles"},
      {"check", "fast invariant suite"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "configuration file")->required(name != "check");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--grid-n", flags.grid_n, "override grid.n");
    sub->add_option("--tol", flags.tol, "override solver.tol");
    sub->add_option("--functional", flags.functional, "none | hartree | sic | exact-oracle")
        ->check(CLI::IsMember({"none", "hartree", "sic", "exact-oracle"}));
    sub->add_option("--values", flags.values, "comma-separated sweep values");
    sub->callback([&flags, name] { flags.command = name; });
  }

  auto fail = [&](const std::string& kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail("usage-error", e.what(), 1);
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    Context c;
    c.flags = flags;
    std::string text;
    if (!flags.config.empty()) {
      std::ifstream in(flags.config);
      if (!in) throw Error(ErrorKind::parse_error, "cannot read config " + flags.config);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
      c.spec = parse_config(text);
    } else {
      c.spec = demo_spec();
    }
    if (flags.grid_n != 0) c.spec.grid.n = flags.grid_n;
    if (flags.tol != 0.0) c.spec.solver.tol = flags.tol;
    validate(c.spec);
    c.out = flags.out;
    fs::create_directories(c.out);

    c.result["command"] = flags.command;
    c.result["metadata"] = {{"config_hash", fnv1a_hex(serialize_config(c.spec))},
                            {"grid", grid_json(c.spec)},
                            {"functional", flags.functional},
                            {"seed", kSeed}};
    if (!flags.values.empty()) c.result["metadata"]["values"] = flags.values;
    c.result["definitions"] = definitions();

    bool all = true;
    if (flags.command == "solve-exact") cmd_solve_exact(c);
    else if (flags.command == "solve-ks") cmd_solve_ks(c);
    else if (flags.command == "invert-ks") cmd_invert_ks(c);
    else if (flags.command == "compare") cmd_compare(c);
    else if (flags.command == "sweep-mass-ratio") cmd_sweep_mass(c);
    else if (flags.command == "sweep-classical") cmd_sweep_classical(c);
    else if (flags.command == "clamped-scan") cmd_clamped(c);
    else if (flags.command == "check") cmd_check(c, out, all);

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Wall-clock time is the only run-dependent field; compare outputs with it removed.
    c.result["metadata"]["volatile"] = {{"wall_seconds", secs}};
    std::ofstream f(c.out / "result.json");
    f << c.result.dump(2) << '\n';
    if (flags.command != "check") out << "wrote " << (c.out / "result.json").string() << '\n';
    return all ? 0 : 2;
  } catch (const Error& e) {
    return fail(std::string(to_string(e.kind())), e.what(), is_validation(e.kind()) ? 1 : 2);
  } catch (const std::exception& e) {
    return fail("internal-error", e.what(), 2);
  }
}

} // namespace idft
