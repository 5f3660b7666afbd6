#include "idft/system.hpp"
#include "idft/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace idft {

std::string_view to_string(Statistics s) { return s == Statistics::boson ? "boson" : "fermion"; }

std::string_view to_string(PairKind k) {
  switch (k) {
  case PairKind::none: return "none";
  case PairKind::gaussian: return "gaussian";
  case PairKind::soft_coulomb: return "soft_coulomb";
  case PairKind::harmonic: return "harmonic";
  }
  return "none";
}

std::string_view to_string(InternalKind k) {
  switch (k) {
  case InternalKind::none: return "none";
  case InternalKind::harmonic_trap: return "harmonic_trap";
  case InternalKind::gaussian_well: return "gaussian_well";
  }
  return "none";
}

double eval_pair_potential(const PotentialSpec& p, double x) {
  switch (p.kind) {
  case PairKind::none: return 0.0;
  case PairKind::gaussian: return p.A * std::exp(-x * x / (2.0 * p.s * p.s));
  case PairKind::soft_coulomb: return p.A / std::sqrt(x * x + p.a * p.a);
  case PairKind::harmonic: return 0.5 * p.k * x * x;
  }
  return 0.0;
}

double eval_internal_potential(const InternalPotentialSpec& p, double r) {
  switch (p.kind) {
  case InternalKind::none: return 0.0;
  case InternalKind::harmonic_trap: return 0.5 * p.k * r * r;
  case InternalKind::gaussian_well: return p.A * std::exp(-r * r / (2.0 * p.s * p.s));
  }
  return 0.0;
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::validation_error, field + ": " + why);
}

[[noreturn]] void parse_fail(int line, const std::string& why) {
  throw Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& v, int line) {
  double x = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || first == last) parse_fail(line, "not a number: '" + v + "'");
  if (!std::isfinite(x)) parse_fail(line, "non-finite number: '" + v + "'");
  return x;
}

long parse_integer(const std::string& v, int line) {
  const double x = parse_number(v, line);
  if (x != std::floor(x) || std::abs(x) > 1e15) parse_fail(line, "not an integer: '" + v + "'");
  return long(x);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

void validate(const SystemSpec& spec) {
  for (int l = 0; l < 2; ++l) {
    const auto& sp = spec.species[std::size_t(l)];
    const std::string sec = "species" + std::to_string(l + 1);
    if (sp.count < (l == 0 ? 1 : 0)) invalid(sec + ".count", l == 0 ? "must be >= 1" : "must be >= 0");
    if (!(sp.mass > 0) || !std::isfinite(sp.mass)) invalid(sec + ".mass", "must be positive");
  }
  const char* pair_names[3] = {"u11", "u22", "u12"};
  const PotentialSpec* pairs[3] = {&spec.u11, &spec.u22, &spec.u12};
  for (int i = 0; i < 3; ++i) {
    const auto& p = *pairs[i];
    const std::string sec = pair_names[i];
    if (p.kind == PairKind::gaussian && !(p.s > 0)) invalid(sec + ".s", "must be positive");
    if (p.kind == PairKind::soft_coulomb && !(p.a > 0)) invalid(sec + ".a", "must be positive");
  }
  for (int l = 0; l < 2; ++l) {
    const auto& v = spec.vint[std::size_t(l)];
    if (v.kind == InternalKind::gaussian_well && !(v.s > 0))
      invalid("vint" + std::to_string(l + 1) + ".s", "must be positive");
  }
  if (!(spec.grid.xmax > spec.grid.xmin)) invalid("grid.xmax", "must exceed grid.xmin");
  if (spec.grid.n < 8) invalid("grid.n", "must be >= 8");
  if (!(spec.solver.tol > 0)) invalid("solver.tol", "must be positive");
  if (!(spec.solver.mix > 0 && spec.solver.mix <= 1)) invalid("solver.mix", "must lie in (0, 1]");
  if (spec.solver.max_iter < 1) invalid("solver.max_iter", "must be >= 1");
  if (spec.solver.stencil != 3 && spec.solver.stencil != 5) invalid("solver.stencil", "must be 3 or 5");
}

SystemSpec parse_config(const std::string& text) {
  SystemSpec spec;
  std::istringstream in(text);
  std::string raw;
  std::set<std::string> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string body = trim(raw);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) parse_fail(line, "expected 'section.key = value'");
    const std::string lhs = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto dot = lhs.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
      parse_fail(line, "expected 'section.key' before '='");
    if (value.empty()) parse_fail(line, "missing value for '" + lhs + "'");
    const std::string section = lhs.substr(0, dot), key = lhs.substr(dot + 1);
    if (!seen.insert(lhs).second) parse_fail(line, "duplicate key '" + lhs + "'");

    auto unknown = [&] { parse_fail(line, "unknown key '" + lhs + "'"); };

    if (section == "species1" || section == "species2") {
      auto& sp = spec.species[section == "species1" ? 0 : 1];
      if (key == "count") sp.count = int(parse_integer(value, line));
      else if (key == "mass") sp.mass = parse_number(value, line);
      else if (key == "statistics") {
        if (value == "boson") sp.statistics = Statistics::boson;
        else if (value == "fermion") sp.statistics = Statistics::fermion;
        else invalid(lhs, "must be boson or fermion");
      } else unknown();
    } else if (section == "u11" || section == "u22" || section == "u12") {
      auto& p = section == "u11" ? spec.u11 : (section == "u22" ? spec.u22 : spec.u12);
      if (key == "kind") {
        if (value == "none") p.kind = PairKind::none;
        else if (value == "gaussian") p.kind = PairKind::gaussian;
        else if (value == "soft_coulomb") p.kind = PairKind::soft_coulomb;
        else if (value == "harmonic") p.kind = PairKind::harmonic;
        else invalid(lhs, "unknown potential kind '" + value + "'");
      } else if (key == "A") p.A = parse_number(value, line);
      else if (key == "s") p.s = parse_number(value, line);
      else if (key == "a") p.a = parse_number(value, line);
      else if (key == "k") p.k = parse_number(value, line);
      else unknown();
    } else if (section == "vint1" || section == "vint2") {
      auto& v = spec.vint[section == "vint1" ? 0 : 1];
      if (key == "kind") {
        if (value == "none") v.kind = InternalKind::none;
        else if (value == "harmonic_trap") v.kind = InternalKind::harmonic_trap;
        else if (value == "gaussian_well") v.kind = InternalKind::gaussian_well;
        else invalid(lhs, "unknown internal potential kind '" + value + "'");
      } else if (key == "A") v.A = parse_number(value, line);
      else if (key == "s") v.s = parse_number(value, line);
      else if (key == "k") v.k = parse_number(value, line);
      else unknown();
    } else if (section == "grid") {
      if (key == "xmin") spec.grid.xmin = parse_number(value, line);
      else if (key == "xmax") spec.grid.xmax = parse_number(value, line);
      else if (key == "n") spec.grid.n = parse_integer(value, line);
      else unknown();
    } else if (section == "solver") {
      if (key == "tol") spec.solver.tol = parse_number(value, line);
      else if (key == "mix") spec.solver.mix = parse_number(value, line);
      else if (key == "max_iter") spec.solver.max_iter = int(parse_integer(value, line));
      else if (key == "stencil") spec.solver.stencil = int(parse_integer(value, line));
      else unknown();
    } else {
      parse_fail(line, "unknown section '" + section + "'");
    }
  }
  validate(spec);
  return spec;
}

std::string serialize_config(const SystemSpec& spec) {
  std::ostringstream out;
  for (int l = 0; l < 2; ++l) {
    const auto& sp = spec.species[std::size_t(l)];
    const std::string sec = "species" + std::to_string(l + 1) + ".";
    out << sec << "count = " << sp.count << "\n"
        << sec << "mass = " << fmt(sp.mass) << "\n"
        << sec << "statistics = " << to_string(sp.statistics) << "\n";
  }
  const char* names[3] = {"u11", "u22", "u12"};
  const PotentialSpec* pairs[3] = {&spec.u11, &spec.u22, &spec.u12};
  for (int i = 0; i < 3; ++i) {
    const std::string sec = std::string(names[i]) + ".";
    out << sec << "kind = " << to_string(pairs[i]->kind) << "\n"
        << sec << "A = " << fmt(pairs[i]->A) << "\n"
        << sec << "s = " << fmt(pairs[i]->s) << "\n"
        << sec << "a = " << fmt(pairs[i]->a) << "\n"
        << sec << "k = " << fmt(pairs[i]->k) << "\n";
  }
  for (int l = 0; l < 2; ++l) {
    const auto& v = spec.vint[std::size_t(l)];
    const std::string sec = "vint" + std::to_string(l + 1) + ".";
    out << sec << "kind = " << to_string(v.kind) << "\n"
        << sec << "A = " << fmt(v.A) << "\n"
        << sec << "s = " << fmt(v.s) << "\n"
        << sec << "k = " << fmt(v.k) << "\n";
  }
  out << "grid.xmin = " << fmt(spec.grid.xmin) << "\n"
      << "grid.xmax = " << fmt(spec.grid.xmax) << "\n"
      << "grid.n = " << spec.grid.n << "\n"
      << "solver.tol = " << fmt(spec.solver.tol) << "\n"
      << "solver.mix = " << fmt(spec.solver.mix) << "\n"
      << "solver.max_iter = " << spec.solver.max_iter << "\n"
      << "solver.stencil = " << spec.solver.stencil << "\n";
  return out.str();
}

SystemSpec swap_species(const SystemSpec& spec) {
  SystemSpec out = spec;
  std::swap(out.species[0], out.species[1]);
  std::swap(out.species[0].label, out.species[1].label);
  std::swap(out.u11, out.u22);
  std::swap(out.vint[0], out.vint[1]);
  return out;
}

} // namespace idft
