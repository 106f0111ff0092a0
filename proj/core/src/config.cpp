#include "polykin/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace polykin {

namespace {

std::string trim(const std::string& s) {
  auto a = s.begin();
  while (a != s.end() && std::isspace(static_cast<unsigned char>(*a))) ++a;
  auto b = s.end();
  while (b != a && std::isspace(static_cast<unsigned char>(*(b - 1)))) --b;
  return std::string(a, b);
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct Entry {
  std::string value;
  int line = 0;
};

double parse_double(const std::string& key, const Entry& e) {
  try {
    std::size_t pos = 0;
    double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" + key +
                      "' expects a number, got '" + e.value + "'");
  }
}

int parse_int(const std::string& key, const Entry& e) {
  double v = parse_double(key, e);
  int i = int(v);
  if (double(i) != v)
    throw ConfigError("config line " + std::to_string(e.line) + ": key '" + key +
                      "' expects an integer");
  return i;
}

bool parse_bool(const std::string& key, const Entry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError("config line " + std::to_string(e.line) + ": key '" + key +
                    "' expects true/false");
}

}  // namespace

const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Kinetic: return "kinetic";
    case SolverKind::Hierarchy: return "hierarchy";
    case SolverKind::OldroydB: return "oldroyd_b";
    case SolverKind::Both: return "both";
  }
  return "?";
}

const char* to_string(InitialU k) {
  switch (k) {
    case InitialU::Zero: return "zero";
    case InitialU::TaylorGreen: return "taylor_green";
  }
  return "?";
}

const char* to_string(InitialF k) {
  switch (k) {
    case InitialF::Equilibrium: return "equilibrium";
    case InitialF::StretchedGaussian: return "stretched_gaussian";
    case InitialF::ExponentialTail: return "exponential_tail";
  }
  return "?";
}

const char* to_string(ClosureKind k) {
  switch (k) {
    case ClosureKind::ExactHookean: return "exact_hookean";
    case ClosureKind::ZeroTruncation: return "zero_truncation";
    case ClosureKind::EquilibriumFactorization: return "equilibrium_factorization";
  }
  return "?";
}

SimConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, Entry> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto pos = s.find('=');
    if (pos == std::string::npos)
      throw ConfigError(origin + " line " + std::to_string(lineno) +
                        ": expected key=value");
    std::string key = trim(s.substr(0, pos));
    std::string value = trim(s.substr(pos + 1));
    if (kv.count(key))
      throw ConfigError(origin + " line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    kv[key] = {value, lineno};
  }

  SimConfig c;
  auto take = [&](const std::string& key) -> const Entry* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    return &it->second;
  };
  std::map<std::string, bool> known;
  auto known_key = [&](const std::string& k) { known[k] = true; };

  auto num = [&](const char* key, double& field) {
    known_key(key);
    if (auto* e = take(key)) field = parse_double(key, *e);
  };
  auto integer = [&](const char* key, int& field) {
    known_key(key);
    if (auto* e = take(key)) field = parse_int(key, *e);
  };

  num("nu1", c.nu1);
  num("nu2", c.nu2);
  num("epsilon", c.epsilon);
  num("K", c.K);
  num("q", c.q);
  integer("nx", c.nx);
  integer("nm", c.nm);
  num("lm", c.lm);
  num("alpha", c.alpha);
  num("T", c.T);
  num("taylor_green_amplitude", c.taylor_green_amplitude);
  num("stretch_c", c.stretch_c);
  num("tail_c", c.tail_c);
  num("sample_interval", c.sample_interval);
  num("snapshot_interval", c.snapshot_interval);
  integer("hierarchy_degree", c.hierarchy_degree);

  known_key("dt");
  if (auto* e = take("dt")) {
    if (e->value == "auto") {
      c.dt_auto = true;
    } else {
      c.dt = parse_double("dt", *e);
      c.dt_auto = false;
    }
  }
  known_key("solver");
  if (auto* e = take("solver")) {
    if (e->value == "kinetic") c.solver = SolverKind::Kinetic;
    else if (e->value == "hierarchy") c.solver = SolverKind::Hierarchy;
    else if (e->value == "oldroyd_b") c.solver = SolverKind::OldroydB;
    else if (e->value == "both") c.solver = SolverKind::Both;
    else
      throw ConfigError("config line " + std::to_string(e->line) +
                        ": solver must be kinetic|hierarchy|oldroyd_b|both");
  }
  known_key("closure");
  if (auto* e = take("closure")) {
    if (e->value == "exact_hookean") c.closure = ClosureKind::ExactHookean;
    else if (e->value == "zero_truncation") c.closure = ClosureKind::ZeroTruncation;
    else if (e->value == "equilibrium_factorization")
      c.closure = ClosureKind::EquilibriumFactorization;
    else
      throw ConfigError("config line " + std::to_string(e->line) +
                        ": closure must be exact_hookean|zero_truncation|"
                        "equilibrium_factorization");
  }
  known_key("initial_u");
  if (auto* e = take("initial_u")) {
    if (e->value == "zero") c.initial_u = InitialU::Zero;
    else if (e->value == "taylor_green") c.initial_u = InitialU::TaylorGreen;
    else
      throw ConfigError("config line " + std::to_string(e->line) +
                        ": initial_u must be zero|taylor_green");
  }
  known_key("initial_f");
  if (auto* e = take("initial_f")) {
    if (e->value == "equilibrium") c.initial_f = InitialF::Equilibrium;
    else if (e->value == "stretched_gaussian") c.initial_f = InitialF::StretchedGaussian;
    else if (e->value == "exponential_tail") c.initial_f = InitialF::ExponentialTail;
    else
      throw ConfigError("config line " + std::to_string(e->line) +
                        ": initial_f must be equilibrium|stretched_gaussian|"
                        "exponential_tail");
  }
  known_key("output_dir");
  if (auto* e = take("output_dir")) c.output_dir = e->value;
  known_key("seed");
  if (auto* e = take("seed")) c.seed = std::uint64_t(parse_double("seed", *e));
  known_key("quiet");
  if (auto* e = take("quiet")) c.quiet = parse_bool("quiet", *e);

  for (const auto& [key, entry] : kv)
    if (!known.count(key))
      throw ConfigError("config line " + std::to_string(entry.line) +
                        ": unknown key '" + key + "'");

  c.validate();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void SimConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0))
      throw ConfigError(std::string("config: key '") + key +
                        "' must be positive");
  };
  positive("nu1", nu1);
  positive("nu2", nu2);
  positive("epsilon", epsilon);
  positive("K", K);
  if (q < 1.0) throw ConfigError("config: key 'q' must satisfy q >= 1");
  if (!power_of_two(nx) || nx < 4)
    throw ConfigError("config: key 'nx' must be a power of two >= 4");
  if (nm < 8 || nm % 2 != 0)
    throw ConfigError("config: key 'nm' must be an even integer >= 8");
  positive("lm", lm);
  if (alpha < 0.0) throw ConfigError("config: key 'alpha' must be >= 0");
  if (effective_alpha() > 0.5 * lm + 1e-12)
    throw ConfigError(
        "config: keys 'alpha' and 'lm' violate alpha <= lm/2 (alpha = " +
        std::to_string(effective_alpha()) + ", lm = " + std::to_string(lm) + ")");
  if (!dt_auto && !(dt > 0.0))
    throw ConfigError("config: key 'dt' must be positive or 'auto'");
  if (T < 0.0) throw ConfigError("config: key 'T' must be >= 0");
  if (sample_interval <= 0.0)
    throw ConfigError("config: key 'sample_interval' must be positive");
  if (snapshot_interval < 0.0)
    throw ConfigError("config: key 'snapshot_interval' must be >= 0");
  bool needs_hookean = solver == SolverKind::OldroydB || solver == SolverKind::Both;
  if ((needs_hookean || (solver == SolverKind::Hierarchy &&
                         closure == ClosureKind::ExactHookean)) &&
      q != 1.0)
    throw ConfigError("config: keys 'q' and 'solver': exact closure requires q=1");
  if (solver == SolverKind::Hierarchy && hierarchy_degree < 2 * int(q))
    throw ConfigError(
        "config: keys 'hierarchy_degree' and 'q': stress needs degree >= 2q");
}

std::string SimConfig::canonical() const {
  char buf[160];
  std::ostringstream out;
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    out << buf;
  };
  put("K", K);
  out << "T=";
  std::snprintf(buf, sizeof buf, "%.17g\n", T);
  out << buf;
  put("alpha", effective_alpha());
  out << "closure=" << to_string(closure) << "\n";
  if (dt_auto)
    out << "dt=auto\n";
  else
    put("dt", dt);
  put("epsilon", epsilon);
  out << "hierarchy_degree=" << hierarchy_degree << "\n";
  out << "initial_f=" << to_string(initial_f) << "\n";
  out << "initial_u=" << to_string(initial_u) << "\n";
  put("lm", lm);
  out << "nm=" << nm << "\n";
  out << "nu1=";
  std::snprintf(buf, sizeof buf, "%.17g\n", nu1);
  out << buf;
  put("nu2", nu2);
  out << "nx=" << nx << "\n";
  put("q", q);
  put("sample_interval", sample_interval);
  out << "seed=" << seed << "\n";
  put("snapshot_interval", snapshot_interval);
  out << "solver=" << to_string(solver) << "\n";
  put("stretch_c", stretch_c);
  put("tail_c", tail_c);
  put("taylor_green_amplitude", taylor_green_amplitude);
  return out.str();
}

std::uint64_t SimConfig::hash() const {
  // FNV-1a over the canonical serialization.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace polykin
