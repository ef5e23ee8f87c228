#include "app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace stentflow {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

ConfigError bad_value(const std::string& key, const std::string& value, const std::string& why) {
  return ConfigError("BadValue", key + " = '" + value + "': " + why);
}

double parse_number(const std::string& key, const std::string& text) {
  auto one = [&](std::string_view s) {
    double v = 0.0;
    const std::string t = trim(s);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) throw bad_value(key, text, "not a number");
    return v;
  };
  const auto slash = text.find('/');
  const double v = slash == std::string::npos
                       ? one(text)
                       : one(std::string_view(text).substr(0, slash)) / one(std::string_view(text).substr(slash + 1));
  if (!std::isfinite(v)) throw bad_value(key, text, "not finite");
  return v;
}

double positive(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (!(v > 0.0)) throw bad_value(key, text, "must be positive");
  return v;
}

double non_negative(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v < 0.0) throw bad_value(key, text, "must be >= 0");
  return v;
}

int positive_int(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) throw bad_value(key, text, "must be a positive integer");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw bad_value(key, text, "expected true or false");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Key {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

ObstacleSpec& obstacle_of(RunConfig& c, const std::string& key) {
  if (!c.obstacle) throw ConfigError("BadValue", key + " given with obstacle = none");
  return *c.obstacle;
}

const std::map<std::string, Key>& keys() {
  using C = RunConfig;
  using S = const std::string&;
  auto real = [](double C::*field, double (*check)(S, S)) {
    return Key{[field, check](C& c, S k, S v) { c.*field = check(k, v); },
               [field](const C& c) { return num(c.*field); }};
  };
  auto flow = [](double FlowData::*field) {
    return Key{[field](C& c, S k, S v) { c.flow.*field = parse_number(k, v); },
               [field](const C& c) { return num(c.flow.*field); }};
  };
  auto strip = [](double StripSpec::*field, double (*check)(S, S)) {
    return Key{[field, check](C& c, S k, S v) { c.strip.*field = check(k, v); },
               [field](const C& c) { return num(c.strip.*field); }};
  };
  auto refine = [](double RefineSpec::*field, double (*check)(S, S)) {
    return Key{[field, check](C& c, S k, S v) { c.direct.refine.*field = check(k, v); },
               [field](const C& c) { return num(c.direct.refine.*field); }};
  };
  auto solver_real = [](double SolverConfig::*field) {
    return Key{[field](C& c, S k, S v) { c.direct.solver.*field = positive(k, v); },
               [field](const C& c) { return num(c.direct.solver.*field); }};
  };
  auto solver_int = [](int SolverConfig::*field) {
    return Key{[field](C& c, S k, S v) { c.direct.solver.*field = positive_int(k, v); },
               [field](const C& c) { return std::to_string(c.direct.solver.*field); }};
  };
  auto int_key = [](int C::*field) {
    return Key{[field](C& c, S k, S v) { c.*field = positive_int(k, v); },
               [field](const C& c) { return std::to_string(c.*field); }};
  };
  auto obstacle_real = [](double ObstacleSpec::*field) {
    return Key{[field](C& c, S k, S v) { obstacle_of(c, k).*field = parse_number(k, v); },
               [field](const C& c) { return c.obstacle ? num((*c.obstacle).*field) : std::string("-"); }};
  };

  static const std::map<std::string, Key> table = {
      {"case",
       {[](C& c, S k, S v) {
          const auto f = flow_case_from_string(v);
          if (!f) throw bad_value(k, v, "expected collateral or aneurysm");
          c.flow.flow_case = *f;
        },
        [](const C& c) { return std::string(to_string(c.flow.flow_case)); }}},
      {"eps", {[](C& c, S k, S v) { c.eps = non_negative(k, v); }, [](const C& c) { return num(c.eps); }}},
      {"eps_list",
       {[](C& c, S k, S v) {
          c.eps_list.clear();
          std::istringstream in(v);
          for (std::string item; std::getline(in, item, ',');) c.eps_list.push_back(positive(k, trim(item)));
          if (c.eps_list.empty()) throw bad_value(k, v, "empty list");
        },
        [](const C& c) {
          std::string s;
          for (double e : c.eps_list) s += (s.empty() ? "" : ", ") + num(e);
          return s;
        }}},
      {"p_in", flow(&FlowData::p_in)},
      {"p_out1", flow(&FlowData::p_out1)},
      {"p_out2", flow(&FlowData::p_out2)},
      {"obstacle",
       {[](C& c, S k, S v) {
          if (v == "none")
            c.obstacle.reset();
          else if (v == "disk")
            c.obstacle = c.obstacle.value_or(ObstacleSpec{});
          else
            throw bad_value(k, v, "expected disk or none");
        },
        [](const C& c) { return std::string(c.obstacle ? "disk" : "none"); }}},
      {"obstacle.cx",
       {[](C& c, S k, S v) { obstacle_of(c, k).center.x = parse_number(k, v); },
        [](const C& c) { return c.obstacle ? num(c.obstacle->center.x) : std::string("-"); }}},
      {"obstacle.cy",
       {[](C& c, S k, S v) { obstacle_of(c, k).center.y = parse_number(k, v); },
        [](const C& c) { return c.obstacle ? num(c.obstacle->center.y) : std::string("-"); }}},
      {"obstacle.r", obstacle_real(&ObstacleSpec::radius)},
      {"strip.L", strip(&StripSpec::L, positive)},
      {"strip.h_near", strip(&StripSpec::h_near, positive)},
      {"strip.h_far", strip(&StripSpec::h_far, positive)},
      {"strip.h_obstacle", strip(&StripSpec::h_obstacle, non_negative)},
      {"strip.obstacle_grading", strip(&StripSpec::obstacle_grading, positive)},
      {"strip.grading", strip(&StripSpec::grading, positive)},
      {"strip.near_halo", strip(&StripSpec::near_halo, non_negative)},
      {"strip.min_angle", strip(&StripSpec::min_angle_deg, positive)},
      {"mesh.h",
       {[](C& c, S k, S v) { c.direct.h = positive(k, v); }, [](const C& c) { return num(c.direct.h); }}},
      {"mesh.obstacle_factor", refine(&RefineSpec::obstacle_factor, positive)},
      {"mesh.cells_per_period", refine(&RefineSpec::cells_per_period, positive)},
      {"mesh.corner_factor", refine(&RefineSpec::corner_factor, positive)},
      {"mesh.grading", refine(&RefineSpec::grading, positive)},
      {"mesh.min_angle", refine(&RefineSpec::min_angle_deg, positive)},
      {"mesh.h_sub", real(&C::h_sub, positive)},
      {"mesh.h_sub_interface", real(&C::h_sub_interface, positive)},
      {"solver.method",
       {[](C& c, S k, S v) {
          const auto m = solve_method_from_string(v);
          if (!m) throw bad_value(k, v, "expected uzawa_cg or direct");
          c.direct.solver.method = *m;
        },
        [](const C& c) { return std::string(to_string(c.direct.solver.method)); }}},
      {"solver.inner",
       {[](C& c, S k, S v) {
          const auto m = inner_solver_from_string(v);
          if (!m) throw bad_value(k, v, "expected cholesky or ic_cg");
          c.direct.solver.inner = *m;
        },
        [](const C& c) { return std::string(to_string(c.direct.solver.inner)); }}},
      {"solver.schur",
       {[](C& c, S k, S v) {
          const auto m = schur_preconditioner_from_string(v);
          if (!m) throw bad_value(k, v, "expected pressure_mass or none");
          c.direct.solver.schur_preconditioner = *m;
        },
        [](const C& c) { return std::string(to_string(c.direct.solver.schur_preconditioner)); }}},
      {"solver.outer_tol", solver_real(&SolverConfig::outer_tol)},
      {"solver.inner_tol", solver_real(&SolverConfig::inner_tol)},
      {"solver.max_outer", solver_int(&SolverConfig::max_outer)},
      {"solver.max_inner", solver_int(&SolverConfig::max_inner)},
      {"solver.log",
       {[](C& c, S k, S v) { c.direct.solver.log = parse_bool(k, v); },
        [](const C& c) { return std::string(c.direct.solver.log ? "true" : "false"); }}},
      {"cell.identity_tol", real(&C::identity_tol, positive)},
      {"cell.section_tol", real(&C::section_tol, positive)},
      {"cell.pressure_section_tol", real(&C::pressure_section_tol, positive)},
      {"constants", {[](C& c, S, S v) { c.constants_path = v; }, [](const C& c) { return c.constants_path; }}},
      {"output_dir",
       {[](C& c, S k, S v) {
          if (v.empty()) throw bad_value(k, v, "empty path");
          c.output_dir = v;
        },
        [](const C& c) { return c.output_dir; }}},
      {"profile_samples", int_key(&C::profile_samples)},
      {"interface_samples", int_key(&C::interface_samples)},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  const auto it = keys().find(key);
  if (it == keys().end()) throw ConfigError("UnknownKey", "unknown configuration key '" + key + "'");
  it->second.set(c, key, value);
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  // "obstacle" is applied first so that the coordinate keys may appear anywhere.
  std::set<std::string> seen;
  std::vector<std::pair<std::string, std::string>> entries;
  int line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("SyntaxError", "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!keys().count(key)) throw ConfigError("UnknownKey", "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("DuplicateKey", "line " + std::to_string(line_no) + ": key '" + key + "' given twice");
    entries.emplace_back(key, value);
  }
  std::stable_partition(entries.begin(), entries.end(), [](const auto& e) { return e.first == "obstacle"; });
  for (const auto& [k, v] : entries) set_config_value(c, k, v);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("MissingFile", "cannot open configuration file " + path);
  return parse_config(f);
}

std::string canonical_text(const RunConfig& c) {
  std::string s;
  for (const auto& [name, key] : keys()) s += name + " = " + key.get(c) + '\n';
  return s;
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical_text(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string provenance(const RunConfig& c) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "stentflow %s config %016llx", kVersion,
                static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

}  // namespace stentflow
