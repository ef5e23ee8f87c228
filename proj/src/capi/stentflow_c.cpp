#include <fstream>
#include <sstream>

#include "app/commands.hpp"
#include "stentflow/stentflow.h"

struct sf_config {
  stentflow::RunConfig config;
  std::string text;
};

struct sf_constants {
  stentflow::CellConstants constants;
};

namespace {

thread_local std::string last_error, last_kind, last_summary;

template <class F>
sf_status guard(F f) {
  last_error.clear();
  last_kind.clear();
  try {
    return f();
  } catch (const stentflow::ConfigError& e) {
    last_error = e.what();
    last_kind = e.kind();
    return SF_ERR_CONFIG;
  } catch (const stentflow::Error& e) {
    last_error = e.what();
    last_kind = e.kind();
    return SF_ERR_NUMERICAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    last_kind = "Internal";
    return SF_ERR_INTERNAL;
  }
}

sf_status null_argument(const char* what) {
  last_error = std::string("null argument: ") + what;
  last_kind = "InvalidArgument";
  return SF_ERR_CONFIG;
}

sf_status wrap(stentflow::RunConfig c, sf_config** out) {
  auto* h = new sf_config{std::move(c), {}};
  h->text = stentflow::canonical_text(h->config);
  *out = h;
  return SF_OK;
}

}  // namespace

extern "C" {

const char* sf_version(void) { return stentflow::kVersion; }
const char* sf_last_error(void) { return last_error.c_str(); }
const char* sf_last_error_kind(void) { return last_kind.c_str(); }

sf_status sf_config_new(sf_config** out) {
  if (!out) return null_argument("out");
  return guard([&] { return wrap({}, out); });
}

sf_status sf_config_load(const char* path, sf_config** out) {
  if (!path || !out) return null_argument(path ? "out" : "path");
  return guard([&] { return wrap(stentflow::load_config(path), out); });
}

sf_status sf_config_parse(const char* text, sf_config** out) {
  if (!text || !out) return null_argument(text ? "out" : "text");
  return guard([&] {
    std::istringstream in(text);
    return wrap(stentflow::parse_config(in), out);
  });
}

sf_status sf_config_set(sf_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_argument("cfg, key or value");
  return guard([&] {
    stentflow::RunConfig copy = cfg->config;
    stentflow::set_config_value(copy, key, value);
    cfg->config = std::move(copy);
    cfg->text = stentflow::canonical_text(cfg->config);
    return SF_OK;
  });
}

uint64_t sf_config_hash(const sf_config* cfg) { return cfg ? stentflow::config_hash(cfg->config) : 0; }
const char* sf_config_text(const sf_config* cfg) { return cfg ? cfg->text.c_str() : ""; }
void sf_config_free(sf_config* cfg) { delete cfg; }

sf_status sf_run(const sf_config* cfg, const char* command, const sf_run_options* options, const char** summary) {
  if (!cfg || !command) return null_argument(cfg ? "command" : "cfg");
  last_summary.clear();
  const sf_status st = guard([&] {
    const auto cmd = stentflow::command_from_string(command);
    if (!cmd) throw stentflow::ConfigError("UnknownCommand", std::string("unknown command '") + command + "'");
    stentflow::RunOptions o;
    if (options) {
      o.threads = options->threads;
      o.skip_varkappa = options->skip_varkappa != 0;
      o.vtk = options->vtk != 0;
      o.dry_run = options->dry_run != 0;
    }
    std::ostringstream text;
    const int code = stentflow::run_command(*cmd, cfg->config, o, text);
    last_summary = text.str();
    if (code != 0) {
      last_error = "numerical gate failed";
      last_kind = "GateFailure";
    }
    return code == 0 ? SF_OK : SF_ERR_NUMERICAL;
  });
  if (summary) *summary = last_summary.c_str();
  return st;
}

sf_status sf_constants_compute(const sf_config* cfg, sf_constants** out) {
  if (!cfg || !out) return null_argument(cfg ? "out" : "cfg");
  return guard([&] {
    const auto& c = cfg->config;
    if (!c.obstacle) throw stentflow::ConfigError("EmptyObstacle", "constants need an obstacle");
    const stentflow::Strip strip = stentflow::make_strip(c.obstacle, c.strip);
    stentflow::CellConfig cc;
    cc.solver = c.direct.solver;
    cc.assembly = c.direct.assembly;
    const auto beta = stentflow::solve_beta(strip, cc);
    const auto ups = stentflow::solve_upsilon(strip, cc);
    const auto chi = stentflow::solve_chi(strip, cc);
    *out = new sf_constants{stentflow::extract_constants(beta, ups, chi)};
    return SF_OK;
  });
}

sf_status sf_constants_load(const char* path, sf_constants** out) {
  if (!path || !out) return null_argument(path ? "out" : "path");
  return guard([&] {
    std::ifstream f(path);
    if (!f) throw stentflow::ConfigError("MissingFile", std::string("cannot open ") + path);
    *out = new sf_constants{stentflow::read_constants(f)};
    return SF_OK;
  });
}

sf_status sf_constants_get(const sf_constants* c, const char* name, double* value) {
  if (!c || !name || !value) return null_argument("c, name or value");
  const std::string n = name;
  const auto& k = c->constants;
  const std::pair<const char*, double> table[] = {{"beta1_plus", k.beta1_plus}, {"beta1_minus", k.beta1_minus},
                                                  {"ups1_plus", k.ups1_plus},   {"ups1_minus", k.ups1_minus},
                                                  {"eta_jump", k.eta_jump},     {"eta_plus", k.eta_plus},
                                                  {"eta_minus", k.eta_minus}};
  for (const auto& [key, v] : table) {
    if (n == key) {
      *value = v;
      return SF_OK;
    }
  }
  last_error = "unknown constant '" + n + "'";
  last_kind = "UnknownKey";
  return SF_ERR_CONFIG;
}

void sf_constants_free(sf_constants* c) { delete c; }

sf_status sf_flowrate_formula(const sf_config* cfg, const sf_constants* c, double eps, double* q) {
  if (!cfg || !c || !q) return null_argument("cfg, c or q");
  return guard([&] {
    *q = stentflow::flowrate_formula(stentflow::zero_order(cfg->config.flow), c->constants, eps);
    return SF_OK;
  });
}

}  // extern "C"
