#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stentflow/stentflow.h"

namespace {

int fail(sf_status st) {
  std::fprintf(stderr, "error [%s]: %s\n", sf_last_error_kind(), sf_last_error());
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes flow through a periodic row of obstacles: cell problems, homogenized model, direct solves"};
  app.set_version_flag("--version", std::string(sf_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  sf_run_options opt{1, 0, 0, 0};
  bool skip_varkappa = false, vtk = false, dry_run = false;

  const std::pair<const char*, const char*> commands[] = {
      {"mesh", "write the macro mesh for eps and the strip mesh"},
      {"cell", "solve the cell problems and write the homogenized constants"},
      {"solve", "direct Stokes solve in the perforated domain for eps"},
      {"homog", "zero- and first-order homogenized solution and flow rate"},
      {"converge", "errors of the approximations over eps_list and fitted slopes"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override one key, key=value (repeatable)");
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--vtk", vtk, "also write VTK files");
    sub->add_flag("--dry-run", dry_run, "print the plan and exit");
    if (std::string(name) == "cell") sub->add_flag("--skip-varkappa", skip_varkappa, "skip the varkappa problem");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : SF_ERR_CONFIG;
  }
  opt.skip_varkappa = skip_varkappa;
  opt.vtk = vtk;
  opt.dry_run = dry_run;

  sf_config* cfg = nullptr;
  sf_status st = config_path.empty() ? sf_config_new(&cfg) : sf_config_load(config_path.c_str(), &cfg);
  if (st != SF_OK) return fail(st);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error [BadValue]: --set expects key=value, got '%s'\n", kv.c_str());
      sf_config_free(cfg);
      return SF_ERR_CONFIG;
    }
    st = sf_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != SF_OK) {
      sf_config_free(cfg);
      return fail(st);
    }
  }

  const char* summary = nullptr;
  st = sf_run(cfg, app.get_subcommands().front()->get_name().c_str(), &opt, &summary);
  if (summary && *summary) std::fputs(summary, stdout);
  sf_config_free(cfg);
  if (st != SF_OK) return fail(st);
  return 0;
}
