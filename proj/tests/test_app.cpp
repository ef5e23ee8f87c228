#include <filesystem>
#include <fstream>
#include <sstream>

#include "app/commands.hpp"
#include "doctest.h"

using namespace stentflow;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error_kind(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stentflow_test_app_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

RunConfig quiet(RunConfig c) {
  c.direct.solver.log = false;
  return c;
}

}  // namespace

TEST_CASE("configuration defaults and parsing") {
  const RunConfig d = parse("");
  CHECK(d.flow.flow_case == FlowCase::Collateral);
  CHECK(d.flow.p_in == 2.0);
  CHECK(d.flow.p_out1 == 0.0);
  CHECK(d.flow.p_out2 == -1.0);
  CHECK(d.obstacle->radius == 3.0 / 16.0);
  CHECK(d.eps_list == std::vector<double>{0.25, 0.125, 0.0625});
  CHECK(d.direct.solver.method == SolveMethod::UzawaCG);

  const RunConfig c = parse(
      "# comment\n"
      "case = aneurysm\n"
      "  eps = 1/16  \n"
      "eps_list = 1/2, 1/4, 1/8, 1/16\n"
      "obstacle.r = 0.1\n"
      "solver.method = direct\n"
      "solver.log = false\n"
      "output_dir = results dir\n");
  CHECK(c.flow.flow_case == FlowCase::Aneurysm);
  CHECK(c.eps == 0.0625);
  CHECK(c.eps_list.size() == 4);
  CHECK(c.obstacle->radius == 0.1);
  CHECK(c.direct.solver.method == SolveMethod::Direct);
  CHECK_FALSE(c.direct.solver.log);
  CHECK(c.output_dir == "results dir");

  CHECK_FALSE(parse("obstacle = none\n").obstacle);
  CHECK(config_error_kind("bogus = 1\n") == "UnknownKey");
  CHECK(config_error_kind("eps = 1\neps = 2\n") == "DuplicateKey");
  CHECK(config_error_kind("mesh.h = -0.1\n") == "BadValue");
  CHECK(config_error_kind("mesh.h = 0.1x\n") == "BadValue");
  CHECK(config_error_kind("case = vein\n") == "BadValue");
  CHECK(config_error_kind("solver.max_outer = 2.5\n") == "BadValue");
  CHECK(config_error_kind("eps 0.1\n") == "SyntaxError");
  CHECK(config_error_kind("obstacle.r = 0.1\nobstacle = none\n") == "BadValue");
}

TEST_CASE("canonical text round trip and hash") {
  RunConfig c = parse("case = aneurysm\neps = 0.2\nstrip.L = 12\n");
  const RunConfig back = parse(canonical_text(c));
  CHECK(canonical_text(back) == canonical_text(c));
  CHECK(config_hash(back) == config_hash(c));

  // Order and formatting of the input do not matter; values do.
  CHECK(config_hash(parse("strip.L = 12\neps = 1/5\ncase = aneurysm\n")) == config_hash(c));
  RunConfig other = c;
  other.flow.p_in = 2.5;
  CHECK(config_hash(other) != config_hash(c));
  CHECK(provenance(c).rfind(std::string("stentflow ") + kVersion + " config ", 0) == 0);
  CHECK(provenance(c).size() == std::string("stentflow  config ").size() + std::string(kVersion).size() + 16);
}

TEST_CASE("mesh command files reload identically") {
  RunConfig c = quiet(parse("eps = 1/4\nmesh.h = 0.1\nstrip.h_near = 0.06\nstrip.L = 4\n"));
  c.output_dir = scratch("mesh").string();
  RunOptions o;
  o.vtk = true;
  std::ostringstream out;
  CHECK(run_command(Command::Mesh, c, o, out) == 0);
  const fs::path dir = c.output_dir;
  REQUIRE(fs::exists(dir / "macro_eps0.25.mesh"));
  CHECK(fs::exists(dir / "macro_eps0.25.vtk"));
  CHECK(fs::exists(dir / "strip.vtk"));

  std::ifstream f(dir / "macro_eps0.25.mesh");
  const Mesh loaded = read_mesh_text(f);
  const Mesh expect = triangulate(build_macro_geometry(0.25, FlowCase::Collateral, ObstacleSpec{}), 0.1, c.direct.refine);
  CHECK(loaded == expect);
  std::ifstream s(dir / "strip.mesh");
  CHECK(read_mesh_text(s) == build_strip_mesh(ObstacleSpec{}, c.strip));
  CHECK(slurp(dir / "strip.mesh").find(provenance(c)) != std::string::npos);

  c.eps = 0.3;
  CHECK_THROWS_AS(run_command(Command::Mesh, c, o, out), ConfigError);
}

TEST_CASE("homog command: zero order, aneurysm pressure and byte-identical reruns") {
  const fs::path dir = scratch("homog");
  fs::create_directories(dir);
  {
    std::ofstream k(dir / "table.txt");
    k << "beta1_plus = -0.377928\nbeta1_minus = -0.122114\nups1_plus = -0.000371269\n"
         "ups1_minus = 0.121744\neta_jump = 27.9435\n";
  }
  RunConfig c = quiet(parse("case = aneurysm\nmesh.h_sub = 0.1\nmesh.h_sub_interface = 0.02\n"));
  c.output_dir = (dir / "run").string();
  c.constants_path = (dir / "table.txt").string();
  std::ostringstream out;
  CHECK(run_command(Command::Homog, c, {}, out) == 0);
  CHECK(out.str().find("p0_minus = 1\n") != std::string::npos);
  const std::string first = slurp(dir / "run" / "interface_eps0.125.csv");
  const std::string rate = slurp(dir / "run" / "flowrate_eps0.125.csv");
  CHECK(first.find("x1,u_t_plus,u_t_minus,u_n,p_jump\n") != std::string::npos);
  std::ostringstream again;
  run_command(Command::Homog, c, {}, again);
  CHECK(slurp(dir / "run" / "interface_eps0.125.csv") == first);
  CHECK(slurp(dir / "run" / "flowrate_eps0.125.csv") == rate);

  c.eps = 0.0;
  std::ostringstream zero;
  CHECK(run_command(Command::Homog, c, {}, zero) == 0);
  CHECK(zero.str().find("Q formula") == std::string::npos);
  std::ifstream z(dir / "run" / "interface_eps0.csv");
  int rows = 0;
  for (std::string line; std::getline(z, line);) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    ++rows;
    // Only u0 remains: no slip and no transmural flow on Gamma0.
    CHECK(line.find(",0,0,0,") != std::string::npos);
  }
  CHECK(rows == c.interface_samples);

  c.constants_path = (dir / "missing.txt").string();
  c.eps = 0.125;
  CHECK_THROWS_AS(run_command(Command::Homog, c, {}, out), ConfigError);
}

TEST_CASE("converge command: argument checks and dry run") {
  RunConfig c = quiet(parse(""));
  c.output_dir = scratch("converge").string();
  std::ostringstream out;
  c.eps_list = {0.25};
  CHECK_THROWS_AS(run_command(Command::Converge, c, {}, out), ConfigError);
  c.eps_list = {0.25, 0.125, 0.3};
  CHECK_THROWS_AS(run_command(Command::Converge, c, {}, out), ConfigError);
  c.eps_list = {1.0, 0.25, 0.125};
  CHECK_THROWS_AS(run_command(Command::Converge, c, {}, out), ConfigError);

  c.eps_list = {0.25, 0.125, 0.0625};
  RunOptions dry;
  dry.dry_run = true;
  CHECK(run_command(Command::Converge, c, dry, out) == 0);
  CHECK(out.str().find("eps = 0.0625") != std::string::npos);
  CHECK_FALSE(fs::exists(c.output_dir));

  RunOptions bad;
  bad.threads = 0;
  CHECK_THROWS_AS(run_command(Command::Converge, c, bad, out), ConfigError);
}

TEST_CASE("slope band gate") {
  StudyResult r;
  for (double e : {0.25, 0.125, 0.0625}) {
    ErrorReport rep;
    rep.eps = e;
    rep.l2_vel_zero = 2 * e;
    rep.l2_vel_first = e;
    rep.hm1_p_zero = 2 * e;
    rep.hm1_p_first = e;
    r.reports.push_back(rep);
  }
  r.l2_zero = SlopeFit{0.94, 0, 0, 3};
  r.l2_first = SlopeFit{1.5, 0, 0, 3};
  r.hm1_zero = SlopeFit{0.95, 0, 0, 3};
  r.hm1_first = SlopeFit{1.45, 0, 0, 3};
  CHECK(slope_band_violations(r).empty());
  r.l2_zero->slope = 1.2;
  CHECK(slope_band_violations(r).find("l2 zero-order slope") != std::string::npos);
  r.l2_zero->slope = 0.94;
  r.reports[1].hm1_p_first = 1.0;
  CHECK(slope_band_violations(r).find("eps 0.125") != std::string::npos);
}

TEST_CASE("solve and cell commands on coarse meshes") {
  RunConfig c = quiet(parse("eps = 1/4\nmesh.h = 0.1\nstrip.L = 4\nstrip.h_near = 0.06\n"));
  c.output_dir = scratch("solve").string();
  std::ostringstream out;
  CHECK(run_command(Command::Solve, c, {}, out) == 0);
  CHECK(fs::exists(fs::path(c.output_dir) / "direct_eps0.25.vtk"));
  const std::string fluxes = slurp(fs::path(c.output_dir) / "fluxes_eps0.25.csv");
  CHECK(fluxes.find("name,value\nflux_in,") != std::string::npos);

  // An iteration cap too small for convergence is reported, not thrown.
  RunConfig tight = c;
  tight.direct.solver.max_outer = 1;
  std::ostringstream capped;
  CHECK(run_command(Command::Solve, tight, {}, capped) == 1);
  CHECK(capped.str().find("NonConvergence") != std::string::npos);

  RunOptions o;
  o.skip_varkappa = true;
  o.threads = 3;
  std::ostringstream cell;
  const int code = run_command(Command::Cell, c, o, cell);
  CHECK(cell.str().find("[mu]") == std::string::npos);
  CHECK(fs::exists(fs::path(c.output_dir) / "identities.txt"));
  std::ifstream k(fs::path(c.output_dir) / "constants.txt");
  const CellConstants constants = read_constants(k);
  CHECK(constants.eta_jump > 0.0);
  CHECK_FALSE(constants.mu_jump);
  // Section means on this coarse strip are at the 1e-5 level.
  CHECK(code == 1);
  c.section_tol = 2e-5;
  std::ostringstream relaxed;
  CHECK(run_command(Command::Cell, c, o, relaxed) == 0);

  // A gate tighter than the discretization error fails with status 1.
  c.identity_tol = 1e-9;
  std::ostringstream strict;
  CHECK(run_command(Command::Cell, c, o, strict) == 1);
  CHECK(strict.str().find("beta_jump_rel") != std::string::npos);

  RunConfig none = c;
  none.obstacle.reset();
  std::ostringstream chi;
  CHECK(run_command(Command::Cell, none, o, chi) == 0);
  CHECK(chi.str().find("[eta] = ") != std::string::npos);
  std::ifstream z(fs::path(c.output_dir) / "constants.txt");
  std::string text((std::istreambuf_iterator<char>(z)), {});
  const auto at = text.find("eta_jump = ");
  REQUIRE(at != std::string::npos);
  CHECK(std::abs(std::stod(text.substr(at + 11))) <= 1e-12);
}
