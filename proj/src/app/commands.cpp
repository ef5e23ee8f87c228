#include "app/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace stentflow {

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Mesh: return "mesh";
    case Command::Cell: return "cell";
    case Command::Solve: return "solve";
    case Command::Homog: return "homog";
    case Command::Converge: return "converge";
  }
  return "?";
}

std::optional<Command> command_from_string(std::string_view name) {
  for (Command c : {Command::Mesh, Command::Cell, Command::Solve, Command::Homog, Command::Converge})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

namespace {

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

class Output {
 public:
  explicit Output(const RunConfig& c) : dir_(c.output_dir), provenance_(stentflow::provenance(c)) {}

  const std::string& provenance() const { return provenance_; }

  std::ofstream open(const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const std::string path = (std::filesystem::path(dir_) / name).string();
    std::ofstream f(path);
    if (!f) throw NumericalError("IoError", "cannot write " + path);
    f << std::setprecision(12);
    return f;
  }

 private:
  std::string dir_;
  std::string provenance_;
};

std::vector<VtkPointField> stokes_fields(const StokesSolution& s) {
  return {{"velocity", 2, s.vertex_velocity()},
          {"pressure", 1, std::vector<double>(s.pressure.data(), s.pressure.data() + s.pressure.size())}};
}

CellConfig cell_config(const RunConfig& c) {
  CellConfig cc;
  cc.solver = c.direct.solver;
  cc.assembly = c.direct.assembly;
  return cc;
}

template <class F>
auto launch(bool parallel, F f) {
  return std::async(parallel ? std::launch::async : std::launch::deferred, std::move(f));
}

CellConstants load_constants(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("MissingFile", "cannot open constants file " + path);
  return read_constants(f);
}

CellConstants constants_for(const RunConfig& c, int threads, std::ostream& out) {
  if (!c.constants_path.empty()) {
    out << "constants read from " << c.constants_path << '\n';
    return load_constants(c.constants_path);
  }
  if (!c.obstacle) throw ConfigError("EmptyObstacle", "the homogenized model needs an obstacle or a constants file");
  const Strip strip = make_strip(c.obstacle, c.strip);
  const CellConfig cc = cell_config(c);
  const bool par = threads > 1;
  auto beta = launch(par, [&] { return solve_beta(strip, cc); });
  auto ups = launch(par, [&] { return solve_upsilon(strip, cc); });
  const CellSolution chi = solve_chi(strip, cc);
  out << "constants computed on the strip (L = " << c.strip.L << ")\n";
  return extract_constants(beta.get(), ups.get(), chi);
}

int cmd_mesh(const RunConfig& c, const RunOptions& o, std::ostream& out) {
  const MacroGeometry g = build_macro_geometry(c.eps, c.flow.flow_case, c.obstacle);
  if (o.dry_run) {
    out << "plan: macro mesh eps = " << c.eps << " h = " << c.direct.h << ", strip mesh L = " << c.strip.L << " -> "
        << c.output_dir << '\n';
    return 0;
  }
  Output files(c);
  const std::string tag = eps_tag(c.eps);
  const Mesh macro = triangulate(g, c.direct.h, c.direct.refine);
  const Mesh strip = build_strip_mesh(c.obstacle, c.strip);
  {
    auto f = files.open("macro_eps" + tag + ".mesh");
    write_mesh_text(f, macro, files.provenance());
    auto s = files.open("strip.mesh");
    write_mesh_text(s, strip, files.provenance());
  }
  if (o.vtk) {
    auto f = files.open("macro_eps" + tag + ".vtk");
    write_vtk(f, macro, {}, "macro mesh eps " + tag);
    auto s = files.open("strip.vtk");
    write_vtk(s, strip, {}, "strip mesh");
  }
  out << "macro mesh: " << macro.vertices.size() << " vertices, " << macro.triangles.size()
      << " triangles, min angle " << macro.min_angle_deg() << '\n'
      << "strip mesh: " << strip.vertices.size() << " vertices, " << strip.triangles.size() << " triangles\n";
  return 0;
}

int cmd_cell(const RunConfig& c, const RunOptions& o, std::ostream& out) {
  const bool varkappa = !o.skip_varkappa;
  if (o.dry_run) {
    out << "plan: cell problems " << (c.obstacle ? "beta, upsilon, chi" : "chi") << (varkappa ? ", varkappa" : "")
        << " on ]0,1[ x ]-" << c.strip.L << "," << c.strip.L << "[ -> " << c.output_dir << '\n';
    return 0;
  }
  const Strip strip = make_strip(c.obstacle, c.strip);
  const CellConfig cc = cell_config(c);
  const bool par = o.threads > 1;
  Output files(c);
  out << "strip mesh: " << strip.mesh->vertices.size() << " vertices\n";

  if (!c.obstacle) {
    const CellSolution chi = solve_chi(strip, cc);
    const FarField eta = far_field(chi, CellField::Pressure);
    auto f = files.open("constants.txt");
    f << "# " << files.provenance() << "\n# no obstacle: chi only\n"
      << std::setprecision(17) << "eta_plus = " << eta.top.mean << "\neta_minus = " << eta.bottom.mean
      << "\neta_jump = " << eta.jump() << "\nchi_grad_energy = " << gradient_energy(chi.solution) << "\nL = " << strip.L
      << '\n';
    if (varkappa) {
      const CellSolution k = solve_varkappa(strip, chi, cc);
      f << "varkappa1_jump = " << far_field(k, CellField::U1).jump() << '\n';
      if (o.vtk) {
        auto v = files.open("cell_varkappa.vtk");
        write_cell_vtk(v, k);
      }
    }
    if (o.vtk) {
      auto v = files.open("cell_chi.vtk");
      write_cell_vtk(v, chi);
    }
    out << "[eta] = " << eta.jump() << '\n';
    return 0;
  }

  auto beta_f = launch(par, [&] { return solve_beta(strip, cc); });
  auto ups_f = launch(par, [&] { return solve_upsilon(strip, cc); });
  const CellSolution chi = solve_chi(strip, cc);
  std::optional<CellSolution> kap;
  if (varkappa) kap = solve_varkappa(strip, chi, cc);
  const CellSolution beta = beta_f.get(), ups = ups_f.get();

  const CellConstants k = extract_constants(beta, ups, chi, kap ? &*kap : nullptr);
  const IdentityReport id = check_identities(beta, ups, chi, k);
  {
    auto f = files.open("constants.txt");
    write_constants(f, k, files.provenance());
    auto g = files.open("constants.csv");
    write_constants_csv(g, k, files.provenance());
  }

  struct Gate {
    const char* name;
    double value, tol;
  };
  std::vector<Gate> gates{{"beta_jump_rel", id.beta_jump_rel, c.identity_tol},
                          {"ups_bottom_rel", id.ups_bottom_rel, c.identity_tol},
                          {"ups_jump_rel", id.ups_jump_rel, c.identity_tol},
                          {"chi_energy_rel", id.chi_energy_rel, c.identity_tol},
                          {"beta2_section_max", id.beta2_section_max, c.section_tol},
                          {"ups2_section_max", id.ups2_section_max, c.section_tol},
                          {"pressure_section_rel", id.pressure_section_rel, c.pressure_section_tol}};
  if (id.mu_jump_rel) gates.push_back({"mu_jump_rel", *id.mu_jump_rel, c.identity_tol});
  int failed = 0;
  {
    auto f = files.open("identities.txt");
    f << "# " << files.provenance() << '\n' << std::setprecision(6);
    for (const auto& g : gates) {
      const bool ok = g.value <= g.tol;
      failed += !ok;
      f << g.name << " = " << g.value << "  # tol " << g.tol << (ok ? "" : " FAILED") << '\n';
    }
    f << "section_flatness_max = " << id.section_flatness_max << '\n';
  }
  if (o.vtk) {
    for (const CellSolution* s : {&beta, &ups, &chi, kap ? &*kap : static_cast<const CellSolution*>(nullptr)}) {
      if (!s) continue;
      auto v = files.open(std::string("cell_") + std::string(to_string(s->which)) + ".vtk");
      write_cell_vtk(v, *s);
    }
  }
  out << std::setprecision(6) << "beta1+ = " << k.beta1_plus << "  beta1- = " << k.beta1_minus
      << "\nups1+ = " << k.ups1_plus << "  ups1- = " << k.ups1_minus << "\n[eta] = " << k.eta_jump << '\n';
  if (k.mu_jump) out << "[mu] = " << *k.mu_jump << "  [varkappa1] = " << *k.varkappa1_jump << '\n';
  for (const auto& g : gates)
    if (g.value > g.tol) out << "identity check " << g.name << " = " << g.value << " exceeds " << g.tol << '\n';
  return failed ? 1 : 0;
}

int cmd_solve(const RunConfig& c, const RunOptions& o, std::ostream& out) {
  build_macro_geometry(c.eps, c.flow.flow_case, c.obstacle);  // rejects a bad eps before any work
  if (o.dry_run) {
    out << "plan: direct " << to_string(c.flow.flow_case) << " solve eps = " << c.eps << " h = " << c.direct.h
        << " with " << to_string(c.direct.solver.method) << " -> " << c.output_dir << '\n';
    return 0;
  }
  const DirectSolution d = solve_direct(c.eps, c.flow, c.obstacle, c.direct);
  const auto& s = d.solution;
  const double in = -boundary_flux(s, BoundaryTag::GammaIn);
  const double out1 = boundary_flux(s, BoundaryTag::GammaOut1);
  const double out2 = boundary_flux(s, BoundaryTag::GammaOut2);
  const double q = flowrate_direct(s);
  Output files(c);
  const std::string tag = eps_tag(c.eps);
  {
    auto f = files.open("fluxes_eps" + tag + ".csv");
    f << "# " << files.provenance() << "\nname,value\n"
      << "flux_in," << in << "\nflux_out1," << out1 << "\nflux_out2," << out2 << "\nflux_gamma0," << q
      << "\nbalance," << in - out1 - out2 << '\n';
    auto v = files.open("direct_eps" + tag + ".vtk");
    write_vtk(v, *d.mesh, stokes_fields(s), "direct solution eps " + tag);
  }
  out << "mesh: " << d.mesh->vertices.size() << " vertices; solver " << s.diagnostics.method << " "
      << s.diagnostics.outer_iterations << " iterations\n"
      << "flux in " << in << ", out1 " << out1 << ", out2 " << out2 << ", Gamma0 " << q << ", balance "
      << in - out1 - out2 << '\n';
  if (!s.diagnostics.converged) {
    out << "NonConvergence: momentum residual " << s.diagnostics.momentum_residual << ", divergence residual "
        << s.diagnostics.divergence_residual << '\n';
    return 1;
  }
  return 0;
}

int cmd_homog(const RunConfig& c, const RunOptions& o, std::ostream& out) {
  if (c.eps > 1.0) throw ConfigError("BadValue", "eps must lie in [0,1]");
  const ZeroOrder z = zero_order(c.flow);
  if (o.dry_run) {
    out << "plan: " << (c.eps == 0.0 ? "zero-order" : "zero- and first-order") << " homogenized solution eps = "
        << c.eps << ", constants " << (c.constants_path.empty() ? "from the strip" : c.constants_path) << " -> "
        << c.output_dir << '\n';
    return 0;
  }
  Output files(c);
  const std::string tag = eps_tag(c.eps);
  out << std::setprecision(12) << "p0_minus = " << z.p_minus << '\n';
  if (c.eps == 0.0) {
    const AveragedApproximation a(z, nullptr, 0.0);
    auto f = files.open("interface_eps0.csv");
    write_interface_csv(f, interface_report(a, CellConstants{}, c.interface_samples), files.provenance());
    return 0;
  }
  const CellConstants k = constants_for(c, o.threads, out);
  auto upper = std::make_shared<const Mesh>(
      triangulate_subdomain(Subdomain::Upper, c.flow.flow_case, c.h_sub, c.h_sub_interface, c.direct.refine));
  auto lower = std::make_shared<const Mesh>(
      triangulate_subdomain(Subdomain::Lower, c.flow.flow_case, c.h_sub, c.h_sub_interface, c.direct.refine));
  const FirstOrderSolution first = solve_first_order(upper, lower, z, k, c.direct.solver, c.direct.assembly);
  const AveragedApproximation a(z, &first, c.eps);
  const double qf = flowrate_formula(z, k, c.eps), qd = flowrate_first_order(first, c.eps);
  {
    auto f = files.open("interface_eps" + tag + ".csv");
    write_interface_csv(f, interface_report(a, k, c.interface_samples), files.provenance());
    auto q = files.open("flowrate_eps" + tag + ".csv");
    q << "# " << files.provenance() << "\neps,q_formula,q_first_order,interface_flux\n"
      << c.eps << ',' << qf << ',' << qd << ',' << first.interface_flux << '\n';
  }
  if (o.vtk) {
    auto u = files.open("first_order_upper.vtk");
    write_vtk(u, first.upper.space->mesh(), stokes_fields(first.upper), "first-order corrector, upper");
    auto l = files.open("first_order_lower.vtk");
    write_vtk(l, first.lower.space->mesh(), stokes_fields(first.lower), "first-order corrector, lower");
  }
  out << "Q formula = " << qf << ", Q first order = " << qd << '\n';
  return 0;
}

void validate_eps_list(const std::vector<double>& list) {
  int below_one = 0;
  for (double e : list) {
    const double inv = 1.0 / e;
    if (!(e > 0.0) || e > 1.0 || std::abs(inv - std::round(inv)) > 1e-12 * inv)
      throw ConfigError("NonIntegerReciprocal", "eps_list entry " + eps_tag(e) + " is not 1/integer");
    below_one += e < 1.0;
  }
  if (below_one < 3) throw ConfigError("TooFewPoints", "eps_list needs >= 3 values of eps below 1");
}

int cmd_converge(const RunConfig& c, const RunOptions& o, std::ostream& out) {
  validate_eps_list(c.eps_list);
  c.flow.validate();
  if (!c.obstacle) throw ConfigError("EmptyObstacle", "the convergence study needs an obstacle");
  if (o.dry_run) {
    out << "plan: convergence study, " << to_string(c.flow.flow_case) << ", h = " << c.direct.h << ", constants "
        << (c.constants_path.empty() ? "from the strip" : c.constants_path) << ", threads " << o.threads << '\n';
    for (double e : c.eps_list) out << "  eps = " << e << ": direct solve, L2 and H^-1 errors, flow rates\n";
    out << "outputs: errors.csv, slopes.csv, profiles_eps<val>.csv in " << c.output_dir << '\n';
    return 0;
  }
  Output files(c);
  std::filesystem::create_directories(c.output_dir);
  StudyConfig sc;
  sc.eps_list = c.eps_list;
  sc.flow = c.flow;
  if (c.obstacle) sc.obstacle = *c.obstacle;
  sc.strip = c.strip;
  sc.direct = c.direct;
  sc.h_sub = c.h_sub;
  sc.h_sub_interface = c.h_sub_interface;
  if (!c.constants_path.empty()) sc.constants = load_constants(c.constants_path);
  sc.profile_samples = c.profile_samples;
  sc.output_dir = c.output_dir;
  sc.provenance = files.provenance();
  sc.threads = o.threads;

  const StudyResult r = convergence_study(sc);
  {
    auto f = files.open("errors.csv");
    write_errors_csv(f, r, files.provenance());
    auto s = files.open("slopes.csv");
    s << "# " << files.provenance() << "\nname,slope,intercept,residual,points\n";
    const std::pair<const char*, const std::optional<SlopeFit>*> fits[] = {
        {"l2_vel_zero", &r.l2_zero}, {"l2_vel_first", &r.l2_first}, {"hm1_p_zero", &r.hm1_zero}, {"hm1_p_first", &r.hm1_first}};
    for (const auto& [name, fit] : fits)
      if (*fit) s << name << ',' << (*fit)->slope << ',' << (*fit)->intercept << ',' << (*fit)->residual << ','
                  << (*fit)->points << '\n';
  }
  out << std::setprecision(4);
  for (const auto& e : r.reports) {
    if (!e.ok)
      out << "eps " << e.eps << " failed: " << e.diagnostic << '\n';
    else
      out << "eps " << e.eps << ": l2 " << e.l2_vel_zero << " / " << e.l2_vel_first << ", hm1 " << e.hm1_p_zero
          << " / " << e.hm1_p_first << ", Q direct " << e.q_direct << " formula " << e.q_formula << '\n';
  }
  if (r.l2_zero)
    out << "slopes: l2 " << r.l2_zero->slope << " / " << r.l2_first->slope << ", hm1 " << r.hm1_zero->slope << " / "
        << r.hm1_first->slope << '\n';
  const std::string bad = slope_band_violations(r);
  if (!bad.empty()) {
    out << "acceptance bands violated: " << bad << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

std::string slope_band_violations(const StudyResult& r) {
  std::ostringstream v;
  for (const auto& e : r.reports) {
    if (!e.ok) v << "eps " << e.eps << " failed; ";
    else if (!(e.l2_vel_first < e.l2_vel_zero) || !(e.hm1_p_first < e.hm1_p_zero))
      v << "first-order error not below zero-order at eps " << e.eps << "; ";
  }
  if (!r.l2_zero || !r.l2_first || !r.hm1_zero || !r.hm1_first) {
    v << "slopes unavailable; ";
  } else {
    if (r.l2_zero->slope < 0.7 || r.l2_zero->slope > 1.1) v << "l2 zero-order slope " << r.l2_zero->slope << " outside [0.7, 1.1]; ";
    if (r.l2_first->slope < 1.2) v << "l2 first-order slope " << r.l2_first->slope << " below 1.2; ";
    if (r.hm1_zero->slope < 0.9) v << "hm1 zero-order slope " << r.hm1_zero->slope << " below 0.9; ";
    if (r.hm1_first->slope < 1.2) v << "hm1 first-order slope " << r.hm1_first->slope << " below 1.2; ";
  }
  std::string s = v.str();
  if (s.size() >= 2) s.resize(s.size() - 2);
  return s;
}

int run_command(Command command, const RunConfig& config, const RunOptions& options, std::ostream& out) {
  if (options.threads < 1) throw ConfigError("BadValue", "--threads must be >= 1");
  switch (command) {
    case Command::Mesh: return cmd_mesh(config, options, out);
    case Command::Cell: return cmd_cell(config, options, out);
    case Command::Solve: return cmd_solve(config, options, out);
    case Command::Homog: return cmd_homog(config, options, out);
    case Command::Converge: return cmd_converge(config, options, out);
  }
  return 2;
}

}  // namespace stentflow
