// helmlod: experiment driver for the multiscale Petrov-Galerkin Helmholtz solver.
#include "helmlod/experiment.hpp"
#include "helmlod/interpolation.hpp"
#include "helmlod/pgsolve.hpp"
#include "helmlod/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace helmlod;

namespace {

struct CommonOptions {
  std::string config_file;
  std::string preset = "example1";
  std::optional<double> k;
  std::string m_list;
  std::string H_list;
  std::optional<int> h_level;
  std::string out_dir;
  bool paper_scale = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_file, "flat key = value config file");
  app->add_option("--preset", o.preset, "example1, example2, example3 or constant");
  app->add_option("--k", o.k, "wave number");
  app->add_option("--m", o.m_list, "oversampling orders, e.g. 1,2,3");
  app->add_option("--H-list", o.H_list, "coarse sizes, e.g. 2^-3,2^-4");
  app->add_option("--h-level", o.h_level, "fine size h = 2^-level");
  app->add_option("--out-dir", o.out_dir, "output directory");
  app->add_flag("--paper-scale", o.paper_scale, "k = 32, h = 2^-8");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig c = preset_config(o.preset, o.paper_scale);
  if (!o.config_file.empty()) apply_config_file(c, o.config_file);
  if (o.k) c.params.k = *o.k;
  if (!o.m_list.empty()) apply_setting(c, "method.m", o.m_list);
  if (!o.H_list.empty()) apply_setting(c, "mesh.H", o.H_list);
  if (o.h_level) c.h_level = *o.h_level;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  return c;
}

int run(const RunConfig& c) {
  if (!c.run_fem && !c.run_best && !c.run_mspgfem) {
    c.validate();
    std::cout << "note: no methods selected (method.methods is empty); nothing written\n";
    return 0;
  }
  const ConvergenceTable table = run_experiment(c, &std::cout);
  write_run_outputs(c, table);
  for (const auto& r : table.rows)
    if (!r.warnings.empty())
      for (const auto& w : r.warnings) std::cout << "warning (H=" << r.H << ", m=" << r.m << "): " << w << '\n';
  std::cout << "wrote " << c.out_dir << "/convergence.csv (" << table.rows.size() << " rows)\n";
  return 0;
}

nlohmann::json to_json(const StabilityReport& r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json j{{"s_min", num(r.s_min)},
                   {"condition1_ok", r.condition1_ok},
                   {"condition2_lhs", num(r.condition2_lhs)},
                   {"condition2_ok", r.condition2_ok},
                   {"c_g_used", r.c_g_used},
                   {"grad_log_A_sup", r.grad_log_A_sup},
                   {"sample_count", r.sample_count},
                   {"geometry_ok", r.geometry_ok},
                   {"eta", r.eta},
                   {"under_resolved", r.under_resolved},
                   {"pass", r.pass()}};
  j["unsupported"] = r.unsupported ? nlohmann::json(*r.unsupported) : nlohmann::json();
  return j;
}

int audit_cmd(const RunConfig& c) {
  const CoefficientSet coeffs = c.coefficients();
  const MeshHierarchy mesh = c.hierarchy(c.H_list.front());
  const Point x0 = c.x0.value_or(coeffs.center);
  const StabilityReport rep = audit(coeffs, mesh, x0, c.sampling(), c.c_g);
  std::filesystem::create_directories(c.out_dir);
  nlohmann::json j = to_json(rep);
  j["family"] = coeffs.family;
  j["x0"] = {x0.x, x0.y};
  std::ofstream(std::filesystem::path(c.out_dir) / "report.json") << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
  if (rep.unsupported) std::cout << "S-function: " << *rep.unsupported << '\n';
  std::cout << "verdict: " << (rep.pass() ? "pass" : "fail") << '\n';
  return 0;
}

int decay_cmd(const RunConfig& c) {
  c.validate();
  const CoefficientSet coeffs = c.coefficients();
  const MeshHierarchy mesh = c.hierarchy(c.H_list.front());
  const ElementForms forms(mesh.fine(), coeffs);
  const InterpolationOperator op = build_interpolation(mesh);
  const CorrectorContext ctx{mesh, forms, op};
  const int z = central_coarse_dof(mesh);
  const DecayProfile prof = decay_profile(ctx, z, c.decay_m);
  const SeriesInfo info = emit_decay_data(prof, c.out_dir);
  nlohmann::json j{{"coarse_dof", z}, {"m", prof.m}, {"deviation", prof.deviation},
                   {"reference_norm", prof.reference_norm}, {"theta", prof.theta},
                   {"monotone", prof.monotone}, {"H", c.H_list.front()}, {"h", c.h()}, {"k", c.k()}};
  std::ofstream(std::filesystem::path(c.out_dir) / "report.json") << j.dump(2) << '\n';
  for (std::size_t i = 0; i < prof.m.size(); ++i)
    std::cout << "m = " << prof.m[i] << "  e(m) = " << prof.deviation[i] << '\n';
  std::cout << "theta = " << prof.theta << (prof.monotone ? "" : " (not monotone)") << '\n'
            << "wrote " << info.path.string() << '\n';
  return 0;
}

int sweep_cmd(const RunConfig& c) {
  const CoefficientSet coeffs = c.coefficients();
  const MeshHierarchy mesh = c.hierarchy(c.H_list.back());
  for (double k : c.sweep_k)
    if (k * c.h() > 2.0) throw InvalidInput("sweep wave number " + std::to_string(k) + " under-resolved by h");
  const auto points = empirical_stability_sweep(coeffs, c.sweep_k, mesh);
  std::filesystem::create_directories(c.out_dir);
  std::ofstream f(std::filesystem::path(c.out_dir) / "sweep.csv");
  f << "k,solution_V,data_norm,ratio\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : points) {
    f << p.k << ',' << p.solution_V << ',' << p.data_norm << ',';
    if (p.ratio) f << *p.ratio;
    else f << "undefined";
    f << '\n';
    rows.push_back({{"k", p.k}, {"ratio", p.ratio ? nlohmann::json(*p.ratio) : nlohmann::json()}});
    std::cout << "k = " << p.k << "  ratio = " << (p.ratio ? std::to_string(*p.ratio) : "undefined") << '\n';
  }
  std::ofstream(std::filesystem::path(c.out_dir) / "report.json") << nlohmann::json{{"sweep", rows}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale Petrov-Galerkin solver for the heterogeneous Helmholtz equation"};
  app.require_subcommand(1);
  CommonOptions run_opts, audit_opts, decay_opts, sweep_opts;
  auto* run_app = app.add_subcommand("run", "convergence study against the overkill solution");
  add_common(run_app, run_opts);
  auto* audit_app = app.add_subcommand("audit", "check the coefficient and geometry conditions");
  add_common(audit_app, audit_opts);
  auto* decay_app = app.add_subcommand("decay", "corrector decay in the oversampling order");
  add_common(decay_app, decay_opts);
  auto* sweep_app = app.add_subcommand("sweep-k", "stability ratio of the fine solution across k");
  add_common(sweep_app, sweep_opts);
  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_app) return run(resolve(run_opts));
    if (*audit_app) return audit_cmd(resolve(audit_opts));
    if (*decay_app) return decay_cmd(resolve(decay_opts));
    if (*sweep_app) return sweep_cmd(resolve(sweep_opts));
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
