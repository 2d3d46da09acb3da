#include "helmlod/experiment.hpp"

#include "helmlod/assembly.hpp"
#include "helmlod/interpolation.hpp"
#include "helmlod/pgsolve.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace helmlod {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int parse_int(const std::string& text) {
  const double v = parse_number(text);
  if (v != std::round(v)) throw InvalidInput("expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw InvalidInput("expected a boolean, got '" + text + "'");
}

Point parse_point(const std::string& text) {
  const auto v = parse_number_list(text);
  if (v.size() != 2) throw InvalidInput("expected a point 'x,y', got '" + text + "'");
  return {v[0], v[1]};
}

BoundaryKind parse_kind(const std::string& text) {
  if (text == "robin") return BoundaryKind::Robin;
  if (text == "dirichlet") return BoundaryKind::Dirichlet;
  if (text == "neumann") return BoundaryKind::Neumann;
  throw InvalidInput("unknown boundary kind '" + text + "'");
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(12) << std::scientific << v;
  return s.str();
}

}  // namespace

double parse_number(const std::string& raw) {
  const std::string text = trim(raw);
  try {
    const auto caret = text.find('^');
    std::size_t used = 0;
    if (caret != std::string::npos) {
      const std::string base_text = text.substr(0, caret);
      const std::string exp_text = text.substr(caret + 1);
      const double base = std::stod(base_text, &used);
      if (used != base_text.size()) throw InvalidInput("");
      const double ex = std::stod(exp_text, &used);
      if (used != exp_text.size()) throw InvalidInput("");
      return std::pow(base, ex);
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw InvalidInput("");
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse number '" + text + "'");
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item));
  return out;
}

int RunConfig::coarse_cells(double H) const {
  const double cells = 1.0 / H;
  const int n = static_cast<int>(std::lround(cells));
  if (n < 1 || std::abs(cells - n) > 1e-9 * cells || !is_power_of_two(n))
    throw InvalidInput("coarse size H must be 2^-j for an integer j >= 0");
  return n;
}

int RunConfig::levels_for(double H) const {
  const int nc = coarse_cells(H);
  int levels = 0;
  while ((nc << levels) < fine_cells()) ++levels;
  if ((nc << levels) != fine_cells()) throw InvalidInput("fine size h must divide every H");
  return levels;
}

long long RunConfig::fine_dof_estimate() const {
  const long long n = fine_cells() + 1LL;
  return n * n;
}

void RunConfig::validate() const {
  if (!(params.k > 0.0)) throw InvalidInput("wave number k must be positive");
  if (!(extent.x > 0.0) || !(extent.y > 0.0)) throw InvalidInput("domain extent must be positive");
  if (h_level < 0 || h_level > 14) throw InvalidInput("h level must lie in [0, 14]");
  if (H_list.empty()) throw InvalidInput("H list is empty");
  for (std::size_t i = 1; i < H_list.size(); ++i)
    if (!(H_list[i] < H_list[i - 1])) throw InvalidInput("H list must be strictly decreasing");
  if (h() > H_list.back() * (1.0 + 1e-12)) throw InvalidInput("fine size h must not exceed min H");
  for (double H : H_list) levels_for(H);
  for (int m : m_list)
    if (m < 1) throw InvalidInput("oversampling orders must be >= 1");
  if (params.k * h() > 2.0) {
    std::ostringstream msg;
    msg << "k*h = " << params.k * h() << " > 2: fine mesh under-resolves the wave number "
        << "(the fine scale must satisfy k h << 1); decrease h";
    throw InvalidInput(msg.str());
  }
  if (fine_dof_estimate() > max_fine_dofs) {
    std::ostringstream msg;
    msg << "fine problem needs about " << fine_dof_estimate() << " dofs, above the cap of "
        << max_fine_dofs << " (raise output.max_fine_dofs)";
    throw InvalidInput(msg.str());
  }
}

CoefficientSet RunConfig::coefficients() const {
  ExampleParams p = params;
  p.domain_origin = origin;
  p.domain_extent = extent;
  CoefficientSet c = builtin_example(example, p);
  c.validate();
  return c;
}

MeshHierarchy RunConfig::hierarchy(double H) const {
  const int nc = coarse_cells(H);
  return MeshHierarchy::build(origin, extent, {nc, nc}, levels_for(H), tags);
}

SamplingSpec RunConfig::sampling() const {
  SamplingSpec s;
  s.origin = origin;
  s.extent = extent;
  s.samples_per_axis = samples_per_axis;
  s.inscribed_disk = inscribed_disk;
  return s;
}

RunConfig preset_config(const std::string& name, bool paper_scale) {
  RunConfig c;
  const auto id = parse_example_id(name);
  if (!id) throw InvalidInput("unknown preset '" + name + "'");
  c.preset = name;
  c.example = *id;
  switch (*id) {
    case ExampleId::Example1: c.params.epsilon = 1.0; break;
    case ExampleId::Example2:
      c.params.epsilon = 0.1;
      c.params.alpha = 0.08;
      c.params.delta = 1.0;
      break;
    case ExampleId::Example3:
      c.params.block_count = 8;
      c.params.block_area_fraction = 0.25;
      break;
    case ExampleId::Constant: break;
  }
  c.params.k = paper_scale ? 32.0 : 16.0;
  c.h_level = paper_scale ? 8 : 7;
  c.out_dir = "out/" + name;
  return c;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "preset") {
    const RunConfig base = preset_config(value, c.h_level == 8 && c.params.k == 32.0);
    c.preset = base.preset;
    c.example = base.example;
    c.params.epsilon = base.params.epsilon;
    c.params.alpha = base.params.alpha;
    c.params.delta = base.params.delta;
    c.params.block_count = base.params.block_count;
    c.params.block_area_fraction = base.params.block_area_fraction;
    c.out_dir = base.out_dir;
  } else if (key == "mesh.origin") c.origin = parse_point(value);
  else if (key == "mesh.extent") c.extent = parse_point(value);
  else if (key == "mesh.H") c.H_list = parse_number_list(value);
  else if (key == "mesh.h_level") c.h_level = parse_int(value);
  else if (key == "physics.k") c.params.k = parse_number(value);
  else if (key == "coefficient.id") {
    const auto id = parse_example_id(value);
    if (!id) throw InvalidInput("unknown example '" + value + "'");
    c.example = *id;
  } else if (key == "coefficient.epsilon") c.params.epsilon = parse_number(value);
  else if (key == "coefficient.alpha") c.params.alpha = parse_number(value);
  else if (key == "coefficient.delta") c.params.delta = parse_number(value);
  else if (key == "coefficient.block_count") c.params.block_count = parse_int(value);
  else if (key == "coefficient.block_area_fraction") c.params.block_area_fraction = parse_number(value);
  else if (key == "coefficient.center") c.params.center = parse_point(value);
  else if (key == "forcing.center") c.params.forcing_center = parse_point(value);
  else if (key == "forcing.radius") c.params.forcing_radius = parse_number(value);
  else if (key == "boundary.default") c.tags.default_kind = parse_kind(value);
  else if (key == "boundary.left") c.tags.set(Side::Left, parse_kind(value));
  else if (key == "boundary.right") c.tags.set(Side::Right, parse_kind(value));
  else if (key == "boundary.bottom") c.tags.set(Side::Bottom, parse_kind(value));
  else if (key == "boundary.top") c.tags.set(Side::Top, parse_kind(value));
  else if (key == "method.m") {
    c.m_list.clear();
    for (const auto& item : split(value, ',')) c.m_list.push_back(parse_int(item));
  } else if (key == "method.methods") {
    c.run_fem = c.run_best = c.run_mspgfem = false;
    for (const auto& m : split(value, ',')) {
      if (m == "fem") c.run_fem = true;
      else if (m == "best_approx") c.run_best = true;
      else if (m == "mspgfem") c.run_mspgfem = true;
      else throw InvalidInput("unknown method '" + m + "'");
    }
  } else if (key == "output.dir") c.out_dir = value;
  else if (key == "output.max_fine_dofs") c.max_fine_dofs = static_cast<long long>(parse_number(value));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value));
  else if (key == "stability.x0") c.x0 = parse_point(value);
  else if (key == "stability.c_g") c.c_g = parse_number(value);
  else if (key == "stability.samples_per_axis") c.samples_per_axis = parse_int(value);
  else if (key == "stability.inscribed_disk") c.inscribed_disk = parse_bool(value);
  else if (key == "decay.m") {
    c.decay_m.clear();
    for (const auto& item : split(value, ',')) c.decay_m.push_back(parse_int(item));
  } else if (key == "sweep.k") c.sweep_k = parse_number_list(value);
  else throw InvalidInput("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& config, std::istream& in) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(number) + ": expected 'key = value'");
    apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path.string());
  apply_config_text(config, in);
}

ConvergenceTable run_experiment(const RunConfig& config, std::ostream* log) {
  config.validate();
  const CoefficientSet coeffs = config.coefficients();
  ConvergenceTable table;

  // The overkill solution lives on the fine grid shared by every H.
  const MeshHierarchy first = config.hierarchy(config.H_list.front());
  auto t0 = Clock::now();
  const FineProblem fine(first.fine(), coeffs);
  table.timings["fine_assembly"] = seconds_since(t0);
  t0 = Clock::now();
  const CVector u_h = solve_standard_fem(fine).solution;
  table.timings["fine_solve"] = seconds_since(t0);
  table.reference_V = fine.norms.norm(u_h, NormKind::V);
  if (log) *log << "overkill: " << u_h.size() << " fine dofs, ||u_h||_V = " << table.reference_V << '\n';

  for (double H : config.H_list) {
    const MeshHierarchy mesh = config.hierarchy(H);
    if (mesh.fine().num_dofs() != first.fine().num_dofs())
      throw InvalidInput("boundary tags must give the same fine dofs for every H");
    auto row_base = [&](const char* method, int m) {
      ConvergenceRow row;
      row.k = config.k();
      row.H = H;
      row.h = config.h();
      row.m = m;
      row.method = method;
      return row;
    };
    t0 = Clock::now();
    const InterpolationOperator op = build_interpolation(mesh);
    const double t_interp = seconds_since(t0);
    const BestApproximation best = best_approximation(fine.norms, op, u_h, true);
    table.best_minimizer_V[H] = best.minimizer_V;

    if (config.run_fem) {
      ConvergenceRow row = row_base("fem", 0);
      try {
        t0 = Clock::now();
        const SolveResult sol = solve_standard_fem(mesh, Level::Coarse, coeffs);
        row.timings["solve"] = seconds_since(t0);
        const SolveReport rep = diagnostics(fine.norms, op, u_h, sol.solution);
        row.error_V = rep.error_V;
        row.error_L2 = rep.error_L2;
        row.quasi_opt = rep.quasi_opt_ratio;
        row.residual = sol.residual;
      } catch (const SolverError& e) {
        row.status = std::string("solver_error: ") + e.what();
        row.error_V = row.error_L2 = row.quasi_opt = std::nan("");
      }
      table.rows.push_back(row);
    }
    if (config.run_best) {
      ConvergenceRow row = row_base("best_approx", 0);
      const CVector diff = u_h - op.embed(op.apply(u_h));
      row.error_V = best.surrogate_V;
      row.error_L2 = fine.norms.norm(diff, NormKind::L2);
      row.quasi_opt = 1.0;
      table.rows.push_back(row);
    }
    if (config.run_mspgfem) {
      const CorrectorContext ctx{mesh, fine.forms, op};
      for (int m : config.m_list) {
        ConvergenceRow row = row_base("mspgfem", m);
        try {
          t0 = Clock::now();
          const CorrectorBasis basis = build_test_basis(ctx, m);
          row.timings["interpolation"] = t_interp;
          row.timings["correctors"] = seconds_since(t0);
          row.corrector_solves = basis.solve_count;
          row.warnings = basis.warnings;
          t0 = Clock::now();
          const PGSystem sys = assemble_pg_system(fine, mesh, op, basis);
          row.timings["pg_assembly"] = seconds_since(t0);
          t0 = Clock::now();
          const SolveResult sol = solve_mspgfem(sys);
          row.timings["solve"] = seconds_since(t0);
          row.warnings.insert(row.warnings.end(), sol.warnings.begin(), sol.warnings.end());
          const SolveReport rep = diagnostics(fine.norms, op, u_h, sol.solution);
          row.error_V = rep.error_V;
          row.error_L2 = rep.error_L2;
          row.quasi_opt = rep.quasi_opt_ratio;
          row.residual = std::max(sol.residual, basis.max_residual);
        } catch (const SolverError& e) {
          row.status = std::string("solver_error: ") + e.what();
          row.error_V = row.error_L2 = row.quasi_opt = std::nan("");
        }
        table.rows.push_back(row);
        if (log)
          *log << "H = " << H << " m = " << m << ": ||u_h - u_H||_V = " << row.error_V
               << " (ratio " << row.quasi_opt << ")\n";
      }
    }
  }
  return table;
}

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out) {
  out << "# schema: " << kConvergenceSchema << '\n';
  out << "k,H,h,kH,m,method,status,error_V,error_L2,quasi_opt,corrector_solves\n";
  for (const auto& r : table.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << format_double(r.k) << ',' << format_double(r.H) << ',' << format_double(r.h) << ','
        << format_double(r.k * r.H) << ',' << r.m << ',' << r.method << ',' << status << ','
        << format_double(r.error_V) << ',' << format_double(r.error_L2) << ','
        << format_double(r.quasi_opt) << ',' << r.corrector_solves << '\n';
  }
}

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return {std::nan(""), std::nan("")};
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return {std::nan(""), std::nan("")};
  const double slope = (n * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / n};
}

std::vector<SeriesInfo> emit_plot_data(const ConvergenceTable& table, PlotKind kind,
                                       const std::filesystem::path& dir) {
  if (kind == PlotKind::Decay)
    throw InvalidInput("decay series come from a DecayProfile (emit_decay_data)");
  std::vector<SeriesInfo> out;
  std::vector<std::string> labels;
  std::map<std::string, std::vector<const ConvergenceRow*>> series;
  for (const auto& r : table.rows) {
    const std::string label = r.m > 0 ? r.method + "_m" + std::to_string(r.m) : r.method;
    if (!series.count(label)) labels.push_back(label);
    series[label].push_back(&r);
  }
  if (labels.empty()) return out;
  std::filesystem::create_directories(dir);
  const std::string tag = kind == PlotKind::V ? "V" : "L2";
  for (const auto& label : labels) {
    SeriesInfo info;
    info.label = label;
    info.path = dir / ("series_" + tag + "_" + label + ".csv");
    std::ofstream f(info.path);
    f << "H,error\n";
    std::vector<double> hs, es;
    for (const ConvergenceRow* r : series[label]) {
      const double e = kind == PlotKind::V ? r->error_V : r->error_L2;
      f << format_double(r->H) << ',' << format_double(e) << '\n';
      hs.push_back(r->H);
      es.push_back(e);
      ++info.points;
    }
    info.slope = loglog_fit(hs, es).slope;
    out.push_back(info);
  }
  return out;
}

SeriesInfo emit_decay_data(const DecayProfile& profile, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SeriesInfo info;
  info.label = "decay";
  info.path = dir / "series_decay.csv";
  std::ofstream f(info.path);
  f << "m,deviation\n";
  for (std::size_t i = 0; i < profile.m.size(); ++i) {
    f << profile.m[i] << ',' << format_double(profile.deviation[i]) << '\n';
    ++info.points;
  }
  info.slope = profile.theta;
  return info;
}

int central_coarse_dof(const MeshHierarchy& mesh) {
  const GridLevel& coarse = mesh.coarse();
  const Point c = mesh.origin() + 0.5 * mesh.extent();
  int best = -1;
  double best_d = 0.0;
  for (int d = 0; d < coarse.num_dofs(); ++d) {
    const double dist = norm(coarse.node_point(coarse.node_of_dof(d)) - c);
    if (best < 0 || dist < best_d - 1e-12) {
      best = d;
      best_d = dist;
    }
  }
  return best;
}

void write_run_outputs(const RunConfig& config, const ConvergenceTable& table) {
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "convergence.csv");
    write_convergence_csv(table, f);
  }
  const auto v_series = emit_plot_data(table, PlotKind::V, dir);
  const auto l2_series = emit_plot_data(table, PlotKind::L2, dir);

  nlohmann::json report;
  report["schema"] = kConvergenceSchema;
  report["preset"] = config.preset;
  report["example"] = to_string(config.example);
  report["k"] = config.k();
  report["h"] = config.h();
  report["H"] = config.H_list;
  report["m"] = config.m_list;
  report["seed"] = config.seed;
  report["reference_V"] = table.reference_V;
  nlohmann::json best = nlohmann::json::array();
  for (const auto& [H, v] : table.best_minimizer_V) best.push_back({{"H", H}, {"minimizer_V", v}});
  report["best_approx_minimizer"] = best;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    nlohmann::json j{{"H", r.H}, {"m", r.m}, {"method", r.method}, {"status", r.status},
                     {"residual", r.residual}, {"corrector_solves", r.corrector_solves},
                     {"timings", r.timings}, {"warnings", r.warnings}};
    j["error_V"] = std::isnan(r.error_V) ? nlohmann::json() : nlohmann::json(r.error_V);
    j["error_L2"] = std::isnan(r.error_L2) ? nlohmann::json() : nlohmann::json(r.error_L2);
    j["quasi_opt"] = std::isfinite(r.quasi_opt) ? nlohmann::json(r.quasi_opt) : nlohmann::json();
    rows.push_back(j);
  }
  report["rows"] = rows;
  nlohmann::json slopes;
  for (const auto& s : v_series) slopes["V"][s.label] = std::isnan(s.slope) ? nlohmann::json() : nlohmann::json(s.slope);
  for (const auto& s : l2_series) slopes["L2"][s.label] = std::isnan(s.slope) ? nlohmann::json() : nlohmann::json(s.slope);
  report["slopes"] = slopes;
  report["timings"] = table.timings;
  std::ofstream f(dir / "report.json");
  f << report.dump(2) << '\n';
}

}  // namespace helmlod
