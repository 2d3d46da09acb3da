#pragma once

#include "helmlod/coefficients.hpp"
#include "helmlod/common.hpp"
#include "helmlod/corrector.hpp"
#include "helmlod/mesh.hpp"
#include "helmlod/stability.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace helmlod {

/// Mesh sizes are nominal: H = 2^-3 on any square domain means 8 coarse
/// cells per axis, h = 2^-h_level means 2^h_level fine cells per axis.
struct RunConfig {
  std::string preset = "example1";
  Point origin{-1.0, -1.0};
  Point extent{2.0, 2.0};
  std::vector<double> H_list{0.125, 0.0625, 0.03125, 0.015625};
  int h_level = 7;

  ExampleId example = ExampleId::Example1;
  ExampleParams params;
  BoundaryTags tags = BoundaryTags::uniform(BoundaryKind::Robin);

  std::vector<int> m_list{1, 2, 3};
  bool run_fem = true;
  bool run_best = true;
  bool run_mspgfem = true;

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  long long max_fine_dofs = 1'100'000;

  std::optional<Point> x0;
  std::optional<double> c_g;
  int samples_per_axis = 401;
  bool inscribed_disk = false;

  std::vector<int> decay_m{1, 2, 3, 4};
  std::vector<double> sweep_k{4.0, 8.0, 16.0, 32.0};

  double k() const { return params.k; }
  double h() const { return std::ldexp(1.0, -h_level); }
  int fine_cells() const { return 1 << h_level; }
  int coarse_cells(double H) const;
  int levels_for(double H) const;
  long long fine_dof_estimate() const;

  /// Throws InvalidInput describing the first violated rule.
  void validate() const;
  CoefficientSet coefficients() const;
  MeshHierarchy hierarchy(double H) const;
  SamplingSpec sampling() const;
};

/// Presets example1/example2/example3 (and "constant"). The default scale is
/// k = 16, h = 2^-7; paper_scale selects k = 32, h = 2^-8.
RunConfig preset_config(const std::string& name, bool paper_scale = false);

/// Apply one dotted key (e.g. "physics.k") to the config.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Flat "key = value" text, '#' starts a comment.
void apply_config_text(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Accepts plain decimals and powers written as "2^-3".
double parse_number(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

inline constexpr const char* kConvergenceSchema = "helmlod-convergence/1";

struct ConvergenceRow {
  double k = 0.0;
  double H = 0.0;
  double h = 0.0;
  int m = 0;  // 0 for methods without oversampling
  std::string method;
  std::string status = "ok";
  double error_V = 0.0;
  double error_L2 = 0.0;
  double quasi_opt = 0.0;
  int corrector_solves = 0;
  double residual = 0.0;
  std::map<std::string, double> timings;
  std::vector<std::string> warnings;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double reference_V = 0.0;
  /// Cross-check of the best-approximation surrogate: true V-norm minimizer error per H.
  std::map<double, double> best_minimizer_V;
  std::map<std::string, double> timings;
};

ConvergenceTable run_experiment(const RunConfig& config, std::ostream* log = nullptr);

/// Deterministic CSV: schema tag line, header, one line per row. Wall
/// times go to report.json only.
void write_convergence_csv(const ConvergenceTable& table, std::ostream& out);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of log(y) = slope log(x) + intercept over positive pairs.
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class PlotKind { V, L2, Decay };

struct SeriesInfo {
  std::filesystem::path path;
  std::string label;
  int points = 0;
  double slope = 0.0;
};

/// One "series_<kind>_<method>[_m<m>].csv" per method with (H, error) rows.
std::vector<SeriesInfo> emit_plot_data(const ConvergenceTable& table, PlotKind kind,
                                       const std::filesystem::path& dir);
/// Decay series (m, e(m)).
SeriesInfo emit_decay_data(const DecayProfile& profile, const std::filesystem::path& dir);

/// Free coarse dof closest to the centre of the domain.
int central_coarse_dof(const MeshHierarchy& mesh);

/// Writes convergence.csv, series_*.csv and report.json (with wall times)
/// into config.out_dir.
void write_run_outputs(const RunConfig& config, const ConvergenceTable& table);

}  // namespace helmlod
