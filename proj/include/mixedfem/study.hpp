#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mixedfem/analysis.hpp"
#include "mixedfem/norms.hpp"
#include "mixedfem/postprocess.hpp"
#include "mixedfem/problems.hpp"
#include "mixedfem/solver.hpp"

namespace mixedfem {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// One refinement study: problem + spaces + mesh sequence + requested
/// outputs. Parsed from a flat key = value config file ('#' comments).
///
/// Keys: problem, jump_ratio, kellogg_gamma, family (RT|BDM), degree,
/// levels, refinement (uniform|graded), graded_center_x/_y, graded_factor,
/// norms (comma list of flux_l2, flux_hdiv, pot_dg, pot_dg_star),
/// postprocess, analysis (true|false), solver (schur|direct), solver_tol,
/// quad_order, dyadic_depth, dump_matrices, output_dir, seed.
struct StudyConfig {
  std::string problem = "smooth";
  ProblemParams params;
  Family family = Family::RT;
  int degree = 0;
  int levels = 4;
  std::string refinement = "uniform";
  Vec2 graded_center = Vec2::Zero();
  double graded_factor = 0.5;
  // graded studies refine uniformly to the level and then run
  // graded_passes_per_level * level bisection passes toward the center
  int graded_passes_per_level = 2;
  std::vector<std::string> norms{"flux_l2"};
  bool postprocess = false;
  bool analysis = false;
  std::string solver = "schur";
  double solver_tol = 1e-12;
  int quad_order = 10;
  int dyadic_depth = 6;
  bool dump_matrices = false;
  std::string output_dir = "out";
  unsigned seed = 42;

  int pot_degree() const {
    return family == Family::RT ? degree : degree - 1;
  }
  SpaceDescriptor flux_space() const { return {family, degree}; }
  void validate() const;
};

StudyConfig parse_config(std::istream& in);
StudyConfig parse_config_file(const std::string& path);

struct ConvergenceRow {
  int level = 0;
  int n_flux = 0;
  int n_pot = 0;
  double max_h = 0.0;
  std::map<std::string, double> errors;
};

struct ConvergenceTable {
  std::vector<std::string> norm_names;
  std::vector<ConvergenceRow> rows;
  std::map<std::string, std::vector<double>> rates;
};

enum class RateBasis { MeshSize, DofCount };

/// Pairwise observed convergence rates: log(e_l/e_{l+1}) / log(h_l/h_{l+1})
/// against mesh size, or 2 log(e_l/e_{l+1}) / log(N_{l+1}/N_l) against DOF
/// counts for graded sequences.
std::vector<double> observed_rates(const std::vector<double>& errors,
                                   const std::vector<double>& h_or_dofs,
                                   RateBasis basis);

struct StudyResult {
  ConvergenceTable table;
  std::vector<SpectralReport> spectral;
  std::vector<double> equilibration;     // per level
  std::vector<double> solve_residuals;   // per level
  std::vector<double> solve_seconds;     // per level
  std::vector<std::string> element_csvs; // per level, relative paths
  std::string table_path;
  std::string report_path;
};

/// Runs the study, writes table.csv / report.json / per-level element error
/// CSVs into output_dir, and returns everything in memory as well.
StudyResult run_study(const StudyConfig& config);

void write_table_csv(const ConvergenceTable& table, const std::string& path);
ConvergenceTable read_table_csv(const std::string& path);

/// Human-readable summary of a mesh file (collected by `study mesh-info`).
std::string mesh_info_text(const Mesh& mesh);

}  // namespace mixedfem
