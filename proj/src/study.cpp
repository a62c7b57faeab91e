#include "mixedfem/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mixedfem {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean value \"" + v + "\"");
}

const std::vector<std::string> kKnownNorms{"flux_l2", "flux_hdiv",
                                           "flux_hdiv_div", "pot_dg",
                                           "pot_dg_star"};

}  // namespace

void StudyConfig::validate() const {
  flux_space().validate();
  if (family == Family::BDM && degree < 1)
    throw ConfigError("BDM degree must be >= 1");
  if (levels < 1) throw ConfigError("levels must be >= 1");
  if (refinement != "uniform" && refinement != "graded")
    throw ConfigError("refinement must be uniform or graded");
  if (solver != "schur" && solver != "direct")
    throw ConfigError("solver must be schur or direct");
  if (!(solver_tol >= 1e-14 && solver_tol <= 1e-6))
    throw ConfigError("solver_tol must lie in [1e-14, 1e-6]");
  for (const std::string& n : norms) {
    if (std::find(kKnownNorms.begin(), kKnownNorms.end(), n) ==
        kKnownNorms.end())
      throw ConfigError("unknown norm \"" + n + "\"");
    if (n == "pot_dg_star" && !postprocess)
      throw ConfigError("pot_dg_star requires postprocess = true");
  }
}

StudyConfig parse_config(std::istream& in) {
  StudyConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "problem") c.problem = val;
      else if (key == "jump_ratio") c.params.jump_ratio = std::stod(val);
      else if (key == "kellogg_gamma") c.params.kellogg_gamma = std::stod(val);
      else if (key == "family") {
        if (val == "RT") c.family = Family::RT;
        else if (val == "BDM") c.family = Family::BDM;
        else throw ConfigError("family must be RT or BDM");
      }
      else if (key == "degree") c.degree = std::stoi(val);
      else if (key == "levels") c.levels = std::stoi(val);
      else if (key == "refinement") c.refinement = val;
      else if (key == "graded_center_x") c.graded_center.x() = std::stod(val);
      else if (key == "graded_center_y") c.graded_center.y() = std::stod(val);
      else if (key == "graded_factor") c.graded_factor = std::stod(val);
      else if (key == "graded_passes_per_level")
        c.graded_passes_per_level = std::stoi(val);
      else if (key == "norms") {
        c.norms.clear();
        std::stringstream ss(val);
        std::string item;
        while (std::getline(ss, item, ',')) {
          item = trim(item);
          if (!item.empty()) c.norms.push_back(item);
        }
      }
      else if (key == "postprocess") c.postprocess = parse_bool(val);
      else if (key == "analysis") c.analysis = parse_bool(val);
      else if (key == "solver") c.solver = val;
      else if (key == "solver_tol") c.solver_tol = std::stod(val);
      else if (key == "quad_order") c.quad_order = std::stoi(val);
      else if (key == "dyadic_depth") c.dyadic_depth = std::stoi(val);
      else if (key == "dump_matrices") c.dump_matrices = parse_bool(val);
      else if (key == "output_dir") c.output_dir = val;
      else if (key == "seed") c.seed = static_cast<unsigned>(std::stoul(val));
      else throw ConfigError("unknown key \"" + key + "\"");
    } catch (const std::invalid_argument&) {
      throw ConfigError("line " + std::to_string(lineno) + ": bad value for " +
                        key);
    }
  }
  c.validate();
  return c;
}

StudyConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in);
}

std::vector<double> observed_rates(const std::vector<double>& errors,
                                   const std::vector<double>& h_or_dofs,
                                   RateBasis basis) {
  if (errors.size() < 2 || errors.size() != h_or_dofs.size())
    throw NonPositiveError("observed_rates needs >= 2 matching values");
  for (double e : errors)
    if (!(e > 0.0)) throw NonPositiveError("non-positive error value");
  std::vector<double> rates;
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    const double eratio = std::log(errors[i] / errors[i + 1]);
    if (basis == RateBasis::MeshSize)
      rates.push_back(eratio / std::log(h_or_dofs[i] / h_or_dofs[i + 1]));
    else
      rates.push_back(2.0 * eratio /
                      std::log(h_or_dofs[i + 1] / h_or_dofs[i]));
  }
  return rates;
}

void write_table_csv(const ConvergenceTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  out << "level,n_flux,n_pot,max_h";
  for (const std::string& n : table.norm_names)
    out << "," << n << ",rate_" << n;
  out << "\n";
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const ConvergenceRow& r = table.rows[i];
    out << r.level << "," << r.n_flux << "," << r.n_pot << "," << fmt(r.max_h);
    for (const std::string& n : table.norm_names) {
      out << "," << fmt(r.errors.at(n)) << ",";
      const auto& rr = table.rates.at(n);
      if (i >= 1 && i - 1 < rr.size()) out << fmt(rr[i - 1]);
    }
    out << "\n";
  }
}

ConvergenceTable read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw Error("empty table " + path);
  std::vector<std::string> cols;
  {
    std::stringstream ss(header);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  ConvergenceTable t;
  for (size_t i = 4; i < cols.size(); i += 2) t.norm_names.push_back(cols[i]);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<std::string> vals;
    while (std::getline(ss, c, ',')) vals.push_back(c);
    vals.resize(cols.size());
    ConvergenceRow r;
    r.level = std::stoi(vals[0]);
    r.n_flux = std::stoi(vals[1]);
    r.n_pot = std::stoi(vals[2]);
    r.max_h = std::stod(vals[3]);
    for (size_t i = 0; i < t.norm_names.size(); ++i)
      r.errors[t.norm_names[i]] = std::stod(vals[4 + 2 * i]);
    t.rows.push_back(r);
  }
  for (const std::string& n : t.norm_names) t.rates[n] = {};
  return t;
}

namespace {

bool wants(const StudyConfig& c, const std::string& norm) {
  return std::find(c.norms.begin(), c.norms.end(), norm) != c.norms.end();
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const bool need_rates = config.levels >= 2;
  if (!need_rates && config.levels < 1)
    throw ConfigError("levels must be >= 1");

  const ProblemSpec problem = get_problem(config.problem, config.params);
  const SpaceDescriptor flux_desc = config.flux_space();
  const int pot_degree = config.pot_degree();

  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  MomentQuadrature mq;
  mq.singular_points = problem.singular_points;
  mq.dyadic_depth = config.dyadic_depth;
  NormOptions nopts;
  nopts.quad_order = config.quad_order;
  nopts.singular_points = problem.singular_points;
  nopts.dyadic_depth = config.dyadic_depth;

  StudyResult result;
  result.table.norm_names = config.norms;

  for (int level = 1; level <= config.levels; ++level) {
    // Graded studies work on a uniformly refined background so the smooth
    // region keeps converging while the bisection passes resolve the
    // singular neighborhood much more deeply.
    RefinementSpec uni;
    uni.mode = RefinementSpec::Mode::Uniform;
    uni.levels = level;
    Mesh mesh = refine(problem.initial_mesh, uni);
    if (config.refinement == "graded") {
      RefinementSpec graded;
      graded.mode = RefinementSpec::Mode::GradedBisection;
      graded.center = config.graded_center;
      graded.grading_radius_factor = config.graded_factor;
      graded.levels = config.graded_passes_per_level * level;
      mesh = refine(mesh, graded);
    }
    const CoefficientField coeff =
        build_coefficient(mesh, problem.alpha_by_subdomain);

    const SaddleSystem sys = assemble_system(mesh, coeff, flux_desc,
                                             pot_degree, problem.f, problem.g,
                                             mq);
    if (config.dump_matrices) {
      write_matrix_market(sys.A, config.output_dir + "/level_" +
                                     std::to_string(level) + "_A.mtx");
      write_matrix_market(sys.B, config.output_dir + "/level_" +
                                     std::to_string(level) + "_B.mtx");
    }
    const SolveReport solve =
        solve_saddle(sys, config.solver_tol,
                     config.solver == "direct" ? SolveMethod::Direct
                                               : SolveMethod::Schur);

    ConvergenceRow row;
    row.level = level;
    row.n_flux = sys.flux_dofmap->n_global;
    row.n_pot = sys.pot_dofmap->n_global;
    row.max_h = mesh.max_h();

    ElementErrors breakdown;
    breakdown.err_l2_sq.assign(mesh.n_triangles(), 0.0);
    breakdown.err_div_sq.assign(mesh.n_triangles(), 0.0);

    if (problem.has_exact) {
      if (wants(config, "flux_l2"))
        row.errors["flux_l2"] = flux_error_weighted_l2(
            mesh, coeff, problem.exact_sigma, solve.flux, nopts, &breakdown);
      if (wants(config, "flux_hdiv") || wants(config, "flux_hdiv_div")) {
        double div_part = 0.0;
        const double hdiv = flux_error_hdiv_alpha_h(
            mesh, coeff, problem.exact_sigma, problem.f, solve.flux, nopts,
            &div_part, &breakdown);
        if (wants(config, "flux_hdiv")) row.errors["flux_hdiv"] = hdiv;
        if (wants(config, "flux_hdiv_div"))
          row.errors["flux_hdiv_div"] = div_part;
      }
      const AnalyticScalarField exact_u{problem.exact_u, problem.exact_grad_u};
      if (wants(config, "pot_dg"))
        row.errors["pot_dg"] =
            potential_error_dg(mesh, coeff, exact_u,
                               as_piecewise(mesh, solve.potential), problem.g,
                               nopts);
      if (config.postprocess) {
        const PostField star =
            stenberg_postprocess(mesh, coeff, solve.flux, solve.potential,
                                 flux_desc.degree, problem.f, mq);
        if (wants(config, "pot_dg_star"))
          row.errors["pot_dg_star"] = potential_error_dg(
              mesh, coeff, exact_u, as_piecewise(mesh, star), problem.g, nopts);
      }
    } else {
      for (const std::string& n : config.norms)
        if (n != "flux_hdiv_div") row.errors[n] = 0.0;
    }

    result.equilibration.push_back(
        equilibration_residual(mesh, solve.flux, problem.f, pot_degree, mq));
    result.solve_residuals.push_back(solve.residual_norm);
    result.solve_seconds.push_back(solve.wall_time_s);

    const std::string elem_csv =
        "level_" + std::to_string(level) + "_elements.csv";
    write_element_errors_csv(mesh, coeff, breakdown,
                             config.output_dir + "/" + elem_csv);
    result.element_csvs.push_back(elem_csv);

    if (config.analysis) {
      SpectralReport sr;
      sr.level = level;
      double amax = 0.0, amin = 1e300;
      for (const auto& [id, a] : problem.alpha_by_subdomain) {
        amax = std::max(amax, a);
        amin = std::min(amin, a);
      }
      sr.alpha_ratio = amax / amin;
      sr.n_flux = row.n_flux;
      sr.n_pot = row.n_pot;
      sr.beta = infsup_constant(mesh, coeff, flux_desc, pot_degree);
      sr.c_equiv = norm_equivalence_constant(mesh, coeff, flux_desc);
      result.spectral.push_back(sr);
    }

    result.table.rows.push_back(std::move(row));
  }

  // observed rates: against h for uniform sequences, against flux DOF counts
  // for graded ones (max h stays pinned by the coarse region)
  for (const std::string& n : result.table.norm_names) {
    std::vector<double> errs, basis_vals;
    bool have = true;
    for (const ConvergenceRow& r : result.table.rows) {
      const auto it = r.errors.find(n);
      if (it == r.errors.end() || !(it->second > 0.0)) have = false;
      errs.push_back(it == r.errors.end() ? 0.0 : it->second);
      basis_vals.push_back(config.refinement == "uniform"
                               ? r.max_h
                               : static_cast<double>(r.n_flux));
    }
    if (have && errs.size() >= 2)
      result.table.rates[n] = observed_rates(
          errs, basis_vals,
          config.refinement == "uniform" ? RateBasis::MeshSize
                                         : RateBasis::DofCount);
    else
      result.table.rates[n] = {};
  }

  result.table_path = config.output_dir + "/table.csv";
  write_table_csv(result.table, result.table_path);

  nlohmann::ordered_json rep;
  rep["library"] = std::string("mixedfem ") + kLibraryVersion;
  nlohmann::ordered_json cfg;
  cfg["problem"] = config.problem;
  cfg["jump_ratio"] = config.params.jump_ratio;
  cfg["kellogg_gamma"] = config.params.kellogg_gamma;
  cfg["family"] = config.family == Family::RT ? "RT" : "BDM";
  cfg["degree"] = config.degree;
  cfg["levels"] = config.levels;
  cfg["refinement"] = config.refinement;
  cfg["graded_center"] = {config.graded_center.x(), config.graded_center.y()};
  cfg["graded_factor"] = config.graded_factor;
  cfg["graded_passes_per_level"] = config.graded_passes_per_level;
  cfg["norms"] = config.norms;
  cfg["postprocess"] = config.postprocess;
  cfg["analysis"] = config.analysis;
  cfg["solver"] = config.solver;
  cfg["solver_tol"] = config.solver_tol;
  cfg["quad_order"] = config.quad_order;
  cfg["dyadic_depth"] = config.dyadic_depth;
  cfg["output_dir"] = config.output_dir;
  cfg["seed"] = config.seed;
  rep["config"] = cfg;
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (size_t i = 0; i < result.table.rows.size(); ++i) {
    const ConvergenceRow& r = result.table.rows[i];
    nlohmann::ordered_json jr;
    jr["level"] = r.level;
    jr["n_flux"] = r.n_flux;
    jr["n_pot"] = r.n_pot;
    jr["max_h"] = r.max_h;
    for (const auto& [k, v] : r.errors) jr[k] = v;
    jr["equilibration_residual"] = result.equilibration[i];
    jr["solver_residual"] = result.solve_residuals[i];
    jr["solve_seconds"] = result.solve_seconds[i];
    jr["element_errors_csv"] = result.element_csvs[i];
    levels.push_back(jr);
  }
  rep["levels"] = levels;
  nlohmann::ordered_json jrates;
  for (const auto& [k, v] : result.table.rates) jrates[k] = v;
  rep["rates"] = jrates;
  if (config.analysis) {
    nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
    for (const SpectralReport& s : result.spectral) {
      nlohmann::ordered_json js;
      js["level"] = s.level;
      js["n_flux"] = s.n_flux;
      js["n_pot"] = s.n_pot;
      js["alpha_ratio"] = s.alpha_ratio;
      js["beta"] = s.beta;
      js["C_equiv"] = s.c_equiv;
      sweep.push_back(js);
    }
    rep["spectral"] = sweep;
  }

  result.report_path = config.output_dir + "/report.json";
  std::ofstream out(result.report_path);
  out << rep.dump(2) << "\n";
  return result;
}

std::string mesh_info_text(const Mesh& mesh) {
  int interior = 0, dirichlet = 0, interface = 0;
  for (const Edge& e : mesh.edges) {
    if (e.cls == EdgeClass::Interior)
      ++interior;
    else
      ++dirichlet;
    if (e.interface) ++interface;
  }
  std::ostringstream os;
  os << "vertices:        " << mesh.n_vertices() << "\n"
     << "triangles:       " << mesh.n_triangles() << "\n"
     << "edges:           " << mesh.n_edges() << " (" << interior
     << " interior, " << dirichlet << " Dirichlet, " << interface
     << " interface)\n"
     << "total area:      " << fmt(mesh.total_area()) << "\n"
     << "h range:         [" << fmt(mesh.min_h()) << ", " << fmt(mesh.max_h())
     << "]\n"
     << "shape regularity (max h_K/inradius): " << fmt(mesh.shape_regularity())
     << "\n";
  return os.str();
}

}  // namespace mixedfem
