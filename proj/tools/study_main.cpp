#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include <Eigen/Core>
#include <json.hpp>

#include "mixedfem/study.hpp"

using namespace mixedfem;

int main(int argc, char** argv) {
  // STUDY_THREADS caps internal parallelism (the pipeline is sequential, but
  // Eigen honors the cap for any threaded kernels).
  if (const char* env = std::getenv("STUDY_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{"mixed finite element benchmark driver"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run a study from a config file");
  run->add_option("config", config_path, "path to key = value config")
      ->required();

  std::string table_path;
  CLI::App* rates = app.add_subcommand("rates", "recompute rates from a table.csv");
  rates->add_option("table", table_path, "path to table.csv")->required();

  std::string mesh_path;
  CLI::App* info = app.add_subcommand("mesh-info", "print mesh statistics");
  info->add_option("mesh", mesh_path, "path to node/element mesh file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const StudyConfig config = parse_config_file(config_path);
      const StudyResult result = run_study(config);
      std::cout << "wrote " << result.table_path << "\n"
                << "wrote " << result.report_path << "\n";
      for (const auto& [norm, rr] : result.table.rates) {
        std::cout << norm << " rates:";
        for (double r : rr) std::cout << " " << r;
        std::cout << "\n";
      }
      return 0;
    }
    if (rates->parsed()) {
      const ConvergenceTable t = read_table_csv(table_path);
      if (t.rows.size() < 2) throw NonPositiveError("need >= 2 table rows");
      std::vector<double> hs, ns;
      for (const ConvergenceRow& r : t.rows) {
        hs.push_back(r.max_h);
        ns.push_back(r.n_flux);
      }
      // graded tables keep max_h pinned; fall back to DOF-based rates then
      const bool h_decreasing = hs.front() > 1.01 * hs.back();
      for (const std::string& n : t.norm_names) {
        std::vector<double> errs;
        for (const ConvergenceRow& r : t.rows) errs.push_back(r.errors.at(n));
        std::cout << n << ":";
        try {
          const std::vector<double> rr =
              h_decreasing ? observed_rates(errs, hs, RateBasis::MeshSize)
                           : observed_rates(errs, ns, RateBasis::DofCount);
          for (double r : rr) std::cout << " " << r;
        } catch (const NonPositiveError&) {
          std::cout << " (non-positive errors)";
        }
        std::cout << "\n";
      }
      return 0;
    }
    if (info->parsed()) {
      std::cout << mesh_info_text(read_mesh_file(mesh_path));
      return 0;
    }
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 2;
}
