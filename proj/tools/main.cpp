#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lcn/experiments.hpp"

namespace {

std::vector<int> parse_h_list(const std::string& list) {
  std::vector<int> ns;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int n = std::stoi(item);
    if (n < 1) throw CLI::ValidationError("--h entries must be positive");
    ns.push_back(n);
  }
  return ns;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-flow simulator for liquid crystal polymer membranes"};
  app.require_subcommand(1);
  // Long-form help only; the sweep subcommand uses "--h" for mesh sizes.
  app.set_help_flag("--help", "print usage");
  bool sequential = false;
  app.add_flag("--sequential", sequential,
               "run sweep entries one at a time (deterministic ordering)");

  std::string spec_path;
  std::string h_list = "16,32,64,128";
  std::string out_path;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("spec", spec_path, "experiment JSON file")->required();

  auto* sweep = app.add_subcommand("sweep", "mesh convergence study");
  sweep->add_option("spec", spec_path, "experiment JSON file")->required();
  sweep->add_option("--h", h_list, "comma-separated cell counts per side");

  auto* taumax =
      app.add_subcommand("taumax", "largest admissible time step");
  taumax->add_option("spec", spec_path, "experiment JSON file")->required();

  auto* exp = app.add_subcommand("export", "run and write the surface as VTK");
  exp->add_option("spec", spec_path, "experiment JSON file")->required();
  exp->add_option("-o,--output", out_path, "VTK output path")
      ->default_val("surface.vtk");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const lcn::ExperimentSpec spec = lcn::load_spec(spec_path);
      const lcn::ExperimentResult result = lcn::run_experiment(spec);
      const bool ok = result.report.status == lcn::FlowStatus::Converged;
      std::cout << spec.name << ": "
                << (ok ? "converged" : "did not converge") << " after "
                << result.report.iterations << " steps, tau = "
                << result.tau_used
                << ", e_h = " << result.report.final_e_h << "\n";
      if (!ok && !result.report.divergence_reason.empty())
        std::cout << "reason: " << result.report.divergence_reason << "\n";
      return ok ? 0 : 1;
    }

    if (sweep->parsed()) {
      const lcn::ExperimentSpec spec = lcn::load_spec(spec_path);
      const std::vector<int> ns = parse_h_list(h_list);
      const lcn::ConvergenceTable table =
          lcn::convergence_study(spec, ns, !sequential);
      lcn::write_sweep_csv(table, std::cout);
      std::cout << "# e_h slope " << table.e_h_slope << ", |E_h| slope "
                << table.energy_slope << "\n";
      if (!spec.output_dir.empty()) {
        std::ofstream os(spec.output_dir + "/sweep.csv");
        lcn::write_sweep_csv(table, os);
      }
      for (const auto& row : table.rows)
        if (row.diverged) return 1;
      return 0;
    }

    if (taumax->parsed()) {
      const lcn::ExperimentSpec spec = lcn::load_spec(spec_path);
      lcn::ExperimentResult best;
      const double tau_max = lcn::experiment_tau_max(spec, &best);
      std::cout << spec.name << ": tau_max = " << tau_max
                << ", e_h = " << best.report.final_e_h << " ("
                << best.report.iterations << " steps)\n";
      return 0;
    }

    const lcn::ExperimentSpec spec = lcn::load_spec(spec_path);
    const lcn::TriMesh* mesh = nullptr;
    const lcn::ExperimentResult result = lcn::run_experiment(spec, &mesh);
    lcn::export_surface(*mesh, result.final_y, out_path);
    std::cout << "wrote " << out_path << "\n";
    return result.report.status == lcn::FlowStatus::Converged ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
