#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "lcn/flow.hpp"

namespace lcn {

/// Complete description of one experiment run; mirrors the JSON config
/// field-for-field.
struct ExperimentSpec {
  std::string name = "experiment";
  Rect domain{0.0, 0.0, 1.0, 1.0};
  std::string mesh_kind = "structured";  // structured | crease_fitted | strip_mask
  int n = 16;
  std::string director = "smooth";  // smooth | defect | pyramid | pyramid_alt
  double s = 0.1;
  double s0 = 1.0;
  std::string c_r_kind = "constant";  // constant | crease | strip
  double c_r_value = 0.0;
  double strip_width = 0.02;  // used by kind "strip"
  bool tau_auto = false;
  double tau = 1.0;
  double tol1 = 1e-10;
  double tol2 = 1e-9;
  int max_newton = 30;
  int max_flow = 100000;
  std::string initializer = "bubble";  // bubble | cosine | identity
  std::string output_dir;              // empty: no files written
};

void to_json(nlohmann::json& j, const ExperimentSpec& spec);
void from_json(const nlohmann::json& j, ExperimentSpec& spec);
ExperimentSpec load_spec(const std::string& path);

/// Director presets, evaluated at a point; `center` anchors the piecewise
/// pyramid fields and the defect location.
Vec2 director_preset(const std::string& name, const Vec2& x,
                     const Vec2& center);

/// Initializer presets over the given rectangle.
std::function<Vec3(const Vec2&)> initializer_preset(const std::string& name,
                                                    const Rect& domain);

/// Assembled problem: mesh, material, initial deformation, flow config.
struct Problem {
  TriMesh mesh;
  std::unique_ptr<MaterialField> material;
  Deformation y0;
  FlowConfig config;
};

Problem build_problem(const ExperimentSpec& spec);

struct ExperimentResult {
  FlowReport report;
  double tau_used = 0.0;
  Deformation final_y;
};

/// Runs the flow (resolving tau = "auto" via find_tau_max first) and, when
/// output_dir is set, writes surface.vtk, iterations.csv, and summary.json.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const TriMesh** mesh_out = nullptr);

/// Largest admissible time step for this experiment set-up (bracket width
/// 0.01); "admissible" means the flow finishes converged.
double experiment_tau_max(const ExperimentSpec& spec,
                          ExperimentResult* best_run = nullptr);

struct SweepRow {
  double h = 0.0;
  double e_h = 0.0;
  double energy = 0.0;
  int iterations = 0;
  double tau = 0.0;
  bool diverged = false;
};

struct ConvergenceTable {
  std::vector<SweepRow> rows;
  double e_h_slope = 0.0;
  double energy_slope = 0.0;
};

/// Runs the experiment family over the mesh sizes in `ns` (>= 3) and fits
/// log-log least-squares slopes over the converged rows. With parallel=true
/// the rows run as independent concurrent jobs; results are ordered by `ns`
/// either way.
ConvergenceTable convergence_study(const ExperimentSpec& spec,
                                   const std::vector<int>& ns,
                                   bool parallel = false);

void write_sweep_csv(const ConvergenceTable& table, std::ostream& os);

/// Legacy-VTK ASCII unstructured grid: deformed nodal positions, triangle
/// cells, and a point scalar with the vertical displacement. Byte-stable for
/// fixed inputs.
void export_surface(const TriMesh& mesh, const Deformation& y,
                    std::ostream& os);
void export_surface(const TriMesh& mesh, const Deformation& y,
                    const std::string& path);

/// Least-squares slope of log(value) against log(h).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace lcn
