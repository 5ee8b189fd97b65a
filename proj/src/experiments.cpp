#include "lcn/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace lcn {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

enum class Region { Bottom, Right, Top, Left };

Region classify(const Vec2& x, const Vec2& center) {
  const double dx = x.x() - center.x(), dy = x.y() - center.y();
  if (dy < -std::abs(dx)) return Region::Bottom;
  if (dy > std::abs(dx)) return Region::Top;
  return dx > 0.0 ? Region::Right : Region::Left;
}

}  // namespace

Vec2 director_preset(const std::string& name, const Vec2& x,
                     const Vec2& center) {
  if (name == "smooth") {
    const Vec2 v(x.x() + 1.0, x.y() + 1.0);
    return v / v.norm();
  }
  if (name == "defect") {
    const Vec2 d = x - center;
    if (d.norm() == 0.0)
      throw SingularDirectorError("defect director evaluated at its center");
    const double theta = std::atan2(d.y(), d.x());
    return {std::cos(1.5 * theta), std::sin(1.5 * theta)};
  }
  if (name == "pyramid") {
    // Directors parallel to the nearest boundary edge; contracts the
    // boundary under heating and folds into a pyramid.
    switch (classify(x, center)) {
      case Region::Bottom: return {1.0, 0.0};
      case Region::Right: return {0.0, 1.0};
      case Region::Top: return {-1.0, 0.0};
      case Region::Left: return {0.0, -1.0};
    }
  }
  if (name == "pyramid_alt") {
    // Directors normal to the nearest boundary edge; the boundary lengthens
    // and equilibria show multiple folds.
    switch (classify(x, center)) {
      case Region::Bottom: return {0.0, -1.0};
      case Region::Right: return {-1.0, 0.0};
      case Region::Top: return {0.0, 1.0};
      case Region::Left: return {1.0, 0.0};
    }
  }
  throw std::invalid_argument("unknown director preset: " + name);
}

std::function<Vec3(const Vec2&)> initializer_preset(const std::string& name,
                                                    const Rect& domain) {
  if (name == "bubble") {
    return [domain](const Vec2& x) {
      const double z = 0.8 * (x.x() - domain.xmin) * (domain.xmax - x.x()) *
                       (x.y() - domain.ymin) * (domain.ymax - x.y());
      return Vec3(x.x(), x.y(), z);
    };
  }
  if (name == "cosine") {
    return [domain](const Vec2& x) {
      const double u = (x.x() - domain.xmin) / domain.width();
      const double v = (x.y() - domain.ymin) / domain.height();
      const double z = 0.2 * std::cos(7.0 * M_PI * (u - 0.5)) * v * (v - 1.0);
      return Vec3(x.x(), x.y(), z);
    };
  }
  if (name == "identity") {
    return [](const Vec2& x) { return Vec3(x.x(), x.y(), 0.0); };
  }
  throw std::invalid_argument("unknown initializer preset: " + name);
}

Problem build_problem(const ExperimentSpec& spec) {
  Problem p;
  if (spec.mesh_kind == "crease_fitted") {
    p.mesh = crease_fitted_square(spec.n, spec.domain,
                                  diagonal_creases(spec.domain));
  } else if (spec.mesh_kind == "structured" || spec.mesh_kind == "strip_mask") {
    p.mesh = structured_square(spec.n, spec.domain, Pattern::SingleDiagonal);
  } else {
    throw std::invalid_argument("unknown mesh kind: " + spec.mesh_kind);
  }

  const Vec2 center = spec.domain.center();
  const std::string director = spec.director;
  MaterialField::DirectorFn dir_fn = [director, center](const Vec2& x) {
    return director_preset(director, x, center);
  };

  MaterialField::ScalarFn c_r_fn;
  if (spec.c_r_kind == "constant" || spec.c_r_kind == "crease") {
    const double value = spec.c_r_value;
    c_r_fn = [value](const Vec2&) { return value; };
  } else if (spec.c_r_kind == "strip") {
    const CreaseSpec creases = diagonal_creases(spec.domain);
    const double value = spec.c_r_value, width = spec.strip_width;
    c_r_fn = [creases, value, width](const Vec2& x) {
      return distance_to_creases(creases, x) < width ? 0.0 : value;
    };
  } else {
    throw std::invalid_argument("unknown c_r kind: " + spec.c_r_kind);
  }
  if (spec.c_r_kind == "crease" && spec.mesh_kind != "crease_fitted")
    throw std::invalid_argument("c_r kind 'crease' needs a crease-fitted mesh");

  p.material = std::make_unique<MaterialField>(p.mesh, dir_fn, spec.s, spec.s0,
                                               c_r_fn);
  p.y0 = interpolate(initializer_preset(spec.initializer, spec.domain), p.mesh);
  p.config.tau = spec.tau;
  p.config.tol1 = spec.tol1;
  p.config.tol2 = spec.tol2;
  p.config.max_newton = spec.max_newton;
  p.config.max_flow = spec.max_flow;
  p.config.crease_aware = spec.c_r_kind == "crease";
  return p;
}

namespace {

struct RunOutput {
  FlowReport report;
  Deformation y;
  std::string csv_log;
};

RunOutput run_once(const Problem& p, double tau) {
  RunOutput out;
  DiscreteEnergy model(p.mesh, *p.material, p.config.crease_aware);
  FlowConfig cfg = p.config;
  cfg.tau = tau;
  GradientFlow flow(p.mesh, model, cfg);
  std::ostringstream log;
  flow.set_log(&log);
  out.y = p.y0;
  out.report = flow.run(out.y);
  if (out.report.status == FlowStatus::Converged)
    out.report.final_e_h = metric_deviation(p.mesh, *p.material, out.y);
  out.csv_log = log.str();
  return out;
}

double tau_max_impl(const Problem& p, RunOutput* best) {
  RunOutput cached;
  double cached_tau = -1.0;
  auto converges = [&](double tau) {
    RunOutput r = run_once(p, tau);
    const bool ok = r.report.status == FlowStatus::Converged;
    if (ok) {
      cached = std::move(r);
      cached_tau = tau;
    }
    return ok;
  };
  const double tau_max = find_tau_max(converges);
  if (best) {
    if (cached_tau != tau_max) cached = run_once(p, tau_max);
    *best = std::move(cached);
  }
  return tau_max;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const TriMesh** mesh_out) {
  static thread_local std::unique_ptr<Problem> last_problem;
  Problem problem = build_problem(spec);

  RunOutput out;
  double tau_used = spec.tau;
  if (spec.tau_auto) {
    tau_used = tau_max_impl(problem, &out);
  } else {
    out = run_once(problem, spec.tau);
  }

  ExperimentResult result;
  result.report = std::move(out.report);
  result.tau_used = tau_used;
  result.final_y = std::move(out.y);

  if (!spec.output_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.output_dir);
    export_surface(problem.mesh, result.final_y,
                   spec.output_dir + "/surface.vtk");
    std::ofstream(spec.output_dir + "/iterations.csv") << out.csv_log;

    ordered_json summary;
    summary["name"] = spec.name;
    summary["status"] =
        result.report.status == FlowStatus::Converged   ? "converged"
        : result.report.status == FlowStatus::Diverged ? "diverged"
                                                        : "cap-reached";
    summary["iterations"] = result.report.iterations;
    summary["tau"] = tau_used;
    summary["initializer"] = spec.initializer;
    summary["e_h"] = result.report.final_e_h;
    if (!result.report.energies.empty()) {
      const auto& e = result.report.energies.back();
      summary["stretch"] = e.stretch;
      summary["regularization"] = e.regularization;
      summary["total"] = e.total;
    }
    if (!result.report.divergence_reason.empty())
      summary["divergence_reason"] = result.report.divergence_reason;
    std::ofstream(spec.output_dir + "/summary.json") << summary.dump(2) << "\n";
  }

  if (mesh_out) {
    last_problem = std::make_unique<Problem>(std::move(problem));
    *mesh_out = &last_problem->mesh;
  }
  return result;
}

double experiment_tau_max(const ExperimentSpec& spec,
                          ExperimentResult* best_run) {
  Problem problem = build_problem(spec);
  RunOutput best;
  const double tau_max = tau_max_impl(problem, best_run ? &best : nullptr);
  if (best_run) {
    best_run->report = std::move(best.report);
    best_run->final_y = std::move(best.y);
    best_run->tau_used = tau_max;
  }
  return tau_max;
}

ConvergenceTable convergence_study(const ExperimentSpec& spec,
                                   const std::vector<int>& ns, bool parallel) {
  if (ns.size() < 3)
    throw std::invalid_argument("convergence study needs >= 3 mesh sizes");

  auto run_row = [&spec](int n) {
    ExperimentSpec s = spec;
    s.n = n;
    if (!spec.output_dir.empty())
      s.output_dir = spec.output_dir + "/n" + std::to_string(n);
    ExperimentResult r = run_experiment(s);
    SweepRow row;
    row.h = spec.domain.width() / n;
    row.tau = r.tau_used;
    row.diverged = r.report.status != FlowStatus::Converged;
    row.iterations = r.report.iterations;
    if (!row.diverged) {
      row.e_h = r.report.final_e_h;
      row.energy = std::abs(r.report.energies.back().total);
    }
    return row;
  };

  ConvergenceTable table;
  if (parallel) {
    std::vector<std::future<SweepRow>> jobs;
    for (int n : ns)
      jobs.push_back(std::async(std::launch::async, run_row, n));
    for (auto& job : jobs) table.rows.push_back(job.get());
  } else {
    for (int n : ns) table.rows.push_back(run_row(n));
  }

  std::vector<std::pair<double, double>> eh_pts, en_pts;
  for (const auto& row : table.rows) {
    if (row.diverged) continue;
    eh_pts.emplace_back(row.h, row.e_h);
    en_pts.emplace_back(row.h, row.energy);
  }
  if (eh_pts.size() >= 2) {
    table.e_h_slope = loglog_slope(eh_pts);
    table.energy_slope = loglog_slope(en_pts);
  }
  return table;
}

void write_sweep_csv(const ConvergenceTable& table, std::ostream& os) {
  os << "h,e_h,E_h,N,tau\n";
  for (const auto& row : table.rows) {
    if (row.diverged) {
      os << fmt17(row.h) << ",diverge,diverge,diverge," << fmt17(row.tau)
         << "\n";
    } else {
      os << fmt17(row.h) << "," << fmt17(row.e_h) << "," << fmt17(row.energy)
         << "," << row.iterations << "," << fmt17(row.tau) << "\n";
    }
  }
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const auto& [h, v] : points) {
    const double x = std::log(h), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void export_surface(const TriMesh& mesh, const Deformation& y,
                    std::ostream& os) {
  const int nv = mesh.num_vertices(), nt = mesh.num_triangles();
  os << "# vtk DataFile Version 3.0\n"
     << "deformed membrane surface\n"
     << "ASCII\n"
     << "DATASET UNSTRUCTURED_GRID\n"
     << "POINTS " << nv << " double\n";
  for (int v = 0; v < nv; ++v)
    os << fmt17(y[3 * v]) << " " << fmt17(y[3 * v + 1]) << " "
       << fmt17(y[3 * v + 2]) << "\n";
  os << "CELLS " << nt << " " << 4 * nt << "\n";
  for (const auto& t : mesh.triangles())
    os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << nt << "\n";
  for (int t = 0; t < nt; ++t) os << "5\n";
  os << "POINT_DATA " << nv << "\n"
     << "SCALARS vertical_displacement double 1\n"
     << "LOOKUP_TABLE default\n";
  for (int v = 0; v < nv; ++v) os << fmt17(y[3 * v + 2]) << "\n";
}

void export_surface(const TriMesh& mesh, const Deformation& y,
                    const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  export_surface(mesh, y, os);
}

void to_json(json& j, const ExperimentSpec& spec) {
  j = json{{"name", spec.name},
           {"domain", {spec.domain.xmin, spec.domain.ymin, spec.domain.xmax,
                       spec.domain.ymax}},
           {"mesh", {{"kind", spec.mesh_kind}, {"n", spec.n}}},
           {"director", spec.director},
           {"s", spec.s},
           {"s0", spec.s0},
           {"c_r",
            {{"kind", spec.c_r_kind},
             {"value", spec.c_r_value},
             {"strip_width", spec.strip_width}}},
           {"tol1", spec.tol1},
           {"tol2", spec.tol2},
           {"max_newton", spec.max_newton},
           {"max_flow", spec.max_flow},
           {"initializer", spec.initializer},
           {"output_dir", spec.output_dir}};
  if (spec.tau_auto)
    j["tau"] = "auto";
  else
    j["tau"] = spec.tau;
}

void from_json(const json& j, ExperimentSpec& spec) {
  spec = ExperimentSpec{};
  j.at("name").get_to(spec.name);
  const auto& d = j.at("domain");
  spec.domain = Rect{d.at(0), d.at(1), d.at(2), d.at(3)};
  j.at("mesh").at("kind").get_to(spec.mesh_kind);
  j.at("mesh").at("n").get_to(spec.n);
  j.at("director").get_to(spec.director);
  j.at("s").get_to(spec.s);
  j.at("s0").get_to(spec.s0);
  if (j.contains("c_r")) {
    j.at("c_r").at("kind").get_to(spec.c_r_kind);
    j.at("c_r").at("value").get_to(spec.c_r_value);
    if (j.at("c_r").contains("strip_width"))
      j.at("c_r").at("strip_width").get_to(spec.strip_width);
  }
  if (j.at("tau").is_string()) {
    spec.tau_auto = true;
  } else {
    spec.tau_auto = false;
    j.at("tau").get_to(spec.tau);
  }
  j.at("tol1").get_to(spec.tol1);
  j.at("tol2").get_to(spec.tol2);
  if (j.contains("max_newton")) j.at("max_newton").get_to(spec.max_newton);
  if (j.contains("max_flow")) j.at("max_flow").get_to(spec.max_flow);
  j.at("initializer").get_to(spec.initializer);
  if (j.contains("output_dir")) j.at("output_dir").get_to(spec.output_dir);
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  json j;
  is >> j;
  return j.get<ExperimentSpec>();
}

}  // namespace lcn
