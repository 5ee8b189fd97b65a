#pragma once

#include <Eigen/SparseCholesky>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lcn/fem.hpp"

namespace lcn {

struct FlowConfig {
  double tau = 1.0;
  double tol1 = 1e-10;  // Newton decrement tolerance, |dL(dy)|^{1/2}
  double tol2 = 1e-9;   // energy-slope tolerance, (1/tau)|E^N - E^{N-1}|
  int max_newton = 30;
  int max_flow = 100000;
  bool crease_aware = false;
};

enum class FlowStatus { Converged, Diverged, CapReached };

struct FlowReport {
  std::vector<EnergyBreakdown> energies;  // [0] = initial state, then per step
  std::vector<int> newton_counts;
  std::vector<double> step_h1_sq;  // ||y^{i+1} - y^i||_{H1}^2 per step
  FlowStatus status = FlowStatus::CapReached;
  int iterations = 0;  // accepted outer steps N
  double final_e_h = 0.0;
  std::string divergence_reason;
};

/// Energy functional seen by the flow; the default implementation wraps the
/// assembled discrete energy, tests may substitute a surrogate.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;
  virtual EnergyBreakdown energy(const Deformation& y) const = 0;
  virtual Eigen::VectorXd gradient(const Deformation& y) const = 0;
  virtual SpMat hessian(const Deformation& y) const = 0;
};

class DiscreteEnergy : public EnergyModel {
 public:
  DiscreteEnergy(const TriMesh& mesh, const MaterialField& material,
                 bool crease_aware)
      : mesh_(mesh), material_(material), crease_aware_(crease_aware) {}

  EnergyBreakdown energy(const Deformation& y) const override {
    return assemble_energy(mesh_, material_, y, crease_aware_);
  }
  Eigen::VectorXd gradient(const Deformation& y) const override {
    return assemble_gradient(mesh_, material_, y, crease_aware_);
  }
  SpMat hessian(const Deformation& y) const override {
    return assemble_hessian(mesh_, material_, y, crease_aware_);
  }

 private:
  const TriMesh& mesh_;
  const MaterialField& material_;
  bool crease_aware_;
};

/// One-shot SPD solve with relative residual <= 1e-12 (one refinement pass
/// if needed). Throws NotSpdError on an indefinite pivot, SingularSystemError
/// if the residual cannot be met.
Eigen::VectorXd solve_sym_system(const SpMat& matrix,
                                 const Eigen::VectorXd& rhs);

/// H1-metric gradient flow with Newton sub-iterations. One run is sequential
/// and deterministic; independent runs share no mutable state.
class GradientFlow {
 public:
  GradientFlow(const TriMesh& mesh, const EnergyModel& model, FlowConfig config);

  /// Solves the implicit step starting from y_i; returns the Newton output
  /// and the number of inner iterations taken. Throws DivergedNewtonError.
  Deformation newton_substep(const Deformation& y_i, int& newton_iters);

  /// Runs the flow from y0; y0 is advanced in place to the final state.
  /// Streams a CSV iteration log (iteration, stretch, regularization, total,
  /// newton_count) when a log stream is set.
  FlowReport run(Deformation& y);

  void set_log(std::ostream* os) { log_ = os; }

  const SpMat& h1() const { return h1_; }

 private:
  const EnergyModel& model_;
  FlowConfig config_;
  SpMat h1_;
  Eigen::SimplicialLLT<SpMat> solver_;
  bool pattern_analyzed_ = false;
  std::ostream* log_ = nullptr;
};

/// Largest tau for which `converges(tau)` holds: doubles from tau0 to bracket
/// a diverging value, then bisects to the given width and returns the
/// converging endpoint. Throws NoDivergingTauError if doubling passes the cap.
double find_tau_max(const std::function<bool(double)>& converges,
                    double tau0 = 1.0, double width = 0.01,
                    double cap = 1024.0);

}  // namespace lcn
