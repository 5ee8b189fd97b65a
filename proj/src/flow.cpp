#include "lcn/flow.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace lcn {

Eigen::VectorXd solve_sym_system(const SpMat& matrix,
                                 const Eigen::VectorXd& rhs) {
  Eigen::SimplicialLLT<SpMat> llt(matrix);
  if (llt.info() != Eigen::Success)
    throw NotSpdError("indefinite pivot in symmetric factorization");
  Eigen::VectorXd x = llt.solve(rhs);
  const double scale = rhs.norm();
  if (scale == 0.0) return x;
  double res = (matrix * x - rhs).norm() / scale;
  if (res > 1e-12) {
    x += llt.solve(rhs - matrix * x);
    res = (matrix * x - rhs).norm() / scale;
    if (res > 1e-12 || !x.allFinite())
      throw SingularSystemError("relative residual " + std::to_string(res));
  }
  return x;
}

GradientFlow::GradientFlow(const TriMesh& mesh, const EnergyModel& model,
                           FlowConfig config)
    : model_(model), config_(config), h1_(h1_matrix(mesh)) {}

Deformation GradientFlow::newton_substep(const Deformation& y_i,
                                         int& newton_iters) {
  const double inv_tau = 1.0 / config_.tau;
  Deformation y = y_i;
  double prev_dec = std::numeric_limits<double>::infinity();
  int grow_streak = 0;

  for (int n = 0; n < config_.max_newton; ++n) {
    Eigen::VectorXd grad_L;
    SpMat A;
    try {
      grad_L = inv_tau * (h1_ * (y - y_i)) + model_.gradient(y);
      A = inv_tau * h1_ + model_.hessian(y);
    } catch (const DegenerateElementError& err) {
      throw DivergedNewtonError(err.what(), n);
    }

    if (!pattern_analyzed_) {
      solver_.analyzePattern(A);
      pattern_analyzed_ = true;
    }
    solver_.factorize(A);
    if (solver_.info() != Eigen::Success)
      throw DivergedNewtonError("system not SPD", n);

    const Eigen::VectorXd dy = solver_.solve(-grad_L);
    const double dec = std::abs(grad_L.dot(dy));  // |dL(dy)|
    if (!std::isfinite(dec))
      throw DivergedNewtonError("non-finite Newton decrement", n);

    y += dy;
    newton_iters = n + 1;
    if (std::sqrt(dec) <= config_.tol1) return y;

    if (dec > prev_dec) {
      if (++grow_streak >= 3)
        throw DivergedNewtonError("Newton residual grew 3 times", n);
    } else {
      grow_streak = 0;
    }
    prev_dec = dec;
  }
  throw DivergedNewtonError("Newton iteration cap reached", config_.max_newton);
}

FlowReport GradientFlow::run(Deformation& y) {
  FlowReport report;
  EnergyBreakdown prev = model_.energy(y);
  report.energies.push_back(prev);

  auto log_row = [this](int i, const EnergyBreakdown& e, int newton) {
    if (!log_) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d\n", i, e.stretch,
                  e.regularization, e.total, newton);
    (*log_) << buf;
  };
  if (log_) (*log_) << "iteration,stretch,regularization,total,newton_count\n";
  log_row(0, prev, 0);

  for (int i = 1; i <= config_.max_flow; ++i) {
    Deformation y_next;
    int newton = 0;
    try {
      y_next = newton_substep(y, newton);
    } catch (const DivergedNewtonError& err) {
      report.status = FlowStatus::Diverged;
      report.divergence_reason = err.what();
      return report;
    }

    const EnergyBreakdown cur = model_.energy(y_next);
    if (cur.total > prev.total + 1e-12) {
      report.status = FlowStatus::Diverged;
      report.divergence_reason = "energy increased across accepted step";
      return report;
    }

    const Eigen::VectorXd step = y_next - y;
    report.step_h1_sq.push_back(step.dot(h1_ * step));
    report.newton_counts.push_back(newton);
    report.energies.push_back(cur);
    report.iterations = i;
    y = y_next;
    log_row(i, cur, newton);

    if (std::abs(cur.total - prev.total) / config_.tau <= config_.tol2) {
      report.status = FlowStatus::Converged;
      return report;
    }
    prev = cur;
  }
  report.status = FlowStatus::CapReached;
  return report;
}

double find_tau_max(const std::function<bool(double)>& converges, double tau0,
                    double width, double cap) {
  double lo = tau0;
  while (!converges(lo)) {
    lo *= 0.5;
    if (lo < 1e-6)
      throw std::runtime_error("no converging tau found above 1e-6");
  }
  double hi = 2.0 * lo;
  while (converges(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) throw NoDivergingTauError(cap);
  }
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (converges(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace lcn
