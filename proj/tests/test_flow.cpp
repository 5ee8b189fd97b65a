#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "lcn/flow.hpp"

using namespace lcn;

namespace {

std::mt19937 rng(4242);

double urand(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

const Rect kUnit{0.0, 0.0, 1.0, 1.0};

Deformation identity_embedding(const TriMesh& mesh) {
  return interpolate(
      [](const Vec2& x) { return Vec3(x.x(), x.y(), 0.0); }, mesh);
}

// Fixed SPD quadratic surrogate (1/2) y^T A y - b^T y.
class QuadraticModel : public EnergyModel {
 public:
  QuadraticModel(int dim, unsigned seed) {
    Eigen::MatrixXd R(dim, dim);
    std::mt19937 local(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) R(i, j) = u(local);
    dense_ = R.transpose() * R + Eigen::MatrixXd::Identity(dim, dim);
    A_ = dense_.sparseView();
    b_ = Eigen::VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return u(local); });
  }
  EnergyBreakdown energy(const Deformation& y) const override {
    EnergyBreakdown e;
    e.stretch = 0.5 * y.dot(dense_ * y) - b_.dot(y);
    e.total = e.stretch;
    return e;
  }
  Eigen::VectorXd gradient(const Deformation& y) const override {
    return dense_ * y - b_;
  }
  SpMat hessian(const Deformation&) const override { return A_; }
  Eigen::VectorXd minimizer() const { return dense_.ldlt().solve(b_); }

 private:
  Eigen::MatrixXd dense_;
  SpMat A_;
  Eigen::VectorXd b_;
};

}  // namespace

TEST_CASE("solve_sym_system basics") {
  SpMat I(4, 4);
  I.setIdentity();
  Eigen::VectorXd r(4);
  r << 1, -2, 3, 0.5;
  CHECK((solve_sym_system(I, r) - r).norm() <= 1e-14);
}

TEST_CASE("solve_sym_system round trip on the H1 matrix") {
  const TriMesh mesh = structured_square(4, kUnit);
  const SpMat M = h1_matrix(mesh);
  Eigen::VectorXd u(M.rows());
  for (int i = 0; i < u.size(); ++i) u[i] = urand(-1, 1);
  const Eigen::VectorXd x = solve_sym_system(M, M * u);
  CHECK((x - u).norm() <= 1e-10 * u.norm());
}

TEST_CASE("solve_sym_system rejects indefinite matrices") {
  SpMat A(2, 2);
  A.insert(0, 0) = 1.0;
  A.insert(1, 1) = -1.0;
  A.makeCompressed();
  Eigen::VectorXd r(2);
  r << 1, 1;
  CHECK_THROWS_AS(solve_sym_system(A, r), NotSpdError);
}

TEST_CASE("newton_substep is exact on a quadratic surrogate") {
  const TriMesh mesh = structured_square(2, kUnit);
  const QuadraticModel model(3 * mesh.num_vertices(), 7);
  FlowConfig cfg;
  cfg.tau = 1e12;  // metric term negligible: minimizes the quadratic itself
  cfg.tol1 = 1e-8;
  GradientFlow flow(mesh, model, cfg);
  Deformation y0 = Deformation::Zero(3 * mesh.num_vertices());
  int iters = 0;
  const Deformation y1 = flow.newton_substep(y0, iters);
  CHECK(iters <= 2);  // first step lands; second only certifies the decrement
  CHECK((y1 - model.minimizer()).norm() <= 1e-7);
}

TEST_CASE("newton_substep fixed point at a minimizer") {
  const TriMesh mesh = structured_square(3, kUnit);
  const MaterialField mat(
      mesh, [](const Vec2&) { return Vec2(1.0, 0.0); }, 0.0, 0.0, 1.0);
  const DiscreteEnergy model(mesh, mat, false);
  FlowConfig cfg;
  cfg.tau = 0.5;
  GradientFlow flow(mesh, model, cfg);
  const Deformation y0 = identity_embedding(mesh);
  int iters = 0;
  const Deformation y1 = flow.newton_substep(y0, iters);
  CHECK(iters <= 1);
  CHECK((y1 - y0).norm() <= 1e-10);
}

TEST_CASE("run_flow converges instantly from the ground state") {
  const TriMesh mesh = structured_square(4, kUnit);
  const MaterialField mat(
      mesh, [](const Vec2&) { return Vec2(1.0, 0.0); }, 0.0, 0.0, 1.0);
  const DiscreteEnergy model(mesh, mat, false);
  FlowConfig cfg;
  cfg.tau = 1.0;
  GradientFlow flow(mesh, model, cfg);
  Deformation y = identity_embedding(mesh);
  const FlowReport rep = flow.run(y);
  CHECK(rep.status == FlowStatus::Converged);
  CHECK(rep.iterations == 1);
  CHECK(std::abs(rep.energies.back().total) <= 1e-12);
}

TEST_CASE("run_flow relaxes a bent isotropic sheet with energy decrease") {
  const TriMesh mesh = structured_square(6, kUnit);
  const MaterialField mat(
      mesh, [](const Vec2&) { return Vec2(1.0, 0.0); }, 0.0, 0.0, 0.5);
  const DiscreteEnergy model(mesh, mat, false);
  FlowConfig cfg;
  cfg.tau = 0.5;
  cfg.tol2 = 1e-10;
  GradientFlow flow(mesh, model, cfg);
  Deformation y = interpolate(
      [](const Vec2& x) {
        return Vec3(x.x(), x.y(),
                    0.3 * x.x() * (1 - x.x()) * x.y() * (1 - x.y()));
      },
      mesh);
  const FlowReport rep = flow.run(y);
  CHECK(rep.status == FlowStatus::Converged);
  CHECK(rep.iterations >= 1);
  for (size_t i = 1; i < rep.energies.size(); ++i)
    CHECK(rep.energies[i].total <= rep.energies[i - 1].total + 1e-12);
  // Telescoping stability bound.
  double steps = 0.0;
  for (double s : rep.step_h1_sq) steps += s;
  CHECK(rep.energies.back().total + steps / (2.0 * cfg.tau) <=
        rep.energies.front().total + 1e-10 * rep.iterations);
  CHECK(rep.energies.back().total <= 1e-8);
}

TEST_CASE("flow records newton counts and energies per step") {
  const TriMesh mesh = structured_square(3, kUnit);
  const QuadraticModel model(3 * mesh.num_vertices(), 11);
  FlowConfig cfg;
  cfg.tau = 0.7;
  cfg.tol2 = 1e-12;
  GradientFlow flow(mesh, model, cfg);
  Deformation y = Deformation::Zero(3 * mesh.num_vertices());
  const FlowReport rep = flow.run(y);
  CHECK(rep.status == FlowStatus::Converged);
  CHECK(rep.newton_counts.size() == static_cast<size_t>(rep.iterations));
  CHECK(rep.energies.size() == static_cast<size_t>(rep.iterations) + 1);
  CHECK(rep.step_h1_sq.size() == static_cast<size_t>(rep.iterations));
}

TEST_CASE("convex surrogate admits no diverging tau") {
  const TriMesh mesh = structured_square(2, kUnit);
  const QuadraticModel model(3 * mesh.num_vertices(), 3);
  auto converges = [&](double tau) {
    FlowConfig cfg;
    cfg.tau = tau;
    GradientFlow flow(mesh, model, cfg);
    Deformation y = Deformation::Zero(3 * mesh.num_vertices());
    return flow.run(y).status == FlowStatus::Converged;
  };
  CHECK_THROWS_AS(find_tau_max(converges, 1.0, 0.01, 64.0),
                  NoDivergingTauError);
}

TEST_CASE("find_tau_max brackets a synthetic threshold") {
  // converges iff tau < 2.37; bisection must land within 0.01 below it.
  auto converges = [](double tau) { return tau < 2.37; };
  const double tau_max = find_tau_max(converges);
  CHECK(tau_max <= 2.37);
  CHECK(tau_max >= 2.37 - 0.011);
}

TEST_CASE("find_tau_max halves its way down when tau0 diverges") {
  auto converges = [](double tau) { return tau < 0.1; };
  const double tau_max = find_tau_max(converges);
  CHECK(tau_max < 0.1);
  CHECK(tau_max >= 0.1 - 0.011);
}

TEST_CASE("identical sequential runs produce identical CSV logs") {
  const TriMesh mesh = structured_square(4, kUnit);
  const MaterialField mat(
      mesh, [](const Vec2&) { return Vec2(0.0, 1.0); }, 0.1, 1.0, 0.3);
  const DiscreteEnergy model(mesh, mat, false);
  const Deformation y0 = interpolate(
      [](const Vec2& x) {
        return Vec3(x.x(), x.y(),
                    0.8 * x.x() * (1 - x.x()) * x.y() * (1 - x.y()));
      },
      mesh);
  auto run_once = [&]() {
    FlowConfig cfg;
    cfg.tau = 0.5;
    GradientFlow flow(mesh, model, cfg);
    std::ostringstream log;
    flow.set_log(&log);
    Deformation y = y0;
    flow.run(y);
    return log.str();
  };
  const std::string a = run_once(), b = run_once();
  CHECK(!a.empty());
  CHECK(a == b);
  CHECK(a.substr(0, a.find('\n')) ==
        "iteration,stretch,regularization,total,newton_count");
}

TEST_CASE("max_flow cap reports cap-reached") {
  const TriMesh mesh = structured_square(4, kUnit);
  const MaterialField mat(
      mesh, [](const Vec2& x) { return Vec2(std::cos(x.x()), std::sin(x.x())); },
      0.1, 1.0, 0.0);
  const DiscreteEnergy model(mesh, mat, false);
  FlowConfig cfg;
  cfg.tau = 0.01;
  cfg.tol2 = 1e-16;  // unreachable
  cfg.max_flow = 3;
  GradientFlow flow(mesh, model, cfg);
  Deformation y = identity_embedding(mesh);
  const FlowReport rep = flow.run(y);
  CHECK(rep.status == FlowStatus::CapReached);
  CHECK(rep.iterations == 3);
}
