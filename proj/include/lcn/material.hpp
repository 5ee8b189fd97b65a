#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "lcn/errors.hpp"
#include "lcn/mesh.hpp"

namespace lcn {

using Mat32 = Eigen::Matrix<double, 3, 2>;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Below this det(F^T F), frame() raises DegenerateElementError instead of
/// returning a huge energy; surfaces mesh tangling before it poisons the
/// Newton system.
inline constexpr double kJacobianFloor = 1e-10;

/// Blueprinted material data on one element: unit director m, order
/// parameters s, s0, and regularization weight c_r.
struct ElementMaterial {
  Vec2 m;
  double s;
  double s0;
  double c_r;
};

/// lambda = cbrt((s+1)/(s0+1)). Throws InvalidMaterialError outside s,s0 > -1.
double actuation(double s, double s0);

/// g = lambda^2 m (x) m + lambda^{-1} m_perp (x) m_perp, with m_perp the
/// +90-degree rotation of m.
Eigen::Matrix2d target_metric(const Vec2& m, double lambda);

/// L_m^{1/2} for mhat = (m, 0); SPD with unit determinant.
Eigen::Matrix3d step_tensor_m_sqrt(const Vec2& m, double s0);

/// L_n^{-1/2}; SPD with unit determinant.
Eigen::Matrix3d step_tensor_n_inv_sqrt(const Vec3& n, double s);

/// Deformed director n = Fm/|Fm|, metric determinant J = det(F^T F), and
/// scaled normal b = (F1 x F2)/J.
struct FrameQuantities {
  Vec3 n;
  double J;
  Vec3 b;
};

FrameQuantities frame(const Mat32& F, const Vec2& m, int element = -1);

/// Stretching energy density W(x,F) = |L_n^{-1/2} [F,b] L_m^{1/2}|^2 - 3.
double density_W(const Mat32& F, const ElementMaterial& mat, int element = -1);

/// Analytic dW/dF (3x2), with the dependence of n(F), J(F), b(F) included.
Mat32 density_grad(const Mat32& F, const ElementMaterial& mat,
                   int element = -1);

/// Analytic d^2W/dF^2 over the 6 entries of F in column-major order
/// (F00, F10, F20, F01, F11, F21).
Mat6 density_hess(const Mat32& F, const ElementMaterial& mat, int element = -1);

/// Value, gradient, and Hessian of W in one evaluation (column-major F
/// ordering as in density_hess); this is what assembly uses.
struct DensityDerivatives {
  double value;
  Vec6 grad;
  Mat6 hess;
};

DensityDerivatives density_eval(const Mat32& F, const ElementMaterial& mat,
                                int element = -1);

/// Per-element material data sampled at barycenters; constant per element so
/// one-point quadrature integrates W exactly over P1 deformations.
class MaterialField {
 public:
  using DirectorFn = std::function<Vec2(const Vec2&)>;
  using ScalarFn = std::function<double(const Vec2&)>;

  MaterialField(const TriMesh& mesh, const DirectorFn& director, double s,
                double s0, const ScalarFn& c_r);
  MaterialField(const TriMesh& mesh, const DirectorFn& director, double s,
                double s0, double c_r);

  const ElementMaterial& at(int t) const { return elements_[t]; }
  int size() const { return static_cast<int>(elements_.size()); }

  double lambda(int t) const;
  Eigen::Matrix2d metric(int t) const;

 private:
  std::vector<ElementMaterial> elements_;
};

}  // namespace lcn
