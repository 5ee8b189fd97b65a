#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "lcn/material.hpp"
#include "lcn/mesh.hpp"

namespace lcn {

/// Piecewise-linear deformation: 3 scalars per node, node-major ordering
/// (dof index 3*v + component).
using Deformation = Eigen::VectorXd;

using SpMat = Eigen::SparseMatrix<double>;

struct EnergyBreakdown {
  double stretch = 0.0;
  double regularization = 0.0;
  double total = 0.0;
};

/// Exact constant gradient of the affine interpolant on triangle t.
Mat32 grad_on_element(const TriMesh& mesh, const Deformation& y, int t);

std::vector<Mat32> grad_per_element(const TriMesh& mesh, const Deformation& y);

/// Regularization weight of an interior edge: min of the two adjacent
/// elements' c_r, times h_max (the h^2 * 1/h scaling), times edge length.
/// Zero for crease edges when crease_aware.
double edge_reg_weight(const TriMesh& mesh, const MaterialField& material,
                       const InteriorEdge& e, bool crease_aware);

/// E_h = sum_T area * W(barycenter, grad y|_T)
///     + sum_e c_r,e * h^2 * (1/h) * |e| * |jump of grad y across e|^2.
EnergyBreakdown assemble_energy(const TriMesh& mesh,
                                const MaterialField& material,
                                const Deformation& y, bool crease_aware);

/// Exact gradient of assemble_energy(...).total with respect to the dofs.
Eigen::VectorXd assemble_gradient(const TriMesh& mesh,
                                  const MaterialField& material,
                                  const Deformation& y, bool crease_aware);

/// Exact second derivative of the total energy; sparsity covers node pairs
/// sharing a triangle plus pairs in edge-adjacent triangle pairs. The
/// structural pattern is independent of y, so factorizations can reuse the
/// symbolic analysis.
SpMat assemble_hessian(const TriMesh& mesh, const MaterialField& material,
                       const Deformation& y, bool crease_aware);

/// Matrix of (u,v) -> int u.v + grad u : grad v on P1, block-diagonal across
/// the 3 components; SPD.
SpMat h1_matrix(const TriMesh& mesh);

/// Nodal Lagrange interpolant of a closed-form map R^2 -> R^3.
Deformation interpolate(const std::function<Vec3(const Vec2&)>& f,
                        const TriMesh& mesh);

/// e_h = sum_T area * | grad y^T grad y - g(barycenter) |_F  (L1 in space of
/// the pointwise Frobenius norm).
double metric_deviation(const TriMesh& mesh, const MaterialField& material,
                        const Deformation& y);

}  // namespace lcn
