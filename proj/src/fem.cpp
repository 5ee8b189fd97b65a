#include "lcn/fem.hpp"

#include <cmath>

namespace lcn {

namespace {

void check_size(const TriMesh& mesh, const Deformation& y) {
  if (y.size() != 3 * mesh.num_vertices())
    throw std::invalid_argument("deformation has wrong dof count");
}

// Nodes touched by the jump of grad y across an edge, with the 2-vector
// coefficient of each node: jump = sum_a y_a (x) coeff_a.
struct JumpStencil {
  int nodes[6];
  Vec2 coeff[6];
  int count = 0;

  void add(int node, const Vec2& c) {
    for (int i = 0; i < count; ++i)
      if (nodes[i] == node) {
        coeff[i] += c;
        return;
      }
    nodes[count] = node;
    coeff[count] = c;
    ++count;
  }
};

JumpStencil jump_stencil(const TriMesh& mesh, const InteriorEdge& e) {
  JumpStencil st;
  const auto& tl = mesh.triangles()[e.left];
  const auto& tr = mesh.triangles()[e.right];
  const auto& gl = mesh.shape_gradients(e.left);
  const auto& gr = mesh.shape_gradients(e.right);
  for (int a = 0; a < 3; ++a) st.add(tl[a], gl.row(a));
  for (int a = 0; a < 3; ++a) st.add(tr[a], -gr.row(a));
  return st;
}

}  // namespace

Mat32 grad_on_element(const TriMesh& mesh, const Deformation& y, int t) {
  const auto& tri = mesh.triangles()[t];
  const auto& g = mesh.shape_gradients(t);
  Mat32 F = Mat32::Zero();
  for (int a = 0; a < 3; ++a)
    F += y.segment<3>(3 * tri[a]) * g.row(a);
  return F;
}

std::vector<Mat32> grad_per_element(const TriMesh& mesh, const Deformation& y) {
  check_size(mesh, y);
  std::vector<Mat32> grads(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    grads[t] = grad_on_element(mesh, y, t);
  return grads;
}

double edge_reg_weight(const TriMesh& mesh, const MaterialField& material,
                       const InteriorEdge& e, bool crease_aware) {
  if (crease_aware && e.crease) return 0.0;
  const double c_r = std::min(material.at(e.left).c_r, material.at(e.right).c_r);
  return c_r * mesh.h_max() * e.length;
}

EnergyBreakdown assemble_energy(const TriMesh& mesh,
                                const MaterialField& material,
                                const Deformation& y, bool crease_aware) {
  check_size(mesh, y);
  EnergyBreakdown out;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    out.stretch +=
        mesh.area(t) * density_W(grad_on_element(mesh, y, t), material.at(t), t);
  for (const auto& e : mesh.interior_edges()) {
    const double w = edge_reg_weight(mesh, material, e, crease_aware);
    if (w == 0.0) continue;
    const Mat32 jump =
        grad_on_element(mesh, y, e.left) - grad_on_element(mesh, y, e.right);
    out.regularization += w * jump.squaredNorm();
  }
  out.total = out.stretch + out.regularization;
  return out;
}

Eigen::VectorXd assemble_gradient(const TriMesh& mesh,
                                  const MaterialField& material,
                                  const Deformation& y, bool crease_aware) {
  check_size(mesh, y);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(y.size());

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat32 dW =
        density_grad(grad_on_element(mesh, y, t), material.at(t), t);
    const auto& tri = mesh.triangles()[t];
    const auto& sg = mesh.shape_gradients(t);
    for (int a = 0; a < 3; ++a)
      g.segment<3>(3 * tri[a]) += mesh.area(t) * (dW * sg.row(a).transpose());
  }

  for (const auto& e : mesh.interior_edges()) {
    const double w = edge_reg_weight(mesh, material, e, crease_aware);
    if (w == 0.0) continue;
    const Mat32 jump =
        grad_on_element(mesh, y, e.left) - grad_on_element(mesh, y, e.right);
    const JumpStencil st = jump_stencil(mesh, e);
    for (int i = 0; i < st.count; ++i)
      g.segment<3>(3 * st.nodes[i]) += 2.0 * w * (jump * st.coeff[i]);
  }
  return g;
}

SpMat assemble_hessian(const TriMesh& mesh, const MaterialField& material,
                       const Deformation& y, bool crease_aware) {
  check_size(mesh, y);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(81 * mesh.num_triangles() + 36 * mesh.interior_edges().size());

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto d = density_eval(grad_on_element(mesh, y, t), material.at(t), t);
    const auto& tri = mesh.triangles()[t];
    const auto& sg = mesh.shape_gradients(t);
    // F_vec (column-major, index c + 3d) = B * y_elem with y_elem node-major.
    Eigen::Matrix<double, 6, 9> B = Eigen::Matrix<double, 6, 9>::Zero();
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c)
        for (int dcol = 0; dcol < 2; ++dcol)
          B(c + 3 * dcol, 3 * a + c) = sg(a, dcol);
    const Eigen::Matrix<double, 9, 9> H =
        mesh.area(t) * (B.transpose() * d.hess * B);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int e = 0; e < 3; ++e)
            trips.emplace_back(3 * tri[a] + c, 3 * tri[b] + e,
                               H(3 * a + c, 3 * b + e));
  }

  // Regularization block: per component, 2*w * (coeff_i . coeff_j). Entries
  // are emitted even when the weight vanishes so the structural pattern does
  // not depend on c_r.
  for (const auto& e : mesh.interior_edges()) {
    const double w = (crease_aware && e.crease)
                         ? 0.0
                         : edge_reg_weight(mesh, material, e, crease_aware);
    const JumpStencil st = jump_stencil(mesh, e);
    for (int i = 0; i < st.count; ++i)
      for (int j = 0; j < st.count; ++j) {
        const double v = 2.0 * w * st.coeff[i].dot(st.coeff[j]);
        for (int c = 0; c < 3; ++c)
          trips.emplace_back(3 * st.nodes[i] + c, 3 * st.nodes[j] + c, v);
      }
  }

  SpMat H(y.size(), y.size());
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

SpMat h1_matrix(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(27 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& sg = mesh.shape_gradients(t);
    const double area = mesh.area(t);
    Eigen::Matrix3d local = area / 12.0 *
                            (Eigen::Matrix3d::Ones() +
                             Eigen::Matrix3d::Identity());
    local += area * (sg * sg.transpose());
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          trips.emplace_back(3 * tri[a] + c, 3 * tri[b] + c, local(a, b));
  }
  SpMat M(3 * mesh.num_vertices(), 3 * mesh.num_vertices());
  M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

Deformation interpolate(const std::function<Vec3(const Vec2&)>& f,
                        const TriMesh& mesh) {
  Deformation y(3 * mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3 val = f(mesh.vertices()[v]);
    if (!val.allFinite())
      throw InvalidInitializerError("initializer is not finite at a vertex");
    y.segment<3>(3 * v) = val;
  }
  return y;
}

double metric_deviation(const TriMesh& mesh, const MaterialField& material,
                        const Deformation& y) {
  check_size(mesh, y);
  double e_h = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat32 F = grad_on_element(mesh, y, t);
    const Eigen::Matrix2d dev = F.transpose() * F - material.metric(t);
    e_h += mesh.area(t) * dev.norm();
  }
  return e_h;
}

}  // namespace lcn
