#include "lcn/material.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace lcn {

namespace {

void check_material(double s, double s0) {
  if (!(s > -1.0) || !(s0 > -1.0))
    throw InvalidMaterialError("order parameters must satisfy s, s0 > -1");
}

// Second-order forward-mode scalar over the 6 entries of F: carries the
// value, gradient, and (symmetric) Hessian through the closed-form energy
// density, so assembly gets exact chain-rule derivatives.
struct Dual2 {
  double v = 0.0;
  Vec6 g = Vec6::Zero();
  Mat6 h = Mat6::Zero();

  static Dual2 seed(double value, int index) {
    Dual2 d;
    d.v = value;
    d.g[index] = 1.0;
    return d;
  }
};

Dual2 operator+(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.v = a.v + b.v;
  r.g = a.g + b.g;
  r.h = a.h + b.h;
  return r;
}

Dual2 operator-(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.v = a.v - b.v;
  r.g = a.g - b.g;
  r.h = a.h - b.h;
  return r;
}

Dual2 operator*(const Dual2& a, const Dual2& b) {
  Dual2 r;
  r.v = a.v * b.v;
  r.g = a.v * b.g + b.v * a.g;
  r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

Dual2 operator*(double c, const Dual2& a) {
  Dual2 r;
  r.v = c * a.v;
  r.g = c * a.g;
  r.h = c * a.h;
  return r;
}

Dual2 inverse(const Dual2& a) {
  Dual2 r;
  const double iv = 1.0 / a.v;
  r.v = iv;
  r.g = -(iv * iv) * a.g;
  r.h = -(iv * iv) * a.h +
        (2.0 * iv * iv * iv) * (a.g * a.g.transpose());
  return r;
}

// W(x,F) = |L_n^{-1/2} [F,b] L_m^{1/2}|^2 - 3 in closed form. Writing
// G = [F,b], the Frobenius norm expands into traces against L_n^{-1} and
// L_m; with n = Fm/|Fm| and b orthogonal to the column space of F (so
// b.n = 0 and |b|^2 = 1/J) everything collapses to
//   W = lambda * ( |F|^2 + 1/J + s0*|Fm|^2
//                  - s/(s+1) * ( |F^T Fm|^2/|Fm|^2 + s0*|Fm|^2 ) ) - 3
// with lambda = cbrt((s+1)/(s0+1)). Both evaluation paths below (plain
// double, Dual2) follow this formula; F is flattened column-major.
std::array<double, 6> flatten(const Mat32& F) {
  return {F(0, 0), F(1, 0), F(2, 0), F(0, 1), F(1, 1), F(2, 1)};
}

}  // namespace

double actuation(double s, double s0) {
  check_material(s, s0);
  return std::cbrt((s + 1.0) / (s0 + 1.0));
}

Eigen::Matrix2d target_metric(const Vec2& m, double lambda) {
  const Vec2 mp(-m.y(), m.x());
  return lambda * lambda * m * m.transpose() +
         (1.0 / lambda) * mp * mp.transpose();
}

Eigen::Matrix3d step_tensor_m_sqrt(const Vec2& m, double s0) {
  check_material(0.0, s0);
  Vec3 mhat(m.x(), m.y(), 0.0);
  const double par = std::cbrt(s0 + 1.0);            // (s0+1)^{1/3}
  const double perp = std::pow(s0 + 1.0, -1.0 / 6.0);
  return par * mhat * mhat.transpose() +
         perp * (Eigen::Matrix3d::Identity() - mhat * mhat.transpose());
}

Eigen::Matrix3d step_tensor_n_inv_sqrt(const Vec3& n, double s) {
  check_material(s, 0.0);
  const double par = std::pow(s + 1.0, -1.0 / 3.0);
  const double perp = std::pow(s + 1.0, 1.0 / 6.0);
  return par * n * n.transpose() +
         perp * (Eigen::Matrix3d::Identity() - n * n.transpose());
}

FrameQuantities frame(const Mat32& F, const Vec2& m, int element) {
  const Vec3 f1 = F.col(0), f2 = F.col(1);
  const Vec3 cross = f1.cross(f2);
  const double J = (F.transpose() * F).determinant();
  if (!(J >= kJacobianFloor)) throw DegenerateElementError(element, J);
  const Vec3 fm = F * m;
  FrameQuantities out;
  out.n = fm / fm.norm();
  out.J = J;
  out.b = cross / J;
  return out;
}

double density_W(const Mat32& F, const ElementMaterial& mat, int element) {
  check_material(mat.s, mat.s0);
  const auto f = flatten(F);
  const double m0 = mat.m.x(), m1 = mat.m.y();

  const double u0 = m0 * f[0] + m1 * f[3];
  const double u1 = m0 * f[1] + m1 * f[4];
  const double u2 = m0 * f[2] + m1 * f[5];
  const double q = u0 * u0 + u1 * u1 + u2 * u2;

  const double a11 = f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
  const double a22 = f[3] * f[3] + f[4] * f[4] + f[5] * f[5];
  const double a12 = f[0] * f[3] + f[1] * f[4] + f[2] * f[5];
  const double J = a11 * a22 - a12 * a12;
  if (!(J >= kJacobianFloor)) throw DegenerateElementError(element, J);

  const double w0 = f[0] * u0 + f[1] * u1 + f[2] * u2;
  const double w1 = f[3] * u0 + f[4] * u1 + f[5] * u2;
  const double t = (w0 * w0 + w1 * w1) / q;

  const double lambda = actuation(mat.s, mat.s0);
  const double k = mat.s / (mat.s + 1.0);
  return lambda *
             (a11 + a22 + 1.0 / J + mat.s0 * (1.0 - k) * q - k * t) -
         3.0;
}

DensityDerivatives density_eval(const Mat32& F, const ElementMaterial& mat,
                                int element) {
  check_material(mat.s, mat.s0);
  const auto f = flatten(F);
  std::array<Dual2, 6> Fd;
  for (int i = 0; i < 6; ++i) Fd[i] = Dual2::seed(f[i], i);

  const double m0 = mat.m.x(), m1 = mat.m.y();
  const Dual2 u0 = m0 * Fd[0] + m1 * Fd[3];
  const Dual2 u1 = m0 * Fd[1] + m1 * Fd[4];
  const Dual2 u2 = m0 * Fd[2] + m1 * Fd[5];
  const Dual2 q = u0 * u0 + u1 * u1 + u2 * u2;

  const Dual2 a11 = Fd[0] * Fd[0] + Fd[1] * Fd[1] + Fd[2] * Fd[2];
  const Dual2 a22 = Fd[3] * Fd[3] + Fd[4] * Fd[4] + Fd[5] * Fd[5];
  const Dual2 a12 = Fd[0] * Fd[3] + Fd[1] * Fd[4] + Fd[2] * Fd[5];
  const Dual2 J = a11 * a22 - a12 * a12;
  if (!(J.v >= kJacobianFloor)) throw DegenerateElementError(element, J.v);

  const Dual2 w0 = Fd[0] * u0 + Fd[1] * u1 + Fd[2] * u2;
  const Dual2 w1 = Fd[3] * u0 + Fd[4] * u1 + Fd[5] * u2;
  const Dual2 t = (w0 * w0 + w1 * w1) * inverse(q);

  const double lambda = actuation(mat.s, mat.s0);
  const double k = mat.s / (mat.s + 1.0);
  const Dual2 W =
      lambda * (a11 + a22 + inverse(J) + (mat.s0 * (1.0 - k)) * q - k * t);

  DensityDerivatives out;
  out.value = W.v - 3.0;
  out.grad = W.g;
  out.hess = W.h;
  return out;
}

Mat32 density_grad(const Mat32& F, const ElementMaterial& mat, int element) {
  const auto d = density_eval(F, mat, element);
  Mat32 g;
  g << d.grad[0], d.grad[3], d.grad[1], d.grad[4], d.grad[2], d.grad[5];
  return g;
}

Mat6 density_hess(const Mat32& F, const ElementMaterial& mat, int element) {
  return density_eval(F, mat, element).hess;
}

MaterialField::MaterialField(const TriMesh& mesh, const DirectorFn& director,
                             double s, double s0, const ScalarFn& c_r) {
  check_material(s, s0);
  elements_.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec2 x = mesh.barycenter(t);
    ElementMaterial em{director(x), s, s0, c_r(x)};
    if (std::abs(em.m.norm() - 1.0) > 1e-12)
      throw InvalidMaterialError("director is not a unit vector");
    if (!(em.c_r >= 0.0))
      throw InvalidMaterialError("regularization weight must be >= 0");
    elements_.push_back(em);
  }
}

MaterialField::MaterialField(const TriMesh& mesh, const DirectorFn& director,
                             double s, double s0, double c_r)
    : MaterialField(mesh, director, s, s0,
                    [c_r](const Vec2&) { return c_r; }) {}

double MaterialField::lambda(int t) const {
  return actuation(elements_[t].s, elements_[t].s0);
}

Eigen::Matrix2d MaterialField::metric(int t) const {
  return target_metric(elements_[t].m, lambda(t));
}

}  // namespace lcn
