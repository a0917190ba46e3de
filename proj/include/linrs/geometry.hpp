#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Core>

#include "linrs/types.hpp"

namespace linrs {

/// Cross-product matrix: skew(a) * b == a.cross(b).
template <typename Derived>
Matrix3<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Matrix3<Scalar> s;
  s << Scalar(0), -a(2), a(1),
       a(2), Scalar(0), -a(0),
       -a(1), a(0), Scalar(0);
  return s;
}

/// Rodrigues' formula. The angle is the norm of `aa`; small angles fall back
/// to the second-order series so the result stays accurate near zero.
template <typename Derived>
Matrix3<typename Derived::Scalar> rotation_from_axis_angle(const Eigen::MatrixBase<Derived>& aa) {
  using Scalar = typename Derived::Scalar;
  const Scalar theta2 = aa.squaredNorm();
  const Matrix3<Scalar> k = skew(aa);
  Scalar a, b;
  if (theta2 < Scalar(1e-12)) {
    a = Scalar(1) - theta2 / Scalar(6);
    b = Scalar(0.5) - theta2 / Scalar(24);
  } else {
    const Scalar theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (Scalar(1) - std::cos(theta)) / theta2;
  }
  return Matrix3<Scalar>::Identity() + a * k + b * k * k;
}

/// Nearest rotation to `m` in the Frobenius sense (orthonormal polar factor).
Mat3 nearest_rotation(const Mat3& m);

/// Geodesic angle between two rotations, in radians.
double rotation_angle_between(const Mat3& a, const Mat3& b);

/// Which linearization of the rolling-shutter projection to use.
enum class LinearModel {
  /// (I + s[w]x) R X + C + s t with a caller-supplied R.
  kRotationLinearized,
  /// (I + s[w]x)(I + [v]x) X + C + s t.
  kDoubleLinearized,
  /// (I + s[w]x) X + [v]x X + s [w]x [vhat]x X + C + s t with vhat fixed.
  kFixedBilinear,
};

/// Any camera whose camera-frame point is affine in the capture time:
///   p(r) = A X + C + (r - r0)(B X + t).
/// Every linear model in this library has this form.
template <typename Scalar>
struct RowAffinePoseT {
  Matrix3<Scalar> static_part = Matrix3<Scalar>::Identity();  // A
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();      // C
  Matrix3<Scalar> motion_part = Matrix3<Scalar>::Zero();      // B
  Vector3<Scalar> linear_velocity = Vector3<Scalar>::Zero();  // t
  Scalar reference_row = Scalar(0);

  Vector3<Scalar> camera_point(const Vector3<Scalar>& world, Scalar row) const {
    const Scalar s = row - reference_row;
    return static_part * world + translation + s * (motion_part * world + linear_velocity);
  }
};
using RowAffinePose = RowAffinePoseT<double>;

template <typename Scalar>
RowAffinePoseT<Scalar> row_affine_pose(const RsCameraModelT<Scalar>& model) {
  const Matrix3<Scalar> a = Matrix3<Scalar>::Identity() + skew(model.orientation);
  return {a, model.translation, skew(model.angular_velocity) * a, model.linear_velocity,
          model.reference_row};
}

template <typename Scalar>
RowAffinePoseT<Scalar> row_affine_pose_fixed(const RsCameraModelT<Scalar>& model,
                                             const Vector3<Scalar>& vhat) {
  const Matrix3<Scalar> eye = Matrix3<Scalar>::Identity();
  return {eye + skew(model.orientation), model.translation,
          skew(model.angular_velocity) * (eye + skew(vhat)), model.linear_velocity,
          model.reference_row};
}

/// The orientation vector of `model` is ignored; `rotation` replaces I + [v]x.
template <typename Scalar>
RowAffinePoseT<Scalar> row_affine_pose_rotated(const RsCameraModelT<Scalar>& model,
                                               const Matrix3<Scalar>& rotation) {
  return {rotation, model.translation, skew(model.angular_velocity) * rotation,
          model.linear_velocity, model.reference_row};
}

struct RowSolveOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;
};

/// Finds the self-consistent row r* = row-of(point_at(r*)). Fixed-point
/// iteration whose step is damped by a secant estimate of the map's slope.
/// `point_at(r)` returns the camera-frame point at capture row r.
template <typename Scalar, typename PointAt>
ProjectionResultT<Scalar> solve_projection_row(PointAt&& point_at, Scalar initial_row,
                                               const RowSolveOptions& opts = {}) {
  auto gap = [&](Scalar r, Vector3<Scalar>& p) {
    p = point_at(r);
    return p.x() / p.z() - r;
  };
  Vector3<Scalar> p;
  Scalar r = initial_row;
  Scalar g = gap(r, p);
  Scalar r_prev = r, g_prev = g;
  bool have_prev = false;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    if (!std::isfinite(g)) break;
    if (std::abs(g) <= Scalar(opts.tolerance) * std::max(Scalar(1), std::abs(r))) {
      if (!(p.z() > Scalar(0))) {
        throw Error(ErrorCode::kBehindCamera, "point projects with non-positive depth");
      }
      return {Vector2<Scalar>(r, p.y() / p.z()), p.z()};
    }
    if (it == opts.max_iterations) break;
    Scalar step = g;
    if (have_prev && g != g_prev) {
      step = -g * (r - r_prev) / (g - g_prev);
    }
    r_prev = r;
    g_prev = g;
    have_prev = true;
    r += step;
    if (!std::isfinite(r)) break;
    g = gap(r, p);
  }
  throw Error(ErrorCode::kNoRowFixpoint, "implicit row equation did not converge");
}

template <typename Scalar>
ProjectionResultT<Scalar> project(const RowAffinePoseT<Scalar>& pose, const Vector3<Scalar>& world,
                                  const RowSolveOptions& opts = {}) {
  const Vector3<Scalar> at_ref = pose.camera_point(world, pose.reference_row);
  const Scalar start = std::isfinite(at_ref.x() / at_ref.z()) ? at_ref.x() / at_ref.z()
                                                              : pose.reference_row;
  return solve_projection_row<Scalar>(
      [&](Scalar r) { return pose.camera_point(world, r); }, start, opts);
}

/// Projection through one of the linearized models.
template <typename Scalar>
ProjectionResultT<Scalar> project_linearized(const RsCameraModelT<Scalar>& model,
                                             const Vector3<Scalar>& world, LinearModel variant,
                                             const Vector3<Scalar>& vhat = Vector3<Scalar>::Zero(),
                                             const RowSolveOptions& opts = {}) {
  switch (variant) {
    case LinearModel::kDoubleLinearized:
      return project(row_affine_pose(model), world, opts);
    case LinearModel::kFixedBilinear:
      return project(row_affine_pose_fixed(model, vhat), world, opts);
    case LinearModel::kRotationLinearized:
      break;
  }
  throw std::invalid_argument("rotation-linearized projection needs a base rotation");
}

template <typename Scalar>
ProjectionResultT<Scalar> project_linearized(const RsCameraModelT<Scalar>& model,
                                             const Vector3<Scalar>& world,
                                             const Matrix3<Scalar>& rotation,
                                             const RowSolveOptions& opts = {}) {
  return project(row_affine_pose_rotated(model, rotation), world, opts);
}

template <typename Scalar>
Vector3<Scalar> exact_camera_point(const ExactRsCameraT<Scalar>& cam, const Vector3<Scalar>& world,
                                   Scalar row) {
  const Scalar s = row - cam.reference_row;
  return rotation_from_axis_angle((s * cam.angular_velocity).eval()) * cam.rotation * world +
         cam.translation + s * cam.linear_velocity;
}

/// Projection under constant angular and linear velocity, with the capture
/// row solved for self-consistency.
template <typename Scalar>
ProjectionResultT<Scalar> project_exact_rs(const ExactRsCameraT<Scalar>& cam,
                                           const Vector3<Scalar>& world,
                                           const RowSolveOptions& opts = {}) {
  const Vector3<Scalar> at_ref = exact_camera_point(cam, world, cam.reference_row);
  const Scalar start = std::isfinite(at_ref.x() / at_ref.z()) ? at_ref.x() / at_ref.z()
                                                              : cam.reference_row;
  return solve_projection_row<Scalar>(
      [&](Scalar r) { return exact_camera_point(cam, world, r); }, start, opts);
}

/// Plain perspective projection of R X + C.
template <typename Scalar>
ProjectionResultT<Scalar> project_global_shutter(const Matrix3<Scalar>& rotation,
                                                 const Vector3<Scalar>& translation,
                                                 const Vector3<Scalar>& world) {
  const Vector3<Scalar> p = rotation * world + translation;
  if (!(p.z() > Scalar(0))) {
    throw Error(ErrorCode::kBehindCamera, "point projects with non-positive depth");
  }
  return {Vector2<Scalar>(p.x() / p.z(), p.y() / p.z()), p.z()};
}

/// Indices of the two rows of skew([r, c, 1]) kept after depth elimination:
/// the two with the largest norms.
inline std::array<int, 2> kept_constraint_rows(double row, double col) {
  const double n[3] = {1.0 + col * col, 1.0 + row * row, row * row + col * col};
  int drop = 2;
  if (n[1] < n[drop]) drop = 1;
  if (n[0] < n[drop]) drop = 0;
  switch (drop) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

/// The two kept rows of skew(x) applied to `camera_point`, evaluated at the
/// observed row. Zero for a point that satisfies the model exactly.
Vec2 constraint_residual(const RowAffinePose& pose, const Correspondence& corr);

/// RMS of the depth-eliminated constraint rows over all correspondences.
double algebraic_residual(const RowAffinePose& pose, std::span<const Correspondence> corrs);
double algebraic_residual(const RsCameraModel& model, std::span<const Correspondence> corrs);

/// Image distance between the observation and the model projection, scaled by
/// `pixels_per_unit`. +infinity when the point cannot be projected.
double reprojection_error(const RowAffinePose& pose, const Correspondence& corr,
                          double pixels_per_unit = 1.0);
double reprojection_error(const RsCameraModel& model, const Correspondence& corr,
                          double pixels_per_unit = 1.0);

}  // namespace linrs
