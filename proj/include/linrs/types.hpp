#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace linrs {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec2 = Vector2<double>;
using Vec3 = Vector3<double>;
using Mat3 = Matrix3<double>;

enum class ErrorCode {
  kTooFewPoints,
  kDegenerateConfiguration,
  kNoRowFixpoint,
  kBehindCamera,
  kAllTripletsDegenerate,
  kNoValidHypothesis,
  kGenerationExhausted,
};

const char* to_string(ErrorCode code);

// Every failure in the library is reported through this exception type; the
// code says which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// One 2D-3D match. The image point is (row, column) in calibrated units and
/// the row doubles as the capture time of the point.
template <typename Scalar>
struct CorrespondenceT {
  Vector3<Scalar> world_point = Vector3<Scalar>::Zero();
  Vector2<Scalar> image_point = Vector2<Scalar>::Zero();

  Scalar row() const { return image_point.x(); }
  Scalar col() const { return image_point.y(); }
  /// Homogeneous image point [r, c, 1].
  Vector3<Scalar> homogeneous() const { return {image_point.x(), image_point.y(), Scalar(1)}; }
};

/// Linearized rolling-shutter camera:
///   lambda [r c 1]^T = (I + s[w]x)(I + [v]x) X + C + s t,   s = r - r0.
/// `translation` is the additive term C of the projection equation.
template <typename Scalar>
struct RsCameraModelT {
  Vector3<Scalar> orientation = Vector3<Scalar>::Zero();       // v
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();       // C
  Vector3<Scalar> angular_velocity = Vector3<Scalar>::Zero();  // w, radians per row unit
  Vector3<Scalar> linear_velocity = Vector3<Scalar>::Zero();   // t, scene units per row unit
  Scalar reference_row = Scalar(0);                            // r0
};

/// Ground-truth camera with constant angular and linear velocity. The pose at
/// row r is R(r) = exp((r - r0) [w]x) R_v and C(r) = C + (r - r0) t.
template <typename Scalar>
struct ExactRsCameraT {
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();
  Vector3<Scalar> angular_velocity = Vector3<Scalar>::Zero();
  Vector3<Scalar> linear_velocity = Vector3<Scalar>::Zero();
  Scalar reference_row = Scalar(0);
};

template <typename Scalar>
struct ProjectionResultT {
  Vector2<Scalar> image_point = Vector2<Scalar>::Zero();
  Scalar depth = Scalar(0);
};

using Correspondence = CorrespondenceT<double>;
using RsCameraModel = RsCameraModelT<double>;
using ExactRsCamera = ExactRsCameraT<double>;
using ProjectionResult = ProjectionResultT<double>;
using Correspondences = std::vector<Correspondence>;

}  // namespace linrs
