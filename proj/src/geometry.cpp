#include "linrs/geometry.hpp"

#include <algorithm>

#include <Eigen/SVD>

namespace linrs {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNoRowFixpoint: return "NoRowFixpoint";
    case ErrorCode::kBehindCamera: return "BehindCamera";
    case ErrorCode::kAllTripletsDegenerate: return "AllTripletsDegenerate";
    case ErrorCode::kNoValidHypothesis: return "NoValidHypothesis";
    case ErrorCode::kGenerationExhausted: return "GenerationExhausted";
  }
  return "Unknown";
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  // atan2 of sine and cosine stays accurate near 0 and pi, unlike acos.
  const Mat3 d = a * b.transpose();
  const Vec3 axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * (d.trace() - 1.0));
}

Vec2 constraint_residual(const RowAffinePose& pose, const Correspondence& corr) {
  const Vec3 full = skew(corr.homogeneous()) * pose.camera_point(corr.world_point, corr.row());
  const auto rows = kept_constraint_rows(corr.row(), corr.col());
  return {full(rows[0]), full(rows[1])};
}

double algebraic_residual(const RowAffinePose& pose, std::span<const Correspondence> corrs) {
  if (corrs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : corrs) sum += constraint_residual(pose, c).squaredNorm();
  return std::sqrt(sum / (2.0 * static_cast<double>(corrs.size())));
}

double algebraic_residual(const RsCameraModel& model, std::span<const Correspondence> corrs) {
  return algebraic_residual(row_affine_pose(model), corrs);
}

double reprojection_error(const RowAffinePose& pose, const Correspondence& corr,
                          double pixels_per_unit) {
  try {
    const auto proj = project(pose, corr.world_point);
    return (proj.image_point - corr.image_point).norm() * pixels_per_unit;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

double reprojection_error(const RsCameraModel& model, const Correspondence& corr,
                          double pixels_per_unit) {
  return reprojection_error(row_affine_pose(model), corr, pixels_per_unit);
}

}  // namespace linrs
