#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "linrs/solvers.hpp"

namespace linrs {
namespace {

constexpr int kMinPointsR6p = 6;
constexpr int kMinPointsR9p = 9;

bool estimates_motion(UnknownLayout layout) {
  return layout != UnknownLayout::kOrientationTranslation;
}

int minimum_points(UnknownLayout layout) {
  return layout == UnknownLayout::kNinePoint ? kMinPointsR9p : kMinPointsR6p;
}

// With every point on one row the capture time carries no information and
// the motion terms cannot be told apart from the static pose.
void require_row_spread(std::span<const Correspondence> corrs, double rank_tol) {
  double lo = corrs.front().row(), hi = lo, scale = 1.0;
  for (const auto& c : corrs) {
    lo = std::min(lo, c.row());
    hi = std::max(hi, c.row());
    scale = std::max(scale, std::abs(c.row()));
  }
  if (hi - lo <= rank_tol * scale) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "all correspondences share one row; rolling-shutter terms are unobservable");
  }
}

}  // namespace

int unknown_count(UnknownLayout layout) {
  switch (layout) {
    case UnknownLayout::kOrientationTranslation: return 6;
    case UnknownLayout::kVelocities: return 6;
    case UnknownLayout::kOrientationTranslationVelocity: return 9;
    case UnknownLayout::kAngularVelocity: return 3;
    case UnknownLayout::kAllFixedBilinear: return 12;
    case UnknownLayout::kNinePoint: return 18;
  }
  return 0;
}

LinearForm linear_form(const Correspondence& corr, UnknownLayout layout,
                       const RsCameraModel& fixed, const Vec3& vhat) {
  const Vec3& x = corr.world_point;
  const double s = corr.row() - fixed.reference_row;
  const Mat3 eye = Mat3::Identity();
  const Mat3 x_cross = skew(x);

  LinearForm form;
  form.jacobian.resize(3, unknown_count(layout));
  switch (layout) {
    case UnknownLayout::kOrientationTranslation: {
      const Mat3 rs = eye + s * skew(fixed.angular_velocity);
      form.jacobian << -rs * x_cross, eye;
      form.offset = rs * x + s * fixed.linear_velocity;
      break;
    }
    case UnknownLayout::kVelocities: {
      const Vec3 y = x + fixed.orientation.cross(x);
      form.jacobian << -s * skew(y), s * eye;
      form.offset = y + fixed.translation;
      break;
    }
    case UnknownLayout::kOrientationTranslationVelocity: {
      const Mat3 rs = eye + s * skew(fixed.angular_velocity);
      form.jacobian << -rs * x_cross, eye, s * eye;
      form.offset = rs * x;
      break;
    }
    case UnknownLayout::kAngularVelocity: {
      const Vec3 y = x + fixed.orientation.cross(x);
      form.jacobian << -s * skew(y);
      form.offset = y + fixed.translation + s * fixed.linear_velocity;
      break;
    }
    case UnknownLayout::kAllFixedBilinear: {
      const Vec3 y = x + vhat.cross(x);
      form.jacobian << -x_cross, eye, -s * skew(y), s * eye;
      form.offset = x;
      break;
    }
    case UnknownLayout::kNinePoint: {
      form.jacobian.setZero();
      form.jacobian.block<3, 3>(0, 0) = -x_cross;
      form.jacobian.block<3, 3>(0, 3) = eye;
      form.jacobian.block<3, 3>(0, 6) = s * eye;
      // Row-major R_RS: entry (i, j) multiplies x_j in output row i.
      for (int i = 0; i < 3; ++i) {
        form.jacobian.block<1, 3>(i, 9 + 3 * i) = s * x.transpose();
      }
      form.offset = x;
      break;
    }
  }
  return form;
}

DepthEliminated eliminate_depth(const Correspondence& corr, UnknownLayout layout,
                                const RsCameraModel& fixed, const Vec3& vhat) {
  const LinearForm form = linear_form(corr, layout, fixed, vhat);
  const Mat3 s = skew(corr.homogeneous());
  const auto rows = kept_constraint_rows(corr.row(), corr.col());
  DepthEliminated out;
  out.lhs.resize(2, form.jacobian.cols());
  for (int k = 0; k < 2; ++k) {
    out.lhs.row(k) = s.row(rows[k]) * form.jacobian;
    out.rhs(k) = -s.row(rows[k]).dot(form.offset);
  }
  return out;
}

LinearSystem assemble_system(std::span<const Correspondence> corrs, UnknownLayout layout,
                             const RsCameraModel& fixed, const Vec3& vhat) {
  const int n = static_cast<int>(corrs.size());
  LinearSystem sys;
  sys.lhs.resize(2 * n, unknown_count(layout));
  sys.rhs.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    const auto rows = eliminate_depth(corrs[i], layout, fixed, vhat);
    sys.lhs.middleRows<2>(2 * i) = rows.lhs;
    sys.rhs.segment<2>(2 * i) = rows.rhs;
  }
  return sys;
}

Eigen::VectorXd solve_least_squares(const LinearSystem& system, double rank_tol) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system.lhs);
  qr.setThreshold(rank_tol);
  if (qr.rank() < system.lhs.cols()) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "constraint matrix has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(system.lhs.cols()));
  }
  return qr.solve(system.rhs);
}

namespace {

Eigen::VectorXd solve_layout(std::span<const Correspondence> corrs, UnknownLayout layout,
                             const RsCameraModel& fixed, const SolverConfig& cfg,
                             const Vec3& vhat = Vec3::Zero()) {
  const int need = minimum_points(layout);
  if (static_cast<int>(corrs.size()) < need) {
    throw Error(ErrorCode::kTooFewPoints, "need at least " + std::to_string(need) +
                                              " correspondences, got " +
                                              std::to_string(corrs.size()));
  }
  if (estimates_motion(layout)) require_row_spread(corrs, cfg.rank_tol);
  return solve_least_squares(assemble_system(corrs, layout, fixed, vhat), cfg.rank_tol);
}

RsCameraModel with_reference(const SolverConfig& cfg) {
  RsCameraModel m;
  m.reference_row = cfg.reference_row;
  return m;
}

}  // namespace

RsCameraModel solve_vC(std::span<const Correspondence> corrs, const Vec3& w, const Vec3& t,
                       const SolverConfig& cfg) {
  RsCameraModel m = with_reference(cfg);
  m.angular_velocity = w;
  m.linear_velocity = t;
  const auto u = solve_layout(corrs, UnknownLayout::kOrientationTranslation, m, cfg);
  m.orientation = u.segment<3>(0);
  m.translation = u.segment<3>(3);
  return m;
}

RsCameraModel solve_wt(std::span<const Correspondence> corrs, const Vec3& v, const Vec3& C,
                       const SolverConfig& cfg) {
  RsCameraModel m = with_reference(cfg);
  m.orientation = v;
  m.translation = C;
  const auto u = solve_layout(corrs, UnknownLayout::kVelocities, m, cfg);
  m.angular_velocity = u.segment<3>(0);
  m.linear_velocity = u.segment<3>(3);
  return m;
}

RsCameraModel solve_vCt(std::span<const Correspondence> corrs, const Vec3& w,
                        const SolverConfig& cfg) {
  RsCameraModel m = with_reference(cfg);
  m.angular_velocity = w;
  const auto u = solve_layout(corrs, UnknownLayout::kOrientationTranslationVelocity, m, cfg);
  m.orientation = u.segment<3>(0);
  m.translation = u.segment<3>(3);
  m.linear_velocity = u.segment<3>(6);
  return m;
}

RsCameraModel solve_w(std::span<const Correspondence> corrs, const Vec3& v, const Vec3& C,
                      const Vec3& t, const SolverConfig& cfg) {
  RsCameraModel m = with_reference(cfg);
  m.orientation = v;
  m.translation = C;
  m.linear_velocity = t;
  const auto u = solve_layout(corrs, UnknownLayout::kAngularVelocity, m, cfg);
  m.angular_velocity = u.segment<3>(0);
  return m;
}

RsCameraModel solve_full_fixed_vhat(std::span<const Correspondence> corrs, const Vec3& vhat,
                                    const SolverConfig& cfg) {
  RsCameraModel m = with_reference(cfg);
  const auto u = solve_layout(corrs, UnknownLayout::kAllFixedBilinear, m, cfg, vhat);
  m.orientation = u.segment<3>(0);
  m.translation = u.segment<3>(3);
  m.angular_velocity = u.segment<3>(6);
  m.linear_velocity = u.segment<3>(9);
  return m;
}

R9pSolution r9p(std::span<const Correspondence> corrs, const SolverConfig& cfg) {
  const RsCameraModel fixed = with_reference(cfg);
  const auto u = solve_layout(corrs, UnknownLayout::kNinePoint, fixed, cfg);
  R9pSolution sol;
  sol.orientation = u.segment<3>(0);
  sol.translation = u.segment<3>(3);
  sol.linear_velocity = u.segment<3>(6);
  for (int i = 0; i < 3; ++i) sol.motion_matrix.row(i) = u.segment<3>(9 + 3 * i).transpose();
  sol.reference_row = cfg.reference_row;
  sol.final_residual = algebraic_residual(sol.pose(), corrs);
  return sol;
}

Mat3 R9pSolution::rotation() const {
  return nearest_rotation(Mat3::Identity() + skew(orientation)) * base_rotation;
}

RowAffinePose R9pSolution::pose() const {
  return {(Mat3::Identity() + skew(orientation)) * base_rotation, translation,
          motion_matrix * base_rotation, linear_velocity, reference_row};
}

}  // namespace linrs
