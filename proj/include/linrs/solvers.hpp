#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "linrs/geometry.hpp"
#include "linrs/types.hpp"

namespace linrs {

struct SolverConfig {
  int max_iterations = 5;
  /// Stop once the largest absolute parameter change falls below this.
  double param_tol = 1e-8;
  /// Also stop once the constraint residual is this small (an exact fit).
  double exact_residual = 1e-14;
  /// Relative pivot threshold for rank detection in the QR factorization.
  double rank_tol = 1e-10;
  double reference_row = 0.0;
};

/// Output of the iterative six-point solvers. When the scene was pre-rotated
/// by R, `base_rotation` holds R and the model acts on R * X.
struct RsPoseSolution {
  RsCameraModel model;
  Mat3 base_rotation = Mat3::Identity();
  int iterations_used = 0;
  double final_residual = 0.0;
  bool converged = false;

  /// I + [v]x composed with the base rotation.
  Mat3 orientation_matrix() const;
  /// Orthonormal estimate of the camera orientation at the reference row.
  Mat3 rotation() const;
  RowAffinePose pose() const;
};

/// Non-iterative nine-point solution. `motion_matrix` is the unconstrained
/// 3x3 matrix standing in for [w]x (I + [v]x); no rotation structure is imposed.
struct R9pSolution {
  Vec3 orientation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
  Vec3 linear_velocity = Vec3::Zero();
  Mat3 motion_matrix = Mat3::Zero();
  Mat3 base_rotation = Mat3::Identity();
  double reference_row = 0.0;
  double final_residual = 0.0;

  Mat3 rotation() const;
  RowAffinePose pose() const;
};

/// Global-shutter pose: lambda x = R X + C.
struct PoseCandidate {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  RowAffinePose pose() const;
};

/// Which parameters a linear sub-solve estimates. Everything else is held
/// fixed at the values passed alongside.
enum class UnknownLayout {
  kOrientationTranslation,             // v, C            (6)
  kVelocities,                         // w, t            (6)
  kOrientationTranslationVelocity,     // v, C, t         (9)
  kAngularVelocity,                    // w               (3)
  kAllFixedBilinear,                   // v, C, w, t      (12)
  kNinePoint,                          // v, C, t, R_RS   (18)
};

int unknown_count(UnknownLayout layout);

/// The projection equation for one correspondence written as
///   camera_point = jacobian * unknowns + offset.
struct LinearForm {
  Eigen::Matrix<double, 3, Eigen::Dynamic> jacobian;
  Vec3 offset;
};

LinearForm linear_form(const Correspondence& corr, UnknownLayout layout,
                       const RsCameraModel& fixed, const Vec3& vhat = Vec3::Zero());

/// Two linear constraints `lhs * unknowns = rhs` obtained by left-multiplying
/// the projection equation with skew([r, c, 1]) and keeping the two rows of
/// largest norm.
struct DepthEliminated {
  Eigen::Matrix<double, 2, Eigen::Dynamic> lhs;
  Vec2 rhs;
};

DepthEliminated eliminate_depth(const Correspondence& corr, UnknownLayout layout,
                                const RsCameraModel& fixed, const Vec3& vhat = Vec3::Zero());

/// Stacked constraints of all correspondences (2N rows).
struct LinearSystem {
  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs;
};

LinearSystem assemble_system(std::span<const Correspondence> corrs, UnknownLayout layout,
                             const RsCameraModel& fixed, const Vec3& vhat = Vec3::Zero());

/// Least-squares solve with column-pivoted QR; throws DegenerateConfiguration
/// when the numerical rank is below the column count.
Eigen::VectorXd solve_least_squares(const LinearSystem& system, double rank_tol);

// Linear sub-solvers. Each returns `fixed` with the estimated block replaced.
RsCameraModel solve_vC(std::span<const Correspondence> corrs, const Vec3& w, const Vec3& t,
                       const SolverConfig& cfg = {});
RsCameraModel solve_wt(std::span<const Correspondence> corrs, const Vec3& v, const Vec3& C,
                       const SolverConfig& cfg = {});
RsCameraModel solve_vCt(std::span<const Correspondence> corrs, const Vec3& w,
                        const SolverConfig& cfg = {});
RsCameraModel solve_w(std::span<const Correspondence> corrs, const Vec3& v, const Vec3& C,
                      const Vec3& t, const SolverConfig& cfg = {});
RsCameraModel solve_full_fixed_vhat(std::span<const Correspondence> corrs, const Vec3& vhat,
                                    const SolverConfig& cfg = {});

enum class R6pVariant {
  kVcWt,       // alternate (v, C) | (w, t)
  kVctW,       // alternate (v, C, t) | w
  kVctWt,      // alternate (v, C, t) | (w, t)
  kFixedV,     // all twelve at once, v frozen only inside [w]x[v]x
};

std::string_view to_string(R6pVariant variant);

/// Residual history of one iterative run (RMS constraint residual).
struct IterationTrace {
  std::vector<double> per_iteration;
  /// After every block update; one entry per iteration for kFixedV.
  std::vector<double> per_half_step;
};

/// Iterative linear six-point solver. Errors from the first iteration
/// propagate; later failures return the last good iterate with converged=false.
RsPoseSolution r6p_iterative(R6pVariant variant, std::span<const Correspondence> corrs,
                             const SolverConfig& cfg = {}, IterationTrace* trace = nullptr);

R9pSolution r9p(std::span<const Correspondence> corrs, const SolverConfig& cfg = {});

/// All real, positive-depth poses consistent with three correspondences.
std::vector<PoseCandidate> p3p(std::span<const Correspondence> triple);

struct P3pBestStats {
  int triplets_tried = 0;
  int degenerate_triplets = 0;
  int candidates_scored = 0;
};

/// Best P3P pose over every triplet of the six sample points, scored by summed
/// global-shutter reprojection error over `eval`.
PoseCandidate p3p_best(std::span<const Correspondence> sample, std::span<const Correspondence> eval,
                       P3pBestStats* stats = nullptr);

/// World points replaced by R * X.
Correspondences prerotate(std::span<const Correspondence> corrs, const Mat3& rotation);

/// Expresses a solution found on prerotate(corrs, R) in the original frame.
RsPoseSolution unrotate(RsPoseSolution solution, const Mat3& rotation);
R9pSolution unrotate(R9pSolution solution, const Mat3& rotation);

/// P3P on the first six points, pre-rotation, then the iterative solver.
RsPoseSolution r6p_with_p3p_init(R6pVariant variant, std::span<const Correspondence> corrs,
                                 const SolverConfig& cfg = {}, IterationTrace* trace = nullptr);
R9pSolution r9p_with_p3p_init(std::span<const Correspondence> corrs, const SolverConfig& cfg = {});

}  // namespace linrs
