#include <algorithm>

#include "linrs/solvers.hpp"

namespace linrs {

Mat3 RsPoseSolution::orientation_matrix() const {
  return (Mat3::Identity() + skew(model.orientation)) * base_rotation;
}

Mat3 RsPoseSolution::rotation() const {
  return nearest_rotation(Mat3::Identity() + skew(model.orientation)) * base_rotation;
}

RowAffinePose RsPoseSolution::pose() const {
  return row_affine_pose_rotated(model, orientation_matrix());
}

std::string_view to_string(R6pVariant variant) {
  switch (variant) {
    case R6pVariant::kVcWt: return "r6p-vc-wt";
    case R6pVariant::kVctW: return "r6p-vct-w";
    case R6pVariant::kVctWt: return "r6p-vct-wt";
    case R6pVariant::kFixedV: return "r6p-vfix";
  }
  return "unknown";
}

namespace {

double max_parameter_change(const RsCameraModel& a, const RsCameraModel& b) {
  return std::max({(a.orientation - b.orientation).cwiseAbs().maxCoeff(),
                   (a.translation - b.translation).cwiseAbs().maxCoeff(),
                   (a.angular_velocity - b.angular_velocity).cwiseAbs().maxCoeff(),
                   (a.linear_velocity - b.linear_velocity).cwiseAbs().maxCoeff()});
}

// One sweep of the variant's schedule starting from `m`.
RsCameraModel step(R6pVariant variant, std::span<const Correspondence> corrs,
                   const RsCameraModel& m, Vec3& vhat, const SolverConfig& cfg,
                   IterationTrace* trace) {
  auto record = [&](const RsCameraModel& x) {
    if (trace) trace->per_half_step.push_back(algebraic_residual(x, corrs));
  };
  RsCameraModel next;
  switch (variant) {
    case R6pVariant::kVcWt: {
      RsCameraModel half = solve_vC(corrs, m.angular_velocity, m.linear_velocity, cfg);
      record(half);
      next = solve_wt(corrs, half.orientation, half.translation, cfg);
      record(next);
      break;
    }
    case R6pVariant::kVctW: {
      RsCameraModel half = solve_vCt(corrs, m.angular_velocity, cfg);
      record(half);
      next = solve_w(corrs, half.orientation, half.translation, half.linear_velocity, cfg);
      record(next);
      break;
    }
    case R6pVariant::kVctWt: {
      RsCameraModel half = solve_vCt(corrs, m.angular_velocity, cfg);
      record(half);
      next = solve_wt(corrs, half.orientation, half.translation, cfg);
      record(next);
      break;
    }
    case R6pVariant::kFixedV: {
      next = solve_full_fixed_vhat(corrs, vhat, cfg);
      vhat = next.orientation;
      record(next);
      break;
    }
  }
  return next;
}

}  // namespace

RsPoseSolution r6p_iterative(R6pVariant variant, std::span<const Correspondence> corrs,
                             const SolverConfig& cfg, IterationTrace* trace) {
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

  RsCameraModel current;
  current.reference_row = cfg.reference_row;
  Vec3 vhat = Vec3::Zero();

  RsPoseSolution sol;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    RsCameraModel next;
    try {
      next = step(variant, corrs, current, vhat, cfg, trace);
    } catch (const Error&) {
      if (it == 1) throw;
      sol.converged = false;
      break;
    }
    const double change = max_parameter_change(next, current);
    current = next;
    sol.iterations_used = it;
    const double residual = algebraic_residual(current, corrs);
    if (trace) trace->per_iteration.push_back(residual);
    // A zero residual is a fixed point of every schedule.
    if (change < cfg.param_tol || residual <= cfg.exact_residual) {
      sol.converged = true;
      break;
    }
  }
  sol.model = current;
  sol.final_residual = algebraic_residual(current, corrs);
  return sol;
}

Correspondences prerotate(std::span<const Correspondence> corrs, const Mat3& rotation) {
  Correspondences out(corrs.begin(), corrs.end());
  for (auto& c : out) c.world_point = rotation * c.world_point;
  return out;
}

RsPoseSolution unrotate(RsPoseSolution solution, const Mat3& rotation) {
  solution.base_rotation = solution.base_rotation * rotation;
  return solution;
}

R9pSolution unrotate(R9pSolution solution, const Mat3& rotation) {
  solution.base_rotation = solution.base_rotation * rotation;
  return solution;
}

RsPoseSolution r6p_with_p3p_init(R6pVariant variant, std::span<const Correspondence> corrs,
                                 const SolverConfig& cfg, IterationTrace* trace) {
  if (corrs.size() < 6) {
    throw Error(ErrorCode::kTooFewPoints, "need at least 6 correspondences");
  }
  const PoseCandidate init = p3p_best(corrs.first(6), corrs);
  const Correspondences rotated = prerotate(corrs, init.rotation);
  return unrotate(r6p_iterative(variant, rotated, cfg, trace), init.rotation);
}

R9pSolution r9p_with_p3p_init(std::span<const Correspondence> corrs, const SolverConfig& cfg) {
  if (corrs.size() < 9) {
    throw Error(ErrorCode::kTooFewPoints, "need at least 9 correspondences");
  }
  const PoseCandidate init = p3p_best(corrs.first(6), corrs);
  const Correspondences rotated = prerotate(corrs, init.rotation);
  return unrotate(r9p(rotated, cfg), init.rotation);
}

}  // namespace linrs
