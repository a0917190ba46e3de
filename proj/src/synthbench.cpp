#include "linrs/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

namespace linrs {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q;
  do {
    q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng));
  } while (q.norm() < 1e-12);
  return q.normalized().toRotationMatrix();
}

template <typename Project>
Correspondences draw_points(const SceneConfig& scene, std::mt19937_64& rng, Project&& project,
                            std::vector<double>* depths) {
  std::uniform_real_distribution<double> coord(-scene.cube_half_extent, scene.cube_half_extent);
  Correspondences out;
  out.reserve(scene.num_points);
  const long budget = static_cast<long>(scene.attempts_per_point) * scene.num_points;
  long attempts = 0;
  while (static_cast<int>(out.size()) < scene.num_points) {
    if (attempts++ >= budget) {
      throw Error(ErrorCode::kGenerationExhausted,
                  "could not place " + std::to_string(scene.num_points) + " points in the frame");
    }
    const Vec3 x(coord(rng), coord(rng), coord(rng));
    ProjectionResult proj;
    try {
      proj = project(x);
    } catch (const Error&) {
      continue;
    }
    if (!(proj.depth > 0.0) || !scene.frame.contains(proj.image_point)) continue;
    out.push_back({x, proj.image_point});
    if (depths) depths->push_back(proj.depth);
  }
  return out;
}

}  // namespace

double FrameGeometry::half_extent() const { return std::tan(0.5 * fov_degrees * kDegToRad); }
double FrameGeometry::frame_height() const { return 2.0 * half_extent(); }
double FrameGeometry::pixels_per_unit() const { return rows_per_frame / frame_height(); }

bool FrameGeometry::contains(const Vec2& p) const {
  const double h = half_extent();
  return std::abs(p.x()) <= h && std::abs(p.y()) <= h;
}

SceneTruth generate_scene(const SceneConfig& scene, const MotionConfig& motion,
                          std::mt19937_64& rng) {
  if (!(scene.min_distance > 0.0 && scene.min_distance <= scene.max_distance)) {
    throw std::invalid_argument("camera distance range must be positive and ordered");
  }
  if (!(scene.frame.fov_degrees > 0.0 && scene.frame.fov_degrees < 180.0)) {
    throw std::invalid_argument("field of view must lie in (0, 180) degrees");
  }
  if (motion.translational_per_frame < 0.0 || motion.angular_deg_per_frame < 0.0) {
    throw std::invalid_argument("motion magnitudes must be non-negative");
  }

  SceneTruth truth;
  truth.frame = scene.frame;
  Mat3 rotation = Mat3::Identity();
  switch (scene.orientation) {
    case OrientationMode::kIdentity:
      break;
    case OrientationMode::kOffset:
      rotation = rotation_from_axis_angle(
          (scene.orientation_offset_degrees * kDegToRad * random_unit_vector(rng)).eval());
      break;
    case OrientationMode::kRandom:
      rotation = random_rotation(rng);
      break;
  }
  std::uniform_real_distribution<double> dist(scene.min_distance, scene.max_distance);
  const double d = dist(rng);
  const Vec3 w_dir = random_unit_vector(rng);
  const Vec3 t_dir = random_unit_vector(rng);

  ExactRsCamera& cam = truth.camera;
  cam.rotation = rotation;
  cam.translation = Vec3(0.0, 0.0, d);
  cam.angular_velocity = scene.frame.per_row(motion.angular_deg_per_frame * kDegToRad) * w_dir;
  cam.linear_velocity = scene.frame.per_row(motion.translational_per_frame) * t_dir;
  cam.reference_row = scene.reference_row;
  truth.camera_center = -rotation.transpose() * cam.translation;

  truth.noiseless = draw_points(
      scene, rng, [&](const Vec3& x) { return project_exact_rs(cam, x); }, &truth.depths);
  return truth;
}

Correspondences generate_model_points(const SceneConfig& scene, const RowAffinePose& pose,
                                      std::mt19937_64& rng) {
  return draw_points(scene, rng, [&](const Vec3& x) { return project(pose, x); }, nullptr);
}

Correspondences add_noise(std::span<const Correspondence> corrs, double sigma_pixels,
                          const FrameGeometry& frame, std::mt19937_64& rng) {
  if (sigma_pixels < 0.0) throw std::invalid_argument("noise sigma must be non-negative");
  Correspondences out(corrs.begin(), corrs.end());
  if (sigma_pixels == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma_pixels / frame.pixels_per_unit());
  for (auto& c : out) {
    c.image_point.x() += noise(rng);
    c.image_point.y() += noise(rng);
  }
  return out;
}

Correspondences add_noise(const SceneTruth& truth, double sigma_pixels, std::mt19937_64& rng) {
  return add_noise(truth.noiseless, sigma_pixels, truth.frame, rng);
}

std::vector<bool> inject_outliers(Correspondences& corrs, double fraction,
                                  const FrameGeometry& frame, std::mt19937_64& rng) {
  const int n = static_cast<int>(corrs.size());
  const int count = static_cast<int>(std::lround(fraction * n));
  std::vector<bool> outlier(n, false);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const double h = frame.half_extent();
  std::uniform_real_distribution<double> coord(-h, h);
  for (int k = 0; k < count; ++k) {
    const int i = order[k];
    outlier[i] = true;
    corrs[i].image_point = Vec2(coord(rng), coord(rng));
  }
  return outlier;
}

PoseErrors pose_errors(const Estimate& estimate, const SceneTruth& truth) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const ExactRsCamera& cam = truth.camera;
  const double rad_to_deg = 1.0 / kDegToRad;

  PoseErrors e;
  e.orientation_deg = rotation_angle_between(rotation_of(estimate), cam.rotation) * rad_to_deg;
  e.position = (pose_of(estimate).translation - cam.translation).norm();
  e.w_error = nan;
  e.t_error = nan;
  if (const auto* rs = std::get_if<RsPoseSolution>(&estimate)) {
    e.w_error = truth.frame.per_frame((rs->model.angular_velocity - cam.angular_velocity).norm()) *
                rad_to_deg;
    e.t_error = truth.frame.per_frame((rs->model.linear_velocity - cam.linear_velocity).norm());
  } else if (const auto* nine = std::get_if<R9pSolution>(&estimate)) {
    e.t_error = truth.frame.per_frame((nine->linear_velocity - cam.linear_velocity).norm());
  }
  return e;
}

}  // namespace linrs
