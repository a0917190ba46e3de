#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "linrs/geometry.hpp"
#include "linrs/synthbench.hpp"

namespace linrs::testing {

inline Vec3 uniform_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

/// Model parameters of the size seen at up to ~30 degrees and 0.3 units per frame.
inline RsCameraModel random_model(std::mt19937_64& rng, double motion_scale = 1.0) {
  RsCameraModel m;
  m.orientation = uniform_vec(rng, 0.1);
  m.translation = Vec3(0, 0, 2.5) + uniform_vec(rng, 0.2);
  m.angular_velocity = uniform_vec(rng, 0.35 * motion_scale);
  m.linear_velocity = uniform_vec(rng, 0.2 * motion_scale);
  return m;
}

inline Correspondences model_points(const RowAffinePose& pose, int n, std::mt19937_64& rng) {
  SceneConfig scene;
  scene.num_points = n;
  return generate_model_points(scene, pose, rng);
}

inline double max_abs_diff(const Vec3& a, const Vec3& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace linrs::testing
