#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "linrs/estimator.hpp"
#include "linrs/format.hpp"

namespace linrs {

/// Calibrated frame of a square field of view, with a nominal pixel count
/// for converting pixel quantities into image units.
struct FrameGeometry {
  double fov_degrees = 45.0;
  int rows_per_frame = 720;

  double half_extent() const;     // tan(fov / 2)
  double frame_height() const;    // 2 tan(fov / 2), image units
  double pixels_per_unit() const;
  /// Rates given per frame become rates per image row unit.
  double per_row(double per_frame) const { return per_frame / frame_height(); }
  double per_frame(double per_row) const { return per_row * frame_height(); }
  bool contains(const Vec2& image_point) const;
};

enum class OrientationMode {
  kIdentity,  // camera axes aligned with the world
  kOffset,    // rotated by a fixed angle about a random axis
  kRandom,    // uniformly random
};

struct SceneConfig {
  int num_points = 9;
  double cube_half_extent = 1.0;
  double min_distance = 2.0;
  double max_distance = 3.0;
  FrameGeometry frame;
  OrientationMode orientation = OrientationMode::kIdentity;
  double orientation_offset_degrees = 0.0;
  double reference_row = 0.0;
  /// Point draws allowed per requested point before giving up.
  int attempts_per_point = 1000;
};

struct MotionConfig {
  double translational_per_frame = 0.0;
  double angular_deg_per_frame = 0.0;
};

struct SceneTruth {
  ExactRsCamera camera;
  Vec3 camera_center = Vec3::Zero();  // world coordinates
  FrameGeometry frame;
  Correspondences noiseless;
  std::vector<double> depths;
};

/// Camera at a uniform distance in [min, max] from the origin with its
/// optical axis through the origin; points uniform in the cube, projected
/// with the exact constant-velocity model. Points leaving the frame are redrawn.
SceneTruth generate_scene(const SceneConfig& scene, const MotionConfig& motion,
                          std::mt19937_64& rng);

/// Points drawn as in generate_scene but projected through `pose`. Used to
/// build data that satisfies one of the linear models exactly.
Correspondences generate_model_points(const SceneConfig& scene, const RowAffinePose& pose,
                                      std::mt19937_64& rng);

/// Isotropic Gaussian image noise with sigma given in pixels.
Correspondences add_noise(std::span<const Correspondence> corrs, double sigma_pixels,
                          const FrameGeometry& frame, std::mt19937_64& rng);
Correspondences add_noise(const SceneTruth& truth, double sigma_pixels, std::mt19937_64& rng);

/// Replaces a fraction of image points with uniform positions inside the
/// frame. Returns the outlier labels.
std::vector<bool> inject_outliers(Correspondences& corrs, double fraction,
                                  const FrameGeometry& frame, std::mt19937_64& rng);

struct PoseErrors {
  double position = 0.0;           // scene units
  double orientation_deg = 0.0;
  double w_error = 0.0;            // degrees per frame; NaN when not estimated
  double t_error = 0.0;            // scene units per frame; NaN when not estimated
};

PoseErrors pose_errors(const Estimate& estimate, const SceneTruth& truth);

enum class ExperimentKind {
  kMotionSweep,
  kNoiseSweep,
  kTranslationOnly,
  kConvergence,
  kLinearizationOffset,
  kP3pInit,
  kRansacOutliers,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

/// One solver configuration inside an experiment.
struct SolverRun {
  SolverId solver = SolverId::kR6pFixedV;
  int max_iterations = 5;
  bool p3p_init = false;
  std::string label;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kMotionSweep;
  int trials = 500;
  int sweep_points = 7;
  std::uint64_t seed = 1;
  /// Negative selects the kind's default.
  double noise_pixels = -1.0;
  /// Empty selects the kind's default solver set.
  std::vector<SolverRun> solvers;
  SceneConfig scene;
  int ransac_iterations = 1000;
  double ransac_threshold = 2.0;
  /// Wall-clock timing makes output non-reproducible, so it is opt-in.
  bool measure_time = false;
};

struct ExperimentRecord {
  double sweep_value = 0.0;
  std::string solver_id;
  int trial = 0;
  double position_error = 0.0;
  double orientation_error = 0.0;
  double w_error = 0.0;
  double t_error = 0.0;
  double algebraic_residual = 0.0;
  int iterations = 0;
  double wall_time = 0.0;  // microseconds; NaN unless timing was requested
  bool failed = false;
  std::vector<double> extra;
};

struct ExperimentTable {
  std::vector<std::string> extra_columns;
  std::vector<ExperimentRecord> records;
};

std::vector<SolverRun> default_solvers(ExperimentKind kind);

ExperimentTable run_experiment(const ExperimentConfig& cfg);

/// CSV with one row per record followed by per (sweep value, solver) median
/// rows whose trial column reads "median".
void write_csv(std::ostream& os, const ExperimentTable& table);

}  // namespace linrs
