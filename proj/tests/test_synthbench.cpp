#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "linrs/random.hpp"
#include "linrs/synthbench.hpp"
#include "support.hpp"

using namespace linrs;
using linrs::testing::median;
using linrs::testing::uniform_vec;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Geodesic distance between two rotations through unit quaternions.
double quaternion_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const Eigen::Quaterniond d = a * b.conjugate();
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w())) / kDeg;
}

std::vector<std::string> csv_lines(const ExperimentTable& table) {
  std::ostringstream os;
  write_csv(os, table);
  std::vector<std::string> lines;
  std::istringstream is(os.str());
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

std::string csv_text(const ExperimentTable& table) {
  std::ostringstream os;
  write_csv(os, table);
  return os.str();
}

}  // namespace

TEST(FrameGeometry, UnitsFollowTheFieldOfView) {
  FrameGeometry f;
  EXPECT_NEAR(f.half_extent(), std::tan(22.5 * kDeg), 1e-15);
  EXPECT_NEAR(f.frame_height(), 0.8284271247461901, 1e-15);
  EXPECT_NEAR(f.pixels_per_unit(), 720.0 / 0.8284271247461901, 1e-9);
  EXPECT_NEAR(f.per_frame(f.per_row(0.3)), 0.3, 1e-15);
  EXPECT_TRUE(f.contains(Vec2(0.4, -0.4)));
  EXPECT_FALSE(f.contains(Vec2(0.42, 0.0)));
}

TEST(GenerateScene, ZeroMotionIsGlobalShutterProjection) {
  SceneConfig scene;
  scene.num_points = 50;
  scene.orientation = OrientationMode::kRandom;
  std::mt19937_64 rng(1);
  const auto truth = generate_scene(scene, MotionConfig{}, rng);
  for (const auto& c : truth.noiseless) {
    const Vec3 p = truth.camera.rotation * c.world_point + truth.camera.translation;
    EXPECT_LT((Vec2(p.x() / p.z(), p.y() / p.z()) - c.image_point).norm(), 1e-12);
  }
}

TEST(GenerateScene, PropertyPointsInFrameWithPositiveDepth) {
  SceneConfig scene;
  scene.num_points = 40;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(100 + trial);
    scene.orientation = trial % 2 ? OrientationMode::kRandom : OrientationMode::kIdentity;
    const auto truth = generate_scene(scene, MotionConfig{0.3, 30.0}, rng);
    ASSERT_EQ(truth.noiseless.size(), 40u);
    ASSERT_EQ(truth.depths.size(), 40u);
    for (std::size_t i = 0; i < truth.noiseless.size(); ++i) {
      EXPECT_GT(truth.depths[i], 0.0);
      EXPECT_TRUE(truth.frame.contains(truth.noiseless[i].image_point));
      EXPECT_LE(truth.noiseless[i].world_point.cwiseAbs().maxCoeff(), 1.0);
    }
    const double distance = truth.camera_center.norm();
    EXPECT_GE(distance, 2.0);
    EXPECT_LE(distance, 3.0);
    // The optical axis passes through the origin.
    const Vec3 origin_in_camera = truth.camera.translation;
    EXPECT_LT(origin_in_camera.head<2>().norm(), 1e-12);
  }
}

TEST(GenerateScene, FastRotationDisplacesPointsByMoreThanAPixel) {
  SceneConfig scene;
  scene.num_points = 20;
  double total = 0.0;
  int count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(200 + trial);
    const auto truth = generate_scene(scene, MotionConfig{0.0, 30.0}, rng);
    for (const auto& c : truth.noiseless) {
      const Vec3 p = truth.camera.rotation * c.world_point + truth.camera.translation;
      total += (Vec2(p.x() / p.z(), p.y() / p.z()) - c.image_point).norm() * truth.frame.pixels_per_unit();
      ++count;
    }
  }
  EXPECT_GT(total / count, 1.0);
}

TEST(GenerateScene, ImpossibleFrameExhaustsTheBudget) {
  SceneConfig scene;
  scene.frame.fov_degrees = 0.001;
  scene.attempts_per_point = 5;
  std::mt19937_64 rng(3);
  try {
    generate_scene(scene, MotionConfig{}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGenerationExhausted);
  }
}

TEST(GenerateScene, SameSeedSameScene) {
  SceneConfig scene;
  std::mt19937_64 a(5), b(5);
  const auto ta = generate_scene(scene, MotionConfig{0.1, 10.0}, a);
  const auto tb = generate_scene(scene, MotionConfig{0.1, 10.0}, b);
  for (std::size_t i = 0; i < ta.noiseless.size(); ++i) {
    EXPECT_EQ(ta.noiseless[i].image_point, tb.noiseless[i].image_point);
  }
}

TEST(AddNoise, ZeroSigmaIsIdentity) {
  std::mt19937_64 rng(6);
  const auto truth = generate_scene(SceneConfig{}, MotionConfig{0.1, 10.0}, rng);
  const auto same = add_noise(truth, 0.0, rng);
  for (std::size_t i = 0; i < same.size(); ++i) EXPECT_EQ(same[i].image_point, truth.noiseless[i].image_point);
}

TEST(AddNoise, EmpiricalSpreadMatchesSigmaInPixels) {
  const FrameGeometry frame;
  const Correspondences zeros(50000, Correspondence{Vec3::Zero(), Vec2::Zero()});
  std::mt19937_64 rng(7);
  const auto noisy = add_noise(zeros, 1.5, frame, rng);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& c : noisy) {
    for (int k = 0; k < 2; ++k) {
      const double px = c.image_point(k) * frame.pixels_per_unit();
      sum += px;
      sum_sq += px * px;
    }
  }
  const double n = 2.0 * noisy.size();
  const double mean = sum / n;
  const double std = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
  EXPECT_NEAR(std, 1.5, 0.05 * 1.5);
  EXPECT_NEAR(mean, 0.0, 0.05);
}

TEST(AddNoise, SeedDeterminism) {
  const FrameGeometry frame;
  const Correspondences zeros(10, Correspondence{Vec3::Zero(), Vec2::Zero()});
  std::mt19937_64 a(8), b(8);
  const auto na = add_noise(zeros, 1.0, frame, a);
  const auto nb = add_noise(zeros, 1.0, frame, b);
  for (std::size_t i = 0; i < na.size(); ++i) EXPECT_EQ(na[i].image_point, nb[i].image_point);
}

TEST(InjectOutliers, LabelsMatchReplacedPoints) {
  std::mt19937_64 rng(9);
  SceneConfig scene;
  scene.num_points = 100;
  const auto truth = generate_scene(scene, MotionConfig{}, rng);
  Correspondences corrs = truth.noiseless;
  const auto labels = inject_outliers(corrs, 0.3, truth.frame, rng);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), true), 30);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    EXPECT_TRUE(truth.frame.contains(corrs[i].image_point));
    if (!labels[i]) EXPECT_EQ(corrs[i].image_point, truth.noiseless[i].image_point);
  }
}

TEST(PoseErrors, TruthGivesZeroErrors) {
  SceneConfig scene;
  scene.orientation = OrientationMode::kRandom;
  std::mt19937_64 rng(10);
  const auto truth = generate_scene(scene, MotionConfig{0.2, 20.0}, rng);
  RsPoseSolution sol;
  sol.base_rotation = truth.camera.rotation;
  sol.model.translation = truth.camera.translation;
  sol.model.angular_velocity = truth.camera.angular_velocity;
  sol.model.linear_velocity = truth.camera.linear_velocity;
  const auto e = pose_errors(Estimate{sol}, truth);
  EXPECT_NEAR(e.position, 0.0, 1e-12);
  EXPECT_NEAR(e.orientation_deg, 0.0, 1e-9);
  EXPECT_NEAR(e.w_error, 0.0, 1e-12);
  EXPECT_NEAR(e.t_error, 0.0, 1e-12);
}

TEST(PoseErrors, TenDegreeOffsetIsTenDegrees) {
  std::mt19937_64 rng(11);
  const auto truth = generate_scene(SceneConfig{}, MotionConfig{}, rng);
  PoseCandidate cand;
  cand.rotation = rotation_from_axis_angle(Vec3(0, 0, 10.0 * kDeg)) * truth.camera.rotation;
  cand.translation = truth.camera.translation;
  const auto e = pose_errors(Estimate{cand}, truth);
  EXPECT_NEAR(e.orientation_deg, 10.0, 1e-9);
  EXPECT_NEAR(e.position, 0.0, 1e-15);
  EXPECT_TRUE(std::isnan(e.w_error));
  EXPECT_TRUE(std::isnan(e.t_error));
}

TEST(PoseErrors, PropertyMatchesQuaternionGeodesic) {
  SceneConfig scene;
  scene.orientation = OrientationMode::kRandom;
  for (int trial = 0; trial < 200; ++trial) {
    std::mt19937_64 rng(300 + trial);
    const auto truth = generate_scene(scene, MotionConfig{}, rng);
    RsPoseSolution sol;
    sol.base_rotation = rotation_from_axis_angle(uniform_vec(rng, 1.0)) * truth.camera.rotation;
    sol.model.orientation = uniform_vec(rng, 0.2);
    sol.model.translation = truth.camera.translation;

    // The polar factor of I + [v]x is the rotation by atan|v| about v.
    const Vec3 v = sol.model.orientation;
    const Eigen::Quaterniond est =
        Eigen::Quaterniond(Eigen::AngleAxisd(std::atan(v.norm()), v.normalized())) *
        Eigen::Quaterniond(sol.base_rotation);
    const double expected = quaternion_angle_deg(est, Eigen::Quaterniond(truth.camera.rotation));
    EXPECT_NEAR(pose_errors(Estimate{sol}, truth).orientation_deg, expected, 1e-9);
  }
}

TEST(PoseErrors, VelocityErrorsArePerFrame) {
  std::mt19937_64 rng(12);
  const auto truth = generate_scene(SceneConfig{}, MotionConfig{0.1, 10.0}, rng);
  RsPoseSolution sol;
  sol.base_rotation = truth.camera.rotation;
  sol.model.translation = truth.camera.translation;
  sol.model.angular_velocity = truth.camera.angular_velocity + truth.frame.per_row(2.0 * kDeg) * Vec3::UnitX();
  sol.model.linear_velocity = truth.camera.linear_velocity + truth.frame.per_row(0.05) * Vec3::UnitY();
  const auto e = pose_errors(Estimate{sol}, truth);
  EXPECT_NEAR(e.w_error, 2.0, 1e-12);
  EXPECT_NEAR(e.t_error, 0.05, 1e-12);
}

// ----------------------------------------------------------------------------
// Experiment runner

TEST(Experiment, CsvHeaderAndRowCount) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kMotionSweep;
  cfg.trials = 3;
  cfg.sweep_points = 2;
  const auto table = run_experiment(cfg);
  const auto lines = csv_lines(table);
  EXPECT_EQ(lines.front(),
            "sweep_value,solver_id,trial,position_error,orientation_error,w_error,t_error,"
            "algebraic_residual,iterations,wall_time,failed");
  // 2 sweep points x 3 trials x 6 solvers, then 2 x 6 median rows.
  EXPECT_EQ(table.records.size(), 36u);
  EXPECT_EQ(lines.size(), 1u + 36u + 12u);
  EXPECT_NE(lines.back().find(",median,"), std::string::npos);
}

TEST(Experiment, SameSeedGivesIdenticalBytes) {
  for (const auto kind : {ExperimentKind::kMotionSweep, ExperimentKind::kConvergence,
                          ExperimentKind::kRansacOutliers}) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.trials = 2;
    cfg.sweep_points = 2;
    cfg.ransac_iterations = 20;
    cfg.seed = 77;
    EXPECT_EQ(csv_text(run_experiment(cfg)), csv_text(run_experiment(cfg))) << to_string(kind);
    ExperimentConfig other = cfg;
    other.seed = 78;
    EXPECT_NE(csv_text(run_experiment(cfg)), csv_text(run_experiment(other)));
  }
}

TEST(Experiment, SweepEndpoints) {
  const std::pair<ExperimentKind, double> ends[] = {{ExperimentKind::kMotionSweep, 30.0},
                                                    {ExperimentKind::kTranslationOnly, 0.3},
                                                    {ExperimentKind::kLinearizationOffset, 30.0},
                                                    {ExperimentKind::kNoiseSweep, 2.0}};
  for (const auto& [kind, last] : ends) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.trials = 1;
    cfg.sweep_points = 3;
    cfg.solvers = {SolverRun{SolverId::kP3p, 1, false, "p3p"}};
    const auto table = run_experiment(cfg);
    EXPECT_EQ(table.records.front().sweep_value, 0.0);
    EXPECT_EQ(table.records.back().sweep_value, last);
  }
}

TEST(Experiment, ConvergenceRecordsFiftyResiduals) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kConvergence;
  cfg.trials = 2;
  cfg.sweep_points = 2;
  const auto table = run_experiment(cfg);
  ASSERT_EQ(table.extra_columns.size(), 50u);
  EXPECT_EQ(table.extra_columns.front(), "residual_1");
  EXPECT_EQ(table.extra_columns.back(), "residual_50");
  EXPECT_EQ(csv_lines(table).front().substr(csv_lines(table).front().size() - 11), "residual_50");
  for (const auto& r : table.records) {
    ASSERT_EQ(r.extra.size(), 50u);
    if (r.failed) continue;
    for (int k = 0; k < r.iterations; ++k) EXPECT_FALSE(std::isnan(r.extra[k])) << r.solver_id;
  }
}

TEST(Experiment, ZeroMotionNoiselessSweepPointIsExact) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kMotionSweep;
  cfg.trials = 10;
  cfg.sweep_points = 2;
  const auto table = run_experiment(cfg);
  for (const auto& r : table.records) {
    if (r.sweep_value != 0.0) continue;
    if (r.solver_id == "r9p") {
      // Without motion the nine-point system has a null direction.
      EXPECT_TRUE(r.failed);
      continue;
    }
    EXPECT_FALSE(r.failed) << r.solver_id;
    EXPECT_LT(r.position_error, 1e-6) << r.solver_id;
  }
}

TEST(Experiment, P3pErrorGrowsAlongTheMotionSweep) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kMotionSweep;
  cfg.trials = 100;
  cfg.sweep_points = 7;
  cfg.solvers = {SolverRun{SolverId::kP3p, 1, false, "p3p"}};
  const auto table = run_experiment(cfg);
  std::vector<double> medians;
  for (int s = 0; s < cfg.sweep_points; ++s) {
    std::vector<double> errs;
    for (int t = 0; t < cfg.trials; ++t) errs.push_back(table.records[s * cfg.trials + t].position_error);
    medians.push_back(median(errs));
  }
  for (std::size_t k = 1; k < medians.size(); ++k) EXPECT_GE(medians[k], medians[k - 1]) << k;
}

TEST(Experiment, GenerationFailuresAreRecordedNotThrown) {
  ExperimentConfig cfg;
  cfg.trials = 2;
  cfg.sweep_points = 1;
  cfg.scene.frame.fov_degrees = 0.001;
  cfg.scene.attempts_per_point = 2;
  const auto table = run_experiment(cfg);
  ASSERT_EQ(table.records.size(), 12u);
  for (const auto& r : table.records) EXPECT_TRUE(r.failed);
  const auto lines = csv_lines(table);
  EXPECT_NE(lines[12].find(",nan,nan,nan,nan,nan,0,nan,1"), std::string::npos) << lines[12];
  EXPECT_NE(lines.back().find(",median,nan,"), std::string::npos) << lines.back();
  EXPECT_EQ(lines.back().substr(lines.back().size() - 2), ",1");
}

TEST(Experiment, RansacOutlierColumns) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kRansacOutliers;
  cfg.trials = 1;
  cfg.sweep_points = 2;
  cfg.ransac_iterations = 50;
  const auto table = run_experiment(cfg);
  EXPECT_EQ(table.extra_columns, (std::vector<std::string>{"inliers", "true_inliers", "accepted_outliers"}));
  for (const auto& r : table.records) {
    if (r.failed) continue;
    EXPECT_EQ(r.extra[0], r.extra[1] + r.extra[2]);
  }
}

TEST(Experiment, TimingIsOptIn) {
  ExperimentConfig cfg;
  cfg.trials = 1;
  cfg.sweep_points = 2;
  for (const auto& r : run_experiment(cfg).records) EXPECT_TRUE(std::isnan(r.wall_time));
  cfg.measure_time = true;
  for (const auto& r : run_experiment(cfg).records)
    if (!r.failed) EXPECT_GE(r.wall_time, 0.0);
}

TEST(Experiment, KindNamesRoundTrip) {
  for (const auto kind : {ExperimentKind::kMotionSweep, ExperimentKind::kNoiseSweep,
                          ExperimentKind::kTranslationOnly, ExperimentKind::kConvergence,
                          ExperimentKind::kLinearizationOffset, ExperimentKind::kP3pInit,
                          ExperimentKind::kRansacOutliers}) {
    EXPECT_EQ(parse_experiment_kind(to_string(kind)), kind);
  }
  EXPECT_FALSE(parse_experiment_kind("fig-7").has_value());
}
