#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "linrs/random.hpp"
#include "linrs/ransac.hpp"
#include "linrs/synthbench.hpp"

namespace linrs {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kConvergenceIterations = 50;

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kKindNames{{
    {ExperimentKind::kMotionSweep, "motion-sweep"},
    {ExperimentKind::kNoiseSweep, "noise-sweep"},
    {ExperimentKind::kTranslationOnly, "translation-only"},
    {ExperimentKind::kConvergence, "convergence"},
    {ExperimentKind::kLinearizationOffset, "linearization-offset"},
    {ExperimentKind::kP3pInit, "p3p-init"},
    {ExperimentKind::kRansacOutliers, "ransac-outliers"},
}};

SolverRun run(SolverId id, int iterations = 5, bool init = false, std::string label = {}) {
  if (label.empty()) label = std::string(to_string(id));
  return {id, iterations, init, std::move(label)};
}

std::string iter_label(SolverId id, int iterations) {
  return std::string(to_string(id)) + "-i" + std::to_string(iterations);
}

// Sweep endpoints and per-point scene setup for each experiment kind.
struct SweepPoint {
  double value = 0.0;
  MotionConfig motion;
  double noise = 0.0;
  double outlier_fraction = 0.0;
  SceneConfig scene;
};

double default_noise(ExperimentKind kind) {
  return kind == ExperimentKind::kTranslationOnly ? 1.0 : 0.0;
}

SweepPoint sweep_point(const ExperimentConfig& cfg, int index) {
  const double f = cfg.sweep_points > 1 ? static_cast<double>(index) / (cfg.sweep_points - 1) : 1.0;
  const double noise = cfg.noise_pixels >= 0.0 ? cfg.noise_pixels : default_noise(cfg.kind);
  SweepPoint p;
  p.scene = cfg.scene;
  p.noise = noise;
  switch (cfg.kind) {
    case ExperimentKind::kMotionSweep:
    case ExperimentKind::kConvergence:
      p.value = 30.0 * f;
      p.motion = {0.3 * f, 30.0 * f};
      p.scene.orientation = OrientationMode::kIdentity;
      break;
    case ExperimentKind::kP3pInit:
      p.value = 30.0 * f;
      p.motion = {0.3 * f, 30.0 * f};
      p.scene.orientation = OrientationMode::kRandom;
      break;
    case ExperimentKind::kNoiseSweep:
      p.value = 2.0 * f;
      p.motion = {0.15, 15.0};
      p.noise = p.value;
      p.scene.orientation = OrientationMode::kIdentity;
      break;
    case ExperimentKind::kTranslationOnly:
      p.value = 0.3 * f;
      p.motion = {0.3 * f, 0.0};
      p.scene.orientation = OrientationMode::kIdentity;
      break;
    case ExperimentKind::kLinearizationOffset:
      p.value = 30.0 * f;
      p.motion = {0.15, 15.0};
      p.scene.orientation = OrientationMode::kOffset;
      p.scene.orientation_offset_degrees = p.value;
      break;
    case ExperimentKind::kRansacOutliers:
      p.value = 0.5 * f;
      p.motion = {0.15, 15.0};
      p.outlier_fraction = p.value;
      p.scene.orientation = OrientationMode::kIdentity;
      p.scene.num_points = std::max(p.scene.num_points, 100);
      break;
  }
  return p;
}

ExperimentRecord failed_record(double sweep, const SolverRun& solver, int trial,
                               std::size_t extras) {
  ExperimentRecord r;
  r.sweep_value = sweep;
  r.solver_id = solver.label;
  r.trial = trial;
  r.position_error = r.orientation_error = r.w_error = r.t_error = r.algebraic_residual = kNaN;
  r.wall_time = kNaN;
  r.failed = true;
  r.extra.assign(extras, kNaN);
  return r;
}

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

int iterations_of(const Estimate& e) {
  if (const auto* rs = std::get_if<RsPoseSolution>(&e)) return rs->iterations_used;
  return 1;
}

// One solver on one noisy scene.
ExperimentRecord evaluate(const ExperimentConfig& cfg, const SweepPoint& point,
                          const SolverRun& solver, int trial, const SceneTruth& truth,
                          const Correspondences& observed, std::size_t extras) {
  ExperimentRecord rec = failed_record(point.value, solver, trial, extras);
  const std::size_t need = solver.solver == SolverId::kR9p ? 9 : 6;
  if (observed.size() < need) return rec;
  const std::span<const Correspondence> input(observed.data(), need);

  EstimatorOptions opts;
  opts.solver.max_iterations = solver.max_iterations;
  opts.solver.reference_row = truth.camera.reference_row;
  opts.prerotate_with_p3p = solver.p3p_init;

  IterationTrace trace;
  std::optional<Estimate> est;
  const auto start = Clock::now();
  try {
    if (cfg.kind == ExperimentKind::kConvergence && r6p_variant(solver.solver)) {
      est = r6p_iterative(*r6p_variant(solver.solver), input, opts.solver, &trace);
    } else {
      est = estimate(solver.solver, input, opts).front();
    }
  } catch (const Error&) {
    return rec;
  }
  const double wall = elapsed_us(start);

  const PoseErrors err = pose_errors(*est, truth);
  rec.position_error = err.position;
  rec.orientation_error = err.orientation_deg;
  rec.w_error = err.w_error;
  rec.t_error = err.t_error;
  rec.algebraic_residual = algebraic_residual(pose_of(*est), input);
  rec.iterations = iterations_of(*est);
  rec.wall_time = cfg.measure_time ? wall : kNaN;
  rec.failed = false;
  for (std::size_t k = 0; k < trace.per_iteration.size() && k < extras; ++k) {
    rec.extra[k] = trace.per_iteration[k];
  }
  return rec;
}

ExperimentRecord evaluate_ransac(const ExperimentConfig& cfg, const SweepPoint& point,
                                 const SolverRun& solver, int trial, const SceneTruth& truth,
                                 const Correspondences& observed,
                                 const std::vector<bool>& outlier, std::uint64_t seed) {
  ExperimentRecord rec = failed_record(point.value, solver, trial, 3);
  RansacConfig rc;
  rc.iterations = cfg.ransac_iterations;
  rc.threshold = cfg.ransac_threshold;
  rc.pixels_per_unit = truth.frame.pixels_per_unit();
  rc.seed = seed;
  rc.estimator.solver.max_iterations = solver.max_iterations;
  rc.estimator.solver.reference_row = truth.camera.reference_row;
  rc.estimator.prerotate_with_p3p = solver.p3p_init;

  const auto start = Clock::now();
  RansacResult res;
  try {
    res = ransac(observed, solver.solver, rc);
  } catch (const Error&) {
    return rec;
  }
  const double wall = elapsed_us(start);

  const PoseErrors err = pose_errors(res.best_model, truth);
  rec.position_error = err.position;
  rec.orientation_error = err.orientation_deg;
  rec.w_error = err.w_error;
  rec.t_error = err.t_error;
  Correspondences inliers;
  int true_inliers = 0, accepted_outliers = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!res.inlier_mask[i]) continue;
    inliers.push_back(observed[i]);
    (outlier[i] ? accepted_outliers : true_inliers) += 1;
  }
  rec.algebraic_residual = inliers.empty() ? kNaN : algebraic_residual(pose_of(res.best_model), inliers);
  rec.iterations = cfg.ransac_iterations;
  rec.wall_time = cfg.measure_time ? wall : kNaN;
  rec.failed = false;
  rec.extra = {static_cast<double>(res.inlier_count), static_cast<double>(true_inliers),
               static_cast<double>(accepted_outliers)};
  return rec;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return kNaN;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  return std::nullopt;
}

std::vector<SolverRun> default_solvers(ExperimentKind kind) {
  using enum SolverId;
  switch (kind) {
    case ExperimentKind::kConvergence: {
      std::vector<SolverRun> runs;
      for (SolverId id : {kR6pVcWt, kR6pVctW, kR6pVctWt, kR6pFixedV})
        for (int it : {1, 5, kConvergenceIterations}) runs.push_back(run(id, it, false, iter_label(id, it)));
      return runs;
    }
    case ExperimentKind::kP3pInit:
      return {run(kP3p),
              run(kR6pVcWt, 50, true, iter_label(kR6pVcWt, 50)),
              run(kR6pVctW, 50, true, iter_label(kR6pVctW, 50)),
              run(kR6pVctWt, 50, true, iter_label(kR6pVctWt, 50)),
              run(kR6pFixedV, 1, true, iter_label(kR6pFixedV, 1)),
              run(kR6pFixedV, 5, true, iter_label(kR6pFixedV, 5)),
              run(kR9p, 1, true)};
    case ExperimentKind::kRansacOutliers:
      return {run(kP3p), run(kR6pVctW), run(kR6pFixedV), run(kR9p)};
    default:
      return {run(kP3p), run(kR6pVcWt), run(kR6pVctW), run(kR6pVctWt), run(kR6pFixedV), run(kR9p)};
  }
}

ExperimentTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1 || cfg.sweep_points < 1) {
    throw std::invalid_argument("experiment needs at least one trial and one sweep point");
  }
  const std::vector<SolverRun> solvers = cfg.solvers.empty() ? default_solvers(cfg.kind) : cfg.solvers;

  ExperimentTable table;
  std::size_t extras = 0;
  if (cfg.kind == ExperimentKind::kConvergence) {
    for (int k = 1; k <= kConvergenceIterations; ++k)
      table.extra_columns.push_back("residual_" + std::to_string(k));
    extras = kConvergenceIterations;
  } else if (cfg.kind == ExperimentKind::kRansacOutliers) {
    table.extra_columns = {"inliers", "true_inliers", "accepted_outliers"};
    extras = 3;
  }

  for (int s = 0; s < cfg.sweep_points; ++s) {
    const SweepPoint point = sweep_point(cfg, s);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(trial));
      SceneTruth truth;
      try {
        truth = generate_scene(point.scene, point.motion, rng);
      } catch (const Error&) {
        for (const auto& solver : solvers)
          table.records.push_back(failed_record(point.value, solver, trial, extras));
        continue;
      }
      Correspondences observed = add_noise(truth, point.noise, rng);
      std::vector<bool> outlier(observed.size(), false);
      if (cfg.kind == ExperimentKind::kRansacOutliers) {
        outlier = inject_outliers(observed, point.outlier_fraction, truth.frame, rng);
      }
      const std::uint64_t ransac_seed = rng();
      for (const auto& solver : solvers) {
        table.records.push_back(
            cfg.kind == ExperimentKind::kRansacOutliers
                ? evaluate_ransac(cfg, point, solver, trial, truth, observed, outlier, ransac_seed)
                : evaluate(cfg, point, solver, trial, truth, observed, extras));
      }
    }
  }
  return table;
}

void write_csv(std::ostream& os, const ExperimentTable& table) {
  os << "sweep_value,solver_id,trial,position_error,orientation_error,w_error,t_error,"
        "algebraic_residual,iterations,wall_time,failed";
  for (const auto& c : table.extra_columns) os << ',' << c;
  os << '\n';

  auto write_extras = [&](const std::vector<double>& extra) {
    for (std::size_t k = 0; k < table.extra_columns.size(); ++k)
      os << ',' << format_number(k < extra.size() ? extra[k] : kNaN);
  };
  for (const auto& r : table.records) {
    os << format_number(r.sweep_value) << ',' << r.solver_id << ',' << r.trial << ','
       << format_number(r.position_error) << ',' << format_number(r.orientation_error) << ','
       << format_number(r.w_error) << ',' << format_number(r.t_error) << ','
       << format_number(r.algebraic_residual) << ',' << r.iterations << ','
       << format_number(r.wall_time) << ',' << (r.failed ? 1 : 0);
    write_extras(r.extra);
    os << '\n';
  }

  // Medians per (sweep value, solver) in order of first appearance.
  std::vector<std::pair<double, std::string>> groups;
  std::map<std::pair<double, std::string>, std::vector<const ExperimentRecord*>> members;
  for (const auto& r : table.records) {
    auto key = std::make_pair(r.sweep_value, r.solver_id);
    auto [it, inserted] = members.try_emplace(key);
    if (inserted) groups.push_back(key);
    it->second.push_back(&r);
  }
  for (const auto& key : groups) {
    const auto& rs = members[key];
    auto column = [&](auto get) {
      std::vector<double> v;
      for (const auto* r : rs)
        if (!r->failed) v.push_back(get(*r));
      return median(std::move(v));
    };
    double failed = 0.0;
    for (const auto* r : rs) failed += r->failed ? 1.0 : 0.0;
    os << format_number(key.first) << ',' << key.second << ",median,"
       << format_number(column([](const auto& r) { return r.position_error; })) << ','
       << format_number(column([](const auto& r) { return r.orientation_error; })) << ','
       << format_number(column([](const auto& r) { return r.w_error; })) << ','
       << format_number(column([](const auto& r) { return r.t_error; })) << ','
       << format_number(column([](const auto& r) { return r.algebraic_residual; })) << ','
       << format_number(column([](const auto& r) { return static_cast<double>(r.iterations); }))
       << ',' << format_number(column([](const auto& r) { return r.wall_time; })) << ','
       << format_number(failed / static_cast<double>(rs.size()));
    std::vector<double> extra_medians;
    for (std::size_t k = 0; k < table.extra_columns.size(); ++k)
      extra_medians.push_back(column([k](const auto& r) { return k < r.extra.size() ? r.extra[k] : kNaN; }));
    write_extras(extra_medians);
    os << '\n';
  }
}

}  // namespace linrs
