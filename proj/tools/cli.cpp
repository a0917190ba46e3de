#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "linrs/correspondence_io.hpp"
#include "linrs/ransac.hpp"
#include "linrs/synthbench.hpp"

namespace linrs::cli {
namespace {

// Ordered key=value report; --json prints the same pairs as an object.
class Report {
 public:
  void add(const std::string& key, const std::string& value) { items_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, format_number(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

  template <typename Derived>
  void add(const std::string& key, const Eigen::MatrixBase<Derived>& m) {
    std::string s;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (!s.empty()) s += ',';
        s += format_number(m(i, j));
      }
    add(key, s);
  }

  void print(std::ostream& os, bool json) const {
    if (!json) {
      for (const auto& [k, v] : items_) os << k << '=' << v << '\n';
      return;
    }
    nlohmann::ordered_json j;
    for (const auto& [k, v] : items_) j[k] = v;
    os << j.dump(2) << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

void describe(Report& report, const Estimate& est) {
  if (const auto* rs = std::get_if<RsPoseSolution>(&est)) {
    report.add("v", rs->model.orientation);
    report.add("C", rs->model.translation);
    report.add("w", rs->model.angular_velocity);
    report.add("t", rs->model.linear_velocity);
    report.add("r0", rs->model.reference_row);
    report.add("R0", rs->base_rotation);
    report.add("iterations", rs->iterations_used);
    report.add("converged", rs->converged);
  } else if (const auto* nine = std::get_if<R9pSolution>(&est)) {
    report.add("v", nine->orientation);
    report.add("C", nine->translation);
    report.add("t", nine->linear_velocity);
    report.add("R_RS", nine->motion_matrix);
    report.add("r0", nine->reference_row);
    report.add("R0", nine->base_rotation);
    report.add("iterations", 1);
  } else {
    const auto& p = std::get<PoseCandidate>(est);
    report.add("R", p.rotation);
    report.add("C", p.translation);
    report.add("iterations", 1);
  }
}

double reprojection_rms(const RowAffinePose& pose, std::span<const Correspondence> corrs) {
  double sum = 0.0;
  for (const auto& c : corrs) {
    const double e = reprojection_error(pose, c);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(corrs.size()));
}

struct InputOptions {
  std::string solver = "r6p-vfix";
  std::string input;
  std::optional<double> r0;
  int max_iters = 5;
  bool prerotate = false;
  bool json = false;
};

void add_input_options(CLI::App& cmd, InputOptions& o) {
  cmd.add_option("--solver", o.solver, "p3p, r6p-vc-wt, r6p-vct-w, r6p-vct-wt, r6p-vfix or r9p")
      ->capture_default_str();
  cmd.add_option("--input", o.input, "correspondence file (X Y Z r c per line)")->required();
  cmd.add_option("--r0", o.r0, "reference row; overrides the file header");
  cmd.add_option("--max-iters", o.max_iters, "iteration cap for the R6P solvers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--prerotate-p3p", o.prerotate, "pre-rotate the scene by the best P3P pose");
  cmd.add_flag("--json", o.json, "print the report as JSON");
}

// Loads the file and resolves the solver; returns an exit code on failure.
std::optional<int> load(const InputOptions& o, CorrespondenceFile& file, SolverId& solver,
                        EstimatorOptions& opts, std::ostream& err) {
  const auto id = parse_solver_id(o.solver);
  if (!id) {
    err << "error: unknown solver '" << o.solver << "'\n";
    return kParseError;
  }
  solver = *id;
  try {
    file = read_correspondences_file(o.input);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::ios_base::failure& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
  opts.solver.max_iterations = o.max_iters;
  opts.solver.reference_row = o.r0.value_or(file.reference_row.value_or(0.0));
  opts.prerotate_with_p3p = o.prerotate;
  return std::nullopt;
}

int cmd_solve(const InputOptions& o, std::ostream& out, std::ostream& err) {
  CorrespondenceFile file;
  SolverId solver{};
  EstimatorOptions opts;
  if (auto code = load(o, file, solver, opts, err)) return *code;
  const auto& corrs = file.correspondences;

  Estimate est;
  try {
    if (static_cast<int>(corrs.size()) < sample_size(solver)) {
      throw Error(ErrorCode::kTooFewPoints, std::string(to_string(solver)) + " needs " +
                                                std::to_string(sample_size(solver)) +
                                                " correspondences, file has " +
                                                std::to_string(corrs.size()));
    }
    est = estimate(solver, corrs, opts).front();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }

  const RowAffinePose pose = pose_of(est);
  Report report;
  report.add("solver", std::string(to_string(solver)));
  report.add("points", static_cast<int>(corrs.size()));
  describe(report, est);
  report.add("residual", algebraic_residual(pose, corrs));
  report.add("reprojection_rms", reprojection_rms(pose, corrs));
  report.print(out, o.json);
  return kOk;
}

struct RansacOptions {
  int iters = 1000;
  double threshold = 2.0;
  std::optional<int> rows_per_frame;
  double fov = 45.0;
  std::uint64_t seed = 0;
  std::string mask_out;
  bool refit = false;
};

int cmd_ransac(const InputOptions& o, const RansacOptions& r, std::ostream& out,
               std::ostream& err) {
  CorrespondenceFile file;
  SolverId solver{};
  EstimatorOptions opts;
  if (auto code = load(o, file, solver, opts, err)) return *code;
  const auto& corrs = file.correspondences;

  FrameGeometry frame;
  frame.fov_degrees = r.fov;
  frame.rows_per_frame = r.rows_per_frame.value_or(file.rows_per_frame.value_or(720));

  RansacConfig cfg;
  cfg.iterations = r.iters;
  cfg.threshold = r.threshold;
  cfg.pixels_per_unit = frame.pixels_per_unit();
  cfg.seed = r.seed;
  cfg.estimator = opts;
  cfg.refit_on_inliers = r.refit;

  RansacResult res;
  try {
    res = ransac(corrs, solver, cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }

  const std::string mask_path = r.mask_out.empty() ? o.input + ".mask" : r.mask_out;
  {
    std::ofstream mask(mask_path);
    if (!mask) {
      err << "i/o error: cannot write '" << mask_path << "'\n";
      return kIoError;
    }
    for (bool in : res.inlier_mask) mask << (in ? 1 : 0) << '\n';
    if (!mask) {
      err << "i/o error: failed writing '" << mask_path << "'\n";
      return kIoError;
    }
  }

  const RowAffinePose pose = pose_of(res.best_model);
  std::vector<Correspondence> inliers;
  for (std::size_t i = 0; i < corrs.size(); ++i)
    if (res.inlier_mask[i]) inliers.push_back(corrs[i]);

  Report report;
  report.add("solver", std::string(to_string(solver)));
  report.add("points", static_cast<int>(corrs.size()));
  describe(report, res.best_model);
  report.add("inliers", res.inlier_count);
  report.add("mean_inlier_error_px", res.mean_inlier_error);
  report.add("residual", inliers.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : algebraic_residual(pose, inliers));
  report.add("failed_samples", res.failed_samples);
  report.add("seed", std::to_string(r.seed));
  report.add("mask_file", mask_path);
  report.print(out, o.json);
  return kOk;
}

struct BenchOptions {
  std::string experiment;
  int trials = 500;
  int sweep_points = 7;
  std::uint64_t seed = 1;
  std::string out;
  std::optional<double> noise;
  bool timing = false;
  int ransac_iters = 1000;
};

int cmd_bench(const BenchOptions& b, std::ostream& out, std::ostream& err) {
  const auto kind = parse_experiment_kind(b.experiment);
  if (!kind) {
    err << "error: unknown experiment '" << b.experiment << "'\n";
    return kParseError;
  }
  namespace fs = std::filesystem;
  if (b.out.empty()) {
    err << "i/o error: empty output path\n";
    return kIoError;
  }
  const fs::path path(b.out);
  if (path.has_parent_path() && !fs::is_directory(path.parent_path())) {
    err << "i/o error: output directory '" << path.parent_path().string() << "' does not exist\n";
    return kIoError;
  }

  ExperimentConfig cfg;
  cfg.kind = *kind;
  cfg.trials = b.trials;
  cfg.sweep_points = b.sweep_points;
  cfg.seed = b.seed;
  cfg.noise_pixels = b.noise.value_or(-1.0);
  cfg.measure_time = b.timing;
  cfg.ransac_iterations = b.ransac_iters;
  const ExperimentTable table = run_experiment(cfg);

  std::ofstream file(path, std::ios::binary);
  if (!file) {
    err << "i/o error: cannot write '" << b.out << "'\n";
    return kIoError;
  }
  write_csv(file, table);
  file.flush();
  if (!file) {
    err << "i/o error: failed writing '" << b.out << "'\n";
    return kIoError;
  }
  out << "experiment=" << b.experiment << '\n'
      << "records=" << table.records.size() << '\n'
      << "out=" << b.out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear rolling-shutter absolute pose solvers", "linrs"};
  app.require_subcommand(1);

  InputOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "estimate a pose from a correspondence file");
  add_input_options(*solve, solve_opts);

  InputOptions ransac_opts;
  RansacOptions ransac_extra;
  auto* rs = app.add_subcommand("ransac", "robust estimation with RANSAC");
  add_input_options(*rs, ransac_opts);
  rs->add_option("--iters", ransac_extra.iters, "RANSAC iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rs->add_option("--threshold", ransac_extra.threshold, "inlier threshold in pixels")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rs->add_option("--rows-per-frame", ransac_extra.rows_per_frame,
                 "pixels per frame height; overrides the file header (default 720)");
  rs->add_option("--fov", ransac_extra.fov, "field of view in degrees spanned by the frame")
      ->capture_default_str();
  rs->add_option("--seed", ransac_extra.seed, "sampling seed")->capture_default_str();
  rs->add_option("--mask-out", ransac_extra.mask_out, "inlier mask file (default <input>.mask)");
  rs->add_flag("--refit", ransac_extra.refit, "re-estimate on the inliers of the best model");

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "run a synthetic experiment and write CSV");
  bench->add_option("--experiment", bench_opts.experiment,
                    "motion-sweep, noise-sweep, translation-only, convergence, "
                    "linearization-offset, p3p-init or ransac-outliers")
      ->required();
  bench->add_option("--trials", bench_opts.trials, "trials per sweep point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--sweep-points", bench_opts.sweep_points, "number of sweep values")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_opts.seed, "experiment seed")->capture_default_str();
  bench->add_option("--out", bench_opts.out, "CSV output path")->required();
  bench->add_option("--noise", bench_opts.noise, "image noise sigma in pixels");
  bench->add_option("--ransac-iters", bench_opts.ransac_iters, "RANSAC iterations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_flag("--timing", bench_opts.timing, "record wall-clock time per solve");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << e.what() << '\n';
    return kParseError;
  }

  if (*solve) return cmd_solve(solve_opts, out, err);
  if (*rs) return cmd_ransac(ransac_opts, ransac_extra, out, err);
  return cmd_bench(bench_opts, out, err);
}

}  // namespace linrs::cli
