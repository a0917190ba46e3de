#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "linrs/estimator.hpp"

namespace linrs {

struct RansacConfig {
  int iterations = 1000;
  /// Inlier threshold in pixels.
  double threshold = 2.0;
  /// Conversion from image units to pixels for the threshold test.
  double pixels_per_unit = 1.0;
  /// 0 selects the solver's minimal sample size.
  int sample_size = 0;
  std::uint64_t seed = 0;
  EstimatorOptions estimator;
  /// Re-estimate on the winning inlier set and keep it if it scores no worse.
  bool refit_on_inliers = false;
};

struct InlierCount {
  int count = 0;
  std::vector<bool> mask;
  std::vector<double> errors;  // pixels; +infinity when unprojectable
};

InlierCount count_inliers(const RowAffinePose& pose, std::span<const Correspondence> corrs,
                          double threshold, double pixels_per_unit = 1.0);

struct RansacResult {
  Estimate best_model;
  std::vector<bool> inlier_mask;
  int inlier_count = 0;
  std::vector<double> errors;
  double mean_inlier_error = 0.0;

  int hypotheses_evaluated = 0;
  /// Samples whose solver threw (degenerate, behind camera, ...).
  int failed_samples = 0;
  /// Best inlier count after each sample, in sampling order.
  std::vector<int> best_count_history;
};

/// Indices of the sample drawn for hypothesis `index`; depends only on
/// (seed, index) so any evaluation order reproduces the same samples.
std::vector<int> ransac_sample(std::uint64_t seed, int index, int population, int sample_size);

RansacResult ransac(std::span<const Correspondence> corrs, SolverId solver,
                    const RansacConfig& cfg = {});

}  // namespace linrs
