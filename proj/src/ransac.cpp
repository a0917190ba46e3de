#include "linrs/ransac.hpp"

#include <limits>
#include <numeric>

#include "linrs/random.hpp"

namespace linrs {

InlierCount count_inliers(const RowAffinePose& pose, std::span<const Correspondence> corrs,
                          double threshold, double pixels_per_unit) {
  if (!(threshold > 0.0)) throw std::invalid_argument("inlier threshold must be positive");
  InlierCount out;
  out.mask.resize(corrs.size());
  out.errors.resize(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    out.errors[i] = reprojection_error(pose, corrs[i], pixels_per_unit);
    out.mask[i] = out.errors[i] <= threshold;
    out.count += out.mask[i] ? 1 : 0;
  }
  return out;
}

std::vector<int> ransac_sample(std::uint64_t seed, int index, int population, int sample_size) {
  auto rng = make_stream(seed, static_cast<std::uint64_t>(index));
  std::vector<int> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < sample_size; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(sample_size);
  return pool;
}

namespace {

struct Scored {
  InlierCount inliers;
  double mean_error = std::numeric_limits<double>::infinity();
};

Scored score(const Estimate& model, std::span<const Correspondence> corrs,
             const RansacConfig& cfg) {
  Scored s;
  s.inliers = count_inliers(pose_of(model), corrs, cfg.threshold, cfg.pixels_per_unit);
  if (s.inliers.count > 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < corrs.size(); ++i)
      if (s.inliers.mask[i]) sum += s.inliers.errors[i];
    s.mean_error = sum / s.inliers.count;
  }
  return s;
}

bool better(const Scored& a, const Scored& b) {
  if (a.inliers.count != b.inliers.count) return a.inliers.count > b.inliers.count;
  return a.mean_error < b.mean_error;
}

}  // namespace

RansacResult ransac(std::span<const Correspondence> corrs, SolverId solver,
                    const RansacConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("RANSAC needs at least one iteration");
  const int k = cfg.sample_size > 0 ? cfg.sample_size : sample_size(solver);
  const int n = static_cast<int>(corrs.size());
  if (n < k) {
    throw Error(ErrorCode::kTooFewPoints, "RANSAC sample of " + std::to_string(k) +
                                              " from " + std::to_string(n) + " correspondences");
  }

  RansacResult result;
  std::optional<Estimate> best_model;
  Scored best;
  std::vector<Correspondence> sample(k);
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto idx = ransac_sample(cfg.seed, it, n, k);
    for (int j = 0; j < k; ++j) sample[j] = corrs[idx[j]];
    std::vector<Estimate> hypotheses;
    try {
      hypotheses = estimate(solver, sample, cfg.estimator);
    } catch (const Error&) {
      ++result.failed_samples;
    }
    for (const auto& h : hypotheses) {
      ++result.hypotheses_evaluated;
      Scored s = score(h, corrs, cfg);
      if (!best_model || better(s, best)) {
        best_model = h;
        best = std::move(s);
      }
    }
    result.best_count_history.push_back(best_model ? best.inliers.count : 0);
  }
  if (!best_model) throw Error(ErrorCode::kNoValidHypothesis, "every RANSAC sample failed");

  if (cfg.refit_on_inliers && best.inliers.count >= k) {
    std::vector<Correspondence> inliers;
    for (int i = 0; i < n; ++i)
      if (best.inliers.mask[i]) inliers.push_back(corrs[i]);
    try {
      const auto refit = estimate(solver, inliers, cfg.estimator);
      for (const auto& h : refit) {
        Scored s = score(h, corrs, cfg);
        if (s.inliers.count >= best.inliers.count) {
          best_model = h;
          best = std::move(s);
        }
      }
    } catch (const Error&) {
    }
  }

  result.best_model = *best_model;
  result.inlier_mask = std::move(best.inliers.mask);
  result.inlier_count = best.inliers.count;
  result.errors = std::move(best.inliers.errors);
  result.mean_inlier_error = best.mean_error;
  return result;
}

}  // namespace linrs
