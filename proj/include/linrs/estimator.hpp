#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "linrs/solvers.hpp"

namespace linrs {

enum class SolverId { kP3p, kR6pVcWt, kR6pVctW, kR6pVctWt, kR6pFixedV, kR9p };

std::string_view to_string(SolverId id);
std::optional<SolverId> parse_solver_id(std::string_view name);

/// Minimal sample size: 3 for P3P, 6 for the R6P family, 9 for R9P.
int sample_size(SolverId id);
std::optional<R6pVariant> r6p_variant(SolverId id);

using Estimate = std::variant<RsPoseSolution, R9pSolution, PoseCandidate>;

RowAffinePose pose_of(const Estimate& estimate);
Mat3 rotation_of(const Estimate& estimate);

struct EstimatorOptions {
  SolverConfig solver;
  /// Pre-rotate the scene by the best P3P pose of the first six points
  /// before running an RS solver.
  bool prerotate_with_p3p = false;
};

/// Runs one solver on `corrs`. P3P with exactly three points returns every
/// candidate; with six points it returns the best-triplet pose. The RS
/// solvers always return exactly one estimate.
std::vector<Estimate> estimate(SolverId id, std::span<const Correspondence> corrs,
                               const EstimatorOptions& opts = {});

}  // namespace linrs
