#include "linrs/estimator.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace linrs {
namespace {

constexpr std::array<std::pair<SolverId, std::string_view>, 6> kNames{{
    {SolverId::kP3p, "p3p"},
    {SolverId::kR6pVcWt, "r6p-vc-wt"},
    {SolverId::kR6pVctW, "r6p-vct-w"},
    {SolverId::kR6pVctWt, "r6p-vct-wt"},
    {SolverId::kR6pFixedV, "r6p-vfix"},
    {SolverId::kR9p, "r9p"},
}};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(SolverId id) {
  for (const auto& [value, name] : kNames)
    if (value == id) return name;
  return "unknown";
}

std::optional<SolverId> parse_solver_id(std::string_view name) {
  for (const auto& [value, n] : kNames)
    if (n == name) return value;
  return std::nullopt;
}

int sample_size(SolverId id) {
  switch (id) {
    case SolverId::kP3p: return 3;
    case SolverId::kR9p: return 9;
    default: return 6;
  }
}

std::optional<R6pVariant> r6p_variant(SolverId id) {
  switch (id) {
    case SolverId::kR6pVcWt: return R6pVariant::kVcWt;
    case SolverId::kR6pVctW: return R6pVariant::kVctW;
    case SolverId::kR6pVctWt: return R6pVariant::kVctWt;
    case SolverId::kR6pFixedV: return R6pVariant::kFixedV;
    default: return std::nullopt;
  }
}

RowAffinePose pose_of(const Estimate& estimate) {
  return std::visit([](const auto& e) { return e.pose(); }, estimate);
}

Mat3 rotation_of(const Estimate& estimate) {
  return std::visit(Overloaded{[](const PoseCandidate& p) { return p.rotation; },
                               [](const auto& e) { return e.rotation(); }},
                    estimate);
}

std::vector<Estimate> estimate(SolverId id, std::span<const Correspondence> corrs,
                               const EstimatorOptions& opts) {
  std::vector<Estimate> out;
  if (id == SolverId::kP3p) {
    if (corrs.size() < 3) throw Error(ErrorCode::kTooFewPoints, "P3P needs three correspondences");
    if (corrs.size() == 3) {
      for (const auto& cand : p3p(corrs)) out.emplace_back(cand);
    } else if (corrs.size() >= 6) {
      out.emplace_back(p3p_best(corrs.first(6), corrs));
    } else {
      PoseCandidate best;
      double best_score = std::numeric_limits<double>::infinity();
      for (const auto& cand : p3p(corrs.first(3))) {
        double score = 0.0;
        for (const auto& c : corrs) score += reprojection_error(cand.pose(), c);
        if (score < best_score) best = cand, best_score = score;
      }
      if (!std::isfinite(best_score)) {
        throw Error(ErrorCode::kDegenerateConfiguration, "P3P produced no valid pose");
      }
      out.emplace_back(best);
    }
    return out;
  }
  if (id == SolverId::kR9p) {
    out.emplace_back(opts.prerotate_with_p3p ? r9p_with_p3p_init(corrs, opts.solver)
                                             : r9p(corrs, opts.solver));
    return out;
  }
  const R6pVariant variant = *r6p_variant(id);
  out.emplace_back(opts.prerotate_with_p3p ? r6p_with_p3p_init(variant, corrs, opts.solver)
                                           : r6p_iterative(variant, corrs, opts.solver));
  return out;
}

}  // namespace linrs
