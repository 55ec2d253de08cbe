#pragma once

// Shared pullback machinery for the cocycle and its dual. The j-th factor
// (j = 1 adjacent to the anchor) is B_{anchor-j} on the primal side and
// B_{anchor+j-1}^T on the dual side.

#include <cstdint>
#include <optional>

#include "floquet/principal.hpp"

namespace floquet::detail {

enum class Side { primal, dual };

Matrix pullback_factor(const StepView& view, std::int64_t anchor, Side side, int j);
std::int64_t factor_index(std::int64_t anchor, Side side, int j);
const Vector& side_focus(const StepView& view, Side side);

/// fixed_depth == 0 selects the adaptive stopping rule.
PrincipalVector run_pullback(const StepView& view, std::int64_t anchor, Side side, int fixed_depth,
                             const PullbackOptions& options, const std::optional<Vector>& start);

double certificate(const StepView& view, std::int64_t anchor, Side side, int depth);

/// One replicate of the Birkhoff average along the primal trajectory
/// (forward in time) or the dual trajectory (backward in time).
ReplicateResult run_trajectory(const CocycleModel& model, std::uint64_t seed, const LyapunovOptions& options,
                               Side side);

LyapunovResult run_replicates(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                              const LyapunovOptions& options, Side side);

}  // namespace floquet::detail
