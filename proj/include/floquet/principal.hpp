#pragma once

// The generalized principal Floquet vector w(omega) by pullback, its forward
// propagation, the growth log ln rho_1 along a trajectory, the top exponent
// estimator and entire positive orbits.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "floquet/cocycle.hpp"
#include "floquet/stats.hpp"

namespace floquet {

struct PullbackOptions {
  double tolerance = 1e-12;
  int depth_cap = 1 << 14;
  /// When false, samples that are not strictly positive are tolerated: the
  /// result carries no certificate and the depth is chosen by the size of the
  /// last increment instead.
  bool require_focusing = true;
};

/// w at skeleton index `anchor`: the normalized image of the start vector under
/// the `depth` samples preceding the anchor.
struct PrincipalVector {
  std::int64_t anchor = 0;
  Vector w;
  int depth = 0;
  /// Norm bound on the distance to the limit; +inf when uncertified.
  double error_bound = std::numeric_limits<double>::infinity();
  bool certified = false;
  bool cap_hit = false;
};

/// Fixed-depth pullback (depth >= 2). Throws FocusingViolation on a sample that is
/// not strictly positive unless options.require_focusing is false.
PrincipalVector pullback_principal(const StepView& view, std::int64_t anchor, int depth,
                                   const PullbackOptions& options = {},
                                   const std::optional<Vector>& start = std::nullopt);

/// Pullback whose depth grows until the certificate drops below the tolerance or
/// the depth cap is reached (reported through cap_hit).
PrincipalVector pullback_adaptive(const StepView& view, std::int64_t anchor, const PullbackOptions& options = {},
                                  const std::optional<Vector>& start = std::nullopt);

/// Certificate for a depth-`depth` pullback at `anchor`: the minimum over
/// n in [2, depth] of 6 kappa(B_{a-1})^2 ln kappa(B_{a-n}) prod_{i=a-n+1}^{a-1} q(B_i).
double pullback_certificate(const StepView& view, std::int64_t anchor, int depth);

/// Increments |w_{d+1} - w_d| of the pullback sequence at `anchor` for
/// d = 1 .. max_depth - 1, together with the contraction ratio q of every
/// sample consumed (q[d-1] belongs to B_{anchor-d}).
struct PullbackTrace {
  std::vector<double> increments;
  std::vector<double> ratios;
};
PullbackTrace pullback_trace(const StepView& view, std::int64_t anchor, int max_depth);

/// Pushes w forward t skeleton steps: U(t) w / |U(t) w|.
PrincipalVector forward_normalize(const StepView& view, const PrincipalVector& w, std::int64_t t);

/// ln rho_1 along a forward-normalized trajectory.
struct GrowthLog {
  std::int64_t first = 0;
  std::vector<double> ln_rho;      // ln rho_1(theta_{first+i} omega)
  std::vector<double> cumulative;  // partial sums, cumulative[0] = 0

  /// ln rho_t(theta_k omega) = ln |U_{theta_k omega}(t) w(theta_k omega)|.
  double ln_rho_t(std::int64_t k, std::int64_t t) const;
};

GrowthLog growth_log(const StepView& view, const PrincipalVector& start, std::int64_t steps);

struct LyapunovOptions {
  std::int64_t horizon = 100000;
  std::optional<std::int64_t> burn_in;  // defaults to horizon / 10
  int batches = 32;
  int period = 1;
  int workers = 1;
  PullbackOptions pullback;
  std::size_t trace_points = 0;  // growth-trace rows kept per replicate

  std::int64_t effective_burn_in() const { return burn_in.value_or(horizon / 10); }
};

struct TraceRow {
  std::int64_t step = 0;
  double ln_rho = 0;
  double cumulative = 0;
  double certificate = 0;
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  double value = 0;  // exponent per raw time step
  std::vector<double> batch_means;
  PrincipalVector initial;
  std::vector<TraceRow> trace;
};

struct LyapunovResult {
  Estimate estimate;
  std::vector<ReplicateResult> replicates;  // sorted by seed
};

/// Birkhoff average of ln rho_1 after a pullback-initialized w, per seed.
LyapunovResult lyapunov_top(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                            const LyapunovOptions& options);

struct OrbitPoint {
  std::int64_t index = 0;
  Vector direction;  // unit vector w at this index
  double log_scale = 0;  // the orbit value is direction * exp(log_scale)
};

/// Entire positive orbit through `anchor`, normalized so that |v(anchor)| = 1,
/// on the skeleton indices [anchor - backward, anchor + forward].
std::vector<OrbitPoint> entire_orbit(const StepView& view, std::int64_t anchor, std::int64_t backward,
                                     std::int64_t forward, const PullbackOptions& options = {},
                                     const std::optional<Vector>& start = std::nullopt);

}  // namespace floquet
