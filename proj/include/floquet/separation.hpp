#pragma once

// Generalized exponential separation: the dual principal covector w*, the
// projection onto F~_1 = ker <., w*> along span{w}, the second exponent, and the
// independent QR estimator of the top Lyapunov exponents used to cross-check
// them.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "floquet/cocycle.hpp"
#include "floquet/principal.hpp"
#include "floquet/stats.hpp"

namespace floquet {

/// w* at skeleton index `anchor`, pulled back along the dual cocycle. The dual
/// cocycle runs backward in time, so this consumes B_anchor, B_{anchor+1}, ...
PrincipalVector dual_principal(const StepView& view, std::int64_t anchor, int depth,
                               const PullbackOptions& options = {},
                               const std::optional<Vector>& start = std::nullopt);

PrincipalVector dual_adaptive(const StepView& view, std::int64_t anchor, const PullbackOptions& options = {},
                              const std::optional<Vector>& start = std::nullopt);

/// Data needed to apply P~(theta_k omega) u = u - <u, w*> / <w, w*> w.
struct ProjectionRecord {
  std::int64_t index = 0;
  Vector w;
  Vector w_star;
  double pairing = 0;  // <w, w*>

  Matrix matrix() const;
  double norm(NormKind kind) const;
};

/// Throws DegeneratePairing when <w, w*> <= tolerance.
ProjectionRecord make_projection(std::int64_t index, Vector w, Vector w_star, double tolerance = 1e-12);

Vector principal_projection(const ProjectionRecord& record, const Vector& u);

struct PrincipalPair {
  Vector w;
  Vector w_star;
  double pairing = 0;
  Estimate lambda1;
  Estimate lambda2;
  Estimate sigma;
};

struct SeparationPoint {
  std::int64_t n = 0;
  double g = 0;  // ln |U_omega(n) P~(omega)|
};

struct SeparationReplicate {
  std::uint64_t seed = 0;
  double lambda1 = 0;
  double lambda2 = 0;
  double lambda2_fit_se = 0;
  std::vector<double> lambda1_batches;
  ProjectionRecord anchor;
  std::vector<SeparationPoint> trace;
};

struct SeparationResult {
  PrincipalPair pair;  // w, w* of the first replicate at index 0
  std::vector<SeparationReplicate> replicates;
  bool zero_separation = false;
};

/// lambda1 by Birkhoff averaging and lambda2 as the least-squares slope of
/// g_n = ln |U_omega(n) P~(omega)| over the last half of the geometric horizons.
SeparationResult second_exponent(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                                 const LyapunovOptions& options);

/// The same growth, measured on an orthonormal basis of F~_1 instead of through
/// the projection; l2 only. Used to cross-check the surrogate.
std::vector<SeparationPoint> restricted_growth(const CocycleModel& model, std::uint64_t seed,
                                               std::int64_t horizon, const PullbackOptions& options = {},
                                               int period = 1);

struct QrReplicate {
  std::uint64_t seed = 0;
  std::vector<double> exponents;
  std::vector<std::vector<double>> batch_means;  // per exponent
  std::int64_t skipped = 0;
  Matrix frame;  // orthonormal frame after the last step
};

/// Discrete QR method on the raw samples A_k .. A_{k+horizon-1}.
QrReplicate qr_oseledets_oracle(const CocycleModel& model, OmegaPath& path, std::int64_t k, std::int64_t horizon,
                                int count, std::int64_t burn_in = 0, int batches = 32);

struct QrResult {
  std::vector<Estimate> exponents;
  std::vector<QrReplicate> replicates;
  std::int64_t skipped = 0;
};

QrResult qr_exponents(const CocycleModel& model, std::span<const std::uint64_t> seeds, std::int64_t horizon,
                      int count, int workers = 1, std::optional<std::int64_t> burn_in = std::nullopt,
                      int batches = 32);

struct TemperedCheck {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  double rate = 0;  // (1/n) ln |P~(theta_n omega)|
};

struct TemperedTraceRow {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  double ln_pairing = 0;
  double ln_projection_norm = 0;
};

struct TemperednessReport {
  bool verdict = true;
  double epsilon = 0.01;
  std::vector<TemperedCheck> checks;
  std::vector<TemperedTraceRow> trace;
  double trend_slope = 0;  // mean over seeds of the fitted slope of ln |P~| against n
};

TemperednessReport temperedness_check(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                                      const LyapunovOptions& options, double epsilon = 0.01,
                                      std::size_t trace_points = 200);

/// Empirical inf of |P u| / |u - P u| over cone probes, where P projects onto
/// span(frame) along span{top}. Probes are the given samples, the extreme rays,
/// and the normalized positive parts of +-top.
double cone_alignment_defect(const Matrix& frame, const Vector& top, std::span<const Vector> samples,
                             NormKind kind = NormKind::ell2);

/// `count` unit vectors drawn uniformly from the simplex, rescaled to unit norm.
std::vector<Vector> sample_unit_cone(int n, std::size_t count, std::uint64_t seed, NormKind kind);

struct CompareResult {
  LyapunovResult low;
  LyapunovResult high;
  Estimate gap;  // per-replicate lambda_high - lambda_low
  double combined_se = 0;
  bool ordered = false;  // lambda_low <= lambda_high + 3 combined_se
};

/// Coupled comparison of two models driven by the same seeds. Throws
/// DominationViolation if some sample of `low` is not entrywise <= `high`.
CompareResult compare_exponents(const CocycleModel& low, const CocycleModel& high,
                                std::span<const std::uint64_t> seeds, const LyapunovOptions& options);

/// Top exponent of the dual cocycle.
LyapunovResult lyapunov_top_dual(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                                 const LyapunovOptions& options);

struct DualityResult {
  LyapunovResult primal;
  LyapunovResult dual;
  double gap = 0;
  double combined_se = 0;
  bool consistent = false;  // gap <= 3 combined_se (+ rounding floor)
};

DualityResult duality_check(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                            const LyapunovOptions& options);

/// Horizons 1, 2, 4, ... below `horizon`, then `horizon` itself.
std::vector<std::int64_t> geometric_horizons(std::int64_t horizon);

}  // namespace floquet
