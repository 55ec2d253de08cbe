#include "floquet/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "floquet/detail/pullback.hpp"
#include "floquet/errors.hpp"
#include "floquet/focusing.hpp"
#include "floquet/parallel.hpp"

namespace floquet {

using detail::Side;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sliding window of samples B_j and dual covectors w*_j for ascending j. Each
// window of length L is filled backward from a fresh dual pullback at its right
// end, so every w*_j carries that pullback's certificate.
class DualWindow {
 public:
  DualWindow(const StepView& view, const PullbackOptions& options, std::int64_t length = 4096)
      : view_(view), options_(options), length_(length) {}

  const Matrix& matrix(std::int64_t j) {
    ensure(j);
    return matrices_[static_cast<std::size_t>(j - start_)];
  }

  // Valid for j in [start, start + L] of the window holding j or j - 1.
  const Vector& covector(std::int64_t j) {
    if (!loaded_ || j < start_ || j > start_ + length_) ensure(j);
    return covectors_[static_cast<std::size_t>(j - start_)];
  }

 private:
  void ensure(std::int64_t j) {
    if (loaded_ && j >= start_ && j < start_ + length_) return;
    start_ = j;
    loaded_ = true;
    const std::int64_t anchor = start_ + length_;
    matrices_.resize(static_cast<std::size_t>(length_));
    covectors_.resize(static_cast<std::size_t>(length_ + 1));
    for (std::int64_t i = 0; i < length_; ++i) matrices_[static_cast<std::size_t>(i)] = view_(start_ + i);
    covectors_.back() = detail::run_pullback(view_, anchor, Side::dual, 0, options_, std::nullopt).w;
    for (std::int64_t i = length_ - 1; i >= 0; --i) {
      const auto s = static_cast<std::size_t>(i);
      covectors_[s] = normalized((matrices_[s].transpose() * covectors_[s + 1]).eval(), view_.norm_kind());
    }
  }

  const StepView& view_;
  PullbackOptions options_;
  std::int64_t length_;
  std::int64_t start_ = 0;
  bool loaded_ = false;
  std::vector<Matrix> matrices_;
  std::vector<Vector> covectors_;
};

double rescale(Matrix& x) {
  const double largest = x.cwiseAbs().maxCoeff();
  if (!(largest > 0) || !std::isfinite(largest)) return 0;
  x /= largest;
  return std::log(largest);
}

void reproject(Matrix& x, const Vector& w, const Vector& w_star, double tolerance = 1e-12) {
  const double pairing = w.dot(w_star);
  if (!(pairing > tolerance)) throw DegeneratePairing("pairing <w, w*> vanished along the trajectory");
  x -= w * (w_star.transpose() * x) / pairing;
}

double log_norm(const Matrix& x, NormKind kind) {
  const double value = operator_norm(x, kind);
  return value > 0 ? std::log(value) : -kInf;
}

std::vector<std::uint64_t> sorted_seeds(std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("no seeds given");
  std::vector<std::uint64_t> out(seeds.begin(), seeds.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Least-squares slope over the last half of the trace; -inf if the growth hit zero.
LineFit tail_slope(const std::vector<SeparationPoint>& trace) {
  const std::size_t first = trace.size() >= 4 ? trace.size() / 2 : 0;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = first; i < trace.size(); ++i) {
    if (!std::isfinite(trace[i].g)) return {-kInf, 0, 0};
    xs.push_back(static_cast<double>(trace[i].n));
    ys.push_back(trace[i].g);
  }
  return fit_line(xs, ys);
}

SeparationReplicate run_separation(const CocycleModel& model, std::uint64_t seed, const LyapunovOptions& options) {
  const std::int64_t horizon = options.horizon;
  const std::int64_t burn_in = options.effective_burn_in();
  if (horizon < 2 || horizon < burn_in + 1) throw DomainError("second_exponent: horizon too short");

  OmegaPath path(seed);
  const StepView view(model, path, options.period);
  const NormKind kind = model.norm_kind();
  const PrincipalVector start = pullback_adaptive(view, 0, options.pullback);
  DualWindow dual(view, options.pullback);

  SeparationReplicate out;
  out.seed = seed;
  out.anchor = make_projection(0, start.w, dual.covector(0));

  Vector w = start.w;
  Matrix x = out.anchor.matrix();
  double log_scale = rescale(x);
  BatchMeans batches(static_cast<std::size_t>(horizon - burn_in), options.batches);
  const std::vector<std::int64_t> horizons = geometric_horizons(horizon);
  std::size_t next = 0;
  for (std::int64_t j = 0; j < horizon; ++j) {
    const Matrix& b = dual.matrix(j);
    if (options.pullback.require_focusing && !strictly_positive(b))
      throw FocusingViolation("second_exponent: sample is not strictly positive", j);
    const Vector image = b * w;
    const double rho = norm(image, kind);
    if (!(rho > 0)) throw FocusingViolation("second_exponent: trajectory left the cone", j);
    w = image / rho;
    if (j >= burn_in) batches.add(std::log(rho));

    x = b * x;
    reproject(x, w, dual.covector(j + 1));
    const double shift = rescale(x);
    log_scale += shift;
    if (next < horizons.size() && j + 1 == horizons[next]) {
      const double g = x.isZero(0) ? -kInf : log_norm(x, kind) + log_scale;
      out.trace.push_back({j + 1, g});
      ++next;
    }
  }

  const double period = options.period;
  out.lambda1 = batches.mean() / period;
  out.lambda1_batches = batches.means();
  for (double& v : out.lambda1_batches) v /= period;
  const LineFit fit = tail_slope(out.trace);
  out.lambda2 = fit.slope / period;
  out.lambda2_fit_se = fit.slope_se / period;
  return out;
}

}  // namespace

PrincipalVector dual_principal(const StepView& view, std::int64_t anchor, int depth, const PullbackOptions& options,
                               const std::optional<Vector>& start) {
  if (depth < 2) throw DomainError("dual_principal: depth must be >= 2");
  return detail::run_pullback(view, anchor, Side::dual, depth, options, start);
}

PrincipalVector dual_adaptive(const StepView& view, std::int64_t anchor, const PullbackOptions& options,
                              const std::optional<Vector>& start) {
  return detail::run_pullback(view, anchor, Side::dual, 0, options, start);
}

Matrix ProjectionRecord::matrix() const {
  const auto n = w.size();
  return Matrix::Identity(n, n) - w * w_star.transpose() / pairing;
}

double ProjectionRecord::norm(NormKind kind) const { return operator_norm(matrix(), kind); }

ProjectionRecord make_projection(std::int64_t index, Vector w, Vector w_star, double tolerance) {
  if (w.size() != w_star.size()) throw DimensionMismatch("make_projection: w and w* differ in length");
  ProjectionRecord r;
  r.index = index;
  r.pairing = w.dot(w_star);
  if (!(r.pairing > tolerance)) throw DegeneratePairing("principal pairing <w, w*> is not positive");
  r.w = std::move(w);
  r.w_star = std::move(w_star);
  return r;
}

Vector principal_projection(const ProjectionRecord& record, const Vector& u) {
  if (u.size() != record.w.size()) throw DimensionMismatch("principal_projection: length mismatch");
  if (!(record.pairing > 0)) throw DegeneratePairing("principal_projection: degenerate pairing");
  return u - (u.dot(record.w_star) / record.pairing) * record.w;
}

std::vector<std::int64_t> geometric_horizons(std::int64_t horizon) {
  std::vector<std::int64_t> out;
  for (std::int64_t h = 1; h < horizon; h *= 2) out.push_back(h);
  out.push_back(horizon);
  return out;
}

SeparationResult second_exponent(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                                 const LyapunovOptions& options) {
  const auto sorted = sorted_seeds(seeds);
  SeparationResult result;
  result.replicates.resize(sorted.size());
  parallel_for(sorted.size(), options.workers,
               [&](std::size_t i) { result.replicates[i] = run_separation(model, sorted[i], options); });

  std::vector<double> l1;
  std::vector<double> l2;
  std::vector<double> sig;
  std::vector<std::vector<double>> batches;
  for (const auto& r : result.replicates) {
    l1.push_back(r.lambda1);
    l2.push_back(r.lambda2);
    sig.push_back(r.lambda1 - r.lambda2);
    batches.push_back(r.lambda1_batches);
  }
  auto& pair = result.pair;
  pair.lambda1 = pooled_estimate(sorted, l1, batches);
  pair.lambda2 = replicate_estimate(sorted, l2, result.replicates.front().lambda2_fit_se);
  pair.sigma = replicate_estimate(
      sorted, sig, std::hypot(pair.lambda1.standard_error, pair.lambda2.standard_error));
  pair.w = result.replicates.front().anchor.w;
  pair.w_star = result.replicates.front().anchor.w_star;
  pair.pairing = result.replicates.front().anchor.pairing;
  result.zero_separation =
      std::isfinite(pair.sigma.mean) && pair.sigma.mean <= std::max(3 * pair.sigma.standard_error, 1e-9);
  return result;
}

std::vector<SeparationPoint> restricted_growth(const CocycleModel& model, std::uint64_t seed, std::int64_t horizon,
                                               const PullbackOptions& options, int period) {
  OmegaPath path(seed);
  const StepView view(model, path, period);
  const int n = model.dimension();
  const PrincipalVector start = pullback_adaptive(view, 0, options);
  DualWindow dual(view, options);

  // Orthonormal basis of ker <., w*_0>: the trailing columns of a Householder
  // basis whose first column is w*_0.
  const Vector w_star = dual.covector(0);
  const Matrix column = w_star;
  Eigen::HouseholderQR<Matrix> qr(column);
  const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  Matrix y = full.rightCols(n - 1);

  Vector w = start.w;
  double log_scale = 0;
  std::vector<SeparationPoint> trace;
  const auto horizons = geometric_horizons(horizon);
  std::size_t next = 0;
  for (std::int64_t j = 0; j < horizon; ++j) {
    const Matrix& b = dual.matrix(j);
    w = normalized((b * w).eval(), model.norm_kind());
    y = b * y;
    reproject(y, w, dual.covector(j + 1));
    log_scale += rescale(y);
    if (next < horizons.size() && j + 1 == horizons[next]) {
      trace.push_back({j + 1, log_norm(y, NormKind::ell2) + log_scale});
      ++next;
    }
  }
  return trace;
}

QrReplicate qr_oseledets_oracle(const CocycleModel& model, OmegaPath& path, std::int64_t k, std::int64_t horizon,
                                int count, std::int64_t burn_in, int batches) {
  const int n = model.dimension();
  if (count < 1 || count > n) throw DomainError("qr_oseledets_oracle: exponent count must be in [1, n]");
  if (horizon < burn_in + 1) throw DomainError("qr_oseledets_oracle: horizon too short");
  QrReplicate out;
  out.seed = path.seed();
  Matrix frame = Matrix::Identity(n, count);
  std::vector<BatchMeans> sums(static_cast<std::size_t>(count),
                               BatchMeans(static_cast<std::size_t>(horizon - burn_in), batches));
  const Matrix thin = Matrix::Identity(n, count);
  for (std::int64_t step = 0; step < horizon; ++step) {
    const Matrix z = sample_matrix(model, path, k + step) * frame;
    Eigen::HouseholderQR<Matrix> qr(z);
    const auto& packed = qr.matrixQR();
    bool singular = false;
    for (int i = 0; i < count; ++i) singular = singular || !(std::abs(packed(i, i)) > 0) || !std::isfinite(packed(i, i));
    if (singular) {
      ++out.skipped;
      continue;
    }
    frame = qr.householderQ() * thin;
    for (int i = 0; i < count; ++i) {
      const double r = packed(i, i);
      if (r < 0) frame.col(i) = -frame.col(i);
      if (step >= burn_in) sums[static_cast<std::size_t>(i)].add(std::log(std::abs(r)));
    }
  }
  for (const auto& s : sums) {
    out.exponents.push_back(s.mean());
    out.batch_means.push_back(s.means());
  }
  out.frame = frame;
  return out;
}

QrResult qr_exponents(const CocycleModel& model, std::span<const std::uint64_t> seeds, std::int64_t horizon,
                      int count, int workers, std::optional<std::int64_t> burn_in, int batches) {
  const auto sorted = sorted_seeds(seeds);
  QrResult result;
  result.replicates.resize(sorted.size());
  const std::int64_t burn = burn_in.value_or(horizon / 10);
  parallel_for(sorted.size(), workers, [&](std::size_t i) {
    OmegaPath path(sorted[i]);
    result.replicates[i] = qr_oseledets_oracle(model, path, 0, horizon, count, burn, batches);
  });
  for (int e = 0; e < count; ++e) {
    std::vector<double> values;
    std::vector<std::vector<double>> b;
    for (const auto& r : result.replicates) {
      values.push_back(r.exponents[static_cast<std::size_t>(e)]);
      b.push_back(r.batch_means[static_cast<std::size_t>(e)]);
    }
    result.exponents.push_back(pooled_estimate(sorted, values, b));
  }
  for (const auto& r : result.replicates) result.skipped += r.skipped;
  return result;
}

TemperednessReport temperedness_check(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                                      const LyapunovOptions& options, double epsilon, std::size_t trace_points) {
  const auto sorted = sorted_seeds(seeds);
  const std::int64_t horizon = options.horizon;
  if (horizon < 4) throw DomainError("temperedness_check: horizon too short");
  const std::vector<std::int64_t> checkpoints{horizon / 4, horizon / 2, horizon};

  struct PerSeed {
    std::vector<TemperedCheck> checks;
    std::vector<TemperedTraceRow> trace;
    double slope = 0;
  };
  std::vector<PerSeed> per(sorted.size());
  parallel_for(sorted.size(), options.workers, [&](std::size_t s) {
    OmegaPath path(sorted[s]);
    const StepView view(model, path, options.period);
    const NormKind kind = model.norm_kind();
    const PrincipalVector start = pullback_adaptive(view, 0, options.pullback);
    const std::int64_t stride =
        std::max<std::int64_t>(1, horizon / static_cast<std::int64_t>(std::max<std::size_t>(1, trace_points)));
    Vector w = start.w;
    for (std::int64_t n = 1; n <= horizon; ++n) {
      w = normalized((view(n - 1) * w).eval(), kind);
      const bool is_check = std::find(checkpoints.begin(), checkpoints.end(), n) != checkpoints.end();
      const bool is_trace = n % stride == 0;
      if (!is_check && !is_trace) continue;
      const ProjectionRecord rec = make_projection(n, w, dual_adaptive(view, n, options.pullback).w);
      const double ln_norm = std::log(rec.norm(kind));
      if (is_check) per[s].checks.push_back({sorted[s], n, ln_norm / static_cast<double>(n)});
      if (is_trace) per[s].trace.push_back({sorted[s], n, std::log(rec.pairing), ln_norm});
    }
    if (per[s].trace.size() >= 2) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& row : per[s].trace) {
        xs.push_back(static_cast<double>(row.n));
        ys.push_back(row.ln_projection_norm);
      }
      per[s].slope = fit_line(xs, ys).slope;
    }
  });

  TemperednessReport report;
  report.epsilon = epsilon;
  double slope_sum = 0;
  for (const auto& p : per) {
    for (const auto& c : p.checks) {
      report.checks.push_back(c);
      if (!(std::abs(c.rate) <= epsilon)) report.verdict = false;
    }
    report.trace.insert(report.trace.end(), p.trace.begin(), p.trace.end());
    slope_sum += p.slope;
  }
  report.trend_slope = slope_sum / static_cast<double>(per.size());
  return report;
}

double cone_alignment_defect(const Matrix& frame, const Vector& top, std::span<const Vector> samples,
                             NormKind kind) {
  const auto n = top.size();
  if (frame.rows() != n || frame.cols() != n - 1)
    throw DimensionMismatch("cone_alignment_defect: frame must be n x (n-1)");
  Matrix basis(n, n);
  basis.col(0) = top;
  basis.rightCols(n - 1) = frame;
  Eigen::FullPivLU<Matrix> lu(basis);
  if (!lu.isInvertible()) throw DomainError("cone_alignment_defect: decomposition is degenerate");

  std::vector<Vector> probes(samples.begin(), samples.end());
  for (Eigen::Index i = 0; i < n; ++i) probes.push_back(Vector::Unit(n, i));
  for (const Vector& candidate : {Vector(top), Vector(-top)}) {
    const Vector positive = candidate.cwiseMax(0.0);
    if (!positive.isZero(0)) probes.push_back(positive);
  }

  double best = kInf;
  for (const Vector& u : probes) {
    if (!cone_contains(u) || u.isZero(0)) continue;
    const Vector coefficients = lu.solve(u);
    const Vector along_frame = frame * coefficients.tail(n - 1);
    const Vector along_top = coefficients(0) * top;
    const double denominator = norm(along_top, kind);
    if (!(denominator > 0)) continue;
    best = std::min(best, norm(along_frame, kind) / denominator);
  }
  return best;
}

std::vector<Vector> sample_unit_cone(int n, std::size_t count, std::uint64_t seed, NormKind kind) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exponential(1.0);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector u(n);
    for (int j = 0; j < n; ++j) u(j) = exponential(rng);
    out.push_back(normalized(u, kind));
  }
  return out;
}

CompareResult compare_exponents(const CocycleModel& low, const CocycleModel& high,
                                std::span<const std::uint64_t> seeds, const LyapunovOptions& options) {
  if (low.dimension() != high.dimension()) throw DimensionMismatch("compare_exponents: models differ in dimension");
  CompareResult out;
  out.low = lyapunov_top(low, seeds, options);
  out.high = lyapunov_top(high, seeds, options);

  const std::int64_t period = options.period;
  for (std::size_t i = 0; i < out.low.replicates.size(); ++i) {
    const std::uint64_t seed = out.low.replicates[i].seed;
    const std::int64_t depth = std::max(out.low.replicates[i].initial.depth, out.high.replicates[i].initial.depth);
    OmegaPath path_low(seed);
    OmegaPath path_high(seed);
    for (std::int64_t k = -depth * period; k < options.horizon * period; ++k) {
      const Matrix a = sample_matrix(low, path_low, k);
      const Matrix b = sample_matrix(high, path_high, k);
      if (((a - b).array() > 0).any())
        throw DominationViolation("compare_exponents: low sample exceeds high sample (seed " +
                                      std::to_string(seed) + ")",
                                  k);
    }
  }

  std::vector<double> gaps;
  for (std::size_t i = 0; i < out.low.replicates.size(); ++i)
    gaps.push_back(out.high.replicates[i].value - out.low.replicates[i].value);
  out.combined_se = std::hypot(out.low.estimate.standard_error, out.high.estimate.standard_error);
  out.gap = replicate_estimate(out.low.estimate.seeds, gaps, out.combined_se);
  out.ordered = out.low.estimate.mean <= out.high.estimate.mean + 3 * out.combined_se;
  return out;
}

LyapunovResult lyapunov_top_dual(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                                 const LyapunovOptions& options) {
  return detail::run_replicates(model, seeds, options, Side::dual);
}

DualityResult duality_check(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                            const LyapunovOptions& options) {
  DualityResult out;
  out.primal = lyapunov_top(model, seeds, options);
  out.dual = lyapunov_top_dual(model, seeds, options);
  out.gap = std::abs(out.primal.estimate.mean - out.dual.estimate.mean);
  out.combined_se = std::hypot(out.primal.estimate.standard_error, out.dual.estimate.standard_error);
  // The floor absorbs rounding when both estimates are exact (deterministic cocycles).
  out.consistent = out.gap <= 3 * out.combined_se + 1e-12;
  return out;
}

}  // namespace floquet
