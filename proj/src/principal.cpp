#include "floquet/principal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "floquet/detail/pullback.hpp"
#include "floquet/errors.hpp"
#include "floquet/focusing.hpp"
#include "floquet/parallel.hpp"

namespace floquet {

namespace detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kappa_or_inf(const Matrix& m, const Vector& focus) {
  return strictly_positive(m) ? focusing_kappa(m, focus) : kInf;
}

double ratio_or_one(const Matrix& m) { return strictly_positive(m) ? contraction_ratio(m) : 1.0; }

// 6 kappa_1^2 ln kappa_n prod q, with the convention that a non-focusing
// endpoint voids the bound.
double cauchy_bound(double kappa_first, double kappa_last, double ratio_product) {
  if (!std::isfinite(kappa_first) || !std::isfinite(kappa_last)) return kInf;
  return 6.0 * kappa_first * kappa_first * std::log(kappa_last) * ratio_product;
}

void rescale(Matrix& p) {
  const double largest = p.cwiseAbs().maxCoeff();
  if (largest > 0 && std::isfinite(largest)) p /= largest;
}

Vector start_vector(const StepView& view, Side side, const std::optional<Vector>& start) {
  if (!start) return side_focus(view, side);
  if (start->size() != view.dimension()) throw DimensionMismatch("pullback: start vector has the wrong length");
  if (!cone_contains(*start) || start->isZero(0)) throw DomainError("pullback: start must be a nonzero cone vector");
  return normalized(*start, view.norm_kind());
}

}  // namespace

std::int64_t factor_index(std::int64_t anchor, Side side, int j) {
  return side == Side::primal ? anchor - j : anchor + j - 1;
}

Matrix pullback_factor(const StepView& view, std::int64_t anchor, Side side, int j) {
  if (side == Side::primal) return view(anchor - j);
  return view(anchor + j - 1).transpose();
}

const Vector& side_focus(const StepView& view, Side side) {
  return side == Side::primal ? view.model().focus() : view.model().dual_focus();
}

PrincipalVector run_pullback(const StepView& view, std::int64_t anchor, Side side, int fixed_depth,
                             const PullbackOptions& options, const std::optional<Vector>& start) {
  if (fixed_depth != 0 && fixed_depth < 2) throw DomainError("pullback: depth must be >= 2");
  const int cap = fixed_depth > 0 ? fixed_depth : std::max(2, options.depth_cap);
  const int n = view.dimension();
  const Vector& focus = side_focus(view, side);
  const Vector s = start_vector(view, side, start);

  Matrix product = Matrix::Identity(n, n);
  Vector w;
  Vector previous;
  double best = kInf;
  double kappa_first = kInf;
  double ratio_product = 1;
  bool converged = false;
  int depth = 0;
  for (int d = 1; d <= cap; ++d) {
    depth = d;
    const Matrix factor = pullback_factor(view, anchor, side, d);
    const bool positive = strictly_positive(factor);
    if (!positive && options.require_focusing)
      throw FocusingViolation("pullback: sample is not strictly positive", factor_index(anchor, side, d));
    product = product * factor;
    rescale(product);
    const Vector image = product * s;
    if (!(norm(image, view.norm_kind()) > 0))
      throw FocusingViolation("pullback: iterate collapsed to zero", factor_index(anchor, side, d));
    w = normalized(image, view.norm_kind());

    const double kappa = positive ? focusing_kappa(factor, focus) : kInf;
    if (d == 1) kappa_first = kappa;
    else best = std::min(best, cauchy_bound(kappa_first, kappa, ratio_product));
    ratio_product *= positive ? contraction_ratio(factor) : 1.0;
    const double increment = d >= 2 ? norm((w - previous).eval(), view.norm_kind()) : kInf;
    previous = w;

    if (fixed_depth == 0 && d >= 2) {
      if (best < options.tolerance) {
        converged = true;
        break;
      }
      if (!options.require_focusing && !std::isfinite(best) && increment <= options.tolerance) {
        converged = true;
        break;
      }
    }
  }

  PrincipalVector out;
  out.anchor = anchor;
  out.w = std::move(w);
  out.depth = depth;
  out.error_bound = best;
  out.certified = std::isfinite(best);
  out.cap_hit = fixed_depth == 0 && !converged;
  return out;
}

double certificate(const StepView& view, std::int64_t anchor, Side side, int depth) {
  const Vector& focus = side_focus(view, side);
  double best = kInf;
  double kappa_first = kInf;
  double ratio_product = 1;
  for (int d = 1; d <= depth; ++d) {
    const Matrix factor = pullback_factor(view, anchor, side, d);
    const double kappa = kappa_or_inf(factor, focus);
    if (d == 1) kappa_first = kappa;
    else best = std::min(best, cauchy_bound(kappa_first, kappa, ratio_product));
    ratio_product *= ratio_or_one(factor);
  }
  return best;
}

ReplicateResult run_trajectory(const CocycleModel& model, std::uint64_t seed, const LyapunovOptions& options,
                               Side side) {
  const std::int64_t horizon = options.horizon;
  const std::int64_t burn_in = options.effective_burn_in();
  if (burn_in < 0 || horizon < burn_in + 1) throw DomainError("lyapunov: need horizon >= burn_in + 1");

  OmegaPath path(seed);
  const StepView view(model, path, options.period);
  ReplicateResult result;
  result.seed = seed;
  result.initial = run_pullback(view, 0, side, 0, options.pullback, std::nullopt);

  Vector w = result.initial.w;
  BatchMeans batches(static_cast<std::size_t>(horizon - burn_in), options.batches);
  const std::int64_t stride =
      options.trace_points > 0
          ? std::max<std::int64_t>(1, horizon / static_cast<std::int64_t>(options.trace_points))
          : 0;
  double cumulative = 0;
  for (std::int64_t i = 0; i < horizon; ++i) {
    const std::int64_t index = side == Side::primal ? i : -i - 1;
    Matrix factor = view(index);
    if (side == Side::dual) factor.transposeInPlace();
    if (options.pullback.require_focusing && !strictly_positive(factor))
      throw FocusingViolation("trajectory: sample is not strictly positive", index);
    const Vector image = factor * w;
    const double rho = norm(image, model.norm_kind());
    if (!(rho > 0) || !std::isfinite(rho)) throw FocusingViolation("trajectory left the cone", index);
    w = image / rho;
    const double ln_rho = std::log(rho);
    cumulative += ln_rho;
    if (i >= burn_in) batches.add(ln_rho);
    if (stride > 0 && i % stride == 0) {
      TraceRow row{i, ln_rho, cumulative, kInf};
      if (result.initial.certified) {
        const std::int64_t anchor = side == Side::primal ? i + 1 : -i - 1;
        row.certificate = certificate(view, anchor, side, result.initial.depth);
      }
      result.trace.push_back(row);
    }
  }
  const double period = options.period;
  result.value = batches.mean() / period;
  result.batch_means = batches.means();
  for (double& b : result.batch_means) b /= period;
  return result;
}

LyapunovResult run_replicates(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                              const LyapunovOptions& options, Side side) {
  if (seeds.empty()) throw ConfigError("lyapunov: no seeds given");
  std::vector<std::uint64_t> sorted(seeds.begin(), seeds.end());
  std::sort(sorted.begin(), sorted.end());
  LyapunovResult out;
  out.replicates.resize(sorted.size());
  parallel_for(sorted.size(), options.workers,
               [&](std::size_t i) { out.replicates[i] = run_trajectory(model, sorted[i], options, side); });
  std::vector<double> values;
  std::vector<std::vector<double>> batches;
  for (const auto& r : out.replicates) {
    values.push_back(r.value);
    batches.push_back(r.batch_means);
  }
  out.estimate = pooled_estimate(sorted, values, batches);
  return out;
}

}  // namespace detail

using detail::Side;

PrincipalVector pullback_principal(const StepView& view, std::int64_t anchor, int depth,
                                   const PullbackOptions& options, const std::optional<Vector>& start) {
  if (depth < 2) throw DomainError("pullback_principal: depth must be >= 2");
  return detail::run_pullback(view, anchor, Side::primal, depth, options, start);
}

PrincipalVector pullback_adaptive(const StepView& view, std::int64_t anchor, const PullbackOptions& options,
                                  const std::optional<Vector>& start) {
  return detail::run_pullback(view, anchor, Side::primal, 0, options, start);
}

double pullback_certificate(const StepView& view, std::int64_t anchor, int depth) {
  return detail::certificate(view, anchor, Side::primal, depth);
}

PullbackTrace pullback_trace(const StepView& view, std::int64_t anchor, int max_depth) {
  const int n = view.dimension();
  const Vector& focus = view.model().focus();
  PullbackTrace trace;
  Matrix product = Matrix::Identity(n, n);
  Vector previous;
  for (int d = 1; d <= max_depth; ++d) {
    const Matrix factor = view(anchor - d);
    if (!strictly_positive(factor))
      throw FocusingViolation("pullback_trace: sample is not strictly positive", anchor - d);
    product = product * factor;
    product /= product.cwiseAbs().maxCoeff();
    const Vector w = normalized((product * focus).eval(), view.norm_kind());
    if (d >= 2) trace.increments.push_back(norm((w - previous).eval(), view.norm_kind()));
    trace.ratios.push_back(contraction_ratio(factor));
    previous = w;
  }
  return trace;
}

PrincipalVector forward_normalize(const StepView& view, const PrincipalVector& w, std::int64_t t) {
  if (t < 0) throw DomainError("forward_normalize: negative time");
  if (t == 0) return w;
  PrincipalVector out = w;
  for (std::int64_t j = w.anchor; j < w.anchor + t; ++j) {
    const Vector image = view(j) * out.w;
    if (!(norm(image, view.norm_kind()) > 0)) throw FocusingViolation("forward_normalize: image is zero", j);
    out.w = normalized(image, view.norm_kind());
  }
  out.anchor = w.anchor + t;
  out.depth = static_cast<int>(w.depth + t);
  out.cap_hit = false;
  if (w.certified) {
    out.error_bound = detail::certificate(view, out.anchor, Side::primal, out.depth);
    out.certified = std::isfinite(out.error_bound);
  }
  return out;
}

double GrowthLog::ln_rho_t(std::int64_t k, std::int64_t t) const {
  const std::int64_t begin = k - first;
  if (begin < 0 || t < 0 || begin + t > static_cast<std::int64_t>(ln_rho.size()))
    throw DomainError("GrowthLog: requested span is outside the log");
  return cumulative[static_cast<std::size_t>(begin + t)] - cumulative[static_cast<std::size_t>(begin)];
}

GrowthLog growth_log(const StepView& view, const PrincipalVector& start, std::int64_t steps) {
  GrowthLog log;
  log.first = start.anchor;
  log.cumulative.push_back(0.0);
  Vector w = start.w;
  for (std::int64_t j = start.anchor; j < start.anchor + steps; ++j) {
    const Vector image = view(j) * w;
    const double rho = norm(image, view.norm_kind());
    if (!(rho > 0)) throw FocusingViolation("growth_log: trajectory left the cone", j);
    w = image / rho;
    log.ln_rho.push_back(std::log(rho));
    log.cumulative.push_back(log.cumulative.back() + log.ln_rho.back());
  }
  return log;
}

LyapunovResult lyapunov_top(const CocycleModel& model, std::span<const std::uint64_t> seeds,
                            const LyapunovOptions& options) {
  return detail::run_replicates(model, seeds, options, Side::primal);
}

std::vector<OrbitPoint> entire_orbit(const StepView& view, std::int64_t anchor, std::int64_t backward,
                                     std::int64_t forward, const PullbackOptions& options,
                                     const std::optional<Vector>& start) {
  if (backward < 0 || forward < 0) throw DomainError("entire_orbit: step counts must be nonnegative");
  const PrincipalVector first = pullback_adaptive(view, anchor - backward, options, start);
  std::vector<OrbitPoint> orbit;
  orbit.reserve(static_cast<std::size_t>(backward + forward + 1));
  orbit.push_back({anchor - backward, first.w, 0.0});
  for (std::int64_t j = anchor - backward; j < anchor + forward; ++j) {
    const Vector image = view(j) * orbit.back().direction;
    const double rho = norm(image, view.norm_kind());
    if (!(rho > 0)) throw FocusingViolation("entire_orbit: trajectory left the cone", j);
    orbit.push_back({j + 1, image / rho, orbit.back().log_scale + std::log(rho)});
  }
  const double offset = orbit[static_cast<std::size_t>(backward)].log_scale;
  for (auto& p : orbit) p.log_scale -= offset;
  return orbit;
}

}  // namespace floquet
