#include "floquet/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "floquet/errors.hpp"
#include "floquet/focusing.hpp"
#include "floquet/hilbert_metric.hpp"

namespace floquet {

FocusingReport focusing_report(const CocycleModel& model, std::uint64_t seed, int period, std::int64_t probes) {
  if (period < 1 || probes < 1) throw DomainError("focusing_report: period and probe count must be positive");
  OmegaPath path(seed);
  const StepView view(model, path, period);
  FocusingReport report;
  report.focus = model.focus();
  report.period = period;

  const int n = model.dimension();
  Matrix support = Matrix::Zero(n, n);
  for (std::int64_t k = 0; k < probes * period; ++k) support += (sample_matrix(model, path, k).array() > 0).cast<double>().matrix();
  report.primitivity = primitivity_index(support);

  double sum = 0;
  report.ln_kappa.min = std::numeric_limits<double>::infinity();
  for (std::int64_t j = 0; j < probes; ++j) {
    const Matrix b = view(j);
    if (!strictly_positive(b)) {
      report.focused = false;
      report.failure_index = j;
      report.failure = "sample is not strictly positive at T = " + std::to_string(period);
      break;
    }
    const double kappa = focusing_kappa(b, model.focus());
    const double tau = birkhoff_diameter(b);
    report.kappa = std::max(report.kappa, kappa);
    report.tau = std::max(report.tau, tau);
    const double lk = std::log(kappa);
    sum += lk;
    report.ln_kappa.min = std::min(report.ln_kappa.min, lk);
    report.ln_kappa.max = std::max(report.ln_kappa.max, lk);
    ++report.ln_kappa.count;
  }
  if (report.ln_kappa.count == 0) report.ln_kappa.min = 0;
  else report.ln_kappa.mean = sum / static_cast<double>(report.ln_kappa.count);
  report.contraction_p = std::tanh(report.tau / 4);
  return report;
}

std::optional<int> focusing_period(const CocycleModel& model, std::uint64_t seed, std::int64_t probes) {
  const int n = model.dimension();
  const int wielandt = (n - 1) * (n - 1) + 1;
  OmegaPath path(seed);
  for (int t = 1; t <= wielandt; ++t) {
    const StepView view(model, path, t);
    bool all = true;
    for (std::int64_t j = 0; j < probes && all; ++j) all = strictly_positive(view(j));
    if (all) return t;
  }
  return std::nullopt;
}

A5Report verify_A5(const CocycleModel& model, OmegaPath& path, const Vector& e_bar, std::int64_t horizon,
                   int period) {
  if (e_bar.size() != model.dimension()) throw DimensionMismatch("verify_A5: e_bar has the wrong length");
  if (!(e_bar.array() > 0).all()) throw DomainError("verify_A5: e_bar must be strictly positive");
  if (horizon < 1) throw DomainError("verify_A5: horizon must be positive");
  const StepView view(model, path, period);
  A5Report report;
  report.e_bar = normalized(e_bar, model.norm_kind());
  report.min_nu = std::numeric_limits<double>::infinity();
  double sum = 0;
  for (std::int64_t k = 0; k < horizon; ++k) {
    const Vector image = view(k) * report.e_bar;
    const double nu = *ratio_bounds(image, report.e_bar).lower;
    if (!(nu > 0)) throw AssumptionViolation("verify_A5: U(1) e_bar >= nu e_bar fails with nu <= 0", k);
    report.min_nu = std::min(report.min_nu, nu);
    sum += std::log(nu);
  }
  report.steps = horizon;
  report.mean_ln_nu = sum / static_cast<double>(horizon);
  report.lower_bound = report.mean_ln_nu / period;
  return report;
}

double check_A4(const CocycleModel& model) {
  const double pairing = model.focus().dot(model.dual_focus());
  if (!(pairing > 0)) throw AssumptionViolation("focus e and dual focus e* have non-positive pairing", 0);
  return pairing;
}

}  // namespace floquet
