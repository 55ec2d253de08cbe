#pragma once

// Runtime checks of the focusing, pairing and strong-positivity assumptions
// on a cocycle model, evaluated along sampled paths.

#include <cstdint>
#include <optional>
#include <string>

#include "floquet/cocycle.hpp"

namespace floquet {

struct LogSummary {
  std::size_t count = 0;
  double min = 0;
  double mean = 0;
  double max = 0;
};

struct FocusingReport {
  Vector focus;
  int period = 1;      // attain time T of the skeleton that was probed
  double kappa = 1;    // max over probes
  double tau = 0;      // max over probes
  double contraction_p = 0;  // tanh(tau / 4)
  LogSummary ln_kappa;
  std::optional<int> primitivity;  // of the union support pattern of the raw samples
  bool focused = true;
  std::optional<std::int64_t> failure_index;
  std::string failure;
};

/// Focusing constants of the period-T skeleton over `probes` samples of one
/// path. A sample that is not strictly positive marks the report unfocused.
FocusingReport focusing_report(const CocycleModel& model, std::uint64_t seed, int period, std::int64_t probes);

/// Smallest T up to the Wielandt bound for which every probed T-step product is
/// strictly positive.
std::optional<int> focusing_period(const CocycleModel& model, std::uint64_t seed, std::int64_t probes);

struct A5Report {
  Vector e_bar;
  std::int64_t steps = 0;
  double min_nu = 0;
  double mean_ln_nu = 0;
  double lower_bound = 0;  // mean ln nu per raw time step; a lower bound for the top exponent
};

/// nu_k = m(B_k e_bar / e_bar) along the skeleton. Throws AssumptionViolation
/// with the index of the first nu <= 0.
A5Report verify_A5(const CocycleModel& model, OmegaPath& path, const Vector& e_bar, std::int64_t horizon,
                   int period = 1);

/// <e, e*> for the model's focus vectors; throws AssumptionViolation when it is not positive.
double check_A4(const CocycleModel& model);

}  // namespace floquet
