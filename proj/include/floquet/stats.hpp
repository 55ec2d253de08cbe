#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace floquet {

/// A Monte Carlo estimate with its standard error and replicate provenance.
struct Estimate {
  double mean = 0;
  double standard_error = 0;
  std::size_t replicates = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;  // per replicate, in seed order
};

/// Splits a stream of `count` values into contiguous batches and keeps their means.
class BatchMeans {
 public:
  BatchMeans(std::size_t count, int batches);

  void add(double x);
  std::vector<double> means() const;
  double mean() const { return seen_ == 0 ? 0.0 : total_ / static_cast<double>(seen_); }
  std::size_t count() const { return seen_; }

 private:
  std::size_t count_;
  std::size_t batches_;
  std::vector<double> sums_;
  std::vector<std::size_t> sizes_;
  std::size_t seen_ = 0;
  double total_ = 0;
};

double sample_mean(std::span<const double> xs);
/// Unbiased sample standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

/// Mean of per-replicate values with the standard error taken from the pooled
/// batch means of all replicates.
Estimate pooled_estimate(std::span<const std::uint64_t> seeds, std::span<const double> values,
                         const std::vector<std::vector<double>>& batch_means);

/// Mean of per-replicate values with the across-replicate standard error.
/// `fallback_se` is used when there is a single replicate.
Estimate replicate_estimate(std::span<const std::uint64_t> seeds, std::span<const double> values,
                            double fallback_se = 0);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace floquet
