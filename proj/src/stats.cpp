#include "floquet/stats.hpp"

#include <cmath>
#include <numeric>

#include "floquet/errors.hpp"

namespace floquet {

BatchMeans::BatchMeans(std::size_t count, int batches)
    : count_(count), batches_(static_cast<std::size_t>(std::max(1, batches))) {
  if (count_ < batches_) batches_ = std::max<std::size_t>(1, count_);
  sums_.assign(batches_, 0.0);
  sizes_.assign(batches_, 0);
}

void BatchMeans::add(double x) {
  const std::size_t slot = count_ == 0 ? 0 : std::min(batches_ - 1, seen_ * batches_ / count_);
  sums_[slot] += x;
  ++sizes_[slot];
  ++seen_;
  total_ += x;
}

std::vector<double> BatchMeans::means() const {
  std::vector<double> out;
  out.reserve(batches_);
  for (std::size_t b = 0; b < batches_; ++b)
    if (sizes_[b] > 0) out.push_back(sums_[b] / static_cast<double>(sizes_[b]));
  return out;
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) return 0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0;
  const double m = sample_mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

Estimate pooled_estimate(std::span<const std::uint64_t> seeds, std::span<const double> values,
                         const std::vector<std::vector<double>>& batch_means) {
  Estimate e;
  e.seeds.assign(seeds.begin(), seeds.end());
  e.values.assign(values.begin(), values.end());
  e.replicates = values.size();
  e.mean = sample_mean(values);
  std::vector<double> pooled;
  for (const auto& b : batch_means) pooled.insert(pooled.end(), b.begin(), b.end());
  if (pooled.size() >= 2) e.standard_error = sample_sd(pooled) / std::sqrt(static_cast<double>(pooled.size()));
  return e;
}

Estimate replicate_estimate(std::span<const std::uint64_t> seeds, std::span<const double> values,
                            double fallback_se) {
  Estimate e;
  e.seeds.assign(seeds.begin(), seeds.end());
  e.values.assign(values.begin(), values.end());
  e.replicates = values.size();
  e.mean = sample_mean(values);
  e.standard_error = values.size() >= 2 ? sample_sd(values) / std::sqrt(static_cast<double>(values.size()))
                                        : fallback_se;
  return e;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("fit_line: need two or more points");
  const double mx = sample_mean(xs);
  const double my = sample_mean(ys);
  double sxx = 0;
  double sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (xs.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - fit.intercept - fit.slope * xs[i];
      rss += r * r;
    }
    fit.slope_se = std::sqrt(rss / static_cast<double>(xs.size() - 2) / sxx);
  }
  return fit;
}

}  // namespace floquet
