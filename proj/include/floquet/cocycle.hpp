#pragma once

// Random linear cocycles on R^n realized as seeded two-sided matrix paths.
//
// A path is keyed by a 64-bit seed. The sample A_k = U_{theta_k omega}(1) is a
// pure function of (seed, k), so the shift theta is an index shift and any
// window of the path can be regenerated in any order. Markov-switching models
// are the exception: their state sequence is a chain anchored at index 0 and
// is cached inside the path.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "floquet/ordered_space.hpp"

namespace floquet {

/// A scalar law sampled by inverse transform from two uniforms.
struct Distribution {
  enum class Kind { constant, uniform, normal, lognormal, cauchy, logcauchy };

  Kind kind = Kind::constant;
  double a = 0;  // value | lo | mean | mu | loc
  double b = 0;  // -     | hi | sd   | sigma | scale

  static Distribution constant(double value) { return {Kind::constant, value, 0}; }
  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static Distribution normal(double mean, double sd) { return {Kind::normal, mean, sd}; }
  static Distribution lognormal(double mu, double sigma) { return {Kind::lognormal, mu, sigma}; }
  static Distribution cauchy(double loc, double scale) { return {Kind::cauchy, loc, scale}; }
  static Distribution logcauchy(double loc, double scale) { return {Kind::logcauchy, loc, scale}; }

  double sample(double u1, double u2) const;
  double support_min() const;
  double support_max() const;
  std::optional<double> mean() const;
  /// Throws ConfigError for malformed parameters.
  void validate() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

std::string_view to_string(Distribution::Kind kind);

/// Constant cocycle A_k = A.
struct Deterministic {
  Matrix matrix;
};

/// Independent entries; one law per entry (row-major) or a single shared law.
struct IidEnsemble {
  int dimension = 0;
  std::vector<Distribution> entries;

  const Distribution& entry(int i, int j) const {
    return entries.size() == 1 ? entries.front() : entries[static_cast<std::size_t>(i * dimension + j)];
  }
};

/// A_k = states[s_k] for a stationary Markov chain s with the given
/// row-stochastic transition matrix.
struct MarkovSwitch {
  std::vector<Matrix> states;
  Matrix transition;
};

/// Random Leslie matrices: fecundities on the first row, survivals in (0, 1]
/// on the subdiagonal.
struct LeslieRandom {
  std::vector<Distribution> fecundity;  // n entries
  std::vector<Distribution> survival;   // n - 1 entries
};

/// A_k = c_k B with ln c_k drawn from log_scalar.
struct ScalarScaled {
  Matrix base;
  Distribution log_scalar;
};

using ModelVariant = std::variant<Deterministic, IidEnsemble, MarkovSwitch, LeslieRandom, ScalarScaled>;

class CocycleModel {
 public:
  /// Validates the variant; throws ConfigError. `scale` multiplies every sample
  /// (used for coupled comparisons). `focus` defaults to the unit all-ones vector.
  explicit CocycleModel(ModelVariant variant, NormKind norm = NormKind::ell1, double scale = 1.0,
                        std::optional<Vector> focus = std::nullopt);

  static CocycleModel deterministic(Matrix a, NormKind norm = NormKind::ell1);
  static CocycleModel iid(int n, Distribution entry, NormKind norm = NormKind::ell1);

  int dimension() const { return dimension_; }
  NormKind norm_kind() const { return norm_; }
  double scale() const { return scale_; }
  const Vector& focus() const { return focus_; }
  /// e* of the dual side; the all-ones vector unit-normalized in the same norm.
  const Vector& dual_focus() const { return dual_focus_; }
  const ModelVariant& variant() const { return variant_; }
  std::string_view variant_name() const;
  bool explicit_focus() const { return explicit_focus_; }

  // Markov chain laws; empty for other variants.
  const Vector& stationary() const { return stationary_; }
  const Matrix& reversed_transition() const { return reversed_; }

  /// Copy with a different coupling scale.
  CocycleModel scaled(double factor) const;

  friend bool operator==(const CocycleModel& lhs, const CocycleModel& rhs);

 private:
  ModelVariant variant_;
  NormKind norm_;
  double scale_;
  int dimension_ = 0;
  Vector focus_;
  Vector dual_focus_;
  bool explicit_focus_ = false;
  Vector stationary_;
  Matrix reversed_;
};

/// One realization omega, materialized lazily in both time directions.
class OmegaPath {
 public:
  explicit OmegaPath(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  /// Smallest and one-past-largest index sampled so far; empty when begin == end.
  std::int64_t window_begin() const { return begin_; }
  std::int64_t window_end() const { return end_; }

  void touch(std::int64_t k);
  /// Markov state at index k; extends the cached chain as needed.
  int markov_state(const CocycleModel& model, std::int64_t k);

 private:
  std::uint64_t seed_;
  std::int64_t begin_ = 0;
  std::int64_t end_ = 0;
  std::vector<int> forward_states_;   // indices 0, 1, 2, ...
  std::vector<int> backward_states_;  // indices -1, -2, ...
};

/// value * exp(log_scale), with value renormalized by powers of two whenever
/// its largest magnitude leaves [1, 2^512].
struct CocycleProduct {
  Matrix value;
  double log_scale = 0;

  static CocycleProduct identity(int n);
  void renormalize();
  Matrix evaluate() const;
};

/// A_k. Deterministic in (seed, k).
Matrix sample_matrix(const CocycleModel& model, OmegaPath& path, std::int64_t k);

/// U_{theta_k omega}(t) = A_{k+t-1} ... A_k.
CocycleProduct forward_product(const CocycleModel& model, OmegaPath& path, std::int64_t k, std::int64_t t);

/// U*_{theta_k omega}(t) = (A_{k-1} ... A_{k-t})^T.
CocycleProduct dual_product(const CocycleModel& model, OmegaPath& path, std::int64_t k, std::int64_t t);

/// The period-T skeleton of a cocycle along one path: B_j = A_{jT+T-1} ... A_{jT}.
class StepView {
 public:
  StepView(const CocycleModel& model, OmegaPath& path, int period = 1);

  Matrix operator()(std::int64_t j) const;
  const CocycleModel& model() const { return *model_; }
  OmegaPath& path() const { return *path_; }
  int period() const { return period_; }
  int dimension() const { return model_->dimension(); }
  NormKind norm_kind() const { return model_->norm_kind(); }

 private:
  const CocycleModel* model_;
  OmegaPath* path_;
  int period_;
};

struct IntegrabilityReport {
  std::size_t replicates = 0;
  double mean = 0;  // mean of ln+ ||A||
  double standard_error = 0;
  double max_value = 0;
  std::vector<std::pair<std::size_t, double>> doubling_means;  // (count, prefix mean)
  double tail_index = 0;  // Hill estimate; +inf when no tail is visible
  bool heavy_tail = false;
};

/// Empirical integrability diagnostics of ln+ ||U_omega(1)|| over `replicates`
/// consecutive samples of one path.
IntegrabilityReport check_A1_integrability(const CocycleModel& model, std::size_t replicates,
                                           std::uint64_t seed = 0);

/// Writes samples A_first .. A_{first+count-1} as rows (k, i, j, value).
void write_matrix_csv(const std::filesystem::path& file, const CocycleModel& model, OmegaPath& path,
                      std::int64_t first, std::int64_t count);

}  // namespace floquet
