#include "floquet/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "floquet/errors.hpp"

namespace floquet {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-mode uniform stream keyed by (seed, index, tag). Tag 0 drives matrix
// entries, tag 1 drives Markov transitions.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::int64_t index, std::uint64_t tag)
      : state_(mix64(mix64(seed + kGolden * (tag + 1)) + static_cast<std::uint64_t>(index))) {}

  // Uniform on the open interval (0, 1).
  double uniform() {
    state_ += kGolden;
    const std::uint64_t z = mix64(state_);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

constexpr double kRescaleBound = 0x1.0p512;

bool finite(double x) { return std::isfinite(x); }

void require_nonnegative_square(const Matrix& a, const std::string& what) {
  if (a.rows() != a.cols() || a.rows() < 2)
    throw ConfigError(what + ": matrix must be square with dimension >= 2");
  if (!a.allFinite()) throw ConfigError(what + ": matrix has non-finite entries");
  if ((a.array() < 0).any()) throw ConfigError(what + ": matrix has a negative entry");
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (a.col(j).isZero(0)) throw ConfigError(what + ": matrix has a zero column");
}

void require_nonnegative_law(const Distribution& d, const std::string& what) {
  d.validate();
  if (d.support_min() < 0) throw ConfigError(what + ": law has negative support");
}

int draw_categorical(const auto& weights, double u) {
  double cumulative = 0;
  int last_positive = 0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights(j) <= 0) continue;
    last_positive = static_cast<int>(j);
    cumulative += weights(j);
    if (u < cumulative) return static_cast<int>(j);
  }
  return last_positive;
}

Vector stationary_law(const Matrix& p) {
  const Eigen::Index m = p.rows();
  Matrix system = p.transpose() - Matrix::Identity(m, m);
  system.row(m - 1).setOnes();
  Vector rhs = Vector::Zero(m);
  rhs(m - 1) = 1;
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw ConfigError("markov: transition matrix has no unique stationary law");
  Vector pi = lu.solve(rhs);
  if ((pi.array() <= 0).any())
    throw ConfigError("markov: stationary law is not strictly positive (chain is reducible)");
  return pi / pi.sum();
}

}  // namespace

// ---------------------------------------------------------------------------
// Distribution

std::string_view to_string(Distribution::Kind kind) {
  using K = Distribution::Kind;
  switch (kind) {
    case K::constant: return "constant";
    case K::uniform: return "uniform";
    case K::normal: return "normal";
    case K::lognormal: return "lognormal";
    case K::cauchy: return "cauchy";
    case K::logcauchy: return "logcauchy";
  }
  return "constant";
}

double Distribution::sample(double u1, double u2) const {
  switch (kind) {
    case Kind::constant: return a;
    case Kind::uniform: return a + (b - a) * u1;
    case Kind::normal:
      return a + b * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    case Kind::lognormal:
      return std::exp(a + b * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
    case Kind::cauchy: return a + b * std::tan(std::numbers::pi * (u1 - 0.5));
    case Kind::logcauchy: return std::exp(a + b * std::tan(std::numbers::pi * (u1 - 0.5)));
  }
  return a;
}

double Distribution::support_min() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::constant:
    case Kind::uniform: return a;
    case Kind::normal:
    case Kind::cauchy: return -inf;
    case Kind::lognormal:
    case Kind::logcauchy: return 0;
  }
  return a;
}

double Distribution::support_max() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::constant: return a;
    case Kind::uniform: return b;
    default: return inf;
  }
}

std::optional<double> Distribution::mean() const {
  switch (kind) {
    case Kind::constant: return a;
    case Kind::uniform: return 0.5 * (a + b);
    case Kind::normal: return a;
    case Kind::lognormal: return std::exp(a + 0.5 * b * b);
    default: return std::nullopt;
  }
}

void Distribution::validate() const {
  if (!finite(a) || !finite(b)) throw ConfigError("distribution parameters must be finite");
  switch (kind) {
    case Kind::constant: break;
    case Kind::uniform:
      if (a > b) throw ConfigError("uniform law needs lo <= hi");
      break;
    case Kind::normal:
    case Kind::lognormal:
      if (b < 0) throw ConfigError("normal law needs a nonnegative spread");
      break;
    case Kind::cauchy:
    case Kind::logcauchy:
      if (!(b > 0)) throw ConfigError("cauchy law needs a positive scale");
      break;
  }
}

// ---------------------------------------------------------------------------
// CocycleModel

CocycleModel::CocycleModel(ModelVariant variant, NormKind norm, double scale, std::optional<Vector> focus)
    : variant_(std::move(variant)), norm_(norm), scale_(scale) {
  if (!(scale_ > 0) || !finite(scale_)) throw ConfigError("model scale must be positive and finite");

  std::visit(
      [this](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          require_nonnegative_square(v.matrix, "deterministic");
          dimension_ = static_cast<int>(v.matrix.rows());
        } else if constexpr (std::is_same_v<T, IidEnsemble>) {
          if (v.dimension < 2) throw ConfigError("iid: dimension must be >= 2");
          const auto n = static_cast<std::size_t>(v.dimension);
          if (v.entries.size() != 1 && v.entries.size() != n * n)
            throw ConfigError("iid: need one shared law or n*n entry laws");
          for (const auto& d : v.entries) require_nonnegative_law(d, "iid");
          for (int j = 0; j < v.dimension; ++j) {
            bool alive = false;
            for (int i = 0; i < v.dimension; ++i) alive = alive || v.entry(i, j).support_max() > 0;
            if (!alive) throw ConfigError("iid: column " + std::to_string(j) + " is identically zero");
          }
          dimension_ = v.dimension;
        } else if constexpr (std::is_same_v<T, MarkovSwitch>) {
          if (v.states.empty()) throw ConfigError("markov: no state matrices");
          for (const auto& s : v.states) require_nonnegative_square(s, "markov state");
          dimension_ = static_cast<int>(v.states.front().rows());
          for (const auto& s : v.states)
            if (s.rows() != dimension_) throw ConfigError("markov: state matrices differ in dimension");
          const auto m = static_cast<Eigen::Index>(v.states.size());
          if (v.transition.rows() != m || v.transition.cols() != m)
            throw ConfigError("markov: transition matrix must be m x m for m states");
          if (!v.transition.allFinite() || (v.transition.array() < 0).any())
            throw ConfigError("markov: transition matrix must be nonnegative");
          for (Eigen::Index i = 0; i < m; ++i)
            if (std::abs(v.transition.row(i).sum() - 1.0) > 1e-12)
              throw ConfigError("markov: transition rows must sum to 1");
          stationary_ = stationary_law(v.transition);
          reversed_ = Matrix(m, m);
          for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
              reversed_(i, j) = stationary_(j) * v.transition(j, i) / stationary_(i);
        } else if constexpr (std::is_same_v<T, LeslieRandom>) {
          const auto n = v.fecundity.size();
          if (n < 2) throw ConfigError("leslie: need at least 2 age classes");
          if (v.survival.size() != n - 1) throw ConfigError("leslie: need n - 1 survival laws");
          for (const auto& d : v.fecundity) require_nonnegative_law(d, "leslie fecundity");
          for (const auto& d : v.survival) {
            d.validate();
            if (!(d.support_min() > 0) || d.support_max() > 1)
              throw ConfigError("leslie: survival laws must be supported in (0, 1]");
          }
          if (!(v.fecundity.back().support_max() > 0))
            throw ConfigError("leslie: last fecundity is identically zero");
          dimension_ = static_cast<int>(n);
        } else {
          require_nonnegative_square(v.base, "scalar_scaled base");
          v.log_scalar.validate();
          dimension_ = static_cast<int>(v.base.rows());
        }
      },
      variant_);

  dual_focus_ = unit_ones(dimension_, norm_);
  if (focus) {
    if (focus->size() != dimension_) throw ConfigError("focus vector has the wrong dimension");
    if (!((focus->array() > 0).all()) || !focus->allFinite())
      throw ConfigError("focus vector must be strictly positive");
    focus_ = normalized(*focus, norm_);
    explicit_focus_ = true;
  } else {
    focus_ = unit_ones(dimension_, norm_);
  }
}

CocycleModel CocycleModel::deterministic(Matrix a, NormKind norm) {
  return CocycleModel(Deterministic{std::move(a)}, norm);
}

CocycleModel CocycleModel::iid(int n, Distribution entry, NormKind norm) {
  return CocycleModel(IidEnsemble{n, {entry}}, norm);
}

std::string_view CocycleModel::variant_name() const {
  switch (variant_.index()) {
    case 0: return "deterministic";
    case 1: return "iid";
    case 2: return "markov";
    case 3: return "leslie";
    default: return "scalar_scaled";
  }
}

CocycleModel CocycleModel::scaled(double factor) const {
  return CocycleModel(variant_, norm_, scale_ * factor,
                      explicit_focus_ ? std::optional<Vector>(focus_) : std::nullopt);
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_variant(const ModelVariant& x, const ModelVariant& y) {
  if (x.index() != y.index()) return false;
  return std::visit(
      [&y](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        const auto& b = std::get<T>(y);
        if constexpr (std::is_same_v<T, Deterministic>) {
          return same(a.matrix, b.matrix);
        } else if constexpr (std::is_same_v<T, IidEnsemble>) {
          return a.dimension == b.dimension && a.entries == b.entries;
        } else if constexpr (std::is_same_v<T, MarkovSwitch>) {
          if (a.states.size() != b.states.size() || !same(a.transition, b.transition)) return false;
          for (std::size_t i = 0; i < a.states.size(); ++i)
            if (!same(a.states[i], b.states[i])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, LeslieRandom>) {
          return a.fecundity == b.fecundity && a.survival == b.survival;
        } else {
          return same(a.base, b.base) && a.log_scalar == b.log_scalar;
        }
      },
      x);
}

}  // namespace

bool operator==(const CocycleModel& lhs, const CocycleModel& rhs) {
  return lhs.norm_ == rhs.norm_ && lhs.scale_ == rhs.scale_ && lhs.explicit_focus_ == rhs.explicit_focus_ &&
         same(lhs.focus_, rhs.focus_) && same_variant(lhs.variant_, rhs.variant_);
}

// ---------------------------------------------------------------------------
// OmegaPath

void OmegaPath::touch(std::int64_t k) {
  if (begin_ == end_) {
    begin_ = k;
    end_ = k + 1;
    return;
  }
  begin_ = std::min(begin_, k);
  end_ = std::max(end_, k + 1);
}

int OmegaPath::markov_state(const CocycleModel& model, std::int64_t k) {
  const auto* chain = std::get_if<MarkovSwitch>(&model.variant());
  if (chain == nullptr) throw DomainError("markov_state: model is not Markov-switching");
  if (forward_states_.empty()) {
    CounterStream s(seed_, 0, 1);
    forward_states_.push_back(draw_categorical(model.stationary(), s.uniform()));
  }
  if (k >= 0) {
    const auto target = static_cast<std::size_t>(k);
    while (forward_states_.size() <= target) {
      const int prev = forward_states_.back();
      CounterStream s(seed_, static_cast<std::int64_t>(forward_states_.size()), 1);
      forward_states_.push_back(draw_categorical(chain->transition.row(prev), s.uniform()));
    }
    return forward_states_[target];
  }
  const auto target = static_cast<std::size_t>(-k);
  while (backward_states_.size() < target) {
    const int prev = backward_states_.empty() ? forward_states_.front() : backward_states_.back();
    const auto index = -static_cast<std::int64_t>(backward_states_.size() + 1);
    CounterStream s(seed_, index, 1);
    backward_states_.push_back(draw_categorical(model.reversed_transition().row(prev), s.uniform()));
  }
  return backward_states_[target - 1];
}

// ---------------------------------------------------------------------------
// Products

CocycleProduct CocycleProduct::identity(int n) { return {Matrix::Identity(n, n), 0.0}; }

void CocycleProduct::renormalize() {
  const double largest = value.cwiseAbs().maxCoeff();
  if (!(largest > 0) || !finite(largest)) return;
  if (largest >= 1 && largest <= kRescaleBound) return;
  int exponent = 0;
  std::frexp(largest, &exponent);
  const int shift = exponent - 1;  // largest / 2^shift lands in [1, 2)
  value = value.unaryExpr([shift](double x) { return std::ldexp(x, -shift); });
  log_scale += shift * std::numbers::ln2;
}

Matrix CocycleProduct::evaluate() const { return value * std::exp(log_scale); }

Matrix sample_matrix(const CocycleModel& model, OmegaPath& path, std::int64_t k) {
  path.touch(k);
  const int n = model.dimension();
  Matrix a = std::visit(
      [&](const auto& v) -> Matrix {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Deterministic>) {
          return v.matrix;
        } else if constexpr (std::is_same_v<T, IidEnsemble>) {
          CounterStream s(path.seed(), k, 0);
          Matrix out(n, n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const double u1 = s.uniform();
              const double u2 = s.uniform();
              out(i, j) = v.entry(i, j).sample(u1, u2);
            }
          return out;
        } else if constexpr (std::is_same_v<T, MarkovSwitch>) {
          return v.states[static_cast<std::size_t>(path.markov_state(model, k))];
        } else if constexpr (std::is_same_v<T, LeslieRandom>) {
          CounterStream s(path.seed(), k, 0);
          Matrix out = Matrix::Zero(n, n);
          for (int j = 0; j < n; ++j) {
            const double u1 = s.uniform();
            const double u2 = s.uniform();
            out(0, j) = v.fecundity[static_cast<std::size_t>(j)].sample(u1, u2);
          }
          for (int j = 0; j + 1 < n; ++j) {
            const double u1 = s.uniform();
            const double u2 = s.uniform();
            out(j + 1, j) = v.survival[static_cast<std::size_t>(j)].sample(u1, u2);
          }
          return out;
        } else {
          CounterStream s(path.seed(), k, 0);
          const double u1 = s.uniform();
          const double u2 = s.uniform();
          return std::exp(v.log_scalar.sample(u1, u2)) * v.base;
        }
      },
      model.variant());
  if (model.scale() != 1.0) a *= model.scale();
  return a;
}

CocycleProduct forward_product(const CocycleModel& model, OmegaPath& path, std::int64_t k, std::int64_t t) {
  if (t < 0) throw DomainError("forward_product: negative time");
  CocycleProduct product = CocycleProduct::identity(model.dimension());
  for (std::int64_t j = k; j < k + t; ++j) {
    product.value = sample_matrix(model, path, j) * product.value;
    product.renormalize();
  }
  return product;
}

CocycleProduct dual_product(const CocycleModel& model, OmegaPath& path, std::int64_t k, std::int64_t t) {
  if (t < 0) throw DomainError("dual_product: negative time");
  CocycleProduct product = forward_product(model, path, k - t, t);
  product.value.transposeInPlace();
  return product;
}

StepView::StepView(const CocycleModel& model, OmegaPath& path, int period)
    : model_(&model), path_(&path), period_(period) {
  if (period_ < 1) throw DomainError("StepView: period must be positive");
}

Matrix StepView::operator()(std::int64_t j) const {
  const std::int64_t first = j * period_;
  Matrix out = sample_matrix(*model_, *path_, first);
  for (int s = 1; s < period_; ++s) out = sample_matrix(*model_, *path_, first + s) * out;
  return out;
}

// ---------------------------------------------------------------------------
// (A1) integrability

namespace {

double log_norm_sample(const CocycleModel& model, OmegaPath& path, std::int64_t k) {
  if (const auto* scaled = std::get_if<ScalarScaled>(&model.variant())) {
    // Work in logs so heavy-tailed scalars never overflow.
    path.touch(k);
    CounterStream s(path.seed(), k, 0);
    const double u1 = s.uniform();
    const double u2 = s.uniform();
    return scaled->log_scalar.sample(u1, u2) +
           std::log(model.scale() * operator_norm(scaled->base, model.norm_kind()));
  }
  return std::log(operator_norm(sample_matrix(model, path, k), model.norm_kind()));
}

}  // namespace

IntegrabilityReport check_A1_integrability(const CocycleModel& model, std::size_t replicates, std::uint64_t seed) {
  if (replicates == 0) throw DomainError("check_A1_integrability: need at least one replicate");
  OmegaPath path(seed);
  std::vector<double> values(replicates);
  for (std::size_t k = 0; k < replicates; ++k)
    values[k] = std::max(0.0, log_norm_sample(model, path, static_cast<std::int64_t>(k)));

  IntegrabilityReport report;
  report.replicates = replicates;
  double mean = 0;
  double m2 = 0;
  for (std::size_t k = 0; k < replicates; ++k) {
    const double delta = values[k] - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (values[k] - mean);
  }
  report.mean = mean;
  report.standard_error = replicates > 1 ? std::sqrt(m2 / static_cast<double>(replicates - 1) /
                                                     static_cast<double>(replicates))
                                         : 0.0;
  report.max_value = *std::max_element(values.begin(), values.end());

  std::vector<std::size_t> counts;
  for (std::size_t c = replicates; c >= 16; c /= 2) counts.push_back(c);
  std::reverse(counts.begin(), counts.end());
  double prefix = 0;
  std::size_t consumed = 0;
  for (std::size_t c : counts) {
    for (; consumed < c; ++consumed) prefix += values[consumed];
    report.doubling_means.emplace_back(c, prefix / static_cast<double>(c));
  }

  // Hill estimate over the top sqrt(R) order statistics.
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto top = std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(std::sqrt(replicates))));
  report.tail_index = std::numeric_limits<double>::infinity();
  if (sorted.size() > top && sorted[top] > 0) {
    double h = 0;
    for (std::size_t i = 0; i < top; ++i) h += std::log(sorted[i] / sorted[top]);
    h /= static_cast<double>(top);
    if (h > 0) report.tail_index = 1.0 / h;
  }
  report.heavy_tail = !finite(report.max_value) || report.tail_index < 1.5;
  return report;
}

void write_matrix_csv(const std::filesystem::path& file, const CocycleModel& model, OmegaPath& path,
                      std::int64_t first, std::int64_t count) {
  std::ofstream out(file);
  if (!out) throw Error("cannot open " + file.string());
  out.precision(17);
  out << "k,i,j,value\n";
  for (std::int64_t k = first; k < first + count; ++k) {
    const Matrix a = sample_matrix(model, path, k);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) out << k << ',' << i << ',' << j << ',' << a(i, j) << '\n';
  }
}

}  // namespace floquet
