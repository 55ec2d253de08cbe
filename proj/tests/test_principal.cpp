#include <doctest.h>

#include <cmath>
#include <random>

#include "floquet/errors.hpp"
#include "floquet/focusing.hpp"
#include "floquet/principal.hpp"
#include "support.hpp"

using namespace floquet;

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix random3(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return oracle::random_positive(3, rng, 0.2, 3);
}

}  // namespace

TEST_CASE("pullback of a symmetric matrix") {
  const auto model = CocycleModel::deterministic(mat2(2, 1, 1, 2));
  OmegaPath path(1);
  const StepView view(model, path);
  const auto p = pullback_principal(view, 0, 50);
  CHECK(p.w(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.w(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.error_bound <= 1e-12);
  CHECK(p.certified);
  CHECK(p.depth == 50);
}

TEST_CASE("pullback against the eigen oracle") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const Matrix a = random3(s);
    for (auto k : {NormKind::ell1, NormKind::ell2, NormKind::ellinf}) {
      const auto model = CocycleModel::deterministic(a, k);
      OmegaPath path(1);
      const StepView view(model, path);
      const auto p = pullback_adaptive(view, 0);
      const auto perron = oracle::perron(a, k);
      CHECK(norm((p.w - perron.right).eval(), k) <= 1e-10);
      CHECK(p.error_bound <= 1e-12);
      CHECK_FALSE(p.cap_hit);
    }
  }
}

TEST_CASE("rank one collapses after one step") {
  const Matrix a = mat2(1, 2, 3, 6);
  const auto model = CocycleModel::deterministic(a);
  OmegaPath path(1);
  const StepView view(model, path);
  const auto p = pullback_principal(view, 0, 2);
  CHECK(p.error_bound == 0);
  const Vector column = normalized(a.col(0).eval(), NormKind::ell1);
  CHECK((p.w - column).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(pullback_certificate(view, 0, 2) == 0);
}

TEST_CASE("start independence and monotone certificates") {
  const auto model = CocycleModel::iid(2, Distribution::uniform(1, 2));
  OmegaPath path(21);
  const StepView view(model, path);
  Vector other(2);
  other << 0.9, 0.1;
  for (int depth : {5, 10, 20, 40}) {
    const auto a = pullback_principal(view, 0, depth);
    const auto b = pullback_principal(view, 0, depth, {}, other);
    CHECK(norm((a.w - b.w).eval(), NormKind::ell1) <= a.error_bound + b.error_bound + 1e-15);
  }
  double last = INFINITY;
  for (int depth = 2; depth <= 60; ++depth) {
    const double bound = pullback_certificate(view, 7, depth);
    CHECK(bound <= last);
    last = bound;
  }
}

TEST_CASE("pullback aborts on non-focusing samples") {
  const auto model = CocycleModel::deterministic(mat2(1, 0, 0, 1));
  OmegaPath path(1);
  const StepView view(model, path);
  CHECK_THROWS_AS(pullback_principal(view, 0, 5), FocusingViolation);
  std::optional<std::int64_t> where;
  try {
    pullback_adaptive(view, 3);
  } catch (const FocusingViolation& e) {
    where = e.index();
  }
  CHECK(where == 2);
  PullbackOptions loose;
  loose.require_focusing = false;
  const auto p = pullback_adaptive(view, 0, loose);
  CHECK_FALSE(p.certified);
  CHECK(p.w == unit_ones(2, NormKind::ell1));
}

TEST_CASE("forward normalization") {
  const auto model = CocycleModel::deterministic(mat2(2, 1, 1, 2));
  OmegaPath path(1);
  const StepView view(model, path);
  const auto p = pullback_adaptive(view, 0);
  const auto same = forward_normalize(view, p, 0);
  CHECK(same.w == p.w);
  CHECK(same.anchor == 0);
  const auto moved = forward_normalize(view, p, 5);
  CHECK((moved.w - p.w).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(moved.anchor == 5);

  const auto random = CocycleModel::iid(3, Distribution::lognormal(0, 0.6));
  OmegaPath rpath(4);
  const StepView rview(random, rpath);
  for (std::int64_t k : {-30, 0, 17}) {
    const auto start = pullback_adaptive(rview, k);
    for (std::int64_t t : {1, 4, 25}) {
      const auto pushed = forward_normalize(rview, start, t);
      const auto direct = pullback_adaptive(rview, k + t);
      CHECK(norm((pushed.w - direct.w).eval(), NormKind::ell1) <= start.error_bound + direct.error_bound + 1e-15);
    }
  }
}

TEST_CASE("growth log additivity") {
  const auto model = CocycleModel::iid(3, Distribution::uniform(0.2, 2));
  OmegaPath path(8);
  const StepView view(model, path);
  const auto start = pullback_adaptive(view, 0);
  const auto log = growth_log(view, start, 400);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, 200);
  for (int t = 0; t < 200; ++t) {
    const std::int64_t s = pick(rng), u = pick(rng);
    CHECK(log.ln_rho_t(0, s + u) == doctest::Approx(log.ln_rho_t(s, u) + log.ln_rho_t(0, s)).epsilon(1e-10));
  }
  // ln rho_t is the log norm of the t-step image of w.
  const Matrix u = forward_product(model, path, 0, 50).evaluate();
  CHECK(log.ln_rho_t(0, 50) == doctest::Approx(std::log(norm((u * start.w).eval(), NormKind::ell1))).epsilon(1e-10));
}

TEST_CASE("top exponent examples") {
  std::vector<std::uint64_t> one{1};
  LyapunovOptions o;
  o.horizon = 2000;
  const auto det = lyapunov_top(CocycleModel::deterministic(mat2(2, 1, 1, 2)), one, o);
  CHECK(det.estimate.mean == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  LyapunovOptions loose = o;
  loose.pullback.require_focusing = false;
  CHECK(lyapunov_top(CocycleModel::deterministic(mat2(1, 0, 0, 1)), one, loose).estimate.mean == 0);
  CHECK_THROWS_AS(lyapunov_top(CocycleModel::deterministic(mat2(1, 0, 0, 1)), one, o), FocusingViolation);

  // Scalar scaling adds the mean log scalar.
  const Matrix b = mat2(1, 2, 0.5, 1);
  const double mu = 0.3;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  o.horizon = 50000;
  const auto scaled = lyapunov_top(CocycleModel(ScalarScaled{b, Distribution::normal(mu, 0.5)}), seeds, o);
  const double expected = std::log(oracle::perron(b, NormKind::ell1).radius) + mu;
  CHECK(std::abs(scaled.estimate.mean - expected) <= 3 * scaled.estimate.standard_error);
  CHECK(scaled.estimate.replicates == 4);
}

TEST_CASE("estimates are independent of worker count and seed order") {
  const auto model = CocycleModel::iid(2, Distribution::uniform(1, 2));
  LyapunovOptions o;
  o.horizon = 5000;
  std::vector<std::uint64_t> a{3, 1, 2}, b{1, 2, 3};
  o.workers = 1;
  const auto serial = lyapunov_top(model, a, o);
  o.workers = 3;
  const auto parallel = lyapunov_top(model, b, o);
  CHECK(serial.estimate.mean == parallel.estimate.mean);
  CHECK(serial.estimate.standard_error == parallel.estimate.standard_error);
  CHECK(serial.estimate.values == parallel.estimate.values);
  CHECK(serial.estimate.seeds == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("domination of arbitrary cone starts") {
  const auto model = CocycleModel::iid(3, Distribution::uniform(0.5, 2));
  std::vector<std::uint64_t> seeds{5};
  LyapunovOptions o;
  o.horizon = 20000;
  o.burn_in = 0;
  const auto top = lyapunov_top(model, seeds, o);
  std::mt19937_64 rng(2);
  OmegaPath path(5);
  const auto u = forward_product(model, path, 0, o.horizon);
  for (int t = 0; t < 50; ++t) {
    const Vector start = oracle::simplex_point(3, rng);
    const double rate = (std::log(norm((u.value * start).eval(), NormKind::ell1)) + u.log_scale) / o.horizon;
    CHECK(rate <= top.estimate.mean + 3 * top.estimate.standard_error + 1e-3);
  }
}

TEST_CASE("pullback increments decay at the contraction rate") {
  const auto model = CocycleModel::iid(3, Distribution::uniform(0.5, 2));
  OmegaPath path(3);
  const StepView view(model, path);
  const auto trace = pullback_trace(view, 0, 30);
  std::vector<double> xs, ys;
  double mean_ln_q = 0;
  for (double q : trace.ratios) mean_ln_q += std::log(q);
  mean_ln_q /= static_cast<double>(trace.ratios.size());
  for (std::size_t i = 0; i < trace.increments.size(); ++i)
    if (trace.increments[i] > 1e-15) {
      xs.push_back(static_cast<double>(i + 2));
      ys.push_back(std::log(trace.increments[i]));
    }
  REQUIRE(xs.size() >= 5);
  CHECK(fit_line(xs, ys).slope <= mean_ln_q + 0.05);
}

TEST_CASE("entire orbits") {
  const Matrix a = mat2(2, 1, 0.5, 3);
  const auto det = CocycleModel::deterministic(a);
  OmegaPath path(1);
  const StepView view(det, path);
  const auto perron = oracle::perron(a, NormKind::ell1);
  const auto orbit = entire_orbit(view, 0, 10, 10);
  REQUIRE(orbit.size() == 21);
  for (const auto& p : orbit) {
    CHECK(norm((p.direction - perron.right).eval(), NormKind::ell1) <= 1e-10);
    CHECK(p.log_scale == doctest::Approx(std::log(perron.radius) * static_cast<double>(p.index)).epsilon(1e-10));
  }

  const auto model = CocycleModel::iid(3, Distribution::lognormal(0, 0.5));
  OmegaPath rpath(9);
  const StepView rview(model, rpath);
  const auto o1 = entire_orbit(rview, 0, 20, 20);
  Vector other(3);
  other << 0.7, 0.2, 0.1;
  const auto o2 = entire_orbit(rview, 0, 20, 20, {}, other);
  for (std::size_t i = 0; i < o1.size(); ++i) {
    CHECK((o1[i].direction.array() > 0).all());
    CHECK(proj_distance(o1[i].direction, o2[i].direction) < 1e-8);
    for (std::size_t j = i; j < o1.size(); j += 7) {
      const auto u = forward_product(model, rpath, o1[i].index, o1[j].index - o1[i].index);
      const Vector image = u.value * o1[i].direction * std::exp(u.log_scale + o1[i].log_scale - o1[j].log_scale);
      CHECK((image - o1[j].direction).cwiseAbs().maxCoeff() <= 1e-10 * o1[j].direction.cwiseAbs().maxCoeff());
    }
  }
}
