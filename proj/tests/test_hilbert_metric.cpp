#include <doctest.h>

#include <cmath>
#include <random>

#include "floquet/hilbert_metric.hpp"
#include "support.hpp"

using namespace floquet;

namespace {
Vector vec(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector positive(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3, 3);
  Vector v(n);
  for (auto& x : v) x = std::exp(u(rng));
  return v;
}
}  // namespace

TEST_CASE("ratio bounds against the alpha grid") {
  struct Case {
    Vector u, v;
  };
  const Case cases[] = {{vec(2, 3), vec(1, 1)}, {vec(1, 2), vec(1, 2)}, {vec(1, 0), vec(0, 1)},
                        {vec(1, 4), vec(1, 1)}, {vec(1, 1), vec(1, 0)}, {vec(-1, 2), vec(1, 2)}};
  for (const auto& c : cases) {
    const auto b = ratio_bounds(c.u, c.v);
    const auto lo = oracle::grid_lower(c.u, c.v);
    const auto hi = oracle::grid_upper(c.u, c.v);
    REQUIRE(b.lower.has_value() == lo.has_value());
    REQUIRE(b.upper.has_value() == hi.has_value());
    if (lo) CHECK(*b.lower == doctest::Approx(*lo).epsilon(2e-4));
    if (hi) CHECK(*b.upper == doctest::Approx(*hi).epsilon(2e-4));
  }
  auto b = ratio_bounds(vec(2, 3), vec(1, 1));
  CHECK(*b.lower == 2);
  CHECK(*b.upper == 3);
  b = ratio_bounds(vec(1, 0), vec(0, 1));
  CHECK(*b.lower == 0);
  CHECK_FALSE(b.upper);
  CHECK_THROWS_AS(ratio_bounds(vec(1, 1), vec(0, 0)), DomainError);
  CHECK_THROWS_AS(ratio_bounds(vec(1, 1), vec(1, -1)), DomainError);
}

TEST_CASE("oscillation") {
  CHECK(oscillation(vec(2, 3), vec(1, 1)) == doctest::Approx(1));
  CHECK(oscillation(vec(1, 4), vec(1, 1)) == doctest::Approx(3));
  CHECK(oscillation((2.5 * vec(1, 7)).eval(), vec(1, 7)) == doctest::Approx(0));
  CHECK_THROWS_AS(oscillation(vec(1, 1), vec(1, 0)), NotComparable);
}

TEST_CASE("projective distance") {
  const Vector u = vec(2, 3);
  const Vector v = vec(1, 1);
  CHECK(proj_distance(u, v) == doctest::Approx(std::log(1.5)));
  CHECK(proj_distance(u, (7 * u).eval()) == doctest::Approx(0));
  CHECK(proj_distance((2 * u).eval(), (5 * v).eval()) == doctest::Approx(std::log(1.5)));
  CHECK_THROWS_AS(proj_distance(vec(1, 0), vec(0, 1)), NotComparable);
}

TEST_CASE("comparability") {
  CHECK(comparable(vec(2, 3), vec(1, 1)));
  CHECK_FALSE(comparable(vec(1, 0), vec(0, 1)));
  CHECK_FALSE(comparable(vec(1, 1), vec(1, 0)));
  CHECK(comparable(vec(0, 1), vec(0, 2)));
  CHECK_FALSE(comparable(vec(1, 1), vec(0, 0)));
}

TEST_CASE("metric properties on random cone triples") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> s(0.01, 100);
  for (int t = 0; t < 3000; ++t) {
    const int n = 2 + t % 4;
    const Vector u = positive(n, rng), v = positive(n, rng), w = positive(n, rng);
    const double duv = proj_distance(u, v);
    CHECK(duv == doctest::Approx(proj_distance(v, u)));
    CHECK(proj_distance((s(rng) * u).eval(), (s(rng) * v).eval()) == doctest::Approx(duv));
    CHECK(duv <= proj_distance(u, w) + proj_distance(w, v) + 1e-12);
    CHECK(oscillation((u + v).eval(), w) <= oscillation(u, w) + oscillation(v, w) + 1e-9);
  }
}

TEST_CASE("norm comparison for unit comparable pairs") {
  std::mt19937_64 rng(23);
  for (auto k : {NormKind::ell1, NormKind::ell2, NormKind::ellinf}) {
    for (int t = 0; t < 5000; ++t) {
      const int n = 2 + t % 5;
      const Vector u = normalized(positive(n, rng), k);
      const Vector v = normalized(positive(n, rng), k);
      const double bound = std::expm1(proj_distance(u, v));
      const double gap = norm((u - v).eval(), k);
      CHECK(gap <= bound * (1 + 1e-12));
      CHECK(gap <= 3 * bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("lower semicontinuity on convergent sequences") {
  const Vector u = vec(1, 2);
  const Vector v = vec(3, 1);
  const double limit = proj_distance(u, v);
  double liminf = INFINITY;
  for (int k = 1; k <= 2000; ++k) {
    const double h = 1.0 / k;
    const Vector uk = u + h * vec(std::sin(k), std::cos(k));
    const Vector vk = v + h * vec(std::cos(3.0 * k), 0.5);
    if (k > 1000) liminf = std::min(liminf, proj_distance(uk, vk));
  }
  CHECK(limit <= liminf + 1e-2);
}

TEST_CASE("templated on float") {
  Eigen::Vector2f u(2, 3), v(1, 1);
  CHECK(proj_distance(u, v) == doctest::Approx(std::log(1.5f)));
}
