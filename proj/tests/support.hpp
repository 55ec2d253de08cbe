#pragma once

// Independent oracles shared by the unit and acceptance tests.

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <random>

#include <json.hpp>

#include "floquet/hilbert_metric.hpp"
#include "floquet/ordered_space.hpp"

namespace oracle {

using floquet::Matrix;
using floquet::NormKind;
using floquet::Vector;

/// sup{a : a v <= u} by scanning a grid of step h over [lo, hi]; absent when no grid point qualifies.
inline std::optional<double> grid_lower(const Vector& u, const Vector& v, double lo = -10, double hi = 10,
                                        double h = 1e-4) {
  std::optional<double> best;
  for (double a = lo; a <= hi; a += h)
    if (((u - a * v).array() >= -1e-12).all()) best = a;
  return best;
}

/// inf{a : u <= a v} on the same grid.
inline std::optional<double> grid_upper(const Vector& u, const Vector& v, double lo = -10, double hi = 10,
                                        double h = 1e-4) {
  for (double a = lo; a <= hi; a += h)
    if (((a * v - u).array() >= -1e-12).all()) return a;
  return std::nullopt;
}

struct Perron {
  double radius = 0;
  Vector right;
  Vector left;
};

/// Dominant eigenpair of A and of A^T from a general eigensolver, normalized in `kind`.
inline Perron perron(const Matrix& a, NormKind kind) {
  auto dominant = [kind](const Matrix& m, double& radius) {
    Eigen::EigenSolver<Matrix> es(m);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
    radius = es.eigenvalues()(best).real();
    Vector v = es.eigenvectors().col(best).real();
    if (v.sum() < 0) v = -v;
    return floquet::normalized(v, kind);
  };
  Perron p;
  double ignored = 0;
  p.right = dominant(a, p.radius);
  p.left = dominant(a.transpose(), ignored);
  return p;
}

/// Uniform point on the probability simplex.
inline Vector simplex_point(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vector x(n);
  for (auto& c : x) c = e(rng);
  return x / x.sum();
}

inline Matrix random_positive(int n, std::mt19937_64& rng, double lo = 0.1, double hi = 5) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Matrix a(n, n);
  for (auto& x : a.reshaped()) x = std::exp(u(rng));
  return a;
}

/// Largest d(Au, Av) / d(u, v) over random interior pairs and pairs on random 2-faces.
inline double sampled_contraction(const Matrix& a, int pairs, std::mt19937_64& rng) {
  const int n = static_cast<int>(a.rows());
  std::uniform_real_distribution<double> pos(-8, 8), sep(-12, 0), coin(0, 1);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double best = 0;
  for (int t = 0; t < pairs; ++t) {
    Vector u, v;
    if (t % 2 == 0) {
      u = simplex_point(n, rng);
      v = simplex_point(n, rng);
    } else {
      const int j = pick(rng);
      int k = pick(rng);
      while (k == j) k = pick(rng);
      const double x = std::exp(pos(rng));
      const double y = x * std::exp(coin(rng) < 0.5 ? sep(rng) : -sep(rng));
      u = Vector::Zero(n);
      v = Vector::Zero(n);
      u(j) = 1;
      u(k) = x;
      v(j) = 1;
      v(k) = y;
    }
    if (!floquet::comparable(u, v)) continue;
    const double d = floquet::proj_distance(u, v);
    if (!(d > 1e-12)) continue;
    best = std::max(best, floquet::proj_distance((a * u).eval(), (a * v).eval()) / d);
  }
  return best;
}

/// Checks a JSON value against the subset of JSON Schema used by the run record
/// schema: type, enum, required, properties, additionalProperties (bool),
/// items, oneOf, minimum and local $ref. Returns the first problem or "".
class SchemaCheck {
 public:
  explicit SchemaCheck(nlohmann::json root) : root_(std::move(root)) {}

  std::string check(const nlohmann::json& value) const { return check(value, root_, "$"); }

 private:
  const nlohmann::json& resolve(const nlohmann::json& schema) const {
    if (!schema.contains("$ref")) return schema;
    std::string ref = schema.at("$ref").get<std::string>();
    const nlohmann::json::json_pointer pointer(ref.substr(1));
    return resolve(root_.at(pointer));
  }

  static bool has_type(const nlohmann::json& v, const std::string& t) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "null") return v.is_null();
    return false;
  }

  std::string check(const nlohmann::json& v, const nlohmann::json& raw, const std::string& at) const {
    const nlohmann::json& s = resolve(raw);
    if (s.contains("oneOf")) {
      int matches = 0;
      for (const auto& option : s.at("oneOf"))
        if (check(v, option, at).empty()) ++matches;
      if (matches != 1) return at + ": matches " + std::to_string(matches) + " oneOf branches";
    }
    if (s.contains("type")) {
      const auto& t = s.at("type");
      bool ok = false;
      if (t.is_array()) {
        for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
      } else {
        ok = has_type(v, t.get<std::string>());
      }
      if (!ok) return at + ": wrong type, expected " + t.dump();
    }
    if (s.contains("enum") && std::find(s.at("enum").begin(), s.at("enum").end(), v) == s.at("enum").end())
      return at + ": value " + v.dump() + " not in enum";
    if (s.contains("minimum") && v.is_number() && v.get<double>() < s.at("minimum").get<double>())
      return at + ": below minimum";
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& key : s.at("required"))
          if (!v.contains(key.get<std::string>())) return at + ": missing " + key.get<std::string>();
      const nlohmann::json props = s.value("properties", nlohmann::json::object());
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (props.contains(it.key())) {
          if (auto e = check(it.value(), props.at(it.key()), at + "." + it.key()); !e.empty()) return e;
        } else if (s.contains("additionalProperties") && s.at("additionalProperties").is_boolean() &&
                   !s.at("additionalProperties").get<bool>()) {
          return at + ": unexpected key " + it.key();
        }
      }
    }
    if (v.is_array() && s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i)
        if (auto e = check(v[i], s.at("items"), at + "[" + std::to_string(i) + "]"); !e.empty()) return e;
    }
    return "";
  }

  nlohmann::json root_;
};

}  // namespace oracle
