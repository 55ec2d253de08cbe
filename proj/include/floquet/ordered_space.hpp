#pragma once

// The standard cone on R^n: partial order, lattice operations and the three
// lattice norms used throughout the library.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <string_view>

#include "floquet/errors.hpp"

namespace floquet {

template <typename Scalar>
using ConeVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = ConeVector<double>;
using Matrix = Eigen::MatrixXd;

enum class NormKind { ell1, ell2, ellinf };

inline std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::ell1: return "ell1";
    case NormKind::ell2: return "ell2";
    case NormKind::ellinf: return "ellinf";
  }
  return "ell1";
}

inline NormKind parse_norm_kind(std::string_view tag) {
  if (tag == "ell1") return NormKind::ell1;
  if (tag == "ell2") return NormKind::ell2;
  if (tag == "ellinf") return NormKind::ellinf;
  throw ConfigError("unknown norm kind '" + std::string(tag) + "'");
}

/// The norm on X* paired with `kind` through the dot product.
inline NormKind dual_norm_kind(NormKind kind) {
  switch (kind) {
    case NormKind::ell1: return NormKind::ellinf;
    case NormKind::ellinf: return NormKind::ell1;
    default: return NormKind::ell2;
  }
}

namespace detail {

template <typename DU, typename DV>
void require_same_length(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v) {
  if (u.size() != v.size())
    throw DimensionMismatch("vector lengths differ: " + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()));
}

}  // namespace detail

/// Cone membership: every coordinate >= -tolerance.
template <typename Derived>
bool cone_contains(const Eigen::MatrixBase<Derived>& u,
                   typename Derived::Scalar tolerance = typename Derived::Scalar(0)) {
  return (u.array() >= -tolerance).all();
}

/// u <= v in the order induced by the cone.
template <typename DU, typename DV>
bool order_leq(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v,
               typename DU::Scalar tolerance = typename DU::Scalar(0)) {
  detail::require_same_length(u, v);
  return cone_contains((v - u).eval(), tolerance);
}

template <typename Scalar>
struct LatticeParts {
  ConeVector<Scalar> plus;
  ConeVector<Scalar> minus;
  ConeVector<Scalar> abs;
};

/// u = plus - minus and abs = plus + minus, coordinatewise.
template <typename Derived>
LatticeParts<typename Derived::Scalar> lattice_parts(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  LatticeParts<Scalar> parts;
  parts.plus = u.array().max(Scalar(0)).matrix();
  parts.minus = (-u.array()).max(Scalar(0)).matrix();
  parts.abs = parts.plus + parts.minus;
  return parts;
}

template <typename Derived>
typename Derived::Scalar norm(const Eigen::MatrixBase<Derived>& u, NormKind kind) {
  switch (kind) {
    case NormKind::ell1: return u.template lpNorm<1>();
    case NormKind::ell2: return u.norm();
    case NormKind::ellinf: return u.size() == 0 ? 0 : u.template lpNorm<Eigen::Infinity>();
  }
  return u.norm();
}

/// u / norm(u); throws on the zero vector.
template <typename Derived>
ConeVector<typename Derived::Scalar> normalized(const Eigen::MatrixBase<Derived>& u, NormKind kind) {
  const auto r = norm(u, kind);
  if (!(r > 0)) throw DomainError("cannot normalize the zero vector");
  return u / r;
}

/// Induced operator norm. l1 and l-infinity are exact column/row sums; l2 is the
/// largest singular value.
template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& a, NormKind kind) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return Scalar(0);
  switch (kind) {
    case NormKind::ell1: return a.cwiseAbs().colwise().sum().maxCoeff();
    case NormKind::ellinf: return a.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::ell2: {
      using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
      Eigen::JacobiSVD<Dense> svd(a.eval());
      return svd.singularValues()(0);
    }
  }
  return Scalar(0);
}

/// The all-ones vector scaled to unit norm: the default focus vector e and e*.
template <typename Scalar = double>
ConeVector<Scalar> unit_ones(Eigen::Index n, NormKind kind) {
  ConeVector<Scalar> ones = ConeVector<Scalar>::Ones(n);
  return ones / norm(ones, kind);
}

}  // namespace floquet
