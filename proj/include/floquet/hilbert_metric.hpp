#pragma once

// Order ratios m(u/v), M(u/v), the oscillation and Hilbert's projective
// distance for the standard cone.
//
// For a reference vector v in the cone the order ratios reduce to coordinate
// ratios over the support of v:
//
//   m(u/v) = min_{v_i > 0} u_i / v_i   exists iff u_i >= 0 wherever v_i = 0
//   M(u/v) = max_{v_i > 0} u_i / v_i   exists iff u_i <= 0 wherever v_i = 0
//
// A bound whose defining set is empty is reported as absent.

#include <Eigen/Dense>

#include <cmath>
#include <optional>

#include "floquet/errors.hpp"
#include "floquet/ordered_space.hpp"

namespace floquet {

template <typename Scalar>
struct RatioBounds {
  std::optional<Scalar> lower;  // m(u/v)
  std::optional<Scalar> upper;  // M(u/v)
};

template <typename DU, typename DV>
RatioBounds<typename DU::Scalar> ratio_bounds(const Eigen::MatrixBase<DU>& u,
                                              const Eigen::MatrixBase<DV>& v) {
  using Scalar = typename DU::Scalar;
  detail::require_same_length(u, v);
  if (!cone_contains(v)) throw DomainError("ratio_bounds: reference vector is not in the cone");

  bool lower_exists = true;
  bool upper_exists = true;
  bool any_support = false;
  Scalar lo = 0;
  Scalar hi = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const Scalar vi = v(i);
    const Scalar ui = u(i);
    if (vi > 0) {
      const Scalar r = ui / vi;
      if (!any_support) {
        lo = hi = r;
        any_support = true;
      } else {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    } else {
      if (ui < 0) lower_exists = false;
      if (ui > 0) upper_exists = false;
    }
  }
  if (!any_support) throw DomainError("ratio_bounds: reference vector is zero");

  RatioBounds<Scalar> out;
  if (lower_exists) out.lower = lo;
  if (upper_exists) out.upper = hi;
  return out;
}

/// M(u/v) - m(u/v). Throws NotComparable when either bound is absent.
template <typename DU, typename DV>
typename DU::Scalar oscillation(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v) {
  const auto b = ratio_bounds(u, v);
  if (!b.lower || !b.upper) throw NotComparable("oscillation: an order ratio is absent");
  return *b.upper - *b.lower;
}

/// u ~ v: positive m(u/v) and finite M(u/v). Never throws.
template <typename DU, typename DV>
bool comparable(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v) {
  if (u.size() != v.size() || !cone_contains(v) || v.isZero(0)) return false;
  const auto b = ratio_bounds(u, v);
  return b.lower && b.upper && *b.lower > 0;
}

/// Hilbert projective distance ln(M(u/v) / m(u/v)).
template <typename DU, typename DV>
typename DU::Scalar proj_distance(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DV>& v) {
  const auto b = ratio_bounds(u, v);
  if (!b.lower || !b.upper || !(*b.lower > 0))
    throw NotComparable("proj_distance: vectors are not comparable");
  using std::log;
  return log(*b.upper / *b.lower);
}

}  // namespace floquet
