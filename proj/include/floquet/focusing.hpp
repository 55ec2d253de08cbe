#pragma once

// Focusing and contraction quantities of a single nonnegative matrix acting on
// the standard cone: projective diameter, Birkhoff contraction ratio, the
// focusing constants beta and kappa relative to a focus vector e, and the
// primitivity index.

#include <Eigen/Dense>

#include <cmath>
#include <optional>

#include "floquet/errors.hpp"
#include "floquet/hilbert_metric.hpp"
#include "floquet/ordered_space.hpp"

namespace floquet {

template <typename Derived>
bool strictly_positive(const Eigen::MatrixBase<Derived>& a) {
  return a.size() > 0 && (a.array() > 0).all();
}

namespace detail {

template <typename Derived>
void require_strictly_positive(const Eigen::MatrixBase<Derived>& a, const char* op) {
  if (a.rows() != a.cols()) throw DimensionMismatch(std::string(op) + ": matrix is not square");
  if (!strictly_positive(a))
    throw DomainError(std::string(op) + ": matrix must have strictly positive entries");
}

}  // namespace detail

/// Projective diameter of A(cone \ {0}): the largest Hilbert distance between two
/// columns of A.
template <typename Derived>
typename Derived::Scalar birkhoff_diameter(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_strictly_positive(a, "birkhoff_diameter");
  Scalar tau = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index k = j + 1; k < a.cols(); ++k)
      tau = std::max(tau, proj_distance(a.col(j), a.col(k)));
  return tau;
}

/// Birkhoff contraction ratio tanh(tau / 4).
template <typename Derived>
typename Derived::Scalar contraction_ratio(const Eigen::MatrixBase<Derived>& a) {
  using std::tanh;
  return tanh(birkhoff_diameter(a) / 4);
}

template <typename Scalar>
struct KappaBeta {
  Scalar beta;     // m(Au / e)
  Scalar kappa_u;  // M(Au / e) / m(Au / e)
};

/// Focusing constants of A at the ray u: beta e <= Au <= kappa_u beta e.
template <typename DA, typename DE, typename DU>
KappaBeta<typename DA::Scalar> kappa_beta(const Eigen::MatrixBase<DA>& a,
                                          const Eigen::MatrixBase<DE>& e,
                                          const Eigen::MatrixBase<DU>& u) {
  using Scalar = typename DA::Scalar;
  if (a.cols() != u.size() || a.rows() != e.size())
    throw DimensionMismatch("kappa_beta: shape mismatch");
  if (!(e.array() > 0).all()) throw DomainError("kappa_beta: focus vector must be strictly positive");
  const ConeVector<Scalar> image = a * u;
  if (image.isZero(0)) throw FocusingViolation("kappa_beta: image of u is zero");
  const auto b = ratio_bounds(image, e);
  if (!b.lower || !(*b.lower > 0) || !b.upper)
    throw FocusingViolation("kappa_beta: image of u is not comparable to the focus vector");
  return {*b.lower, *b.upper / *b.lower};
}

/// kappa(A) = sup over the cone of kappa_u. The ratio is quasiconvex on the
/// simplex, so the supremum sits on an extreme ray e_j.
template <typename DA, typename DE>
typename DA::Scalar focusing_kappa(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DE>& e) {
  using Scalar = typename DA::Scalar;
  Scalar kappa = 1;
  ConeVector<Scalar> basis = ConeVector<Scalar>::Zero(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    basis.setZero();
    basis(j) = 1;
    kappa = std::max(kappa, kappa_beta(a, e, basis).kappa_u);
  }
  return kappa;
}

/// Smallest T <= (n-1)^2 + 1 with A^T strictly positive, or absent.
template <typename Derived>
std::optional<int> primitivity_index(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("primitivity_index: matrix is not square");
  if ((a.array() < 0).any()) throw DomainError("primitivity_index: matrix has a negative entry");
  const Eigen::Index n = a.rows();
  using Pattern = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  const Pattern base = (a.array() > 0).template cast<int>().matrix();
  Pattern power = base;
  const int wielandt = static_cast<int>((n - 1) * (n - 1) + 1);
  for (int t = 1; t <= wielandt; ++t) {
    if ((power.array() > 0).all()) return t;
    power = ((power * base).array() > 0).template cast<int>().matrix();
  }
  return std::nullopt;
}

}  // namespace floquet
