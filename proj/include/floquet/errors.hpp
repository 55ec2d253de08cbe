#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace floquet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of different lengths, or a matrix of the wrong shape.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An argument outside the operation's domain (zero reference vector, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two cone vectors that are not comparable, so no projective distance exists.
class NotComparable : public Error {
 public:
  using Error::Error;
};

/// Invalid model or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A sample that does not map the cone into the component of the focus vector.
class FocusingViolation : public Error {
 public:
  explicit FocusingViolation(const std::string& what) : Error(what) {}
  FocusingViolation(const std::string& what, std::int64_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::optional<std::int64_t> index() const noexcept { return index_; }

 private:
  std::optional<std::int64_t> index_;
};

/// A runtime-checked structural assumption (such as a strong-positivity
/// certificate) failed at a specific sample.
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(const std::string& what, std::int64_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

/// The principal vector and covector pair to (numerically) zero, so no projection exists.
class DegeneratePairing : public Error {
 public:
  using Error::Error;
};

/// Coupled models where the low model is not dominated by the high one.
class DominationViolation : public Error {
 public:
  DominationViolation(const std::string& what, std::int64_t index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

}  // namespace floquet
