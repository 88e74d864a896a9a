#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace flattorus {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Tolerance for orthogonality, degeneracy and reconstruction checks.
inline constexpr double kNumericTolerance = 1e-9;

/// Largest dimension accepted by the exact enumeration routines.
inline constexpr int kMaxEnumerationDimension = 10;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateBasis : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class NonConvergent : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised when a computed object fails a structural check that should hold by
/// construction.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

inline void require_enumerable(int dim, const char* what) {
  if (dim > kMaxEnumerationDimension) {
    throw DimensionTooLarge(std::string(what) + ": dimension " +
                            std::to_string(dim) + " exceeds enumeration guard " +
                            std::to_string(kMaxEnumerationDimension));
  }
}

}  // namespace flattorus
